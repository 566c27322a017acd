#include <cmath>
#include <vector>

#include "wscd/numerics/kernels.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace kernels::parallel {

namespace {
// Below this many multiply-adds the fork/join cost dominates.
constexpr std::size_t kParallelWork = 1u << 15;
}  // namespace

void matmul(std::span<const real> a, std::span<const real> b, std::span<real> c,
            MatDims dims) {
  const auto [n, m, k] = dims;
#pragma omp parallel for schedule(static) if (n * m * k >= kParallelWork)
  for (std::size_t i = 0; i < n; ++i) {
    real* out = c.data() + i * k;
    for (std::size_t j = 0; j < k; ++j) out[j] = 0;
    for (std::size_t p = 0; p < m; ++p) {
      const real av = a[i * m + p];
      const real* brow = b.data() + p * k;
#pragma omp simd
      for (std::size_t j = 0; j < k; ++j) out[j] += av * brow[j];
    }
  }
}

void matmul_grad_a(std::span<const real> grad_c, std::span<const real> b,
                   std::span<real> grad_a, MatDims dims) {
  const auto [n, m, k] = dims;
#pragma omp parallel for schedule(static) if (n * m * k >= kParallelWork)
  for (std::size_t i = 0; i < n; ++i) {
    const real* gc = grad_c.data() + i * k;
    for (std::size_t p = 0; p < m; ++p) {
      const real* brow = b.data() + p * k;
      real sum = 0;
#pragma omp simd reduction(+ : sum)
      for (std::size_t j = 0; j < k; ++j) sum += gc[j] * brow[j];
      grad_a[i * m + p] += sum;
    }
  }
}

void matmul_grad_b(std::span<const real> a, std::span<const real> grad_c,
                   std::span<real> grad_b, MatDims dims) {
  const auto [n, m, k] = dims;
  // Each thread owns whole rows of grad_b, summing over i in order.
#pragma omp parallel for schedule(static) if (n * m * k >= kParallelWork)
  for (std::size_t p = 0; p < m; ++p) {
    real* gb = grad_b.data() + p * k;
    for (std::size_t i = 0; i < n; ++i) {
      const real av = a[i * m + p];
      const real* gc = grad_c.data() + i * k;
#pragma omp simd
      for (std::size_t j = 0; j < k; ++j) gb[j] += av * gc[j];
    }
  }
}

void conv1d(std::span<const real> input, std::span<const real> filters,
            std::span<const real> bias, std::span<real> output, ConvDims dims,
            Activation act) {
  const std::size_t out_len = dims.out_length();
  const std::size_t window = dims.width * dims.depth;
  // Window j is the contiguous slice input[j*d, (j+k)*d); filter f is
  // likewise contiguous, so each output is a single dot product.
#pragma omp parallel for collapse(2) schedule(static) \
    if (out_len * dims.filters * window >= kParallelWork)
  for (std::size_t t = 0; t < out_len; ++t) {
    for (std::size_t f = 0; f < dims.filters; ++f) {
      const real* x = input.data() + t * dims.depth;
      const real* w = filters.data() + f * window;
      real sum = 0;
#pragma omp simd reduction(+ : sum)
      for (std::size_t e = 0; e < window; ++e) sum += x[e] * w[e];
      sum += bias[f];
      output[t * dims.filters + f] = act == Activation::tanh ? std::tanh(sum) : sum;
    }
  }
}

void conv1d_backward(std::span<const real> input, std::span<const real> filters,
                     std::span<const real> grad_pre, std::span<real> grad_input,
                     std::span<real> grad_filters, std::span<real> grad_bias,
                     ConvDims dims) {
  const std::size_t out_len = dims.out_length();
  const std::size_t window = dims.width * dims.depth;
  const bool big = out_len * dims.filters * window >= kParallelWork;

  if (!grad_filters.empty() || !grad_bias.empty()) {
#pragma omp parallel for schedule(static) if (big)
    for (std::size_t f = 0; f < dims.filters; ++f) {
      for (std::size_t t = 0; t < out_len; ++t) {
        const real g = grad_pre[t * dims.filters + f];
        if (!grad_bias.empty()) grad_bias[f] += g;
        if (grad_filters.empty()) continue;
        const real* x = input.data() + t * dims.depth;
        real* gw = grad_filters.data() + f * window;
#pragma omp simd
        for (std::size_t e = 0; e < window; ++e) gw[e] += g * x[e];
      }
    }
  }

  if (!grad_input.empty()) {
    // Gather form: input row s receives from output rows t = s - o.
#pragma omp parallel for schedule(static) if (big)
    for (std::size_t s = 0; s < dims.length; ++s) {
      real* gx = grad_input.data() + s * dims.depth;
      for (std::size_t o = 0; o < dims.width; ++o) {
        if (s < o || s - o >= out_len) continue;
        const std::size_t t = s - o;
        for (std::size_t f = 0; f < dims.filters; ++f) {
          const real g = grad_pre[t * dims.filters + f];
          const real* w = filters.data() + (f * dims.width + o) * dims.depth;
#pragma omp simd
          for (std::size_t c = 0; c < dims.depth; ++c) gx[c] += g * w[c];
        }
      }
    }
  }
}

void soft_assign(std::span<const real> points, std::span<const real> centroids,
                 std::span<real> q, AssignDims dims) {
  const auto [n, k, dim] = dims;
#pragma omp parallel for schedule(static) if (n * k * dim >= kParallelWork)
  for (std::size_t i = 0; i < n; ++i) {
    real total = 0;
    for (std::size_t j = 0; j < k; ++j) {
      real dist2 = 0;
      for (std::size_t c = 0; c < dim; ++c) {
        const real diff = points[i * dim + c] - centroids[j * dim + c];
        dist2 += diff * diff;
      }
      q[i * k + j] = real{1} / (real{1} + dist2);
      total += q[i * k + j];
    }
    for (std::size_t j = 0; j < k; ++j) q[i * k + j] /= total;
  }
}

void soft_assign_backward(std::span<const real> points, std::span<const real> centroids,
                          std::span<const real> q, std::span<const real> grad_q,
                          std::span<real> grad_points, std::span<real> grad_centroids,
                          AssignDims dims) {
  const auto [n, k, dim] = dims;
  const bool big = n * k * dim >= kParallelWork;
  std::vector<real> coef(n * k);

#pragma omp parallel for schedule(static) if (big)
  for (std::size_t i = 0; i < n; ++i) {
    real gq_dot_q = 0;
    for (std::size_t j = 0; j < k; ++j) gq_dot_q += grad_q[i * k + j] * q[i * k + j];
    for (std::size_t j = 0; j < k; ++j) {
      real dist2 = 0;
      for (std::size_t c = 0; c < dim; ++c) {
        const real diff = points[i * dim + c] - centroids[j * dim + c];
        dist2 += diff * diff;
      }
      const real kernel = real{1} / (real{1} + dist2);
      coef[i * k + j] = -(grad_q[i * k + j] - gq_dot_q) * q[i * k + j] * kernel;
      if (grad_points.empty()) continue;
      for (std::size_t c = 0; c < dim; ++c) {
        const real diff = points[i * dim + c] - centroids[j * dim + c];
        grad_points[i * dim + c] += 2 * coef[i * k + j] * diff;
      }
    }
  }

  if (grad_centroids.empty()) return;
#pragma omp parallel for schedule(static) if (big)
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < dim; ++c) {
        const real diff = points[i * dim + c] - centroids[j * dim + c];
        grad_centroids[j * dim + c] -= 2 * coef[i * k + j] * diff;
      }
    }
  }
}

}  // namespace kernels::parallel
WSCD_MODEL_NAMESPACE_END
