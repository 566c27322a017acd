#include <cmath>

#include "wscd/numerics/kernels.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace kernels::serial {

void matmul(std::span<const real> a, std::span<const real> b, std::span<real> c,
            MatDims dims) {
  const auto [n, m, k] = dims;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      real sum = 0;
      for (std::size_t p = 0; p < m; ++p) sum += a[i * m + p] * b[p * k + j];
      c[i * k + j] = sum;
    }
  }
}

void matmul_grad_a(std::span<const real> grad_c, std::span<const real> b,
                   std::span<real> grad_a, MatDims dims) {
  const auto [n, m, k] = dims;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t j = 0; j < k; ++j) grad_a[i * m + p] += grad_c[i * k + j] * b[p * k + j];
}

void matmul_grad_b(std::span<const real> a, std::span<const real> grad_c,
                   std::span<real> grad_b, MatDims dims) {
  const auto [n, m, k] = dims;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t j = 0; j < k; ++j) grad_b[p * k + j] += a[i * m + p] * grad_c[i * k + j];
}

void conv1d(std::span<const real> input, std::span<const real> filters,
            std::span<const real> bias, std::span<real> output, ConvDims dims,
            Activation act) {
  const std::size_t out_len = dims.out_length();
  for (std::size_t t = 0; t < out_len; ++t) {
    for (std::size_t f = 0; f < dims.filters; ++f) {
      real sum = bias[f];
      for (std::size_t o = 0; o < dims.width; ++o)
        for (std::size_t c = 0; c < dims.depth; ++c)
          sum += input[(t + o) * dims.depth + c] *
                 filters[(f * dims.width + o) * dims.depth + c];
      output[t * dims.filters + f] = act == Activation::tanh ? std::tanh(sum) : sum;
    }
  }
}

void conv1d_backward(std::span<const real> input, std::span<const real> filters,
                     std::span<const real> grad_pre, std::span<real> grad_input,
                     std::span<real> grad_filters, std::span<real> grad_bias,
                     ConvDims dims) {
  const std::size_t out_len = dims.out_length();
  for (std::size_t t = 0; t < out_len; ++t) {
    for (std::size_t f = 0; f < dims.filters; ++f) {
      const real g = grad_pre[t * dims.filters + f];
      if (!grad_bias.empty()) grad_bias[f] += g;
      for (std::size_t o = 0; o < dims.width; ++o) {
        for (std::size_t c = 0; c < dims.depth; ++c) {
          const std::size_t xi = (t + o) * dims.depth + c;
          const std::size_t wi = (f * dims.width + o) * dims.depth + c;
          if (!grad_filters.empty()) grad_filters[wi] += g * input[xi];
          if (!grad_input.empty()) grad_input[xi] += g * filters[wi];
        }
      }
    }
  }
}

void soft_assign(std::span<const real> points, std::span<const real> centroids,
                 std::span<real> q, AssignDims dims) {
  const auto [n, k, dim] = dims;
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
      // d loss / d dist2
      const real coef = -(grad_q[i * k + j] - gq_dot_q) * q[i * k + j] * kernel;
      for (std::size_t c = 0; c < dim; ++c) {
        const real diff = points[i * dim + c] - centroids[j * dim + c];
        if (!grad_points.empty()) grad_points[i * dim + c] += 2 * coef * diff;
        if (!grad_centroids.empty()) grad_centroids[j * dim + c] -= 2 * coef * diff;
      }
    }
  }
}

}  // namespace kernels::serial
WSCD_MODEL_NAMESPACE_END
