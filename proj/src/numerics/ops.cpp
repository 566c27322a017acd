#include "wscd/numerics/ops.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <vector>

#include "wscd/error.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace numerics {

namespace {

std::atomic<KernelBackend> g_backend{KernelBackend::parallel};
std::atomic<bool> g_gradient_fault{false};

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got " + shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

kernels::MatDims mat_dims(const Tensor& a, const Tensor& b, const char* op) {
  require_rank(a, 2, op);
  require_rank(b, 2, op);
  if (a.dim(1) != b.dim(0)) {
    throw DimensionError(std::string(op) + ": inner dims " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()));
  }
  return {a.dim(0), a.dim(1), b.dim(1)};
}

kernels::ConvDims conv_dims(const Tensor& input, const Tensor& filters, const Tensor& bias) {
  require_rank(input, 2, "conv1d");
  require_rank(filters, 3, "conv1d");
  if (filters.dim(2) != input.dim(1)) {
    throw DimensionError("conv1d: filter depth " + std::to_string(filters.dim(2)) +
                         " != input depth " + std::to_string(input.dim(1)));
  }
  if (bias.size() != filters.dim(0)) {
    throw DimensionError("conv1d: bias size " + std::to_string(bias.size()) +
                         " != filter count " + std::to_string(filters.dim(0)));
  }
  if (input.dim(0) < filters.dim(1)) {
    throw PreconditionError("conv1d: input length " + std::to_string(input.dim(0)) +
                            " shorter than window " + std::to_string(filters.dim(1)));
  }
  return {input.dim(0), input.dim(1), filters.dim(1), filters.dim(0)};
}

// Backend dispatch.
void k_matmul(std::span<const real> a, std::span<const real> b, std::span<real> c,
              kernels::MatDims d) {
  if (kernel_backend() == KernelBackend::serial) return kernels::serial::matmul(a, b, c, d);
  kernels::parallel::matmul(a, b, c, d);
}
void k_matmul_grad_a(std::span<const real> gc, std::span<const real> b, std::span<real> ga,
                     kernels::MatDims d) {
  if (kernel_backend() == KernelBackend::serial)
    return kernels::serial::matmul_grad_a(gc, b, ga, d);
  kernels::parallel::matmul_grad_a(gc, b, ga, d);
}
void k_matmul_grad_b(std::span<const real> a, std::span<const real> gc, std::span<real> gb,
                     kernels::MatDims d) {
  if (kernel_backend() == KernelBackend::serial)
    return kernels::serial::matmul_grad_b(a, gc, gb, d);
  kernels::parallel::matmul_grad_b(a, gc, gb, d);
}

std::size_t argmax(std::span<const real> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace

void set_kernel_backend(KernelBackend backend) { g_backend = backend; }
KernelBackend kernel_backend() { return g_backend; }

namespace testing {
void inject_gradient_fault(bool enabled) { g_gradient_fault = enabled; }
}  // namespace testing

// ---- Value-level ---------------------------------------------------------

Tensor conv1d(const Tensor& input, const Tensor& filters, const Tensor& bias, Activation act) {
  const auto dims = conv_dims(input, filters, bias);
  Tensor out({dims.out_length(), dims.filters});
  if (kernel_backend() == KernelBackend::serial) {
    kernels::serial::conv1d(input.data(), filters.data(), bias.data(), out.data(), dims, act);
  } else {
    kernels::parallel::conv1d(input.data(), filters.data(), bias.data(), out.data(), dims, act);
  }
  require_finite(out, "conv1d");
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto dims = mat_dims(a, b, "matmul");
  Tensor out({dims.rows, dims.cols});
  k_matmul(a.data(), b.data(), out.data(), dims);
  require_finite(out, "matmul");
  return out;
}

Tensor softmax_rows(const Tensor& logits) {
  require_finite(logits, "softmax_rows input");
  Tensor out(logits.shape());
  const std::size_t rows = logits.rows(), cols = logits.cols();
  for (std::size_t i = 0; i < rows; ++i) {
    auto in = logits.row(i);
    auto o = out.row(i);
    const real mx = *std::max_element(in.begin(), in.end());
    real total = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      o[j] = std::exp(in[j] - mx);
      total += o[j];
    }
    for (std::size_t j = 0; j < cols; ++j) o[j] /= total;
  }
  return out;
}

real cosine(std::span<const real> u, std::span<const real> v) {
  if (u.size() != v.size()) throw DimensionError("cosine: length mismatch");
  real dot = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0 || vv == 0) return 0;
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), real{-1}, real{1});
}

real mse(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mse");
  if (a.empty()) throw PreconditionError("mse: empty input");
  real sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const real d = a[i] - b[i];
    sum += d * d;
  }
  return sum / static_cast<real>(a.rows());
}

real kl_div(const Tensor& p, const Tensor& q) {
  require_same_shape(p, q, "kl_div");
  real sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0) continue;
    sum += p[i] * std::log(p[i] / std::max(q[i], kKlEpsilon));
  }
  return sum;
}

Tensor soft_assign(const Tensor& points, const Tensor& centroids) {
  require_rank(points, 2, "soft_assign");
  require_rank(centroids, 2, "soft_assign");
  if (points.dim(1) != centroids.dim(1)) {
    throw DimensionError("soft_assign: point dim " + std::to_string(points.dim(1)) +
                         " != centroid dim " + std::to_string(centroids.dim(1)));
  }
  const kernels::AssignDims dims{points.dim(0), centroids.dim(0), points.dim(1)};
  Tensor q({dims.points, dims.clusters});
  if (kernel_backend() == KernelBackend::serial) {
    kernels::serial::soft_assign(points.data(), centroids.data(), q.data(), dims);
  } else {
    kernels::parallel::soft_assign(points.data(), centroids.data(), q.data(), dims);
  }
  require_finite(q, "soft_assign");
  return q;
}

real cluster_loss(const Tensor& p) {
  require_rank(p, 2, "cluster_loss");
  const std::size_t n = p.dim(0), k = p.dim(1);
  if (n == 0 || k == 0) throw PreconditionError("cluster_loss: empty batch");
  const real inv_n = real{1} / static_cast<real>(n);
  real confidence = 0;
  std::vector<real> mass(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = p.row(i);
    confidence += row[argmax(row)];
    for (std::size_t j = 0; j < k; ++j) mass[j] += row[j] * row[j];
  }
  return -confidence * inv_n + *std::max_element(mass.begin(), mass.end()) * inv_n;
}

// ---- Graph ops -------------------------------------------------------------

Var matmul(Graph& g, Var a, Var b) {
  const auto dims = mat_dims(g.value(a), g.value(b), "matmul");
  return g.record(matmul(g.value(a), g.value(b)), {a, b},
                  [a, b, dims](Graph& g, Var self) {
                    const Tensor& gc = g.grad(self);
                    if (g.requires_grad(a))
                      k_matmul_grad_a(gc.data(), g.value(b).data(), g.grad_buffer(a).data(), dims);
                    if (g.requires_grad(b))
                      k_matmul_grad_b(g.value(a).data(), gc.data(), g.grad_buffer(b).data(), dims);
                  },
                  "matmul");
}

Var add(Graph& g, Var a, Var b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  require_same_shape(av, bv, "add");
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return g.record(std::move(out), {a, b},
                  [a, b](Graph& g, Var self) {
                    const Tensor& go = g.grad(self);
                    for (Var in : {a, b}) {
                      if (!g.requires_grad(in)) continue;
                      Tensor& gi = g.grad_buffer(in);
                      for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += go[i];
                    }
                  },
                  "add");
}

Var add_bias(Graph& g, Var x, Var bias) {
  const Tensor& xv = g.value(x);
  const Tensor& bv = g.value(bias);
  if (bv.size() != xv.cols()) {
    throw DimensionError("add_bias: bias " + shape_string(bv.shape()) + " vs input " +
                         shape_string(xv.shape()));
  }
  Tensor out = xv;
  const std::size_t rows = out.rows(), cols = out.cols();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out.at(i, j) += bv[j];
  return g.record(std::move(out), {x, bias},
                  [x, bias, rows, cols](Graph& g, Var self) {
                    const Tensor& go = g.grad(self);
                    if (g.requires_grad(x)) {
                      Tensor& gx = g.grad_buffer(x);
                      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i];
                    }
                    if (g.requires_grad(bias)) {
                      Tensor& gb = g.grad_buffer(bias);
                      for (std::size_t i = 0; i < rows; ++i)
                        for (std::size_t j = 0; j < cols; ++j) gb[j] += go[i * cols + j];
                    }
                  },
                  "add_bias");
}

Var tanh(Graph& g, Var x) {
  Tensor out = g.value(x);
  for (auto& v : out.data()) v = std::tanh(v);
  return g.record(std::move(out), {x},
                  [x](Graph& g, Var self) {
                    const Tensor& go = g.grad(self);
                    const Tensor& y = g.value(self);
                    Tensor& gx = g.grad_buffer(x);
                    const real fault = g_gradient_fault ? real(1.5) : real(1);
                    for (std::size_t i = 0; i < gx.size(); ++i)
                      gx[i] += fault * go[i] * (1 - y[i] * y[i]);
                  },
                  "tanh");
}

Var scale(Graph& g, Var x, real factor) {
  Tensor out = g.value(x);
  for (auto& v : out.data()) v *= factor;
  return g.record(std::move(out), {x},
                  [x, factor](Graph& g, Var self) {
                    const Tensor& go = g.grad(self);
                    Tensor& gx = g.grad_buffer(x);
                    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += factor * go[i];
                  },
                  "scale");
}

Var reshape(Graph& g, Var x, Shape shape) {
  return g.record(g.value(x).reshaped(std::move(shape)), {x},
                  [x](Graph& g, Var self) {
                    const Tensor& go = g.grad(self);
                    Tensor& gx = g.grad_buffer(x);
                    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i];
                  },
                  "reshape");
}

Var concat_cols(Graph& g, std::span<const Var> parts) {
  if (parts.empty()) throw PreconditionError("concat_cols: no inputs");
  const std::size_t rows = g.value(parts[0]).rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (Var p : parts) {
    if (g.value(p).rows() != rows) throw DimensionError("concat_cols: row count mismatch");
    widths.push_back(g.value(p).cols());
    total += widths.back();
  }
  Tensor out({rows, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& src = g.value(parts[k]);
    for (std::size_t i = 0; i < rows; ++i)
      std::copy_n(src.row(i).begin(), widths[k], out.row(i).begin() + offset);
    offset += widths[k];
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return g.record(std::move(out), inputs,
                  [inputs, widths, rows, total](Graph& g, Var self) {
                    const Tensor& go = g.grad(self);
                    std::size_t offset = 0;
                    for (std::size_t k = 0; k < inputs.size(); ++k) {
                      if (g.requires_grad(inputs[k])) {
                        Tensor& gi = g.grad_buffer(inputs[k]);
                        for (std::size_t i = 0; i < rows; ++i)
                          for (std::size_t j = 0; j < widths[k]; ++j)
                            gi[i * widths[k] + j] += go[i * total + offset + j];
                      }
                      offset += widths[k];
                    }
                  },
                  "concat_cols");
}

Var concat_rows(Graph& g, std::span<const Var> parts) {
  if (parts.empty()) throw PreconditionError("concat_rows: no inputs");
  const std::size_t cols = g.value(parts[0]).cols();
  std::vector<std::size_t> sizes;
  std::vector<real> data;
  for (Var p : parts) {
    const Tensor& v = g.value(p);
    if (v.cols() != cols) throw DimensionError("concat_rows: column count mismatch");
    sizes.push_back(v.size());
    data.insert(data.end(), v.data().begin(), v.data().end());
  }
  const std::size_t rows = data.size() / cols;
  std::vector<Var> inputs(parts.begin(), parts.end());
  return g.record(Tensor({rows, cols}, std::move(data)), inputs,
                  [inputs, sizes](Graph& g, Var self) {
                    const Tensor& go = g.grad(self);
                    std::size_t offset = 0;
                    for (std::size_t k = 0; k < inputs.size(); ++k) {
                      if (g.requires_grad(inputs[k])) {
                        Tensor& gi = g.grad_buffer(inputs[k]);
                        for (std::size_t i = 0; i < sizes[k]; ++i) gi[i] += go[offset + i];
                      }
                      offset += sizes[k];
                    }
                  },
                  "concat_rows");
}

Var gather_rows(Graph& g, Var table, std::span<const std::size_t> indices) {
  const Tensor& tv = g.value(table);
  require_rank(tv, 2, "gather_rows");
  const std::size_t width = tv.dim(1);
  Tensor out({indices.size(), width});
  for (std::size_t t = 0; t < indices.size(); ++t) {
    if (indices[t] >= tv.dim(0)) throw DimensionError("gather_rows: index out of range");
    std::copy_n(tv.row(indices[t]).begin(), width, out.row(t).begin());
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return g.record(std::move(out), {table},
                  [table, idx, width](Graph& g, Var self) {
                    const Tensor& go = g.grad(self);
                    Tensor& gt = g.grad_buffer(table);
                    for (std::size_t t = 0; t < idx.size(); ++t)
                      for (std::size_t c = 0; c < width; ++c)
                        gt[idx[t] * width + c] += go[t * width + c];
                  },
                  "gather_rows");
}

Var conv1d(Graph& g, Var input, Var filters, Var bias, Activation act) {
  const auto dims = conv_dims(g.value(input), g.value(filters), g.value(bias));
  return g.record(
      conv1d(g.value(input), g.value(filters), g.value(bias), act), {input, filters, bias},
      [input, filters, bias, dims, act](Graph& g, Var self) {
        Tensor pre_grad = g.grad(self);
        if (act == Activation::tanh) {
          const Tensor& y = g.value(self);
          const real fault = g_gradient_fault ? real(1.5) : real(1);
          for (std::size_t i = 0; i < pre_grad.size(); ++i)
            pre_grad[i] *= fault * (1 - y[i] * y[i]);
        }
        std::span<real> gx, gw, gb;
        if (g.requires_grad(input)) gx = g.grad_buffer(input).data();
        if (g.requires_grad(filters)) gw = g.grad_buffer(filters).data();
        if (g.requires_grad(bias)) gb = g.grad_buffer(bias).data();
        if (kernel_backend() == KernelBackend::serial) {
          kernels::serial::conv1d_backward(g.value(input).data(), g.value(filters).data(),
                                           pre_grad.data(), gx, gw, gb, dims);
        } else {
          kernels::parallel::conv1d_backward(g.value(input).data(), g.value(filters).data(),
                                             pre_grad.data(), gx, gw, gb, dims);
        }
      },
      "conv1d");
}

Var add_position(Graph& g, Var features, Var table) {
  const Tensor& fv = g.value(features);
  const Tensor& tv = g.value(table);
  require_rank(fv, 2, "add_position");
  require_rank(tv, 2, "add_position");
  if (tv.dim(1) != fv.dim(1)) throw DimensionError("add_position: width mismatch");
  if (fv.dim(0) > tv.dim(0)) {
    throw PreconditionError("add_position: " + std::to_string(fv.dim(0)) +
                            " feature rows exceed positional table of " +
                            std::to_string(tv.dim(0)));
  }
  Tensor out = fv;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += tv[i];
  const std::size_t used = fv.size();
  return g.record(std::move(out), {features, table},
                  [features, table, used](Graph& g, Var self) {
                    const Tensor& go = g.grad(self);
                    for (Var in : {features, table}) {
                      if (!g.requires_grad(in)) continue;
                      Tensor& gi = g.grad_buffer(in);
                      for (std::size_t i = 0; i < used; ++i) gi[i] += go[i];
                    }
                  },
                  "add_position");
}

Var softmax_rows(Graph& g, Var logits) {
  return g.record(softmax_rows(g.value(logits)), {logits},
                  [logits](Graph& g, Var self) {
                    const Tensor& go = g.grad(self);
                    const Tensor& y = g.value(self);
                    Tensor& gx = g.grad_buffer(logits);
                    const std::size_t rows = y.rows(), cols = y.cols();
                    for (std::size_t i = 0; i < rows; ++i) {
                      real dot = 0;
                      for (std::size_t j = 0; j < cols; ++j) dot += go.at(i, j) * y.at(i, j);
                      for (std::size_t j = 0; j < cols; ++j)
                        gx.at(i, j) += y.at(i, j) * (go.at(i, j) - dot);
                    }
                  },
                  "softmax_rows");
}

Var cosine_rows(Graph& g, Var u, Var v) {
  const Tensor& uv = g.value(u);
  const Tensor& vv = g.value(v);
  require_same_shape(uv, vv, "cosine_rows");
  const std::size_t rows = uv.rows();
  Tensor out({rows, 1});
  for (std::size_t i = 0; i < rows; ++i) out[i] = cosine(uv.row(i), vv.row(i));
  return g.record(std::move(out), {u, v},
                  [u, v](Graph& g, Var self) {
                    const Tensor& go = g.grad(self);
                    const Tensor& c = g.value(self);
                    const Tensor& uv = g.value(u);
                    const Tensor& vv = g.value(v);
                    const std::size_t rows = uv.rows(), cols = uv.cols();
                    for (std::size_t i = 0; i < rows; ++i) {
                      auto ur = uv.row(i);
                      auto vr = vv.row(i);
                      real uu = 0, vv2 = 0;
                      for (std::size_t j = 0; j < cols; ++j) {
                        uu += ur[j] * ur[j];
                        vv2 += vr[j] * vr[j];
                      }
                      if (uu == 0 || vv2 == 0) continue;
                      const real nu = std::sqrt(uu), nv = std::sqrt(vv2);
                      const real gi = go[i];
                      if (g.requires_grad(u)) {
                        auto gu = g.grad_buffer(u).row(i);
                        for (std::size_t j = 0; j < cols; ++j)
                          gu[j] += gi * (vr[j] / (nu * nv) - c[i] * ur[j] / uu);
                      }
                      if (g.requires_grad(v)) {
                        auto gv = g.grad_buffer(v).row(i);
                        for (std::size_t j = 0; j < cols; ++j)
                          gv[j] += gi * (ur[j] / (nu * nv) - c[i] * vr[j] / vv2);
                      }
                    }
                  },
                  "cosine_rows");
}

Var mse(Graph& g, Var a, Var b) {
  const real value = mse(g.value(a), g.value(b));
  return g.record(Tensor::scalar(value), {a, b},
                  [a, b](Graph& g, Var self) {
                    const real go = g.grad(self)[0];
                    const Tensor& av = g.value(a);
                    const Tensor& bv = g.value(b);
                    const real factor = 2 * go / static_cast<real>(av.rows());
                    if (g.requires_grad(a)) {
                      Tensor& ga = g.grad_buffer(a);
                      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += factor * (av[i] - bv[i]);
                    }
                    if (g.requires_grad(b)) {
                      Tensor& gb = g.grad_buffer(b);
                      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= factor * (av[i] - bv[i]);
                    }
                  },
                  "mse");
}

Var kl_div(Graph& g, Var p, Var q) {
  const real value = kl_div(g.value(p), g.value(q));
  return g.record(Tensor::scalar(value), {p, q},
                  [p, q](Graph& g, Var self) {
                    const real go = g.grad(self)[0];
                    const Tensor& pv = g.value(p);
                    const Tensor& qv = g.value(q);
                    if (g.requires_grad(p)) {
                      Tensor& gp = g.grad_buffer(p);
                      for (std::size_t i = 0; i < gp.size(); ++i) {
                        if (pv[i] <= 0) continue;
                        gp[i] += go * (std::log(pv[i] / std::max(qv[i], kKlEpsilon)) + 1);
                      }
                    }
                    if (g.requires_grad(q)) {
                      Tensor& gq = g.grad_buffer(q);
                      for (std::size_t i = 0; i < gq.size(); ++i) {
                        if (pv[i] <= 0 || qv[i] < kKlEpsilon) continue;
                        gq[i] -= go * pv[i] / qv[i];
                      }
                    }
                  },
                  "kl_div");
}

Var softmax_cross_entropy(Graph& g, Var logits, std::span<const std::size_t> labels) {
  const Tensor& lv = g.value(logits);
  require_rank(lv, 2, "softmax_cross_entropy");
  if (labels.size() != lv.dim(0)) throw DimensionError("softmax_cross_entropy: label count");
  Tensor probs = softmax_rows(lv);
  const std::size_t rows = lv.dim(0), cols = lv.dim(1);
  real loss = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (labels[i] >= cols) throw PreconditionError("softmax_cross_entropy: label out of range");
    // log-sum-exp form keeps tiny probabilities finite.
    auto row = lv.row(i);
    const real mx = *std::max_element(row.begin(), row.end());
    real total = 0;
    for (real x : row) total += std::exp(x - mx);
    loss += mx + std::log(total) - row[labels[i]];
  }
  loss /= static_cast<real>(rows);
  std::vector<std::size_t> y(labels.begin(), labels.end());
  return g.record(Tensor::scalar(loss), {logits},
                  [logits, probs = std::move(probs), y, rows, cols](Graph& g, Var self) {
                    const real go = g.grad(self)[0] / static_cast<real>(rows);
                    Tensor& gl = g.grad_buffer(logits);
                    for (std::size_t i = 0; i < rows; ++i)
                      for (std::size_t j = 0; j < cols; ++j)
                        gl.at(i, j) += go * (probs.at(i, j) - (j == y[i] ? real{1} : real{0}));
                  },
                  "softmax_cross_entropy");
}

Var cluster_loss(Graph& g, Var p) {
  const real value = cluster_loss(g.value(p));
  return g.record(Tensor::scalar(value), {p},
                  [p](Graph& g, Var self) {
                    const real go = g.grad(self)[0];
                    const Tensor& pv = g.value(p);
                    const std::size_t n = pv.dim(0), k = pv.dim(1);
                    const real inv_n = real{1} / static_cast<real>(n);
                    std::vector<real> mass(k, 0);
                    for (std::size_t i = 0; i < n; ++i)
                      for (std::size_t j = 0; j < k; ++j) mass[j] += pv.at(i, j) * pv.at(i, j);
                    const std::size_t heavy = argmax(mass);
                    Tensor& gp = g.grad_buffer(p);
                    for (std::size_t i = 0; i < n; ++i) {
                      gp.at(i, argmax(pv.row(i))) -= go * inv_n;
                      gp.at(i, heavy) += go * 2 * pv.at(i, heavy) * inv_n;
                    }
                  },
                  "cluster_loss");
}

Var soft_assign(Graph& g, Var points, Var centroids) {
  Tensor q = soft_assign(g.value(points), g.value(centroids));
  const kernels::AssignDims dims{q.dim(0), q.dim(1), g.value(points).dim(1)};
  return g.record(std::move(q), {points, centroids},
                  [points, centroids, dims](Graph& g, Var self) {
                    std::span<real> gz, gc;
                    if (g.requires_grad(points)) gz = g.grad_buffer(points).data();
                    if (g.requires_grad(centroids)) gc = g.grad_buffer(centroids).data();
                    const auto z = g.value(points).data();
                    const auto c = g.value(centroids).data();
                    const auto q = g.value(self).data();
                    const auto gq = g.grad(self).data();
                    if (kernel_backend() == KernelBackend::serial) {
                      kernels::serial::soft_assign_backward(z, c, q, gq, gz, gc, dims);
                    } else {
                      kernels::parallel::soft_assign_backward(z, c, q, gq, gz, gc, dims);
                    }
                  },
                  "soft_assign");
}

}  // namespace numerics
WSCD_MODEL_NAMESPACE_END
