#pragma once

#include <cstddef>
#include <span>

#include "wscd/numerics/graph.hpp"
#include "wscd/numerics/kernels.hpp"
#include "wscd/numerics/tensor.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace numerics {

using kernels::Activation;

enum class KernelBackend { parallel, serial };
void set_kernel_backend(KernelBackend backend);
KernelBackend kernel_backend();

// Epsilon applied to q inside KL divergence.
inline constexpr real kKlEpsilon = real(1e-10);

// ---- Value-level functions ---------------------------------------------
// input [T x d], filters [n x k x d], bias [n] -> [(T-k+1) x n]
Tensor conv1d(const Tensor& input, const Tensor& filters, const Tensor& bias,
              Activation act = Activation::tanh);
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor softmax_rows(const Tensor& logits);
// 0 when either vector has zero norm.
real cosine(std::span<const real> u, std::span<const real> v);
// (1/N) sum_i ||a_i - b_i||^2 with N = rows.
real mse(const Tensor& a, const Tensor& b);
// sum_ij p_ij log(p_ij / max(q_ij, eps)); 0 log 0 = 0.
real kl_div(const Tensor& p, const Tensor& q);
// Student-t (one degree of freedom) soft assignment of points to centroids.
Tensor soft_assign(const Tensor& points, const Tensor& centroids);
// -(1/N) sum_i max_j p_ij + max_j (1/N) sum_i p_ij^2
real cluster_loss(const Tensor& p);

// ---- Graph ops ----------------------------------------------------------
Var matmul(Graph& g, Var a, Var b);
Var add(Graph& g, Var a, Var b);
// x [N x K] + bias [K] broadcast over rows.
Var add_bias(Graph& g, Var x, Var bias);
Var tanh(Graph& g, Var x);
Var scale(Graph& g, Var x, real factor);
Var reshape(Graph& g, Var x, Shape shape);
Var concat_cols(Graph& g, std::span<const Var> parts);
Var concat_rows(Graph& g, std::span<const Var> parts);
// table [V x d] rows selected by indices -> [len x d]
Var gather_rows(Graph& g, Var table, std::span<const std::size_t> indices);
Var conv1d(Graph& g, Var input, Var filters, Var bias, Activation act = Activation::tanh);
// features [P x n] + table[0..P) rows; table [R x n] with R >= P.
Var add_position(Graph& g, Var features, Var table);
Var softmax_rows(Graph& g, Var logits);
// Row-wise cosine of u [N x K] and v [N x K] -> [N x 1].
Var cosine_rows(Graph& g, Var u, Var v);
Var mse(Graph& g, Var a, Var b);
Var kl_div(Graph& g, Var p, Var q);
// Mean cross-entropy of softmax(logits) against class indices.
Var softmax_cross_entropy(Graph& g, Var logits, std::span<const std::size_t> labels);
Var cluster_loss(Graph& g, Var p);
Var soft_assign(Graph& g, Var points, Var centroids);

namespace testing {
// Corrupts the tanh backward pass; lets the self-check prove it can fail.
void inject_gradient_fault(bool enabled);
}  // namespace testing

}  // namespace numerics
WSCD_MODEL_NAMESPACE_END
