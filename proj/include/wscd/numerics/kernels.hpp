#pragma once

#include <cstddef>
#include <span>

#include "wscd/real.hpp"

// Dense inner loops used by the graph ops.
//
// `serial` is the straightforward reference implementation; `parallel`
// distributes independent output rows across OpenMP threads. Every output
// element of `parallel` is accumulated in a fixed order that does not depend
// on the thread count, so its results are reproducible run to run.
// Gradient kernels accumulate (+=) into their outputs.

WSCD_MODEL_NAMESPACE_BEGIN
namespace kernels {

enum class Activation { identity, tanh };

struct MatDims {
  std::size_t rows;   // n: rows of A and C
  std::size_t inner;  // m: cols of A, rows of B
  std::size_t cols;   // k: cols of B and C
};

struct ConvDims {
  std::size_t length;   // T: input rows
  std::size_t depth;    // d: input cols
  std::size_t width;    // k: filter window
  std::size_t filters;  // f: output cols
  std::size_t out_length() const { return length - width + 1; }
};

struct AssignDims {
  std::size_t points;     // n
  std::size_t clusters;   // k
  std::size_t features;   // K
};

#define WSCD_KERNEL_DECLS                                                              \
  void matmul(std::span<const real> a, std::span<const real> b, std::span<real> c,     \
              MatDims dims);                                                           \
  void matmul_grad_a(std::span<const real> grad_c, std::span<const real> b,            \
                     std::span<real> grad_a, MatDims dims);                            \
  void matmul_grad_b(std::span<const real> a, std::span<const real> grad_c,            \
                     std::span<real> grad_b, MatDims dims);                            \
  void conv1d(std::span<const real> input, std::span<const real> filters,              \
              std::span<const real> bias, std::span<real> output, ConvDims dims,       \
              Activation act);                                                         \
  void conv1d_backward(std::span<const real> input, std::span<const real> filters,     \
                       std::span<const real> grad_pre, std::span<real> grad_input,     \
                       std::span<real> grad_filters, std::span<real> grad_bias,        \
                       ConvDims dims);                                                 \
  void soft_assign(std::span<const real> points, std::span<const real> centroids,      \
                   std::span<real> q, AssignDims dims);                                \
  void soft_assign_backward(std::span<const real> points,                              \
                            std::span<const real> centroids, std::span<const real> q,  \
                            std::span<const real> grad_q, std::span<real> grad_points, \
                            std::span<real> grad_centroids, AssignDims dims);

namespace serial {
WSCD_KERNEL_DECLS
}  // namespace serial

namespace parallel {
WSCD_KERNEL_DECLS
}  // namespace parallel

#undef WSCD_KERNEL_DECLS

}  // namespace kernels
WSCD_MODEL_NAMESPACE_END
