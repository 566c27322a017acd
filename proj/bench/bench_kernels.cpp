#include <benchmark/benchmark.h>

#include <vector>

#include "wscd/numerics/kernels.hpp"
#include "wscd/rng.hpp"

namespace k = wscd::kernels;
using wscd::real;

namespace {

std::vector<real> filled(std::size_t n, std::uint64_t seed) {
  wscd::Rng rng(seed);
  std::vector<real> v(n);
  for (auto& x : v) x = static_cast<real>(rng.uniform(-1, 1));
  return v;
}

template <auto Kernel>
void BM_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const k::MatDims dims{n, n, n};
  const auto a = filled(n * n, 1), b = filled(n * n, 2);
  std::vector<real> c(n * n);
  for (auto _ : state) {
    Kernel(a, b, c, dims);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * int64_t(n * n * n));
}

// A batch of words stacked as one long sequence, as the encoder sees it.
template <auto Kernel>
void BM_conv1d(benchmark::State& state) {
  const auto length = static_cast<std::size_t>(state.range(0));
  const k::ConvDims dims{length, 64, 4, 64};
  const auto in = filled(length * 64, 3), w = filled(64 * 4 * 64, 4), b = filled(64, 5);
  std::vector<real> out(dims.out_length() * 64);
  for (auto _ : state) {
    Kernel(in, w, b, out, dims, k::Activation::tanh);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Kernel>
void BM_soft_assign(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const k::AssignDims dims{n, 2, 64};
  const auto z = filled(n * 64, 6), c = filled(2 * 64, 7);
  std::vector<real> q(n * 2);
  for (auto _ : state) {
    Kernel(z, c, q, dims);
    benchmark::DoNotOptimize(q.data());
  }
}

}  // namespace

BENCHMARK_TEMPLATE(BM_matmul, k::serial::matmul)->Arg(64)->Arg(256);
BENCHMARK_TEMPLATE(BM_matmul, k::parallel::matmul)->Arg(64)->Arg(256);
BENCHMARK_TEMPLATE(BM_conv1d, k::serial::conv1d)->Arg(1024)->Arg(8192);
BENCHMARK_TEMPLATE(BM_conv1d, k::parallel::conv1d)->Arg(1024)->Arg(8192);
BENCHMARK_TEMPLATE(BM_soft_assign, k::serial::soft_assign)->Arg(4096)->Arg(65536);
BENCHMARK_TEMPLATE(BM_soft_assign, k::parallel::soft_assign)->Arg(4096)->Arg(65536);

BENCHMARK_MAIN();
