#include "wscd/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "wscd/rng.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace numerics {

namespace {
double evaluate(const LossBuilder& build) {
  Graph g(/*grad_enabled=*/false);
  return static_cast<double>(g.value(build(g)).item());
}
}  // namespace

GradCheckReport check_gradients(ParameterStore& params, const LossBuilder& build,
                                const GradCheckOptions& options) {
  params.zero_grad();
  {
    Graph g;
    g.backward(build(g));
  }

  GradCheckReport report;
  Rng rng(options.seed);
  for (auto& [name, p] : params) {
    if (!p.trainable) continue;
    const Tensor analytic = p.grad;
    std::vector<std::size_t> entries(p.value.size());
    std::iota(entries.begin(), entries.end(), 0);
    if (options.max_entries_per_param && entries.size() > options.max_entries_per_param) {
      rng.shuffle(std::span(entries));
      entries.resize(options.max_entries_per_param);
      std::sort(entries.begin(), entries.end());
    }
    for (std::size_t i : entries) {
      const real original = p.value[i];
      p.value[i] = static_cast<real>(original + options.step);
      const double plus = evaluate(build);
      p.value[i] = static_cast<real>(original - options.step);
      const double minus = evaluate(build);
      p.value[i] = original;

      const double numeric = (plus - minus) / (2 * options.step);
      const double a = static_cast<double>(analytic[i]);
      const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.entries_checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_entry = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  params.zero_grad();
  return report;
}

}  // namespace numerics
WSCD_MODEL_NAMESPACE_END
