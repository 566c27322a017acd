#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "wscd/numerics/graph.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace numerics {

struct GradCheckOptions {
  // Central-difference step; 1e-3 on the 32-bit build, 1e-5 on the 64-bit one.
  double step = sizeof(real) == 4 ? 1e-3 : 1e-5;
  // Relative error is |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  // Entries probed per parameter; 0 probes every entry.
  std::size_t max_entries_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0;
  std::string worst_entry;
  std::size_t entries_checked = 0;
};

using LossBuilder = std::function<Var(Graph&)>;

// Compares reverse-mode gradients of `build` with central finite differences
// for every trainable parameter in `params`. Leaves parameter values as found
// and gradients zeroed.
GradCheckReport check_gradients(ParameterStore& params, const LossBuilder& build,
                                const GradCheckOptions& options = {});

}  // namespace numerics
WSCD_MODEL_NAMESPACE_END
