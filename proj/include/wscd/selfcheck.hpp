#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wscd/real.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace selfcheck {

struct ObjectiveCheck {
  std::string objective;
  std::size_t instances = 0;
  std::size_t entries = 0;
  double max_rel_error = 0;
  std::string worst_entry;
};

// Random small models: character encoder + pair detector. Objectives are
// the clustering loss on p, the self-training KL through soft assignment,
// the supervised cross-entropy and the morphology MSE.
std::vector<ObjectiveCheck> gradient_suite(std::size_t instances, std::uint64_t seed);

struct DistributionCheck {
  std::size_t calls = 0;
  double max_row_error = 0;      // |row sum - 1| over p, q and targets
  double max_self_kl = 0;        // |KL(P||P)|
  bool fixed_point_exact = true; // N = 1 target equals q bit for bit
  bool all_in_unit_interval = true;
};

DistributionCheck distribution_suite(std::size_t calls, std::uint64_t seed);

}  // namespace selfcheck
WSCD_MODEL_NAMESPACE_END
