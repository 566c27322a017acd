#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wscd/numerics/graph.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace numerics {

struct SgdConfig {
  real lr = real(1e-2);
  real decay = real(0.95);       // multiplicative, per epoch
  real weight_decay = 0;         // L2 coefficient added to the gradient
  real clip_norm = 0;            // 0 disables global-norm clipping
};

// Plain SGD with a per-epoch multiplicative learning-rate schedule.
class Sgd {
 public:
  explicit Sgd(SgdConfig config) : config_(config) {}

  real lr_at(std::size_t epoch) const;

  // p <- p - lr_epoch * grad for every trainable parameter whose name starts
  // with one of `prefixes` (all when empty), then zeroes every gradient.
  void step(ParameterStore& params, std::size_t epoch,
            const std::vector<std::string>& prefixes = {}) const;

  const SgdConfig& config() const { return config_; }

 private:
  SgdConfig config_;
};

}  // namespace numerics
WSCD_MODEL_NAMESPACE_END
