#include "wscd/numerics/optim.hpp"

#include <cmath>

WSCD_MODEL_NAMESPACE_BEGIN
namespace numerics {

namespace {
bool selected(const std::string& name, const std::vector<std::string>& prefixes) {
  if (prefixes.empty()) return true;
  for (const auto& p : prefixes)
    if (name.starts_with(p)) return true;
  return false;
}
}  // namespace

real Sgd::lr_at(std::size_t epoch) const {
  return config_.lr * static_cast<real>(std::pow(config_.decay, static_cast<real>(epoch)));
}

void Sgd::step(ParameterStore& params, std::size_t epoch,
               const std::vector<std::string>& prefixes) const {
  const real lr = lr_at(epoch);

  real clip = 1;
  if (config_.clip_norm > 0) {
    real sq = 0;
    for (auto& [name, p] : params) {
      if (!p.trainable || !selected(name, prefixes) || p.grad.empty()) continue;
      for (real v : p.grad.data()) sq += v * v;
    }
    const real norm = std::sqrt(sq);
    if (norm > config_.clip_norm) clip = config_.clip_norm / norm;
  }

  for (auto& [name, p] : params) {
    if (!p.trainable || p.grad.empty()) continue;
    if (selected(name, prefixes)) {
      auto value = p.value.data();
      auto grad = p.grad.data();
      for (std::size_t i = 0; i < value.size(); ++i)
        value[i] -= lr * (clip * grad[i] + config_.weight_decay * value[i]);
    }
    p.grad.fill(0);
  }
}

}  // namespace numerics
WSCD_MODEL_NAMESPACE_END
