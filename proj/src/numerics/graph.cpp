#include "wscd/numerics/graph.hpp"

#include <algorithm>

#include "wscd/error.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace numerics {

Parameter& ParameterStore::add(std::string name, Tensor value, bool trainable) {
  if (params_.contains(name)) throw PreconditionError("duplicate parameter name: " + name);
  Parameter p{name, std::move(value), Tensor{}, trainable};
  if (trainable) p.grad = Tensor(p.value.shape());
  return params_.emplace(std::move(name), std::move(p)).first->second;
}

Parameter& ParameterStore::get(std::string_view name) {
  auto* p = find(name);
  if (!p) throw PreconditionError("unknown parameter: " + std::string(name));
  return *p;
}

const Parameter& ParameterStore::get(std::string_view name) const {
  auto* p = find(name);
  if (!p) throw PreconditionError("unknown parameter: " + std::string(name));
  return *p;
}

Parameter* ParameterStore::find(std::string_view name) {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : &it->second;
}

const Parameter* ParameterStore::find(std::string_view name) const {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : &it->second;
}

void ParameterStore::erase(std::string_view name) {
  auto it = params_.find(name);
  if (it != params_.end()) params_.erase(it);
}

void ParameterStore::zero_grad() {
  for (auto& [_, p] : params_) {
    if (p.trainable) {
      if (p.grad.shape() != p.value.shape()) p.grad = Tensor(p.value.shape());
      p.grad.fill(0);
    }
  }
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += p.value.size();
  return n;
}

Var Graph::constant(Tensor value) {
  require_finite(value, "constant");
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Graph::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{it->second};
  require_finite(p.value, p.name.c_str());
  Node n;
  n.param = &p;
  n.requires_grad = grad_enabled_ && p.trainable;
  nodes_.push_back(std::move(n));
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var{nodes_.size() - 1};
}

const Graph::Node& Graph::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw StateError("variable does not belong to this graph");
  return nodes_[v.id];
}

const Tensor& Graph::value(Var v) const {
  const Node& n = node(v);
  return n.param ? n.param->value : n.value;
}

bool Graph::requires_grad(Var v) const { return node(v).requires_grad; }

const Tensor& Graph::grad(Var v) const {
  const Node& n = node(v);
  return n.param ? n.param->grad : n.grad;
}

Var Graph::record(Tensor value, std::vector<Var> inputs, BackwardFn backward, const char* op) {
  require_finite(value, op);
  Node n;
  n.value = std::move(value);
  n.requires_grad =
      grad_enabled_ && std::any_of(inputs.begin(), inputs.end(),
                                   [&](Var in) { return node(in).requires_grad; });
  if (n.requires_grad) {
    n.inputs = std::move(inputs);
    n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Tensor& Graph::grad_buffer(Var v) {
  Node& n = nodes_.at(v.id);
  Tensor& g = n.param ? n.param->grad : n.grad;
  const Shape& shape = n.param ? n.param->value.shape() : n.value.shape();
  if (g.shape() != shape) g = Tensor(shape);
  return g;
}

void Graph::backward(Var loss) {
  if (nodes_.empty() || !loss.valid() || loss.id >= nodes_.size()) {
    throw StateError("backward called without a recorded forward pass");
  }
  if (backward_done_) throw StateError("backward already ran on this graph");
  if (value(loss).size() != 1) {
    throw DimensionError("backward needs a scalar loss, got " +
                         shape_string(value(loss).shape()));
  }
  backward_done_ = true;
  if (!nodes_[loss.id].requires_grad) return;

  grad_buffer(loss)[0] += 1;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, Var{id});
  }
}

}  // namespace numerics
WSCD_MODEL_NAMESPACE_END
