#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wscd/numerics/tensor.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace numerics {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;  // same shape as value when trainable
  bool trainable = true;
};

// Named parameters in lexicographic order. Names are unique.
class ParameterStore {
 public:
  using Map = std::map<std::string, Parameter, std::less<>>;

  Parameter& add(std::string name, Tensor value, bool trainable = true);
  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;
  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  void erase(std::string_view name);

  std::size_t size() const { return params_.size(); }
  Map::iterator begin() { return params_.begin(); }
  Map::iterator end() { return params_.end(); }
  Map::const_iterator begin() const { return params_.begin(); }
  Map::const_iterator end() const { return params_.end(); }

  void zero_grad();
  std::size_t scalar_count() const;

 private:
  Map params_;
};

struct Var {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t id = npos;
  bool valid() const { return id != npos; }
};

// Reverse-mode tape for one forward pass. Nodes are appended in evaluation
// order, so reverse id order is a valid topological order for backward.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, Var self)>;

  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  // Leaf bound to a parameter. Its gradient accumulates directly into
  // `p.grad`. Repeated calls for the same parameter return the same node.
  Var param(Parameter& p);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  // Gradient buffer of a node after backward; empty if none flowed there.
  const Tensor& grad(Var v) const;

  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  bool grad_enabled() const { return grad_enabled_; }

  // For op implementations.
  Var record(Tensor value, std::vector<Var> inputs, BackwardFn backward, const char* op);
  Tensor& grad_buffer(Var v);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<Var> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  const Node& node(Var v) const;

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  bool grad_enabled_;
  bool backward_done_ = false;
};

}  // namespace numerics
WSCD_MODEL_NAMESPACE_END
