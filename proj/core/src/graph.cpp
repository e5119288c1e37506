#include "gibert/graph.hpp"

#include <algorithm>

#include "gibert/error.hpp"

namespace gibert::ad {

const Tensor& Var::value() const { return graph_->value(index_); }

Var Graph::constant(Tensor value) {
  Node node;
  node.op = "constant";
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::parameter(Tensor& tensor) {
  if (auto it = bound_.find(&tensor); it != bound_.end()) return Var(this, it->second);
  Node node;
  node.op = "parameter";
  node.parameter = &tensor;
  node.needs_grad = recording() && tensor.requires_grad();
  nodes_.push_back(std::move(node));
  bound_.emplace(&tensor, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(std::string_view op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  Node node;
  node.op = op;
  node.value = std::move(value);
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (&in.graph() != this) throw Error("op '" + std::string(op) + "' mixes nodes from different graphs");
    node.inputs.push_back(in.index());
    node.needs_grad = node.needs_grad || nodes_[in.index()].needs_grad;
  }
  node.needs_grad = node.needs_grad && recording();
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

std::span<double> Graph::accumulator(std::size_t node) {
  Node& n = nodes_[node];
  if (!n.needs_grad) return {};
  if (n.grad.empty()) n.grad.assign(value(node).size(), 0.0);
  return n.grad;
}

void Graph::backward(Var loss) {
  if (&loss.graph() != this) throw Error("backward: loss belongs to another graph");
  const Tensor& lv = value(loss);
  if (lv.size() != 1) throw DimensionError("backward needs a scalar loss, got shape " + shape_string(lv.shape()));

  for (Node& n : nodes_) n.grad.clear();
  if (nodes_[loss.index()].needs_grad) nodes_[loss.index()].grad.assign(1, 1.0);

  for (std::size_t i = loss.index() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty()) continue;
    if (n.backward) n.backward(*this, i);
    if (n.parameter != nullptr && n.parameter->requires_grad()) {
      std::span<double> dst = n.parameter->grad();
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += n.grad[j];
    }
  }
  for (Node& n : nodes_) {
    if (n.parameter != nullptr && n.parameter->requires_grad()) (void)n.parameter->grad();
  }
}

}  // namespace gibert::ad
