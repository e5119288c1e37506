#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gibert/tensor.hpp"

namespace gibert::ad {

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t index) : graph_(graph), index_(index) {}

  Graph& graph() const { return *graph_; }
  std::size_t index() const noexcept { return index_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool valid() const noexcept { return graph_ != nullptr; }

 private:
  Graph* graph_ = nullptr;
  std::size_t index_ = 0;
};

/// Records the forward computation as an append-only tape.
///
/// Nodes are appended in evaluation order, so the tape is always a valid
/// topological order: every node's inputs have smaller indices. backward()
/// walks the tape once in reverse.
class Graph {
 public:
  /// Called during backward with the graph and the node's own index. It reads
  /// the node's output gradient and accumulates into its inputs' gradients.
  using BackwardFn = std::function<void(Graph&, std::size_t)>;

  enum class Mode { record, inference };

  explicit Graph(Mode mode = Mode::record) : mode_(mode) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf holding a copy of `value`; never receives a gradient.
  Var constant(Tensor value);
  /// Leaf bound to an externally owned tensor, read in place; the tensor must
  /// outlive the graph and stay unmodified until backward() returns. When the
  /// tensor requires grad,
  /// backward() adds into its grad buffer. Binding the same tensor twice
  /// returns the same node.
  Var parameter(Tensor& tensor);

  /// Appends an op node. `backward` is dropped when no input needs a gradient
  /// or the graph is in inference mode.
  Var record(std::string_view op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);

  const Tensor& value(std::size_t node) const {
    const Node& n = nodes_[node];
    return n.parameter != nullptr ? *n.parameter : n.value;
  }
  const Tensor& value(Var v) const { return value(v.index()); }
  std::string_view op(std::size_t node) const { return nodes_[node].op; }
  std::span<const std::size_t> inputs(std::size_t node) const { return nodes_[node].inputs; }
  bool needs_grad(std::size_t node) const { return nodes_[node].needs_grad; }
  bool needs_grad(Var v) const { return nodes_[v.index()].needs_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool recording() const noexcept { return mode_ == Mode::record; }

  /// Output gradient of `node`; empty if nothing flowed into it.
  std::span<const double> grad(std::size_t node) const { return nodes_[node].grad; }
  /// Gradient buffer of an input node for accumulation, allocated on demand.
  /// Returns an empty span when that input does not need a gradient.
  std::span<double> accumulator(std::size_t node);
  std::span<double> accumulator(Var v) { return accumulator(v.index()); }

  /// Reverse pass from a scalar loss (seeded with 1). Bound parameters that
  /// require grad but are not reached get a zero-filled grad buffer.
  void backward(Var loss);

 private:
  struct Node {
    std::string_view op;
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    std::vector<double> grad;
    Tensor* parameter = nullptr;
    bool needs_grad = false;
  };

  Mode mode_;
  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, std::size_t> bound_;
};

}  // namespace gibert::ad
