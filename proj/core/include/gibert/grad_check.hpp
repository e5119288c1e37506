#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gibert/graph.hpp"

namespace gibert::ad {

struct NamedTensor {
  std::string name;
  Tensor* tensor = nullptr;
};

struct GradCheckEntry {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::vector<GradCheckEntry> per_tensor;
};

/// Builds the scalar loss on the given graph, binding parameters with
/// Graph::parameter.
using LossBuilder = std::function<Var(Graph&)>;

/// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

/// Compares reverse-mode gradients with central differences
/// (f(x + eps) - f(x - eps)) / (2 eps) for every entry of every tensor.
/// Parameter values are restored afterwards; grad buffers are overwritten.
GradCheckResult grad_check(const LossBuilder& loss, std::span<const NamedTensor> params, double eps);

}  // namespace gibert::ad
