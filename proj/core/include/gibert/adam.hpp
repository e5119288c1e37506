#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gibert/tensor.hpp"

namespace gibert::ad {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moment estimates, one pair per parameter tensor.
struct AdamState {
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(std::span<Tensor* const> params);
};

/// One bias-corrected Adam update using each parameter's grad buffer.
/// Parameters without an allocated grad are treated as having zero gradient.
void adam_step(std::span<Tensor* const> params, AdamState& state, const AdamOptions& options);

}  // namespace gibert::ad
