#include "gibert/adam.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "gibert/error.hpp"

namespace gibert::ad {

AdamState::AdamState(std::span<Tensor* const> params) {
  first_moment.reserve(params.size());
  second_moment.reserve(params.size());
  for (const Tensor* p : params) {
    first_moment.emplace_back(p->size(), 0.0);
    second_moment.emplace_back(p->size(), 0.0);
  }
}

void adam_step(std::span<Tensor* const> params, AdamState& state, const AdamOptions& options) {
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw DimensionError("adam_step: state tracks " + std::to_string(state.first_moment.size()) +
                         " tensors but " + std::to_string(params.size()) + " were given");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (state.first_moment[t].size() != params[t]->size() || state.second_moment[t].size() != params[t]->size()) {
      throw DimensionError("adam_step: moment shape mismatch for tensor " + std::to_string(t));
    }
  }

  ++state.step;
  const double correction1 = 1.0 - std::pow(options.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(options.beta2, static_cast<double>(state.step));

  for (std::size_t t = 0; t < params.size(); ++t) {
    Tensor& p = *params[t];
    std::span<const double> grad = std::as_const(p).grad();
    if (grad.empty()) continue;
    auto& m = state.first_moment[t];
    auto& v = state.second_moment[t];
    auto data = p.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * grad[i];
      v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      data[i] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.eps);
    }
  }
}

}  // namespace gibert::ad
