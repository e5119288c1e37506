#include "gibert/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "gibert/error.hpp"

namespace gibert::ad {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult grad_check(const LossBuilder& loss, std::span<const NamedTensor> params, double eps) {
  if (!(eps > 0.0)) throw Error("grad_check: eps must be positive");

  std::vector<bool> saved_flags;
  for (const NamedTensor& p : params) {
    saved_flags.push_back(p.tensor->requires_grad());
    p.tensor->set_requires_grad(true);
    p.tensor->zero_grad();
  }
  {
    Graph graph;
    Var l = loss(graph);
    graph.backward(l);
  }

  auto evaluate = [&loss]() {
    Graph graph(Graph::Mode::inference);
    return loss(graph).value().item();
  };

  GradCheckResult result;
  for (const NamedTensor& p : params) {
    GradCheckEntry entry;
    entry.name = p.name;
    const std::vector<double> analytic(p.tensor->grad().begin(), p.tensor->grad().end());
    auto data = p.tensor->data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double original = data[i];
      data[i] = original + eps;
      const double plus = evaluate();
      data[i] = original - eps;
      const double minus = evaluate();
      data[i] = original;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double err = relative_error(analytic[i], numeric);
      if (i == 0 || err > entry.max_relative_error) {
        entry.max_relative_error = err;
        entry.worst_index = i;
        entry.analytic = analytic[i];
        entry.numeric = numeric;
      }
    }
    result.max_relative_error = std::max(result.max_relative_error, entry.max_relative_error);
    result.per_tensor.push_back(std::move(entry));
  }

  for (std::size_t i = 0; i < params.size(); ++i) params[i].tensor->set_requires_grad(saved_flags[i]);
  return result;
}

}  // namespace gibert::ad
