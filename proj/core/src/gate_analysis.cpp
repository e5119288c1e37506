#include "gibert/gate_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gibert/error.hpp"

namespace gibert {

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins) {
  if (bins == 0) throw ConfigError("histogram needs at least one bin");
  if (values.empty()) return {};
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].left = lo + width * static_cast<double>(b);
    out[b].right = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>(std::floor((v - lo) / width));
    out[std::min(b, bins - 1)].count += 1;
  }
  return out;
}

std::string histogram_csv(std::span<const HistogramBin> bins) {
  std::string out = "bin_left,bin_right,count\n";
  char buf[96];
  for (const HistogramBin& b : bins) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%zu\n", b.left, b.right, b.count);
    out += buf;
  }
  return out;
}

GateSnapshot export_gate_snapshot(const ModelParams& params, std::size_t bins, double zero_threshold) {
  if (!params.gate) throw ConfigError("gate analysis needs a gated model");
  GateSnapshot snap;
  const auto g = params.gate->data();
  snap.gate.assign(g.begin(), g.end());
  snap.zero_threshold = zero_threshold;
  if (!snap.gate.empty()) {
    snap.min = *std::min_element(snap.gate.begin(), snap.gate.end());
    snap.max = *std::max_element(snap.gate.begin(), snap.gate.end());
    double total = 0.0;
    for (double v : snap.gate) {
      total += v;
      snap.near_zero += std::abs(v) < zero_threshold ? 1 : 0;
    }
    snap.mean = total / static_cast<double>(snap.gate.size());
  }
  snap.histogram = histogram(snap.gate, bins);
  return snap;
}

}  // namespace gibert
