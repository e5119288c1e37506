#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gibert/model_params.hpp"

namespace gibert {

inline constexpr double kBlockedGateThreshold = 1e-3;

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
};

/// Equal-width bins over [min, max]; the last bin is closed on the right. A
/// degenerate range (all values equal) is widened to [v - 0.5, v + 0.5].
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins);

/// "bin_left,bin_right,count" header plus one row per bin.
std::string histogram_csv(std::span<const HistogramBin> bins);

struct GateSnapshot {
  std::vector<double> gate;
  double zero_threshold = kBlockedGateThreshold;
  std::size_t near_zero = 0;  // |g_d| < zero_threshold
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::vector<HistogramBin> histogram;
};

/// Throws ConfigError when the parameters carry no gate vector.
GateSnapshot export_gate_snapshot(const ModelParams& params, std::size_t bins,
                                  double zero_threshold = kBlockedGateThreshold);

}  // namespace gibert
