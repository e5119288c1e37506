#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gibert {

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Positive class is 1. Labels outside {0, 1} or unequal lengths throw.
Confusion confusion(std::span<const int> preds, std::span<const int> golds);

/// 2PR / (P + R), or 0 when P + R == 0.
double f1_score(const Confusion& c);
double f1_binary(std::span<const int> preds, std::span<const int> golds);
double accuracy(const Confusion& c);

/// Jaccard similarity of the two token sets. Two empty sentences count as
/// identical (1.0).
double lexical_overlap(std::span<const std::string> first, std::span<const std::string> second);

/// Middle value, or the mean of the two middle values for even counts.
double median(std::vector<double> values);

/// An instance is non-obvious when its overlap disagrees with its label:
/// a positive with overlap below the split median, or a negative at or above it.
std::vector<bool> non_obvious_mask(std::span<const int> golds, std::span<const double> overlaps);

/// F1 over the non-obvious instances; nullopt when there are none.
std::optional<double> non_obvious_f1(std::span<const int> preds, std::span<const int> golds,
                                     std::span<const double> overlaps);

/// True when every prediction is the same class (vacuously true when empty).
bool detect_failed_run(std::span<const int> preds);

}  // namespace gibert
