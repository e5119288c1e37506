#include "gibert/metrics.hpp"

#include <algorithm>
#include <set>

#include "gibert/error.hpp"

namespace gibert {

Confusion confusion(std::span<const int> preds, std::span<const int> golds) {
  if (preds.size() != golds.size()) {
    throw DimensionError(std::to_string(preds.size()) + " predictions for " + std::to_string(golds.size()) + " labels");
  }
  Confusion c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int p = preds[i];
    const int g = golds[i];
    if ((p != 0 && p != 1) || (g != 0 && g != 1)) throw DataError("binary metrics need labels in {0, 1}");
    if (p == 1 && g == 1) ++c.tp;
    else if (p == 1) ++c.fp;
    else if (g == 1) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double f1_score(const Confusion& c) {
  const double precision = c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double recall = c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double f1_binary(std::span<const int> preds, std::span<const int> golds) { return f1_score(confusion(preds, golds)); }

double accuracy(const Confusion& c) {
  if (c.total() == 0) return 0.0;
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double lexical_overlap(std::span<const std::string> first, std::span<const std::string> second) {
  const std::set<std::string> a(first.begin(), first.end());
  const std::set<std::string> b(second.begin(), second.end());
  if (a.empty() && b.empty()) return 1.0;
  std::size_t shared = 0;
  for (const std::string& t : a) shared += b.contains(t) ? 1 : 0;
  const std::size_t uni = a.size() + b.size() - shared;
  return static_cast<double>(shared) / static_cast<double>(uni);
}

double median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<bool> non_obvious_mask(std::span<const int> golds, std::span<const double> overlaps) {
  if (golds.size() != overlaps.size()) {
    throw DimensionError(std::to_string(overlaps.size()) + " overlaps for " + std::to_string(golds.size()) + " labels");
  }
  std::vector<bool> mask(golds.size(), false);
  if (golds.empty()) return mask;
  const double m = median(std::vector<double>(overlaps.begin(), overlaps.end()));
  for (std::size_t i = 0; i < golds.size(); ++i) {
    mask[i] = (golds[i] == 1 && overlaps[i] < m) || (golds[i] == 0 && overlaps[i] >= m);
  }
  return mask;
}

std::optional<double> non_obvious_f1(std::span<const int> preds, std::span<const int> golds,
                                     std::span<const double> overlaps) {
  if (preds.size() != golds.size()) {
    throw DimensionError(std::to_string(preds.size()) + " predictions for " + std::to_string(golds.size()) + " labels");
  }
  const std::vector<bool> mask = non_obvious_mask(golds, overlaps);
  std::vector<int> p, g;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    p.push_back(preds[i]);
    g.push_back(golds[i]);
  }
  if (p.empty()) return std::nullopt;
  return f1_binary(p, g);
}

bool detect_failed_run(std::span<const int> preds) {
  if (preds.empty()) return true;
  return std::all_of(preds.begin(), preds.end(), [&](int p) { return p == preds.front(); });
}

}  // namespace gibert
