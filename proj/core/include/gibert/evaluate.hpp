#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gibert/dataset.hpp"
#include "gibert/lexicon.hpp"
#include "gibert/metrics.hpp"
#include "gibert/model_config.hpp"
#include "gibert/model_params.hpp"

namespace gibert {

struct PartitionScore {
  std::size_t count = 0;
  double fraction = 0.0;
  std::optional<double> f1;  // nullopt for an empty partition
};

/// Synonym and antonym tags may overlap, so fractions can sum above 1.
struct PartitionReport {
  PartitionScore synonym;
  PartitionScore antonym;
  PartitionScore neither;
};

struct EvalReport {
  std::size_t instances = 0;
  double f1 = 0.0;
  std::optional<double> non_obvious_f1;
  std::size_t non_obvious_count = 0;
  double accuracy = 0.0;
  bool failed_run = false;
  Confusion confusion;
  std::optional<PartitionReport> partitions;
  std::vector<std::string> notes;
};

/// Scores predictions. `overlaps` has one lexical-overlap value per instance;
/// `tags` (optional) adds the per-partition block.
EvalReport score_predictions(std::span<const int> preds, std::span<const int> golds, std::span<const double> overlaps,
                             const std::vector<PartitionTags>* tags = nullptr);

/// Runs the model over `examples` and scores it; with a lexicon, instances are
/// partitioned by the synonym/antonym pairs they straddle.
EvalReport evaluate(const ModelConfig& config, const ModelParams& params, std::span<const EncodedExample> examples,
                    const PairLexicon* lexicon = nullptr);

/// key=value lines; undefined scores print as "undefined".
std::string format_report(const EvalReport& report);

struct MetricMean {
  std::optional<double> mean;  // over defined values only
  std::size_t defined = 0;
  std::size_t undefined = 0;
};

struct AggregateReport {
  std::size_t runs = 0;
  MetricMean f1;
  MetricMean non_obvious_f1;
  MetricMean accuracy;
  std::size_t failed_runs = 0;
  /// Present when every run carried a partition block.
  struct Partition {
    MetricMean f1;
    MetricMean fraction;
  };
  std::optional<Partition> synonym, antonym, neither;
};

/// Per-metric arithmetic mean across runs (e.g. seeds). Undefined values are
/// left out of the mean and counted. Throws DataError for an empty list.
AggregateReport seed_average(std::span<const EvalReport> reports);

std::string format_report(const AggregateReport& report);

}  // namespace gibert
