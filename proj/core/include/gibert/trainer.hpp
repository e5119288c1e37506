#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gibert/dataset.hpp"
#include "gibert/model_config.hpp"
#include "gibert/model_params.hpp"

namespace gibert {

struct TrainConfig {
  std::size_t epochs = 3;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  /// Dev evaluation cadence in optimizer steps.
  std::size_t eval_every = 50;
  /// Evaluations without a strict dev-F1 improvement before stopping.
  std::size_t patience = 3;
  /// Pins the gate at its initial value (debug aid: gated == none).
  bool freeze_gate = false;

  void validate() const;
  std::map<std::string, std::string> to_key_values() const;
  static TrainConfig from_key_values(const std::map<std::string, std::string>& values);
};

/// Tracks the best metric seen and how many evaluations passed without a
/// strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Records one evaluation; returns true when it is a new best.
  bool observe(double metric);
  bool should_stop() const noexcept { return patience_ > 0 && stale_ >= patience_; }
  double best() const noexcept { return best_; }
  std::size_t evaluations() const noexcept { return evaluations_; }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  std::size_t evaluations_ = 0;
  double best_ = 0.0;
};

struct EvalPoint {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean loss since the previous evaluation
  double dev_f1 = 0.0;
  bool improved = false;
};

struct TrainResult {
  ModelParams best_params;
  std::vector<EvalPoint> history;
  std::size_t steps = 0;
  std::size_t best_step = 0;
  double best_dev_f1 = 0.0;
  bool stopped_early = false;
  int majority_label = 0;
};

/// Most frequent label (ties go to 0).
int majority_label(std::span<const EncodedExample> examples);

/// Mini-batch Adam on mean cross-entropy. Batches are reshuffled every epoch
/// from a generator derived from (seed, epoch). Dev F1 is measured every
/// `eval_every` steps and after the final step; the best-scoring parameters
/// are returned. Throws NumericError on a non-finite loss, DataError on empty
/// or non-binary data.
TrainResult train(const ModelConfig& config, ModelParams params, std::span<const EncodedExample> train_set,
                  std::span<const EncodedExample> dev_set, const TrainConfig& train_config,
                  const std::function<void(const EvalPoint&)>& on_eval = {});

/// Predicted class per example (argmax), evaluated in batches.
std::vector<int> predict_labels(const ModelConfig& config, const ModelParams& params,
                                std::span<const EncodedExample> examples, std::size_t batch_size = 32);

}  // namespace gibert
