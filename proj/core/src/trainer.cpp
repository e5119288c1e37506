#include "gibert/trainer.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "gibert/adam.hpp"
#include "gibert/encoder.hpp"
#include "gibert/error.hpp"
#include "gibert/metrics.hpp"

namespace gibert {
namespace {

template <typename T>
T parse_value(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("'" + key + "' has invalid value '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + value + "'");
}

// Shortest text that parses back to the same double.
std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void check_labels(std::span<const EncodedExample> examples, const char* which) {
  if (examples.empty()) throw DataError(std::string(which) + " set is empty");
  for (const EncodedExample& ex : examples) {
    if (ex.label != 0 && ex.label != 1) {
      throw DataError(std::string(which) + " example '" + ex.id + "' has non-binary label " + std::to_string(ex.label));
    }
  }
}

EncoderBatch batch_of(std::span<const EncodedExample> examples, std::span<const std::size_t> indices) {
  std::vector<ModelInput> inputs;
  inputs.reserve(indices.size());
  for (std::size_t i : indices) inputs.push_back({&examples[i].sequence, &examples[i].injection});
  return make_batch(inputs);
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be at least 1");
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
  if (eval_every == 0) throw ConfigError("eval_every must be at least 1");
}

std::map<std::string, std::string> TrainConfig::to_key_values() const {
  return {{"epochs", std::to_string(epochs)},
          {"batch_size", std::to_string(batch_size)},
          {"learning_rate", format_real(learning_rate)},
          {"seed", std::to_string(seed)},
          {"eval_every", std::to_string(eval_every)},
          {"patience", std::to_string(patience)},
          {"freeze_gate", freeze_gate ? "true" : "false"}};
}

TrainConfig TrainConfig::from_key_values(const std::map<std::string, std::string>& values) {
  TrainConfig cfg;
  for (const auto& [key, value] : values) {
    if (key == "epochs") cfg.epochs = parse_value<std::size_t>(key, value);
    else if (key == "batch_size") cfg.batch_size = parse_value<std::size_t>(key, value);
    else if (key == "learning_rate") cfg.learning_rate = parse_value<double>(key, value);
    else if (key == "seed") cfg.seed = parse_value<std::uint64_t>(key, value);
    else if (key == "eval_every") cfg.eval_every = parse_value<std::size_t>(key, value);
    else if (key == "patience") cfg.patience = parse_value<std::size_t>(key, value);
    else if (key == "freeze_gate") cfg.freeze_gate = parse_bool(key, value);
    else throw ConfigError("unknown training setting '" + key + "'");
  }
  return cfg;
}

bool EarlyStopping::observe(double metric) {
  ++evaluations_;
  if (evaluations_ == 1 || metric > best_) {
    best_ = metric;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

int majority_label(std::span<const EncodedExample> examples) {
  std::size_t positives = 0;
  for (const EncodedExample& ex : examples) positives += ex.label == 1 ? 1 : 0;
  return positives * 2 > examples.size() ? 1 : 0;
}

std::vector<int> predict_labels(const ModelConfig& config, const ModelParams& params,
                                std::span<const EncodedExample> examples, std::size_t batch_size) {
  std::vector<int> preds;
  preds.reserve(examples.size());
  std::vector<std::size_t> indices;
  for (std::size_t start = 0; start < examples.size(); start += batch_size) {
    indices.clear();
    for (std::size_t i = start; i < std::min(examples.size(), start + batch_size); ++i) indices.push_back(i);
    const Tensor probs = predict(batch_of(examples, indices), config, params);
    for (std::size_t r = 0; r < indices.size(); ++r) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < probs.cols(); ++c) {
        if (probs(r, c) > probs(r, best)) best = c;
      }
      preds.push_back(static_cast<int>(best));
    }
  }
  return preds;
}

TrainResult train(const ModelConfig& config, ModelParams params, std::span<const EncodedExample> train_set,
                  std::span<const EncodedExample> dev_set, const TrainConfig& train_config,
                  const std::function<void(const EvalPoint&)>& on_eval) {
  config.validate();
  train_config.validate();
  check_labels(train_set, "training");
  check_labels(dev_set, "dev");

  std::vector<int> dev_golds;
  for (const EncodedExample& ex : dev_set) dev_golds.push_back(ex.label);

  params.set_requires_grad(true);
  if (train_config.freeze_gate && params.gate) params.gate->set_requires_grad(false);
  std::vector<Tensor*> trainable;
  for (Tensor* t : params.tensors()) {
    if (t->requires_grad()) trainable.push_back(t);
  }
  ad::AdamState adam(trainable);
  const ad::AdamOptions adam_options{.learning_rate = train_config.learning_rate};

  Rng root(train_config.seed);
  Rng dropout_rng = root.fork(1);

  TrainResult result;
  result.majority_label = majority_label(train_set);
  result.best_params = params;
  EarlyStopping stopper(train_config.patience);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  std::size_t last_eval_step = 0;
  std::size_t epoch = 0;

  auto evaluate_dev = [&]() {
    EvalPoint point;
    point.step = result.steps;
    point.epoch = epoch;
    point.train_loss = loss_count == 0 ? 0.0 : loss_sum / static_cast<double>(loss_count);
    point.dev_f1 = f1_binary(predict_labels(config, params, dev_set), dev_golds);
    point.improved = stopper.observe(point.dev_f1);
    if (point.improved) {
      result.best_params = params;
      result.best_dev_f1 = point.dev_f1;
      result.best_step = result.steps;
    }
    result.history.push_back(point);
    if (on_eval) on_eval(point);
    loss_sum = 0.0;
    loss_count = 0;
    last_eval_step = result.steps;
  };

  for (epoch = 1; epoch <= train_config.epochs && !result.stopped_early; ++epoch) {
    Rng shuffle_rng = Rng(train_config.seed).fork(1000 + epoch);
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += train_config.batch_size) {
      const std::size_t end = std::min(order.size(), start + train_config.batch_size);
      const std::span<const std::size_t> indices(order.data() + start, end - start);
      const EncoderBatch batch = batch_of(train_set, indices);
      std::vector<int> targets;
      for (std::size_t i : indices) targets.push_back(train_set[i].label);

      for (Tensor* t : trainable) t->zero_grad();
      ad::Graph graph;
      ForwardResult fwd = forward(graph, batch, config, params, &dropout_rng);
      ad::Var loss = ad::cross_entropy(fwd.logits, targets);
      const double loss_value = loss.value().item();
      if (!std::isfinite(loss_value)) {
        throw NumericError("non-finite training loss at step " + std::to_string(result.steps + 1) + " (epoch " +
                           std::to_string(epoch) + ")");
      }
      graph.backward(loss);
      ad::adam_step(trainable, adam, adam_options);
      ++result.steps;
      loss_sum += loss_value;
      ++loss_count;

      if (result.steps % train_config.eval_every == 0) {
        evaluate_dev();
        if (stopper.should_stop()) {
          result.stopped_early = true;
          break;
        }
      }
    }
  }
  if (last_eval_step != result.steps || result.history.empty()) {
    epoch = std::min(epoch, train_config.epochs);
    evaluate_dev();
  }
  for (Tensor* t : result.best_params.tensors()) t->clear_grad();
  return result;
}

}  // namespace gibert
