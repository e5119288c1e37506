#include "gibert/model_params.hpp"

#include <string>

namespace gibert {
namespace {

Tensor random_matrix(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
  Tensor t({rows, cols});
  for (double& x : t.data()) x = rng.truncated_normal(stddev);
  return t;
}

Tensor ones(std::size_t n) { return Tensor({n}, 1.0); }
Tensor zeros(std::size_t n) { return Tensor({n}, 0.0); }

AttentionParams make_attention(std::size_t query_in, std::size_t key_in, std::size_t d, double stddev, Rng* rng) {
  auto matrix = [&](std::size_t r) { return rng ? random_matrix(r, d, stddev, *rng) : Tensor({r, d}); };
  AttentionParams a;
  a.query_weight = matrix(query_in);
  a.query_bias = zeros(d);
  a.key_weight = matrix(key_in);
  a.key_bias = zeros(d);
  a.value_weight = matrix(key_in);
  a.value_bias = zeros(d);
  a.output_weight = matrix(d);
  a.output_bias = zeros(d);
  return a;
}

void append_attention(std::vector<ad::NamedTensor>& out, const std::string& prefix, AttentionParams& a) {
  out.push_back({prefix + ".query.weight", &a.query_weight});
  out.push_back({prefix + ".query.bias", &a.query_bias});
  out.push_back({prefix + ".key.weight", &a.key_weight});
  out.push_back({prefix + ".key.bias", &a.key_bias});
  out.push_back({prefix + ".value.weight", &a.value_weight});
  out.push_back({prefix + ".value.bias", &a.value_bias});
  out.push_back({prefix + ".output.weight", &a.output_weight});
  out.push_back({prefix + ".output.bias", &a.output_bias});
}

// rng == nullptr produces zero-filled tensors of the right shapes.
ModelParams build(const ModelConfig& cfg, Rng* rng) {
  cfg.validate();
  const std::size_t d = cfg.hidden;
  const double sd = cfg.init_stddev;
  auto matrix = [&](std::size_t r, std::size_t c) { return rng ? random_matrix(r, c, sd, *rng) : Tensor({r, c}); };
  auto gamma = [&](std::size_t n) { return rng ? ones(n) : zeros(n); };

  ModelParams p;
  p.word_embeddings = matrix(cfg.vocab_size, d);
  p.position_embeddings = matrix(cfg.max_seq_len, d);
  p.segment_embeddings = matrix(2, d);
  p.embedding_norm_gamma = gamma(d);
  p.embedding_norm_beta = zeros(d);

  p.blocks.reserve(cfg.layers);
  for (std::size_t i = 0; i < cfg.layers; ++i) {
    BlockParams b;
    b.attention = make_attention(d, d, d, sd, rng);
    b.attention_norm_gamma = gamma(d);
    b.attention_norm_beta = zeros(d);
    b.ffn_in_weight = matrix(d, cfg.ffn);
    b.ffn_in_bias = zeros(cfg.ffn);
    b.ffn_out_weight = matrix(cfg.ffn, d);
    b.ffn_out_bias = zeros(d);
    b.ffn_norm_gamma = gamma(d);
    b.ffn_norm_beta = zeros(d);
    p.blocks.push_back(std::move(b));
  }

  p.classifier_weight = matrix(cfg.num_classes, d);
  p.classifier_bias = zeros(cfg.num_classes);

  // Injection tensors come last so the shared weights above do not depend on
  // the injection mode.
  switch (cfg.mode) {
    case InjectionMode::none:
      break;
    case InjectionMode::gated:
      p.projection = ProjectionParams{matrix(d, cfg.embedding_dim), zeros(d)};
      p.gate = zeros(d);
      break;
    case InjectionMode::ungated:
      p.projection = ProjectionParams{matrix(d, cfg.embedding_dim), zeros(d)};
      break;
    case InjectionMode::attention:
      p.injection_attention = make_attention(d, cfg.embedding_dim, d, sd, rng);
      break;
  }
  p.set_requires_grad(true);
  return p;
}

}  // namespace

ModelParams ModelParams::initialize(const ModelConfig& config, Rng& rng) { return build(config, &rng); }

ModelParams ModelParams::zeros(const ModelConfig& config) { return build(config, nullptr); }

std::vector<ad::NamedTensor> ModelParams::named() {
  std::vector<ad::NamedTensor> out;
  out.push_back({"embeddings.word", &word_embeddings});
  out.push_back({"embeddings.position", &position_embeddings});
  out.push_back({"embeddings.segment", &segment_embeddings});
  out.push_back({"embeddings.norm.gamma", &embedding_norm_gamma});
  out.push_back({"embeddings.norm.beta", &embedding_norm_beta});
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    BlockParams& b = blocks[i];
    const std::string prefix = "block." + std::to_string(i);
    append_attention(out, prefix + ".attention", b.attention);
    out.push_back({prefix + ".attention_norm.gamma", &b.attention_norm_gamma});
    out.push_back({prefix + ".attention_norm.beta", &b.attention_norm_beta});
    out.push_back({prefix + ".ffn.in.weight", &b.ffn_in_weight});
    out.push_back({prefix + ".ffn.in.bias", &b.ffn_in_bias});
    out.push_back({prefix + ".ffn.out.weight", &b.ffn_out_weight});
    out.push_back({prefix + ".ffn.out.bias", &b.ffn_out_bias});
    out.push_back({prefix + ".ffn_norm.gamma", &b.ffn_norm_gamma});
    out.push_back({prefix + ".ffn_norm.beta", &b.ffn_norm_beta});
  }
  for (auto& t : injection_tensors()) out.push_back(std::move(t));
  out.push_back({"classifier.weight", &classifier_weight});
  out.push_back({"classifier.bias", &classifier_bias});
  return out;
}

std::vector<ad::NamedTensor> ModelParams::injection_tensors() {
  std::vector<ad::NamedTensor> out;
  if (projection) {
    out.push_back({"injection.projection.weight", &projection->weight});
    out.push_back({"injection.projection.bias", &projection->bias});
  }
  if (gate) out.push_back({"injection.gate", &*gate});
  if (injection_attention) append_attention(out, "injection.attention", *injection_attention);
  return out;
}

std::vector<Tensor*> ModelParams::tensors() {
  std::vector<Tensor*> out;
  for (auto& n : named()) out.push_back(n.tensor);
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : const_cast<ModelParams*>(this)->named()) n += t.tensor->size();
  return n;
}

std::size_t ModelParams::injection_parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : const_cast<ModelParams*>(this)->injection_tensors()) n += t.tensor->size();
  return n;
}

void ModelParams::zero_grad() {
  for (Tensor* t : tensors()) t->zero_grad();
}

void ModelParams::set_requires_grad(bool on) {
  for (Tensor* t : tensors()) t->set_requires_grad(on);
}

}  // namespace gibert
