#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>

namespace gibert {

/// How external embeddings enter the encoder.
enum class InjectionMode {
  none,       // plain encoder
  gated,      // H' = H + g * tanh(I W^T + b)
  ungated,    // H' = H + tanh(I W^T + b)
  attention,  // H' = H + MultiHeadAtt(H, I, I)
};

std::string_view to_string(InjectionMode mode);
InjectionMode parse_injection_mode(std::string_view text);

struct ModelConfig {
  std::size_t layers = 4;
  std::size_t hidden = 64;
  std::size_t embedding_dim = 16;
  std::size_t heads = 4;
  std::size_t ffn = 256;
  std::size_t max_seq_len = 64;
  std::size_t vocab_size = 0;
  std::size_t num_classes = 2;
  InjectionMode mode = InjectionMode::none;
  /// 0 injects into the embedding-layer output; k >= 1 after block k.
  std::size_t injection_layer = 0;
  double layer_norm_eps = 1e-12;
  double dropout = 0.0;
  double init_stddev = 0.02;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;

  std::map<std::string, std::string> to_key_values() const;
  /// Unknown keys are rejected; missing keys keep their defaults.
  static ModelConfig from_key_values(const std::map<std::string, std::string>& values);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace gibert
