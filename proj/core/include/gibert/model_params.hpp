#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "gibert/grad_check.hpp"
#include "gibert/model_config.hpp"
#include "gibert/rng.hpp"
#include "gibert/tensor.hpp"

namespace gibert {

/// Weights of one multi-head attention unit. Inputs are multiplied on the
/// left: Q = x_q W^Q + b^Q with W^Q of shape [query_in, D], likewise for K
/// and V with [key_in, D]; the output projection W^O is [D, D].
struct AttentionParams {
  Tensor query_weight, query_bias;
  Tensor key_weight, key_bias;
  Tensor value_weight, value_bias;
  Tensor output_weight, output_bias;
};

struct BlockParams {
  AttentionParams attention;
  Tensor attention_norm_gamma, attention_norm_beta;
  Tensor ffn_in_weight, ffn_in_bias;    // [D, F], [F]
  Tensor ffn_out_weight, ffn_out_bias;  // [F, D], [D]
  Tensor ffn_norm_gamma, ffn_norm_beta;
};

/// P = tanh(I W^T + b) with W of shape [D, E].
struct ProjectionParams {
  Tensor weight, bias;
};

/// Every trainable tensor of the encoder plus whatever the injection mode adds.
class ModelParams {
 public:
  /// Matrices ~ truncated normal(0, init_stddev); biases and beta zero; gamma
  /// one; gate zero. Shared tensors are drawn first and in a fixed order, so
  /// two configs differing only in injection mode start from identical
  /// encoder weights.
  static ModelParams initialize(const ModelConfig& config, Rng& rng);
  /// Correct shapes, all zeros (layer-norm gamma included).
  static ModelParams zeros(const ModelConfig& config);

  Tensor word_embeddings;      // [vocab, D]
  Tensor position_embeddings;  // [max_seq_len, D]
  Tensor segment_embeddings;   // [2, D]
  Tensor embedding_norm_gamma, embedding_norm_beta;
  std::vector<BlockParams> blocks;

  std::optional<ProjectionParams> projection;        // gated, ungated
  std::optional<Tensor> gate;                        // gated: [D]
  std::optional<AttentionParams> injection_attention;  // attention: W^Q,W^O [D,D]; W^K,W^V [E,D]

  Tensor classifier_weight;  // [C, D]
  Tensor classifier_bias;    // [C]

  /// Stable, fully-qualified names in a fixed order.
  std::vector<ad::NamedTensor> named();
  std::vector<Tensor*> tensors();
  /// Only the tensors the injection mechanism adds.
  std::vector<ad::NamedTensor> injection_tensors();

  std::size_t parameter_count() const;
  std::size_t injection_parameter_count() const;

  void zero_grad();
  void set_requires_grad(bool on);
};

}  // namespace gibert
