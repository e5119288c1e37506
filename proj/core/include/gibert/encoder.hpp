#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gibert/graph.hpp"
#include "gibert/model_config.hpp"
#include "gibert/model_params.hpp"
#include "gibert/ops.hpp"
#include "gibert/rng.hpp"
#include "gibert/wordpiece.hpp"

namespace gibert {

/// One packed sentence pair plus its aligned injection rows (may be empty
/// when the model does not inject).
struct ModelInput {
  const WordPieceSequence* sequence = nullptr;
  const Tensor* injection = nullptr;
};

/// Sequences stacked row-wise: example b occupies rows [b * seq_len, (b + 1) * seq_len).
struct EncoderBatch {
  std::size_t batch = 0;
  std::size_t seq_len = 0;
  std::vector<std::int32_t> piece_ids;
  std::vector<std::int32_t> segment_ids;
  std::vector<std::int32_t> positions;
  std::vector<std::uint8_t> mask;
  Tensor injection;  // [batch * seq_len, E], or empty

  ad::AttentionLayout self_attention_layout(std::size_t heads) const;
};

/// Stacks inputs into a batch. With `trim_padding`, every sequence is cut to
/// the longest non-padding length in the batch; padding never influences
/// non-padding outputs, so this only saves work.
EncoderBatch make_batch(std::span<const ModelInput> inputs, bool trim_padding = true);

/// LayerNorm(E^W + E^P + E^S) for every position.
ad::Var embed_inputs(ad::Graph& g, const EncoderBatch& batch, ModelParams& params, const ModelConfig& config);

/// [head_1; ...; head_A] W^O + b^O, each head attending from query_in to key_in.
ad::Var multihead_attention(ad::Graph& g, ad::Var query_in, ad::Var key_in, ad::Var value_in,
                            AttentionParams& weights, const ad::AttentionLayout& layout);

/// Post-norm encoder block:
///   M = LayerNorm(H + MultiHeadAtt(H)),  H' = LayerNorm(M + FFN(M)), FFN with GELU.
/// `dropout_rng` enables dropout on sublayer outputs when config.dropout > 0.
ad::Var transformer_block(ad::Graph& g, ad::Var hidden, BlockParams& block, const ModelConfig& config,
                          const ad::AttentionLayout& layout, Rng* dropout_rng = nullptr);

/// P = tanh(I W^T + b). Entries lie strictly inside (-1, 1).
ad::Var project_injection(ad::Graph& g, ad::Var injection, ProjectionParams& projection);

/// H + g (.) P, with g broadcast over rows.
ad::Var inject_gated(ad::Var hidden, ad::Var projected, ad::Var gate);
/// H + P
ad::Var inject_ungated(ad::Var hidden, ad::Var projected);
/// H + MultiHeadAtt(H, I, I): queries from the encoder, keys and values from
/// the injection rows, padding keys masked.
ad::Var inject_attention(ad::Graph& g, ad::Var hidden, ad::Var injection, AttentionParams& weights,
                         const ad::AttentionLayout& layout);

/// Applies the configured injection to `hidden`. Identity for mode none.
ad::Var apply_injection(ad::Graph& g, ad::Var hidden, const EncoderBatch& batch, ModelParams& params,
                        const ModelConfig& config);

/// Logits W^L c + b^L where c is each example's first ([CLS]) row.
ad::Var classify(ad::Graph& g, ad::Var hidden, const EncoderBatch& batch, ModelParams& params);

struct ForwardResult {
  ad::Var logits;         // [batch, C]
  ad::Var probabilities;  // softmax over classes
};

/// Embedding layer, blocks 1..L with the injection applied after block
/// `injection_layer` (0 = straight after the embedding layer), classifier.
ForwardResult forward(ad::Graph& g, const EncoderBatch& batch, const ModelConfig& config, ModelParams& params,
                      Rng* dropout_rng = nullptr);

/// Class probabilities [batch, C] without recording gradients.
Tensor predict(const EncoderBatch& batch, const ModelConfig& config, const ModelParams& params);

}  // namespace gibert
