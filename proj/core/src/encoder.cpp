#include "gibert/encoder.hpp"

#include <algorithm>
#include <string>

#include "gibert/error.hpp"

namespace gibert {

using ad::Graph;
using ad::Var;

ad::AttentionLayout EncoderBatch::self_attention_layout(std::size_t heads) const {
  ad::AttentionLayout layout;
  layout.batch = batch;
  layout.query_len = seq_len;
  layout.key_len = seq_len;
  layout.heads = heads;
  layout.key_mask = mask;
  return layout;
}

EncoderBatch make_batch(std::span<const ModelInput> inputs, bool trim_padding) {
  if (inputs.empty()) throw DataError("make_batch: no inputs");
  EncoderBatch batch;
  batch.batch = inputs.size();
  std::size_t full = inputs.front().sequence->length();
  std::size_t longest = 0;
  for (const ModelInput& in : inputs) {
    if (in.sequence->length() != full) throw DimensionError("make_batch: sequences differ in padded length");
    longest = std::max(longest, in.sequence->content_length());
  }
  batch.seq_len = trim_padding ? longest : full;

  const bool with_injection = inputs.front().injection != nullptr && !inputs.front().injection->empty();
  const std::size_t e = with_injection ? inputs.front().injection->cols() : 0;
  if (with_injection) batch.injection = Tensor({batch.batch * batch.seq_len, e});

  const std::size_t n = batch.seq_len;
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    const WordPieceSequence& seq = *inputs[b].sequence;
    batch.piece_ids.insert(batch.piece_ids.end(), seq.piece_ids.begin(), seq.piece_ids.begin() + n);
    batch.segment_ids.insert(batch.segment_ids.end(), seq.segment_ids.begin(), seq.segment_ids.begin() + n);
    batch.mask.insert(batch.mask.end(), seq.mask.begin(), seq.mask.begin() + n);
    for (std::size_t j = 0; j < n; ++j) batch.positions.push_back(static_cast<std::int32_t>(j));
    if (with_injection) {
      const Tensor* inj = inputs[b].injection;
      if (inj == nullptr || inj->rank() != 2 || inj->dim(0) != full || inj->dim(1) != e) {
        throw DimensionError("make_batch: injection rows must be [" + std::to_string(full) + " x " +
                             std::to_string(e) + "] for every input");
      }
      std::copy_n(inj->data().begin(), n * e, batch.injection.data().begin() + b * n * e);
    }
  }
  return batch;
}

Var embed_inputs(Graph& g, const EncoderBatch& batch, ModelParams& params, const ModelConfig& config) {
  if (batch.seq_len > config.max_seq_len) {
    throw DimensionError("sequence length " + std::to_string(batch.seq_len) + " exceeds max_seq_len " +
                         std::to_string(config.max_seq_len));
  }
  Var words = ad::gather_rows(g.parameter(params.word_embeddings), batch.piece_ids);
  Var positions = ad::gather_rows(g.parameter(params.position_embeddings), batch.positions);
  Var segments = ad::gather_rows(g.parameter(params.segment_embeddings), batch.segment_ids);
  Var summed = ad::add(ad::add(words, positions), segments);
  return ad::layer_norm(summed, g.parameter(params.embedding_norm_gamma), g.parameter(params.embedding_norm_beta),
                        config.layer_norm_eps);
}

Var multihead_attention(Graph& g, Var query_in, Var key_in, Var value_in, AttentionParams& w,
                        const ad::AttentionLayout& layout) {
  Var q = ad::add_bias(ad::matmul(query_in, g.parameter(w.query_weight)), g.parameter(w.query_bias));
  // A key bias shifts every logit of a query row by the same q.b, which the
  // softmax cancels. The tensor stays in the parameter set but is left out of
  // the arithmetic, so its gradient is an exact zero rather than roundoff.
  Var k = ad::matmul(key_in, g.parameter(w.key_weight));
  Var v = ad::add_bias(ad::matmul(value_in, g.parameter(w.value_weight)), g.parameter(w.value_bias));
  Var heads = ad::scaled_dot_attention(q, k, v, layout);
  return ad::add_bias(ad::matmul(heads, g.parameter(w.output_weight)), g.parameter(w.output_bias));
}

Var transformer_block(Graph& g, Var hidden, BlockParams& block, const ModelConfig& config,
                      const ad::AttentionLayout& layout, Rng* dropout_rng) {
  auto maybe_dropout = [&](Var x) {
    return dropout_rng != nullptr && config.dropout > 0.0 ? ad::dropout(x, config.dropout, *dropout_rng) : x;
  };
  Var attended = maybe_dropout(multihead_attention(g, hidden, hidden, hidden, block.attention, layout));
  Var mid = ad::layer_norm(ad::add(hidden, attended), g.parameter(block.attention_norm_gamma),
                           g.parameter(block.attention_norm_beta), config.layer_norm_eps);
  Var inner = ad::gelu(ad::add_bias(ad::matmul(mid, g.parameter(block.ffn_in_weight)), g.parameter(block.ffn_in_bias)));
  Var ffn = maybe_dropout(
      ad::add_bias(ad::matmul(inner, g.parameter(block.ffn_out_weight)), g.parameter(block.ffn_out_bias)));
  return ad::layer_norm(ad::add(mid, ffn), g.parameter(block.ffn_norm_gamma), g.parameter(block.ffn_norm_beta),
                        config.layer_norm_eps);
}

Var project_injection(Graph& g, Var injection, ProjectionParams& projection) {
  if (injection.value().cols() != projection.weight.cols()) {
    throw DimensionError("project_injection: injection width " + std::to_string(injection.value().cols()) +
                         " does not match projection " + shape_string(projection.weight.shape()));
  }
  return ad::tanh(ad::add_bias(ad::matmul_transposed(injection, g.parameter(projection.weight)),
                               g.parameter(projection.bias)));
}

Var inject_gated(Var hidden, Var projected, Var gate) { return ad::add(hidden, ad::mul_rows(projected, gate)); }

Var inject_ungated(Var hidden, Var projected) { return ad::add(hidden, projected); }

Var inject_attention(Graph& g, Var hidden, Var injection, AttentionParams& weights, const ad::AttentionLayout& layout) {
  return ad::add(hidden, multihead_attention(g, hidden, injection, injection, weights, layout));
}

Var apply_injection(Graph& g, Var hidden, const EncoderBatch& batch, ModelParams& params, const ModelConfig& config) {
  if (config.mode == InjectionMode::none) return hidden;
  if (batch.injection.empty()) {
    throw DimensionError("injection mode " + std::string(to_string(config.mode)) + " needs injection rows");
  }
  Var injection = g.constant(batch.injection);
  switch (config.mode) {
    case InjectionMode::gated:
      return inject_gated(hidden, project_injection(g, injection, *params.projection), g.parameter(*params.gate));
    case InjectionMode::ungated:
      return inject_ungated(hidden, project_injection(g, injection, *params.projection));
    case InjectionMode::attention:
      return inject_attention(g, hidden, injection, *params.injection_attention,
                              batch.self_attention_layout(config.heads));
    case InjectionMode::none:
      break;
  }
  return hidden;
}

Var classify(Graph& g, Var hidden, const EncoderBatch& batch, ModelParams& params) {
  std::vector<std::int32_t> cls_rows(batch.batch);
  for (std::size_t b = 0; b < batch.batch; ++b) cls_rows[b] = static_cast<std::int32_t>(b * batch.seq_len);
  Var cls = ad::gather_rows(hidden, cls_rows);
  return ad::add_bias(ad::matmul_transposed(cls, g.parameter(params.classifier_weight)),
                      g.parameter(params.classifier_bias));
}

ForwardResult forward(Graph& g, const EncoderBatch& batch, const ModelConfig& config, ModelParams& params,
                      Rng* dropout_rng) {
  if (params.blocks.size() != config.layers) throw ConfigError("parameters do not match the configured layer count");
  const ad::AttentionLayout layout = batch.self_attention_layout(config.heads);
  Var hidden = embed_inputs(g, batch, params, config);
  if (dropout_rng != nullptr && config.dropout > 0.0) hidden = ad::dropout(hidden, config.dropout, *dropout_rng);
  if (config.injection_layer == 0) hidden = apply_injection(g, hidden, batch, params, config);
  for (std::size_t i = 0; i < config.layers; ++i) {
    hidden = transformer_block(g, hidden, params.blocks[i], config, layout, dropout_rng);
    if (config.injection_layer == i + 1) hidden = apply_injection(g, hidden, batch, params, config);
  }
  Var logits = classify(g, hidden, batch, params);
  return {logits, ad::softmax(logits, 1)};
}

Tensor predict(const EncoderBatch& batch, const ModelConfig& config, const ModelParams& params) {
  Graph g(Graph::Mode::inference);
  // Inference graphs never write to parameters.
  ForwardResult result = forward(g, batch, config, const_cast<ModelParams&>(params));
  return result.probabilities.value();
}

}  // namespace gibert
