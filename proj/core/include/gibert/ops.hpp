#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gibert/graph.hpp"
#include "gibert/rng.hpp"

namespace gibert::ad {

// Element-wise and reductions. Binary element-wise ops require equal shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var sum(Var a);
Var mean(Var a);

/// x[..., n] + bias[n], bias repeated over every row.
Var add_bias(Var x, Var bias);
/// x[m, n] scaled column-wise by v[n]: out[r, c] = v[c] * x[r, c].
Var mul_rows(Var x, Var v);

/// A[m, k] * B[k, n].
Var matmul(Var a, Var b);
/// A[m, k] * B[n, k]^T.
Var matmul_transposed(Var a, Var b);

Var tanh(Var x);
/// Exact (erf) GELU.
Var gelu(Var x);

/// Normalizes over the last axis; gamma and beta have the last axis' extent.
Var layer_norm(Var x, Var gamma, Var beta, double eps);
/// Softmax along `axis`, max-subtracted.
Var softmax(Var x, std::size_t axis);

/// Mean cross-entropy of softmax(logits[b, c]) against integer targets.
Var cross_entropy(Var logits, std::span<const int> targets);

/// Rows of table[v, d] selected by `ids` (duplicates allowed).
Var gather_rows(Var table, std::span<const std::int32_t> ids);

/// Inverted dropout with keep probability 1 - p. Identity when p == 0.
Var dropout(Var x, double p, Rng& rng);

/// Layout of a fused multi-head attention call. Queries hold `batch` groups of
/// `query_len` rows, keys/values `batch` groups of `key_len` rows, and each
/// query only attends within its own group.
struct AttentionLayout {
  std::size_t batch = 1;
  std::size_t query_len = 0;
  std::size_t key_len = 0;
  std::size_t heads = 1;
  /// One entry per key row (batch * key_len); 0 marks a padding key. Empty
  /// means no masking.
  std::span<const std::uint8_t> key_mask;
};

/// Additive logit applied to masked keys.
inline constexpr double kMaskedLogit = -1e9;

/// softmax(q_h k_h^T / sqrt(d_h) + mask) v_h for every head h, with heads
/// concatenated along columns. q and k share their column count.
Var scaled_dot_attention(Var q, Var k, Var v, const AttentionLayout& layout);

/// Attention probabilities as computed inside scaled_dot_attention, laid out
/// [batch * heads * query_len, key_len]. Not recorded on any graph.
Tensor attention_weights(const Tensor& q, const Tensor& k, const AttentionLayout& layout);

}  // namespace gibert::ad
