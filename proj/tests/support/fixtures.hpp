#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gibert/dataset.hpp"
#include "gibert/embedding_store.hpp"
#include "gibert/model_config.hpp"
#include "gibert/model_params.hpp"
#include "gibert/rng.hpp"
#include "gibert/tensor.hpp"
#include "gibert/wordpiece.hpp"

namespace gibert::testing {

/// Vocab with the specials, a-z, ##a-##z and a handful of words, including
/// "pro" and "##mpt" so "prompt" splits in two.
WordPieceVocab small_vocab();

/// Deterministic store over the whole words of small_vocab() plus "prompt".
EmbeddingStore small_store(std::size_t dim, std::uint64_t seed = 3);

Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0);

/// Initialized params with every tensor redrawn uniformly in [-scale, scale]
/// (layer-norm gamma around 1). Gate included: nonzero values exercise it.
ModelParams random_params(const ModelConfig& config, Rng& rng, double scale = 0.5);

/// Tiny model config for exhaustive checks.
ModelConfig tiny_config(InjectionMode mode, std::size_t vocab_size, std::size_t embedding_dim);

/// Random sentence of 1..max_words words drawn from `words`.
std::string random_sentence(const std::vector<std::string>& words, std::size_t max_words, Rng& rng);

/// The word list behind small_vocab().
const std::vector<std::string>& small_words();

/// Encoded random pairs over small_vocab()/small_store().
std::vector<EncodedExample> random_examples(std::size_t count, const WordPieceVocab& vocab,
                                            const EmbeddingStore& store, std::size_t max_seq_len, Rng& rng);

}  // namespace gibert::testing
