#pragma once

#include <span>
#include <string>

#include "gibert/embedding_store.hpp"
#include "gibert/tensor.hpp"
#include "gibert/wordpiece.hpp"

namespace gibert {

/// Aligns external word vectors with a packed word-piece sequence.
///
/// Returns an N x E matrix (N = seq.length(), padding included). Row j is the
/// vector of the source token position j came from, so every piece of a
/// split word repeats the same row. [CLS], [SEP], and [PAD] rows are zero;
/// unknown words get the store's OOV vector.
Tensor build_injection_sequence(const WordPieceSequence& seq, std::span<const std::string> first_tokens,
                                std::span<const std::string> second_tokens, const EmbeddingStore& store);

}  // namespace gibert
