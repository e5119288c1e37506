#include "gibert/injection_sequence.hpp"

#include <algorithm>

#include "gibert/error.hpp"

namespace gibert {

Tensor build_injection_sequence(const WordPieceSequence& seq, std::span<const std::string> first_tokens,
                                std::span<const std::string> second_tokens, const EmbeddingStore& store) {
  const std::size_t dim = store.dim();
  Tensor out({seq.length(), dim});
  for (std::size_t j = 0; j < seq.length(); ++j) {
    const auto& origin = seq.alignment[j];
    if (!origin) continue;
    std::span<const std::string> tokens = origin->sentence == 1 ? first_tokens : second_tokens;
    if (origin->sentence != 1 && origin->sentence != 2) {
      throw DataError("alignment references sentence " + std::to_string(origin->sentence));
    }
    if (origin->token >= tokens.size()) {
      throw DataError("alignment references token " + std::to_string(origin->token) + " of a " +
                      std::to_string(tokens.size()) + "-token sentence");
    }
    auto vec = store.lookup(tokens[origin->token]);
    std::copy(vec.begin(), vec.end(), out.row(j).begin());
  }
  return out;
}

}  // namespace gibert
