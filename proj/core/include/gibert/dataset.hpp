#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gibert/embedding_store.hpp"
#include "gibert/tensor.hpp"
#include "gibert/wordpiece.hpp"

namespace gibert {

struct PairExample {
  std::string id;
  std::string first;
  std::string second;
  int label = 0;
  friend bool operator==(const PairExample&, const PairExample&) = default;
};

/// Reads id<TAB>sentence1<TAB>sentence2<TAB>label rows. A first row whose
/// last column reads "label" is treated as a header. Labels must be 0 or 1
/// and ids unique; violations throw DataError naming the line.
std::vector<PairExample> load_dataset_tsv(const std::filesystem::path& path);
void save_dataset_tsv(const std::filesystem::path& path, std::span<const PairExample> examples);

/// A sentence pair ready for the encoder.
struct EncodedExample {
  std::string id;
  WordPieceSequence sequence;
  Tensor injection;  // empty without an embedding store
  std::vector<std::string> first_tokens;
  std::vector<std::string> second_tokens;
  int label = 0;
};

/// Tokenizes, packs, and aligns external embeddings for sentence pairs.
class FeatureEncoder {
 public:
  /// `store` may be null when no injection rows are needed.
  FeatureEncoder(const WordPieceVocab& vocab, const EmbeddingStore* store, std::size_t max_seq_len)
      : vocab_(vocab), store_(store), max_seq_len_(max_seq_len) {}

  EncodedExample encode(const PairExample& example) const;
  std::vector<EncodedExample> encode_all(std::span<const PairExample> examples) const;

 private:
  const WordPieceVocab& vocab_;
  const EmbeddingStore* store_;
  std::size_t max_seq_len_;
};

}  // namespace gibert
