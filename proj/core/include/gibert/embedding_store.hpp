#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gibert/tensor.hpp"

namespace gibert {

/// What lookup() returns for a word the store does not contain.
enum class OovPolicy { zero, mean };

std::string_view to_string(OovPolicy policy);
OovPolicy parse_oov_policy(std::string_view text);

/// In-memory word-vector table loaded from a whitespace-separated text file
/// (word2vec/GloVe style, optional "count dim" header line).
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  /// Rows of `matrix` correspond to `words`; duplicates keep the first row.
  EmbeddingStore(std::vector<std::string> words, Tensor matrix, OovPolicy policy = OovPolicy::zero);

  static EmbeddingStore load(const std::filesystem::path& path, OovPolicy policy = OovPolicy::zero);
  void save(const std::filesystem::path& path) const;

  std::size_t dim() const noexcept { return matrix_.cols(); }
  std::size_t vocab_size() const noexcept { return words_.size(); }
  OovPolicy policy() const noexcept { return policy_; }
  void set_policy(OovPolicy policy) noexcept { policy_ = policy; }

  /// Number of repeated words skipped while loading.
  std::size_t duplicates_skipped() const noexcept { return duplicates_; }

  bool contains(std::string_view word) const;
  /// Exact match on the lowercased word, otherwise the OOV vector.
  std::span<const double> lookup(std::string_view word) const;
  std::span<const double> oov_vector() const;

  const std::vector<std::string>& words() const noexcept { return words_; }
  const Tensor& matrix() const noexcept { return matrix_; }

 private:
  void index();

  std::vector<std::string> words_;
  Tensor matrix_;
  std::unordered_map<std::string, std::size_t> rows_;
  std::vector<double> zero_;
  std::vector<double> mean_;
  OovPolicy policy_ = OovPolicy::zero;
  std::size_t duplicates_ = 0;
};

}  // namespace gibert
