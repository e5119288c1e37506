#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gibert {

enum class Relation { synonym, antonym };

std::string_view to_string(Relation relation);

/// Unordered, lowercase word pairs tagged synonym or antonym.
class PairLexicon {
 public:
  /// TSV rows: word1 <TAB> word2 <TAB> relation. Blank lines and lines
  /// starting with '#' are skipped.
  static PairLexicon load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// Adds a pair; returns false if it was already present with the same tag.
  /// Throws DataError if the pair already carries the other tag.
  bool add(std::string_view a, std::string_view b, Relation relation);

  std::optional<Relation> relation(std::string_view a, std::string_view b) const;
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  std::size_t count(Relation relation) const;

  /// Partners of `word` with their relation.
  std::span<const std::pair<std::string, Relation>> partners(std::string_view word) const;

  /// Pairs in canonical (sorted) order.
  const std::map<std::pair<std::string, std::string>, Relation>& pairs() const noexcept { return pairs_; }

 private:
  std::map<std::pair<std::string, std::string>, Relation> pairs_;
  std::unordered_map<std::string, std::vector<std::pair<std::string, Relation>>> partners_;
};

struct PartitionTags {
  bool has_synonym = false;
  bool has_antonym = false;
  bool neither() const noexcept { return !has_synonym && !has_antonym; }
  friend bool operator==(const PartitionTags&, const PartitionTags&) = default;
};

/// Tags a sentence pair by the lexicon pairs that straddle it: one word in
/// the first sentence and its partner in the second. Tokens must come from
/// pre_tokenize().
PartitionTags partition_instance(std::span<const std::string> first, std::span<const std::string> second,
                                 const PairLexicon& lexicon);

struct TokenizedPair {
  std::vector<std::string> first;
  std::vector<std::string> second;
};

std::vector<PartitionTags> partition_instances(std::span<const TokenizedPair> instances, const PairLexicon& lexicon);

}  // namespace gibert
