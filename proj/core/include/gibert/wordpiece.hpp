#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gibert {

inline constexpr std::string_view kContinuationPrefix = "##";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kPadToken = "[PAD]";

/// Word-piece inventory. Ids are line numbers of the vocab file, dense from 0.
class WordPieceVocab {
 public:
  /// Throws ParseError on duplicate pieces, empty lines, or missing specials.
  static WordPieceVocab load(const std::filesystem::path& path);
  static WordPieceVocab from_pieces(std::vector<std::string> pieces);

  void save(const std::filesystem::path& path) const;

  std::optional<std::int32_t> find(std::string_view piece) const;
  const std::string& piece(std::int32_t id) const { return pieces_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return pieces_.size(); }
  const std::vector<std::string>& pieces() const noexcept { return pieces_; }

  std::int32_t cls_id() const noexcept { return cls_; }
  std::int32_t sep_id() const noexcept { return sep_; }
  std::int32_t unk_id() const noexcept { return unk_; }
  std::int32_t pad_id() const noexcept { return pad_; }

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, std::int32_t> ids_;
  std::int32_t cls_ = -1, sep_ = -1, unk_ = -1, pad_ = -1;
};

/// Half-open range of piece indices produced by one source token.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct TokenizedText {
  std::vector<std::string> tokens;
  std::vector<std::int32_t> pieces;
  std::vector<TokenSpan> spans;  // one per token
};

/// Greedy longest-match-first decomposition of a single pre-tokenized word.
/// A word with no full decomposition (or longer than 100 bytes) becomes [UNK].
std::vector<std::int32_t> wordpiece_word(std::string_view word, const WordPieceVocab& vocab);

TokenizedText wordpiece_tokenize(std::string_view text, const WordPieceVocab& vocab);

/// Which source token a packed position came from. `sentence` is 1 or 2.
struct SourceToken {
  std::uint8_t sentence = 1;
  std::size_t token = 0;
  friend bool operator==(const SourceToken&, const SourceToken&) = default;
};

/// [CLS] first [SEP] second [SEP] [PAD]... padded to max_seq_len. Segment ids
/// are 0 through the first [SEP] and 1 from there on, padding included.
struct WordPieceSequence {
  std::vector<std::int32_t> piece_ids;
  std::vector<std::int32_t> segment_ids;
  std::vector<std::uint8_t> mask;  // 1 for real positions, 0 for [PAD]
  /// nullopt marks [CLS], [SEP], and [PAD].
  std::vector<std::optional<SourceToken>> alignment;

  std::size_t length() const noexcept { return piece_ids.size(); }
  /// Number of non-[PAD] positions; they always form a prefix.
  std::size_t content_length() const noexcept;
};

/// Packs a sentence pair. When the pieces do not fit, the final piece of the
/// currently longer sentence is dropped until they do (the second sentence
/// on ties). Requires max_seq_len >= 3.
WordPieceSequence pack_pair(const TokenizedText& first, const TokenizedText& second, std::size_t max_seq_len,
                            const WordPieceVocab& vocab);

}  // namespace gibert
