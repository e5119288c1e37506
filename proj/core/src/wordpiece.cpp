#include "gibert/wordpiece.hpp"

#include <algorithm>
#include <fstream>

#include "gibert/error.hpp"
#include "gibert/text_util.hpp"

namespace gibert {
namespace {

constexpr std::size_t kMaxWordBytes = 100;

}  // namespace

WordPieceVocab WordPieceVocab::from_pieces(std::vector<std::string> pieces) {
  WordPieceVocab vocab;
  vocab.pieces_ = std::move(pieces);
  for (std::size_t i = 0; i < vocab.pieces_.size(); ++i) {
    const std::string& p = vocab.pieces_[i];
    if (p.empty()) throw ParseError("empty word piece", i + 1);
    if (!vocab.ids_.emplace(p, static_cast<std::int32_t>(i)).second) {
      throw ParseError("duplicate word piece '" + p + "'", i + 1);
    }
  }
  auto special = [&](std::string_view name) {
    auto id = vocab.find(name);
    if (!id) throw ParseError("vocabulary lacks special token " + std::string(name));
    return *id;
  };
  vocab.cls_ = special(kClsToken);
  vocab.sep_ = special(kSepToken);
  vocab.unk_ = special(kUnkToken);
  vocab.pad_ = special(kPadToken);
  return vocab;
}

WordPieceVocab WordPieceVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary file " + path.string());
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pieces.push_back(line);
  }
  if (pieces.empty()) throw ParseError("vocabulary file " + path.string() + " is empty");
  return from_pieces(std::move(pieces));
}

void WordPieceVocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vocabulary file " + path.string());
  for (const std::string& p : pieces_) out << p << '\n';
}

std::optional<std::int32_t> WordPieceVocab::find(std::string_view piece) const {
  auto it = ids_.find(std::string(piece));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::int32_t> wordpiece_word(std::string_view word, const WordPieceVocab& vocab) {
  if (word.empty()) return {};
  if (word.size() > kMaxWordBytes) return {vocab.unk_id()};
  std::vector<std::int32_t> out;
  std::string candidate;
  std::size_t start = 0;
  while (start < word.size()) {
    std::optional<std::int32_t> match;
    std::size_t end = word.size();
    for (; end > start; --end) {
      candidate.clear();
      if (start > 0) candidate += kContinuationPrefix;
      candidate += word.substr(start, end - start);
      match = vocab.find(candidate);
      if (match) break;
    }
    if (!match) return {vocab.unk_id()};
    out.push_back(*match);
    start = end;
  }
  return out;
}

TokenizedText wordpiece_tokenize(std::string_view text, const WordPieceVocab& vocab) {
  TokenizedText result;
  result.tokens = pre_tokenize(text);
  for (const std::string& token : result.tokens) {
    const std::size_t begin = result.pieces.size();
    auto pieces = wordpiece_word(token, vocab);
    result.pieces.insert(result.pieces.end(), pieces.begin(), pieces.end());
    result.spans.push_back({begin, result.pieces.size()});
  }
  return result;
}

std::size_t WordPieceSequence::content_length() const noexcept {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

WordPieceSequence pack_pair(const TokenizedText& first, const TokenizedText& second, std::size_t max_seq_len,
                            const WordPieceVocab& vocab) {
  if (max_seq_len < 3) throw ConfigError("pack_pair: max_seq_len must be at least 3");
  std::size_t keep1 = first.pieces.size();
  std::size_t keep2 = second.pieces.size();
  while (keep1 + keep2 + 3 > max_seq_len) {
    if (keep1 > keep2) {
      --keep1;
    } else {
      --keep2;
    }
  }

  WordPieceSequence seq;
  seq.piece_ids.reserve(max_seq_len);
  auto push = [&seq](std::int32_t id, std::int32_t segment, std::optional<SourceToken> origin) {
    seq.piece_ids.push_back(id);
    seq.segment_ids.push_back(segment);
    seq.mask.push_back(1);
    seq.alignment.push_back(origin);
  };
  auto push_sentence = [&](const TokenizedText& text, std::size_t keep, std::uint8_t sentence) {
    for (std::size_t t = 0; t < text.spans.size(); ++t) {
      const TokenSpan span = text.spans[t];
      for (std::size_t p = span.begin; p < std::min(span.end, keep); ++p) {
        push(text.pieces[p], sentence - 1, SourceToken{sentence, t});
      }
    }
  };

  push(vocab.cls_id(), 0, std::nullopt);
  push_sentence(first, keep1, 1);
  push(vocab.sep_id(), 0, std::nullopt);
  push_sentence(second, keep2, 2);
  push(vocab.sep_id(), 1, std::nullopt);
  while (seq.piece_ids.size() < max_seq_len) {
    seq.piece_ids.push_back(vocab.pad_id());
    seq.segment_ids.push_back(1);
    seq.mask.push_back(0);
    seq.alignment.push_back(std::nullopt);
  }
  return seq;
}

}  // namespace gibert
