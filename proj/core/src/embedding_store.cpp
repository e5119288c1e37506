#include "gibert/embedding_store.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "gibert/error.hpp"
#include "gibert/text_util.hpp"

namespace gibert {
namespace {

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_size(std::string_view s, std::size_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("invalid number '" + std::string(s) + "'", line);
  }
  return v;
}

}  // namespace

std::string_view to_string(OovPolicy policy) { return policy == OovPolicy::zero ? "zero" : "mean"; }

OovPolicy parse_oov_policy(std::string_view text) {
  if (text == "zero") return OovPolicy::zero;
  if (text == "mean") return OovPolicy::mean;
  throw ConfigError("unknown OOV policy '" + std::string(text) + "' (expected zero or mean)");
}

EmbeddingStore::EmbeddingStore(std::vector<std::string> words, Tensor matrix, OovPolicy policy)
    : words_(std::move(words)), matrix_(std::move(matrix)), policy_(policy) {
  if (matrix_.rank() != 2 || matrix_.dim(0) != words_.size()) {
    throw DimensionError("embedding matrix " + shape_string(matrix_.shape()) + " does not match " +
                         std::to_string(words_.size()) + " words");
  }
  index();
}

void EmbeddingStore::index() {
  const std::size_t e = dim();
  rows_.clear();
  for (std::size_t i = 0; i < words_.size(); ++i) rows_.emplace(words_[i], i);
  zero_.assign(e, 0.0);
  mean_.assign(e, 0.0);
  if (!words_.empty()) {
    for (std::size_t r = 0; r < words_.size(); ++r) {
      for (std::size_t c = 0; c < e; ++c) mean_[c] += matrix_(r, c);
    }
    for (double& m : mean_) m /= static_cast<double>(words_.size());
  }
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path, OovPolicy policy) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file " + path.string());

  std::vector<std::string> words;
  std::vector<double> values;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t dim = 0;
  std::size_t duplicates = 0;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;

  while (std::getline(in, line)) {
    ++line_no;
    const auto parts = fields(line);
    if (parts.empty()) continue;
    if (first_content) {
      first_content = false;
      std::size_t count = 0, header_dim = 0;
      if (parts.size() == 2 && parse_size(parts[0], count) && parse_size(parts[1], header_dim)) {
        if (header_dim == 0) throw ParseError("header declares zero dimensions", line_no);
        dim = header_dim;
        continue;
      }
    }
    if (parts.size() < 2) throw ParseError("expected a word followed by its vector", line_no);
    const std::size_t row_dim = parts.size() - 1;
    if (dim == 0) dim = row_dim;
    if (row_dim != dim) {
      throw ParseError("row has " + std::to_string(row_dim) + " values, expected " + std::to_string(dim), line_no);
    }
    std::string word(parts[0]);
    std::vector<double> row(dim);
    for (std::size_t c = 0; c < dim; ++c) row[c] = parse_double(parts[c + 1], line_no);
    if (!seen.emplace(word, words.size()).second) {
      ++duplicates;
      continue;
    }
    words.push_back(std::move(word));
    values.insert(values.end(), row.begin(), row.end());
  }
  if (words.empty()) throw ParseError("embedding file " + path.string() + " contains no vectors");

  const std::size_t count = words.size();
  EmbeddingStore store(std::move(words), Tensor({count, dim}, std::move(values)), policy);
  store.duplicates_ = duplicates;
  return store;
}

void EmbeddingStore::save(const std::filesystem::path& path) const {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (f == nullptr) throw DataError("cannot write embedding file " + path.string());
  std::fprintf(f, "%zu %zu\n", words_.size(), dim());
  for (std::size_t r = 0; r < words_.size(); ++r) {
    std::fputs(words_[r].c_str(), f);
    for (std::size_t c = 0; c < dim(); ++c) {
      char buf[32];
      buf[0] = ' ';
      const auto res = std::to_chars(buf + 1, buf + sizeof buf, matrix_(r, c));
      std::fwrite(buf, 1, static_cast<std::size_t>(res.ptr - buf), f);
    }
    std::fputc('\n', f);
  }
  std::fclose(f);
}

bool EmbeddingStore::contains(std::string_view word) const { return rows_.contains(to_lower(word)); }

std::span<const double> EmbeddingStore::oov_vector() const { return policy_ == OovPolicy::zero ? zero_ : mean_; }

std::span<const double> EmbeddingStore::lookup(std::string_view word) const {
  auto it = rows_.find(to_lower(word));
  if (it == rows_.end()) return oov_vector();
  return matrix_.row(it->second);
}

}  // namespace gibert
