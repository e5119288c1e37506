#include "gibert/dataset.hpp"

#include <fstream>
#include <unordered_set>

#include "gibert/error.hpp"
#include "gibert/injection_sequence.hpp"
#include "gibert/text_util.hpp"

namespace gibert {

std::vector<PairExample> load_dataset_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  std::vector<PairExample> out;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 4) fail("expected 4 tab-separated columns, found " + std::to_string(cols.size()));
    const std::string_view label = trim(cols[3]);
    if (out.empty() && ids.empty() && label == "label") continue;
    PairExample ex;
    ex.id = std::string(trim(cols[0]));
    ex.first = std::string(cols[1]);
    ex.second = std::string(cols[2]);
    if (label == "0") ex.label = 0;
    else if (label == "1") ex.label = 1;
    else fail("label '" + std::string(label) + "' is not 0 or 1");
    if (!ids.insert(ex.id).second) fail("duplicate id '" + ex.id + "'");
    out.push_back(std::move(ex));
  }
  return out;
}

void save_dataset_tsv(const std::filesystem::path& path, std::span<const PairExample> examples) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset " + path.string());
  out << "id\tsentence1\tsentence2\tlabel\n";
  for (const PairExample& ex : examples) out << ex.id << '\t' << ex.first << '\t' << ex.second << '\t' << ex.label << '\n';
}

EncodedExample FeatureEncoder::encode(const PairExample& example) const {
  EncodedExample enc;
  enc.id = example.id;
  enc.label = example.label;
  TokenizedText first = wordpiece_tokenize(example.first, vocab_);
  TokenizedText second = wordpiece_tokenize(example.second, vocab_);
  enc.sequence = pack_pair(first, second, max_seq_len_, vocab_);
  if (store_ != nullptr) enc.injection = build_injection_sequence(enc.sequence, first.tokens, second.tokens, *store_);
  enc.first_tokens = std::move(first.tokens);
  enc.second_tokens = std::move(second.tokens);
  return enc;
}

std::vector<EncodedExample> FeatureEncoder::encode_all(std::span<const PairExample> examples) const {
  std::vector<EncodedExample> out;
  out.reserve(examples.size());
  for (const PairExample& ex : examples) out.push_back(encode(ex));
  return out;
}

}  // namespace gibert
