#include "gibert/lexicon.hpp"

#include <fstream>
#include <unordered_set>

#include "gibert/error.hpp"
#include "gibert/text_util.hpp"

namespace gibert {
namespace {

std::pair<std::string, std::string> canonical(std::string_view a, std::string_view b) {
  std::string x = to_lower(a);
  std::string y = to_lower(b);
  if (y < x) std::swap(x, y);
  return {std::move(x), std::move(y)};
}

}  // namespace

std::string_view to_string(Relation relation) { return relation == Relation::synonym ? "synonym" : "antonym"; }

bool PairLexicon::add(std::string_view a, std::string_view b, Relation relation) {
  auto key = canonical(a, b);
  if (key.first.empty() || key.second.empty()) throw DataError("lexicon pair with an empty word");
  if (key.first == key.second) throw DataError("lexicon pair relates '" + key.first + "' to itself");
  if (auto it = pairs_.find(key); it != pairs_.end()) {
    if (it->second != relation) {
      throw DataError("lexicon pair '" + key.first + "' / '" + key.second + "' is tagged both synonym and antonym");
    }
    return false;
  }
  partners_[key.first].emplace_back(key.second, relation);
  partners_[key.second].emplace_back(key.first, relation);
  pairs_.emplace(std::move(key), relation);
  return true;
}

PairLexicon PairLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon file " + path.string());
  PairLexicon lexicon;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto cols = split(view, '\t');
    if (cols.size() != 3) throw ParseError("expected word1<TAB>word2<TAB>relation", line_no);
    const std::string tag = to_lower(trim(cols[2]));
    Relation relation;
    if (tag == "synonym") {
      relation = Relation::synonym;
    } else if (tag == "antonym") {
      relation = Relation::antonym;
    } else {
      throw ParseError("unknown relation '" + std::string(trim(cols[2])) + "'", line_no);
    }
    try {
      lexicon.add(trim(cols[0]), trim(cols[1]), relation);
    } catch (const DataError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return lexicon;
}

void PairLexicon::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write lexicon file " + path.string());
  for (const auto& [key, relation] : pairs_) out << key.first << '\t' << key.second << '\t' << to_string(relation) << '\n';
}

std::optional<Relation> PairLexicon::relation(std::string_view a, std::string_view b) const {
  auto it = pairs_.find(canonical(a, b));
  if (it == pairs_.end()) return std::nullopt;
  return it->second;
}

std::size_t PairLexicon::count(Relation relation) const {
  std::size_t n = 0;
  for (const auto& [key, r] : pairs_) n += r == relation ? 1 : 0;
  return n;
}

std::span<const std::pair<std::string, Relation>> PairLexicon::partners(std::string_view word) const {
  auto it = partners_.find(std::string(word));
  if (it == partners_.end()) return {};
  return it->second;
}

PartitionTags partition_instance(std::span<const std::string> first, std::span<const std::string> second,
                                 const PairLexicon& lexicon) {
  PartitionTags tags;
  if (lexicon.empty()) return tags;
  const std::unordered_set<std::string> second_set(second.begin(), second.end());
  // Partners are stored in both directions, so scanning the first sentence
  // covers both role assignments.
  for (const std::string& word : std::unordered_set<std::string>(first.begin(), first.end())) {
    for (const auto& [partner, relation] : lexicon.partners(word)) {
      if (!second_set.contains(partner)) continue;
      if (relation == Relation::synonym) {
        tags.has_synonym = true;
      } else {
        tags.has_antonym = true;
      }
    }
  }
  return tags;
}

std::vector<PartitionTags> partition_instances(std::span<const TokenizedPair> instances, const PairLexicon& lexicon) {
  std::vector<PartitionTags> tags;
  tags.reserve(instances.size());
  for (const TokenizedPair& inst : instances) tags.push_back(partition_instance(inst.first, inst.second, lexicon));
  return tags;
}

}  // namespace gibert
