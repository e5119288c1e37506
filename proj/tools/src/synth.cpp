#include "gibert/tools/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_set>

#include "gibert/error.hpp"
#include "gibert/rng.hpp"
#include "gibert/text_util.hpp"

namespace gibert::tools {
namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

std::vector<std::string> make_words(std::size_t count, Rng& rng) {
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  while (words.size() < count) {
    std::string w;
    const std::size_t syllables = 2 + rng.below(2);
    for (std::size_t s = 0; s < syllables; ++s) {
      w += kConsonants[rng.below(kConsonants.size())];
      w += kVowels[rng.below(kVowels.size())];
    }
    if (seen.insert(w).second) words.push_back(std::move(w));
  }
  return words;
}

std::vector<double> gaussian(std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  for (double& x : v) x = rng.normal();
  return v;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// Values go through %.6f on disk; round here so in-memory and file agree.
void round6(std::vector<double>& v) {
  for (double& x : v) x = std::round(x * 1e6) / 1e6;
}

struct LexPair {
  std::string a, b;
  Relation relation;
  bool heldout = false;
};

enum class Recipe { identity, synonyms, antonym, mixed, filler };

class Builder {
 public:
  Builder(const SynthSpec& spec, const std::vector<LexPair>& pairs, const std::vector<std::string>& fillers)
      : spec_(spec), pairs_(pairs), fillers_(fillers) {}

  std::vector<PairExample> split(const std::string& name, std::size_t count, bool training, Rng rng,
                                 std::size_t& flipped) const {
    std::vector<const LexPair*> syn, ant, all;
    for (const LexPair& p : pairs_) {
      if (training && p.heldout) continue;
      (p.relation == Relation::synonym ? syn : ant).push_back(&p);
      all.push_back(&p);
    }

    std::vector<PairExample> out;
    const int width = static_cast<int>(std::to_string(count).size());
    for (std::size_t i = 0; i < count; ++i) {
      const bool two = syn.size() > 1 && rng.bernoulli(spec_.two_pivot_share);
      Recipe recipe;
      if (rng.bernoulli(spec_.positive_rate)) {
        recipe = rng.bernoulli(spec_.identity_share) ? Recipe::identity : Recipe::synonyms;
      } else if (ant.empty() || rng.bernoulli(1.0 / 3.0)) {
        recipe = Recipe::filler;
      } else {
        recipe = two ? Recipe::mixed : Recipe::antonym;
      }

      // Pivot pairs, each with the relation the recipe swaps it by (none = kept).
      std::vector<std::pair<const LexPair*, bool>> pivots;
      auto draw = [&](const std::vector<const LexPair*>& pool, bool swap) {
        for (;;) {
          const LexPair* p = pool[rng.below(pool.size())];
          bool taken = false;
          for (const auto& [q, _] : pivots) taken = taken || q == p;
          if (!taken) return pivots.emplace_back(p, swap);
        }
      };
      switch (recipe) {
        case Recipe::identity:
        case Recipe::filler:
          draw(all, false);
          if (two) draw(all, false);
          break;
        case Recipe::synonyms:
          draw(syn, true);
          if (two) draw(syn, true);
          break;
        case Recipe::antonym: draw(ant, true); break;
        case Recipe::mixed:
          draw(syn, true);
          draw(ant, true);
          break;
      }

      std::vector<std::string> first = filler_sentence(rng);
      std::vector<std::size_t> slots(first.size());
      for (std::size_t k = 0; k < slots.size(); ++k) slots[k] = k;
      rng.shuffle(std::span<std::size_t>(slots));
      std::vector<std::string> second = first;
      for (std::size_t k = 0; k < pivots.size(); ++k) {
        const auto& [p, swap] = pivots[k];
        // Antonym pairs always start from their positive pole.
        const bool flip = p->relation == Relation::synonym && rng.bernoulli(0.5);
        first[slots[k]] = flip ? p->b : p->a;
        second[slots[k]] = swap ? (flip ? p->a : p->b) : first[slots[k]];
      }
      if (recipe == Recipe::filler) {
        const std::size_t slot = slots[pivots.size()];
        for (;;) {
          const std::string& w = fillers_[rng.below(fillers_.size())];
          if (std::find(first.begin(), first.end(), w) == first.end()) {
            second[slot] = w;
            break;
          }
        }
      }
      int label = recipe == Recipe::identity || recipe == Recipe::synonyms ? 1 : 0;
      if (spec_.noise > 0.0 && rng.bernoulli(spec_.noise)) {
        label = 1 - label;
        ++flipped;
      }
      const bool period = rng.bernoulli(0.5);
      PairExample ex;
      std::string id = std::to_string(i);
      ex.id = name + "-" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id;
      ex.first = render(first, period, rng);
      ex.second = render(second, period, rng);
      ex.label = label;
      out.push_back(std::move(ex));
    }
    return out;
  }

 private:
  std::vector<std::string> filler_sentence(Rng& rng) const {
    const std::size_t n = spec_.min_words + rng.below(spec_.max_words - spec_.min_words + 1);
    std::vector<std::string> words;
    while (words.size() < n) {
      const std::string& w = fillers_[rng.below(fillers_.size())];
      if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(w);
    }
    return words;
  }

  static std::string render(const std::vector<std::string>& words, bool period, Rng& rng) {
    std::string out;
    for (const std::string& w : words) {
      if (!out.empty()) out += ' ';
      out += w;
    }
    if (rng.bernoulli(0.3)) out[0] = static_cast<char>(out[0] - 'a' + 'A');
    if (period) out += " .";
    return out;
  }

  const SynthSpec& spec_;
  const std::vector<LexPair>& pairs_;
  const std::vector<std::string>& fillers_;
};

WordPieceVocab build_vocab(const std::vector<std::string>& words, Rng& rng) {
  std::vector<std::string> pieces = {std::string(kPadToken), std::string(kUnkToken), std::string(kClsToken),
                                     std::string(kSepToken), "."};
  for (char c = 'a'; c <= 'z'; ++c) pieces.emplace_back(1, c);
  for (char c = 'a'; c <= 'z'; ++c) pieces.push_back(std::string(kContinuationPrefix) + c);
  std::set<std::string> seen(pieces.begin(), pieces.end());
  auto add = [&](std::string piece) {
    if (seen.insert(piece).second) pieces.push_back(std::move(piece));
  };
  for (const std::string& w : words) {
    if (rng.bernoulli(0.2)) {
      const std::size_t cut = 2 + rng.below(w.size() - 3);
      add(w.substr(0, cut));
      add(std::string(kContinuationPrefix) + w.substr(cut));
    } else {
      add(w);
    }
  }
  return WordPieceVocab::from_pieces(std::move(pieces));
}

}  // namespace

void SynthSpec::validate() const {
  if (train_pairs == 0 || dev_pairs == 0 || test_pairs == 0) throw ConfigError("split sizes must be positive");
  if (min_words < 3 || max_words < min_words) throw ConfigError("need 3 <= min_words <= max_words");
  if (embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
  if (synonym_pairs == 0) throw ConfigError("need at least one synonym pair");
  const std::size_t lexicon_words = 2 * (synonym_pairs + antonym_pairs);
  if (vocab_size < lexicon_words + max_words + 2) {
    throw ConfigError("vocab_size " + std::to_string(vocab_size) + " leaves too few filler words for " +
                      std::to_string(synonym_pairs) + " synonym and " + std::to_string(antonym_pairs) +
                      " antonym pairs");
  }
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(noise) || !unit(positive_rate) || !unit(identity_share) || !unit(two_pivot_share)) {
    throw ConfigError("noise, positive_rate, identity_share and two_pivot_share must lie in [0, 1]");
  }
  if (!(heldout_fraction >= 0.0 && heldout_fraction < 1.0)) throw ConfigError("heldout_fraction must lie in [0, 1)");
}

SynthData generate_synth(const SynthSpec& spec) {
  spec.validate();
  Rng root(spec.seed);
  Rng word_rng = root.fork(1);
  Rng heldout_rng = root.fork(2);
  Rng vocab_rng = root.fork(3);
  Rng oracle_rng = root.fork(4);
  Rng random_rng = root.fork(5);

  const std::vector<std::string> words = make_words(spec.vocab_size, word_rng);
  std::vector<LexPair> pairs;
  std::size_t next = 0;
  for (std::size_t i = 0; i < spec.synonym_pairs; ++i, next += 2) {
    pairs.push_back({words[next], words[next + 1], Relation::synonym});
  }
  for (std::size_t i = 0; i < spec.antonym_pairs; ++i, next += 2) {
    pairs.push_back({words[next], words[next + 1], Relation::antonym});
  }
  for (Relation rel : {Relation::synonym, Relation::antonym}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i].relation == rel) idx.push_back(i);
    }
    heldout_rng.shuffle(std::span<std::size_t>(idx));
    const auto heldout = static_cast<std::size_t>(std::floor(spec.heldout_fraction * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < heldout; ++k) pairs[idx[k]].heldout = true;
  }

  SynthData data;
  data.fillers.assign(words.begin() + static_cast<std::ptrdiff_t>(next), words.end());
  for (const LexPair& p : pairs) data.lexicon.add(p.a, p.b, p.relation);
  // Lexicon words stay out of the WordPiece vocabulary, like rare words: the
  // encoder sees them as letter pieces while the embedding file knows them.
  data.vocab = build_vocab(data.fillers, vocab_rng);

  const std::size_t dim = spec.embedding_dim;
  Tensor oracle({words.size(), dim}, 0.0);
  auto put = [&](Tensor& m, std::size_t row, std::vector<double> v) {
    round6(v);
    std::copy(v.begin(), v.end(), m.row(row).begin());
  };
  // Every pair sits on the positive side of a shared polarity axis (the first
  // coordinate); an antonym's partner lands on the negative side.
  constexpr double kSpread = 0.15;
  constexpr double kPolarity = 3.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double sign = pairs[i].relation == Relation::synonym ? 1.0 : -1.0;
    std::vector<double> a, b;
    do {
      std::vector<double> u = gaussian(dim, oracle_rng);
      u[0] = kPolarity;
      a = u;
      b = u;
      for (std::size_t d = 0; d < dim; ++d) {
        a[d] += kSpread * oracle_rng.normal();
        b[d] = sign * b[d] + kSpread * oracle_rng.normal();
      }
      round6(a);
      round6(b);
    } while (sign * cosine(a, b) < 0.95);
    put(oracle, 2 * i, a);
    put(oracle, 2 * i + 1, b);
  }
  for (std::size_t r = next; r < words.size(); ++r) put(oracle, r, gaussian(dim, oracle_rng));

  Tensor random({words.size(), dim}, 0.0);
  for (std::size_t r = 0; r < words.size(); ++r) put(random, r, gaussian(dim, random_rng));
  data.oracle = EmbeddingStore(words, std::move(oracle));
  data.random = EmbeddingStore(words, std::move(random));

  const Builder builder(spec, pairs, data.fillers);
  data.train = builder.split("train", spec.train_pairs, true, root.fork(10), data.flipped);
  data.dev = builder.split("dev", spec.dev_pairs, false, root.fork(11), data.flipped);
  data.test = builder.split("test", spec.test_pairs, false, root.fork(12), data.flipped);
  return data;
}

ModelConfig synth_model_config() {
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.hidden = 32;
  cfg.heads = 4;
  cfg.ffn = 64;
  cfg.max_seq_len = 40;
  cfg.mode = InjectionMode::gated;
  cfg.injection_layer = 0;
  return cfg;
}

TrainConfig synth_train_config() {
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 16;
  cfg.learning_rate = 1e-3;
  cfg.eval_every = 50;
  cfg.patience = 15;
  return cfg;
}

void write_synth(const SynthData& data, const SynthSpec& spec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_dataset_tsv(dir / "train.tsv", data.train);
  save_dataset_tsv(dir / "dev.tsv", data.dev);
  save_dataset_tsv(dir / "test.tsv", data.test);
  data.vocab.save(dir / "vocab.txt");
  data.oracle.save(dir / "oracle.vec");
  data.random.save(dir / "random.vec");
  data.lexicon.save(dir / "lexicon.tsv");

  std::ofstream cfg(dir / "synth.cfg");
  if (!cfg) throw DataError("cannot write " + (dir / "synth.cfg").string());
  cfg << "# synthetic paraphrase task, seed " << spec.seed << "\n[model]\n";
  ModelConfig model = synth_model_config();
  model.embedding_dim = spec.embedding_dim;
  model.vocab_size = data.vocab.size();
  for (const auto& [k, v] : model.to_key_values()) cfg << k << " = " << v << '\n';
  cfg << "\n[train]\n";
  for (const auto& [k, v] : synth_train_config().to_key_values()) {
    if (k != "seed") cfg << k << " = " << v << '\n';
  }
  cfg << "\n[data]\nvocab = vocab.txt\ntrain = train.tsv\ndev = dev.tsv\ntest = test.tsv\n"
         "embeddings = oracle.vec\nlexicon = lexicon.tsv\noov = zero\n";
  cfg << "\n[run]\nseeds = 1,2\nout = runs\n";
}

std::size_t audit_labels(std::span<const PairExample> examples, const PairLexicon& lexicon) {
  std::size_t mismatches = 0;
  for (const PairExample& ex : examples) {
    const std::vector<std::string> a = pre_tokenize(ex.first);
    const std::vector<std::string> b = pre_tokenize(ex.second);
    int expected = a.size() == b.size() ? 1 : 0;
    for (std::size_t i = 0; expected == 1 && i < a.size(); ++i) {
      if (a[i] != b[i] && lexicon.relation(a[i], b[i]) != Relation::synonym) expected = 0;
    }
    mismatches += expected != ex.label ? 1 : 0;
  }
  return mismatches;
}

}  // namespace gibert::tools
