#include "fixtures.hpp"

#include <algorithm>

namespace gibert::testing {

const std::vector<std::string>& small_words() {
  static const std::vector<std::string> words = {"a",   "the", "cat",  "sat", "on",    "mat",   "dog",
                                                 "ran", "big", "red",  "car", "happy", "glad", "sad",
                                                 "up",  "down", "husband", "wife", "airways", "airlines"};
  return words;
}

WordPieceVocab small_vocab() {
  std::vector<std::string> pieces = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", ".", ",", "pro", "##mpt"};
  for (char c = 'a'; c <= 'z'; ++c) {
    if (c != 'a') pieces.emplace_back(1, c);
  }
  for (char c = 'a'; c <= 'z'; ++c) pieces.push_back(std::string("##") + c);
  for (const std::string& w : small_words()) pieces.push_back(w);
  return WordPieceVocab::from_pieces(std::move(pieces));
}

EmbeddingStore small_store(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> words = small_words();
  words.push_back("prompt");
  Tensor m({words.size(), dim});
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return EmbeddingStore(std::move(words), std::move(m));
}

Tensor random_tensor(const Shape& shape, Rng& rng, double lo, double hi) {
  Tensor t(shape);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

ModelParams random_params(const ModelConfig& config, Rng& rng, double scale) {
  ModelParams params = ModelParams::initialize(config, rng);
  for (const ad::NamedTensor& nt : params.named()) {
    const bool gamma = nt.name.find("gamma") != std::string::npos;
    for (double& v : nt.tensor->data()) v = (gamma ? 1.0 : 0.0) + rng.uniform(-scale, scale);
  }
  return params;
}

ModelConfig tiny_config(InjectionMode mode, std::size_t vocab_size, std::size_t embedding_dim) {
  ModelConfig cfg;
  cfg.layers = 2;
  cfg.hidden = 16;
  cfg.heads = 2;
  cfg.ffn = 24;
  cfg.max_seq_len = 16;
  cfg.embedding_dim = embedding_dim;
  cfg.vocab_size = vocab_size;
  cfg.mode = mode;
  cfg.injection_layer = 1;
  return cfg;
}

std::string random_sentence(const std::vector<std::string>& words, std::size_t max_words, Rng& rng) {
  const std::size_t n = 1 + rng.below(max_words);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out += ' ';
    out += words[rng.below(words.size())];
  }
  return out;
}

std::vector<EncodedExample> random_examples(std::size_t count, const WordPieceVocab& vocab,
                                            const EmbeddingStore& store, std::size_t max_seq_len, Rng& rng) {
  std::vector<std::string> words = small_words();
  words.push_back("prompt");
  words.push_back("zzzqqq");
  const FeatureEncoder encoder(vocab, &store, max_seq_len);
  std::vector<EncodedExample> out;
  for (std::size_t i = 0; i < count; ++i) {
    PairExample ex{"x" + std::to_string(i), random_sentence(words, 5, rng), random_sentence(words, 5, rng),
                   static_cast<int>(rng.below(2))};
    out.push_back(encoder.encode(ex));
  }
  return out;
}

}  // namespace gibert::testing
