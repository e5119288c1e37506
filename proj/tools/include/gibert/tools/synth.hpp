#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gibert/dataset.hpp"
#include "gibert/embedding_store.hpp"
#include "gibert/lexicon.hpp"
#include "gibert/model_config.hpp"
#include "gibert/trainer.hpp"
#include "gibert/wordpiece.hpp"

namespace gibert::tools {

/// Settings for the synthetic paraphrase task.
///
/// A first sentence holds filler words around one or two lexicon words
/// (pivots); the second is a copy with some words replaced. The label is 1
/// exactly when every replaced word was swapped for its synonym:
///   identity            -> 1    synonym swap(s)           -> 1
///   antonym swap        -> 0    synonym + antonym swap    -> 0
///   one filler replaced -> 0
/// Training instances only use "seen" lexicon pairs; dev/test draw from all
/// pairs, so a model can only judge held-out pairs through the embeddings.
struct SynthSpec {
  std::size_t train_pairs = 1000;
  std::size_t dev_pairs = 250;
  std::size_t test_pairs = 500;
  std::size_t vocab_size = 500;  // content words (lexicon + fillers)
  std::size_t synonym_pairs = 50;
  std::size_t antonym_pairs = 50;
  double noise = 0.0;            // label flip probability
  double positive_rate = 0.4;
  double identity_share = 0.3;   // fraction of positives that are identity copies
  double two_pivot_share = 0.5;  // instances with two pivots
  double heldout_fraction = 0.5; // lexicon pairs never used in training
  std::size_t embedding_dim = 16;
  std::size_t min_words = 3;
  std::size_t max_words = 5;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SynthData {
  std::vector<PairExample> train, dev, test;
  WordPieceVocab vocab;
  PairLexicon lexicon;
  EmbeddingStore oracle;  // synonyms aligned, antonyms opposed
  EmbeddingStore random;  // same words and shape, no structure
  std::vector<std::string> fillers;
  std::size_t flipped = 0;  // labels flipped by noise
};

SynthData generate_synth(const SynthSpec& spec);

/// Writes train/dev/test.tsv, vocab.txt, oracle.vec, random.vec,
/// lexicon.tsv and a runnable synth.cfg into `dir`.
void write_synth(const SynthData& data, const SynthSpec& spec, const std::filesystem::path& dir);

/// Model and training settings the generated synth.cfg uses; sized so one
/// run takes seconds.
ModelConfig synth_model_config();
TrainConfig synth_train_config();

/// Re-derives each label from the construction rule (1 iff every differing
/// aligned token pair is a lexicon synonym pair); returns the number of
/// instances whose stored label disagrees.
std::size_t audit_labels(std::span<const PairExample> examples, const PairLexicon& lexicon);

}  // namespace gibert::tools
