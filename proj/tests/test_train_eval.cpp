#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "gibert/checkpoint.hpp"
#include "gibert/error.hpp"
#include "gibert/evaluate.hpp"
#include "gibert/gate_analysis.hpp"
#include "gibert/metrics.hpp"
#include "gibert/text_util.hpp"
#include "gibert/trainer.hpp"

namespace gibert {
namespace {

using Ints = std::vector<int>;

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

TEST(F1, Examples) {
  EXPECT_EQ(f1_binary(Ints{1, 0, 1}, Ints{1, 0, 1}), 1.0);
  EXPECT_EQ(f1_binary(Ints{0, 0, 0}, Ints{1, 0, 1}), 0.0);
  // TP=2 FP=1 FN=1
  const Ints preds{1, 1, 1, 0, 0};
  const Ints golds{1, 1, 0, 1, 0};
  EXPECT_EQ(confusion(preds, golds), (Confusion{2, 1, 1, 1}));
  EXPECT_NEAR(f1_binary(preds, golds), 2.0 / 3.0, 1e-15);
  EXPECT_THROW(f1_binary(Ints{1}, Ints{1, 0}), Error);
  EXPECT_THROW(f1_binary(Ints{2}, Ints{1}), Error);
}

TEST(F1, AddingCorrectPositiveNeverLowers) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Ints p, g;
    const std::size_t n = 1 + rng.below(12);
    for (std::size_t i = 0; i < n; ++i) {
      p.push_back(static_cast<int>(rng.below(2)));
      g.push_back(static_cast<int>(rng.below(2)));
    }
    const double before = f1_binary(p, g);
    p.push_back(1);
    g.push_back(1);
    EXPECT_GE(f1_binary(p, g), before);
  }
}

TEST(Overlap, Examples) {
  const std::vector<std::string> abc{"a", "b", "c"}, bcd{"b", "c", "d"}, xy{"x", "y"};
  EXPECT_EQ(lexical_overlap(abc, abc), 1.0);
  EXPECT_EQ(lexical_overlap(abc, xy), 0.0);
  EXPECT_EQ(lexical_overlap(abc, bcd), 0.5);
  EXPECT_EQ(lexical_overlap({}, {}), 1.0);
}

TEST(NonObvious, AllObviousIsUndefined) {
  // positives high overlap, negatives low
  EXPECT_FALSE(non_obvious_f1(Ints{1, 1, 0, 0}, Ints{1, 1, 0, 0}, std::vector<double>{0.9, 0.8, 0.1, 0.2}));
}

TEST(NonObvious, SixInstanceFixture) {
  const Ints golds{1, 1, 1, 0, 0, 0};
  const std::vector<double> ov{0.9, 0.2, 0.1, 0.8, 0.7, 0.05};
  const Ints preds{1, 1, 0, 1, 0, 0};
  // median 0.45: non-obvious = positives at 0.2, 0.1 and negatives at 0.8, 0.7
  const std::vector<bool> mask = non_obvious_mask(golds, ov);
  EXPECT_EQ(mask, (std::vector<bool>{false, true, true, true, true, false}));
  // subset preds 1,0,1,0 vs golds 1,1,0,0: TP1 FP1 FN1
  const auto f = non_obvious_f1(preds, golds, ov);
  ASSERT_TRUE(f);
  EXPECT_NEAR(*f, 0.5, 1e-15);
  // brute force
  Ints sp, sg;
  for (std::size_t i = 0; i < 6; ++i) {
    const bool pos = golds[i] == 1;
    if ((pos && ov[i] < 0.45) || (!pos && ov[i] >= 0.45)) {
      sp.push_back(preds[i]);
      sg.push_back(golds[i]);
    }
  }
  EXPECT_EQ(*f, f1_binary(sp, sg));
}

TEST(NonObvious, EqualOverlapsMarkEveryNegative) {
  const Ints golds{1, 0, 1, 0, 0};
  const std::vector<bool> mask = non_obvious_mask(golds, std::vector<double>(5, 0.3));
  EXPECT_EQ(mask, (std::vector<bool>{false, true, false, true, true}));
  // only negatives remain: no positives, F1 0 by convention
  EXPECT_EQ(non_obvious_f1(Ints{0, 0, 1, 0, 0}, golds, std::vector<double>(5, 0.3)), 0.0);
}

TEST(NonObvious, PerfectPredictionOnAnySubset) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Ints g;
    std::vector<double> ov;
    for (int i = 0; i < 10; ++i) {
      g.push_back(static_cast<int>(rng.below(2)));
      ov.push_back(rng.uniform());
    }
    const auto f = non_obvious_f1(g, g, ov);
    const auto mask = non_obvious_mask(g, ov);
    bool has_pos = false;
    for (std::size_t i = 0; i < g.size(); ++i) has_pos |= mask[i] && g[i] == 1;
    if (f && has_pos) {
      EXPECT_EQ(*f, 1.0);
    }
  }
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
}

TEST(FailedRun, Examples) {
  EXPECT_TRUE(detect_failed_run(Ints{0, 0, 0, 0}));
  EXPECT_FALSE(detect_failed_run(Ints{0, 1, 0}));
  EXPECT_TRUE(detect_failed_run(Ints{}));
}

TEST(Score, PerfectAndMajority) {
  const Ints golds{1, 0, 0, 1, 0};
  const std::vector<double> ov{0.1, 0.9, 0.2, 0.8, 0.3};
  const EvalReport perfect = score_predictions(golds, golds, ov);
  EXPECT_EQ(perfect.f1, 1.0);
  ASSERT_TRUE(perfect.non_obvious_f1);
  EXPECT_EQ(*perfect.non_obvious_f1, 1.0);
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_FALSE(perfect.failed_run);

  const EvalReport majority = score_predictions(Ints(5, 0), golds, ov);
  EXPECT_TRUE(majority.failed_run);
  EXPECT_EQ(majority.f1, 0.0);
  EXPECT_EQ(majority.confusion.fn, 2u);
}

TEST(Score, EmptyIsFlagged) {
  const EvalReport r = score_predictions(Ints{}, Ints{}, std::vector<double>{});
  EXPECT_TRUE(r.failed_run);
  EXPECT_FALSE(r.notes.empty());
}

TEST(Score, SynonymPartitionSize) {
  PairLexicon lex;
  lex.add("airways", "airlines", Relation::synonym);
  lex.add("happy", "glad", Relation::synonym);
  lex.add("up", "down", Relation::antonym);
  const std::vector<TokenizedPair> pairs = {
      {pre_tokenize("qatar airways"), pre_tokenize("qatar airlines")},
      {pre_tokenize("i am glad"), pre_tokenize("i am happy")},
      {pre_tokenize("prices went up"), pre_tokenize("prices went down")},
      {pre_tokenize("the cat sat"), pre_tokenize("the dog sat")},
  };
  const std::vector<PartitionTags> tags = partition_instances(pairs, lex);
  const Ints golds{1, 1, 0, 0};
  const EvalReport r = score_predictions(Ints{1, 0, 0, 1}, golds, std::vector<double>{.5, .5, .5, .5}, &tags);
  ASSERT_TRUE(r.partitions);
  EXPECT_EQ(r.partitions->synonym.count, 2u);
  EXPECT_EQ(r.partitions->synonym.fraction, 0.5);
  EXPECT_NEAR(*r.partitions->synonym.f1, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(r.partitions->antonym.count, 1u);
  EXPECT_EQ(r.partitions->neither.count, 1u);
  EXPECT_NE(format_report(r).find("partition.synonym.f1="), std::string::npos);
}

EvalReport report_with(double f1, std::optional<double> non_obvious) {
  EvalReport r;
  r.instances = 10;
  r.f1 = f1;
  r.accuracy = f1;
  r.non_obvious_f1 = non_obvious;
  return r;
}

TEST(SeedAverage, Examples) {
  const std::vector<EvalReport> same = {report_with(0.7, 0.5), report_with(0.7, 0.5), report_with(0.7, 0.5)};
  const AggregateReport a = seed_average(same);
  EXPECT_EQ(*a.f1.mean, 0.7);
  EXPECT_EQ(*a.non_obvious_f1.mean, 0.5);
  EXPECT_EQ(a.runs, 3u);

  const std::vector<EvalReport> two = {report_with(0.7, std::nullopt), report_with(0.8, 0.4)};
  const AggregateReport b = seed_average(two);
  EXPECT_NEAR(*b.f1.mean, 0.75, 1e-15);
  EXPECT_EQ(*b.non_obvious_f1.mean, 0.4);
  EXPECT_EQ(b.non_obvious_f1.defined, 1u);
  EXPECT_EQ(b.non_obvious_f1.undefined, 1u);

  EXPECT_THROW(seed_average(std::vector<EvalReport>{}), DataError);
}

TEST(Histogram, ThreeValuesThreeBins) {
  const std::vector<double> g{-1, 0, 1};
  const auto bins = histogram(g, 3);
  ASSERT_EQ(bins.size(), 3u);
  for (const auto& b : bins) EXPECT_EQ(b.count, 1u);
  EXPECT_EQ(bins.front().left, -1.0);
  EXPECT_EQ(bins.back().right, 1.0);
  EXPECT_EQ(histogram_csv(bins).substr(0, 24), "bin_left,bin_right,count");
}

TEST(Histogram, CountsSumToLength) {
  Rng rng(2);
  std::vector<double> v(97);
  for (double& x : v) x = rng.uniform() * 4 - 2;
  std::size_t total = 0;
  for (const auto& b : histogram(v, 7)) total += b.count;
  EXPECT_EQ(total, v.size());
}

TEST(GateSnapshot, UntrainedIsAllZero) {
  const ModelConfig cfg = testing::tiny_config(InjectionMode::gated, 40, 4);
  Rng rng(1);
  const ModelParams p = ModelParams::initialize(cfg, rng);
  const GateSnapshot s = export_gate_snapshot(p, 5);
  EXPECT_EQ(s.gate.size(), cfg.hidden);
  EXPECT_EQ(s.near_zero, cfg.hidden);
  std::size_t nonzero_bins = 0;
  for (const auto& b : s.histogram) {
    if (b.count == 0) continue;
    ++nonzero_bins;
    EXPECT_EQ(b.count, cfg.hidden);
    EXPECT_LE(b.left, 0.0);
    EXPECT_GE(b.right, 0.0);
  }
  EXPECT_EQ(nonzero_bins, 1u);
}

TEST(GateSnapshot, NonGatedFails) {
  const ModelConfig cfg = testing::tiny_config(InjectionMode::ungated, 40, 4);
  Rng rng(1);
  EXPECT_THROW(export_gate_snapshot(ModelParams::initialize(cfg, rng), 5), ConfigError);
}

TEST(EarlyStop, PatienceOneStopsAfterSecondEval) {
  EarlyStopping es(1);
  EXPECT_TRUE(es.observe(0.6));
  EXPECT_FALSE(es.should_stop());
  EXPECT_FALSE(es.observe(0.5));
  EXPECT_TRUE(es.should_stop());
  EXPECT_EQ(es.evaluations(), 2u);
  EXPECT_EQ(es.best(), 0.6);
}

TEST(EarlyStop, TieIsNotImprovement) {
  EarlyStopping es(2);
  es.observe(0.5);
  EXPECT_FALSE(es.observe(0.5));
  EXPECT_FALSE(es.should_stop());
  EXPECT_FALSE(es.observe(0.4));
  EXPECT_TRUE(es.should_stop());
}

// "cat" in the first sentence decides the label.
std::vector<EncodedExample> separable_set(std::size_t n, const WordPieceVocab& vocab, const EmbeddingStore& store,
                                          std::uint64_t seed) {
  const std::vector<std::string> fill{"the", "a", "happy", "car", "road", "wife"};
  Rng rng(seed);
  std::vector<PairExample> raw;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    std::string first = label ? "cat" : "dog";
    for (int w = 0; w < 2; ++w) first += " " + fill[rng.below(fill.size())];
    std::string second = fill[rng.below(fill.size())] + " " + fill[rng.below(fill.size())];
    raw.push_back({std::to_string(i), first, second, label});
  }
  return FeatureEncoder(vocab, &store, 16).encode_all(raw);
}

struct TrainFixture {
  WordPieceVocab vocab = testing::small_vocab();
  EmbeddingStore store = testing::small_store(4);
  ModelConfig cfg;
  std::vector<EncodedExample> train_set, dev_set;
  explicit TrainFixture(InjectionMode mode, std::size_t n = 200) {
    cfg = testing::tiny_config(mode, vocab.size(), store.dim());
    train_set = separable_set(n, vocab, store, 1);
    dev_set = separable_set(40, vocab, store, 2);
  }
};

TEST(Train, SeparableSetFitsWithinThreeEpochs) {
  TrainFixture f(InjectionMode::gated);
  TrainConfig tc;
  tc.epochs = 3;
  tc.learning_rate = 3e-3;
  tc.eval_every = 1000;  // only the final step is evaluated
  tc.patience = 0;
  Rng rng(1);
  const TrainResult r = train(f.cfg, ModelParams::initialize(f.cfg, rng), f.train_set, f.dev_set, tc);
  const Ints preds = predict_labels(f.cfg, r.best_params, f.train_set);
  Ints golds;
  for (const auto& ex : f.train_set) golds.push_back(ex.label);
  EXPECT_EQ(f1_binary(preds, golds), 1.0);
  EXPECT_LE(r.steps, 3u * 13u);
}

TEST(Train, ZeroLearningRateKeepsParams) {
  TrainFixture f(InjectionMode::gated, 48);
  TrainConfig tc;
  tc.epochs = 2;
  tc.learning_rate = 0.0;
  tc.eval_every = 2;
  tc.patience = 0;
  Rng rng(1);
  ModelParams start = ModelParams::initialize(f.cfg, rng);
  const ModelParams copy = start;
  TrainResult r = train(f.cfg, std::move(start), f.train_set, f.dev_set, tc);
  ModelParams a = copy;
  const auto before = a.named();
  const auto after = r.best_params.named();
  ASSERT_EQ(before.size(), after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(values(*before[i].tensor), values(*after[i].tensor)) << before[i].name;
  }
  ASSERT_GE(r.history.size(), 2u);
  for (const auto& e : r.history) EXPECT_EQ(e.dev_f1, r.history.front().dev_f1);
}

TEST(Train, PatienceOneStopsEarly) {
  TrainFixture f(InjectionMode::none, 64);
  TrainConfig tc;
  tc.epochs = 50;
  tc.learning_rate = 0.0;  // dev F1 never improves after the first eval
  tc.eval_every = 1;
  tc.patience = 1;
  Rng rng(1);
  const TrainResult r = train(f.cfg, ModelParams::initialize(f.cfg, rng), f.train_set, f.dev_set, tc);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_EQ(r.history.size(), 2u);
  EXPECT_EQ(r.steps, 2u);
}

TEST(Train, RejectsBadData) {
  TrainFixture f(InjectionMode::none, 8);
  Rng rng(1);
  const ModelParams p = ModelParams::initialize(f.cfg, rng);
  EXPECT_THROW(train(f.cfg, p, {}, f.dev_set, TrainConfig{}), DataError);
  auto bad = f.train_set;
  bad[0].label = 2;
  EXPECT_THROW(train(f.cfg, p, bad, f.dev_set, TrainConfig{}), DataError);
}

TEST(Train, FrozenGateMatchesNone) {
  TrainFixture g(InjectionMode::gated, 32);
  TrainFixture n(InjectionMode::none, 32);
  TrainConfig tc;
  tc.epochs = 1;
  tc.eval_every = 1;
  tc.patience = 0;
  Rng r1(4), r2(4);
  TrainConfig frozen = tc;
  frozen.freeze_gate = true;
  const TrainResult a = train(g.cfg, ModelParams::initialize(g.cfg, r1), g.train_set, g.dev_set, frozen);
  const TrainResult b = train(n.cfg, ModelParams::initialize(n.cfg, r2), n.train_set, n.dev_set, tc);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
    EXPECT_EQ(a.history[i].dev_f1, b.history[i].dev_f1);
  }
}

TEST(Train, MajorityLabel) {
  TrainFixture f(InjectionMode::none, 5);  // labels 0,1,0,1,0
  EXPECT_EQ(majority_label(f.train_set), 0);
  f.train_set.pop_back();
  EXPECT_EQ(majority_label(f.train_set), 0);  // tie
}

TEST(Evaluate, DeterministicAndMatchesPredictions) {
  TrainFixture f(InjectionMode::ungated, 20);
  Rng rng(3);
  const ModelParams p = testing::random_params(f.cfg, rng);
  const EvalReport a = evaluate(f.cfg, p, f.train_set);
  const EvalReport b = evaluate(f.cfg, p, f.train_set);
  EXPECT_EQ(format_report(a), format_report(b));
  Ints golds;
  for (const auto& ex : f.train_set) golds.push_back(ex.label);
  EXPECT_EQ(a.f1, f1_binary(predict_labels(f.cfg, p, f.train_set), golds));
  EXPECT_EQ(a.instances, 20u);
}

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / "gibert_ckpt_test";
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(CheckpointTest, RoundTripIsExact) {
  const ModelConfig cfg = testing::tiny_config(InjectionMode::attention, 40, 4);
  Rng rng(9);
  ModelParams p = testing::random_params(cfg, rng);
  save_checkpoint(dir_ / "m.manifest", cfg, p, {{"seed", "9"}});
  Checkpoint c = load_checkpoint(dir_ / "m.manifest");
  EXPECT_EQ(c.metadata.at("seed"), "9");
  EXPECT_EQ(c.config.to_key_values(), cfg.to_key_values());
  const auto a = p.named();
  const auto b = c.params.named();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(a[i].tensor->shape(), b[i].tensor->shape());
    EXPECT_EQ(values(*a[i].tensor), values(*b[i].tensor));
  }
}

TEST_F(CheckpointTest, NoneModeHasNoInjectionTensors) {
  const ModelConfig cfg = testing::tiny_config(InjectionMode::none, 40, 4);
  Rng rng(9);
  ModelParams p = ModelParams::initialize(cfg, rng);
  save_checkpoint(dir_ / "n.manifest", cfg, p);
  std::ifstream in(dir_ / "n.manifest");
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(text.find("projection"), std::string::npos);
  EXPECT_EQ(text.find("gate"), std::string::npos);
  EXPECT_EQ(text.find("injection_attention"), std::string::npos);
}

TEST_F(CheckpointTest, CorruptionIsDetected) {
  const ModelConfig cfg = testing::tiny_config(InjectionMode::gated, 40, 4);
  Rng rng(9);
  ModelParams p = ModelParams::initialize(cfg, rng);
  save_checkpoint(dir_ / "c.manifest", cfg, p);
  {
    std::fstream f(dir_ / "c.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(17);
    f.put('\x5a');
  }
  EXPECT_THROW(load_checkpoint(dir_ / "c.manifest"), DataError);
  std::filesystem::resize_file(dir_ / "c.bin", 8);
  EXPECT_THROW(load_checkpoint(dir_ / "c.manifest"), DataError);
}

}  // namespace
}  // namespace gibert
