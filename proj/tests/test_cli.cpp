#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "gibert/checkpoint.hpp"
#include "gibert/text_util.hpp"
#include "gibert/tools/commands.hpp"
#include "gibert/tools/synth.hpp"

namespace gibert::tools {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gibert");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string value_of(const std::string& report, const std::string& key) {
  std::smatch m;
  if (std::regex_search(report, m, std::regex("(^|\\n)" + key + "=([^\\n]*)"))) return m[2];
  return "";
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gibert_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Small synthetic task with a fast config.
  fs::path make_task(const std::string& extra_edits = "") {
    const Result r = cli({"synth", "--out", (dir_ / "task").string(), "--pairs", "48", "--dev-pairs", "16",
                          "--test-pairs", "16", "--vocab-size", "80", "--synonyms", "6", "--antonyms", "6"});
    EXPECT_EQ(r.code, 0) << r.err;
    std::string cfg = slurp(dir_ / "task" / "synth.cfg");
    cfg = std::regex_replace(cfg, std::regex("layers = \\d+"), "layers = 1");
    cfg = std::regex_replace(cfg, std::regex("epochs = \\d+"), "epochs = 1");
    cfg = std::regex_replace(cfg, std::regex("eval_every = \\d+"), "eval_every = 2");
    cfg += extra_edits;
    std::ofstream(dir_ / "task" / "synth.cfg") << cfg;
    return dir_ / "task" / "synth.cfg";
  }
  fs::path dir_;
};

TEST(CliBasics, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"nonsense"}).code, kExitUsage);
  EXPECT_EQ(cli({"train"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(CliBasics, ParamCountTables) {
  const Result big = cli({"paramcount", "-D", "768", "-E", "300"});
  ASSERT_EQ(big.code, 0);
  EXPECT_NE(big.out.find("231936"), std::string::npos);
  EXPECT_NE(big.out.find("1643520"), std::string::npos);
  EXPECT_NE(big.out.find("14.11"), std::string::npos);
  const Result small = cli({"paramcount", "-D", "64", "-E", "16"});
  EXPECT_NE(small.out.find("1152"), std::string::npos);
  EXPECT_NE(small.out.find("10496"), std::string::npos);
  EXPECT_NE(small.out.find("10.98"), std::string::npos);
  const Result edge = cli({"paramcount", "-D", "8", "-E", "0"});
  EXPECT_NE(edge.out.find("16"), std::string::npos);   // 2D
  EXPECT_NE(edge.out.find("160"), std::string::npos);  // 2D^2 + 4D
}

TEST_F(Cli, SynthIsDeterministic) {
  const std::vector<std::string> flags = {"--pairs", "1000", "--vocab-size", "500", "--synonyms", "50",
                                          "--noise", "0.05", "--seed", "7"};
  auto run = [&](const std::string& name) {
    std::vector<std::string> args = {"synth", "--out", (dir_ / name).string()};
    args.insert(args.end(), flags.begin(), flags.end());
    EXPECT_EQ(cli(args).code, 0);
  };
  run("a");
  run("b");
  for (const char* f : {"train.tsv", "dev.tsv", "test.tsv", "vocab.txt", "oracle.vec", "random.vec", "lexicon.tsv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
}

TEST(Synth, NoiseFreeLabelsPassAudit) {
  SynthSpec spec;
  const SynthData data = generate_synth(spec);
  EXPECT_EQ(data.train.size(), 1000u);
  EXPECT_EQ(audit_labels(data.train, data.lexicon), 0u);
  EXPECT_EQ(audit_labels(data.dev, data.lexicon), 0u);
  spec.noise = 0.2;
  const SynthData noisy = generate_synth(spec);
  EXPECT_GT(noisy.flipped, 0u);
  EXPECT_EQ(audit_labels(noisy.train, noisy.lexicon) + audit_labels(noisy.dev, noisy.lexicon) +
                audit_labels(noisy.test, noisy.lexicon),
            noisy.flipped);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

TEST(Synth, OracleGeometry) {
  const SynthData data = generate_synth(SynthSpec{});
  std::size_t syn = 0, ant = 0;
  for (const auto& [pair, rel] : data.lexicon.pairs()) {
    const double c = cosine(data.oracle.lookup(pair.first), data.oracle.lookup(pair.second));
    if (rel == Relation::synonym) {
      EXPECT_GE(c, 0.95) << pair.first << " " << pair.second;
      ++syn;
    } else {
      EXPECT_LE(c, -0.95) << pair.first << " " << pair.second;
      ++ant;
    }
  }
  EXPECT_EQ(syn, 50u);
  EXPECT_EQ(ant, 50u);
  EXPECT_EQ(data.random.vocab_size(), data.oracle.vocab_size());
  EXPECT_EQ(data.random.dim(), data.oracle.dim());
}

TEST_F(Cli, TrainTwoSeedsThenEvalAndGates) {
  const fs::path cfg = make_task();
  const fs::path out = dir_ / "run";
  const Result t = cli({"train", "--config", cfg.string(), "--out", out.string()});
  ASSERT_EQ(t.code, 0) << t.err;
  for (const char* s : {"seed-1", "seed-2"}) {
    EXPECT_TRUE(fs::exists(out / s / "model.manifest"));
    EXPECT_TRUE(fs::exists(out / s / "model.bin"));
    EXPECT_TRUE(fs::exists(out / s / "history.csv"));
  }
  const std::string report = slurp(out / "report.txt");
  EXPECT_EQ(value_of(report, "runs"), "2");

  const std::string manifest = (out / "seed-1" / "model.manifest").string();
  const std::string dev = (dir_ / "task" / "dev.tsv").string();
  const Result e1 = cli({"eval", "--checkpoint", manifest, "--data", dev});
  const Result e2 = cli({"eval", "--checkpoint", manifest, "--data", dev});
  ASSERT_EQ(e1.code, 0) << e1.err;
  EXPECT_EQ(e1.out, e2.out);
  EXPECT_EQ(e1.out.find("partition."), std::string::npos);
  const Result e3 =
      cli({"eval", "--checkpoint", manifest, "--data", dev, "--lexicon", (dir_ / "task" / "lexicon.tsv").string()});
  for (const char* k : {"partition.synonym.f1", "partition.antonym.f1", "partition.neither.f1"}) {
    EXPECT_NE(e3.out.find(k), std::string::npos) << k;
  }

  const Result g = cli({"gates", "--checkpoint", manifest, "--bins", "1"});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_NE(g.out.find("bin_left,bin_right,count"), std::string::npos);
  const std::string dims = value_of(g.out, "dims");
  EXPECT_NE(g.out.find("," + dims + "\n"), std::string::npos);  // one bin holding every dim
}

TEST_F(Cli, UntrainedGateIsOneZeroBin) {
  const fs::path cfg = make_task();
  std::string text = slurp(cfg);
  text = std::regex_replace(text, std::regex("learning_rate = [0-9.e-]+"), "learning_rate = 0");
  std::ofstream(cfg) << text;
  ASSERT_EQ(cli({"train", "--config", cfg.string(), "--seed", "1", "--out", (dir_ / "r").string()}).code, 0);
  const Result g = cli({"gates", "--checkpoint", (dir_ / "r" / "seed-1" / "model.manifest").string(), "--bins", "5"});
  ASSERT_EQ(g.code, 0);
  EXPECT_EQ(value_of(g.out, "near_zero"), value_of(g.out, "dims"));
  std::istringstream rows(g.out.substr(g.out.find("bin_left")));
  std::string line;
  std::getline(rows, line);
  int nonzero = 0;
  while (std::getline(rows, line)) {
    if (!line.ends_with(",0")) ++nonzero;
  }
  EXPECT_EQ(nonzero, 1);
}

TEST_F(Cli, ModeNoneWritesNoInjectionTensors) {
  const fs::path cfg = make_task();
  ASSERT_EQ(cli({"train", "--config", cfg.string(), "--mode", "none", "--seed", "1", "--out", (dir_ / "r").string()})
                .code,
            0);
  const std::string manifest = slurp(dir_ / "r" / "seed-1" / "model.manifest");
  const std::string tensors = manifest.substr(manifest.find("[tensors]"));
  EXPECT_NE(tensors.find("classifier"), std::string::npos);
  EXPECT_EQ(tensors.find("gate"), std::string::npos);
  EXPECT_EQ(tensors.find("projection"), std::string::npos);
  EXPECT_EQ(tensors.find("injection"), std::string::npos);
  const Result g = cli({"gates", "--checkpoint", (dir_ / "r" / "seed-1" / "model.manifest").string()});
  EXPECT_EQ(g.code, kExitUsage);
}

TEST_F(Cli, InjectionLayerOutOfRangeFailsBeforeTraining) {
  const fs::path cfg = make_task();
  const Result r = cli({"train", "--config", cfg.string(), "--layer", "1", "--out", (dir_ / "r").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_FALSE(fs::exists(dir_ / "r" / "seed-1"));
}

TEST_F(Cli, MissingFileIsReported) {
  const Result r = cli({"train", "--config", (dir_ / "nope.cfg").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(r.err.empty());
  const Result e = cli({"eval", "--checkpoint", (dir_ / "nope.manifest").string(), "--data", "x.tsv"});
  EXPECT_EQ(e.code, kExitData);
}

TEST_F(Cli, FrozenGateReproducesNone) {
  const fs::path cfg = make_task("");
  std::string text = slurp(cfg);
  text = std::regex_replace(text, std::regex("freeze_gate = false"), "freeze_gate = true");
  std::ofstream(dir_ / "task" / "frozen.cfg") << text;
  ASSERT_EQ(cli({"train", "--config", (dir_ / "task" / "frozen.cfg").string(), "--seed", "1", "--out",
                 (dir_ / "g").string()})
                .code,
            0);
  ASSERT_EQ(
      cli({"train", "--config", cfg.string(), "--mode", "none", "--seed", "1", "--out", (dir_ / "n").string()}).code,
      0);
  auto dev_block = [](const std::string& report) { return report.substr(report.find("[dev]")); };
  EXPECT_EQ(dev_block(slurp(dir_ / "g" / "report.txt")), dev_block(slurp(dir_ / "n" / "report.txt")));
  EXPECT_EQ(slurp(dir_ / "g" / "seed-1" / "history.csv"), slurp(dir_ / "n" / "seed-1" / "history.csv"));
}

TEST_F(Cli, CorruptCheckpointIsDataError) {
  const fs::path cfg = make_task();
  ASSERT_EQ(cli({"train", "--config", cfg.string(), "--seed", "1", "--out", (dir_ / "r").string()}).code, 0);
  {
    std::fstream f(dir_ / "r" / "seed-1" / "model.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40);
    f.put('\x7f');
  }
  const Result e = cli({"eval", "--checkpoint", (dir_ / "r" / "seed-1" / "model.manifest").string(), "--data",
                        (dir_ / "task" / "dev.tsv").string()});
  EXPECT_EQ(e.code, kExitData);
  EXPECT_NE(e.err.find("checksum"), std::string::npos) << e.err;
}

TEST_F(Cli, AlignDebugShowsPromptPieces) {
  std::ofstream(dir_ / "vocab.txt") << "[PAD]\n[UNK]\n[CLS]\n[SEP]\na\npro\n##mpt\n";
  std::ofstream(dir_ / "e.vec") << "a 1 2\nprompt 0.5 -0.5\n";
  const Result r = cli({"align-debug", "a prompt", "", "--vocab", (dir_ / "vocab.txt").string(), "--embeddings",
                        (dir_ / "e.vec").string(), "--max-len", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("##mpt"), std::string::npos);
  EXPECT_NE(r.out.find("prompt"), std::string::npos);
}

}  // namespace
}  // namespace gibert::tools
