#include <benchmark/benchmark.h>

#include "gibert/encoder.hpp"
#include "gibert/injection_sequence.hpp"
#include "gibert/ops.hpp"
#include "gibert/rng.hpp"
#include "gibert/wordpiece.hpp"

namespace gibert {
namespace {

Tensor filled(const Shape& shape, Rng& rng) {
  Tensor t(shape);
  for (double& v : t.data()) v = rng.uniform() - 0.5;
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = filled({n, n}, rng), b = filled({n, n}, rng);
  for (auto _ : state) {
    ad::Graph g(ad::Graph::Mode::inference);
    benchmark::DoNotOptimize(ad::matmul(g.constant(a), g.constant(b)).value().data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

WordPieceVocab bench_vocab() {
  std::vector<std::string> pieces = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
  for (char c = 'a'; c <= 'z'; ++c) {
    pieces.emplace_back(1, c);
    pieces.push_back(std::string("##") + c);
  }
  for (const char* w : {"the", "cat", "sat", "on", "mat", "pro", "##mpt", "dog", "ran"}) pieces.emplace_back(w);
  return WordPieceVocab::from_pieces(pieces);
}

void BM_Tokenize(benchmark::State& state) {
  const WordPieceVocab vocab = bench_vocab();
  const std::string text = "The cat sat on the mat while a prompt dog ran, quickly zigzagging past everything.";
  for (auto _ : state) benchmark::DoNotOptimize(wordpiece_tokenize(text, vocab).pieces.size());
}
BENCHMARK(BM_Tokenize);

struct ModelBench {
  ModelConfig cfg;
  ModelParams params;
  std::vector<WordPieceSequence> seqs;
  std::vector<Tensor> inj;
  EncoderBatch batch;
  std::vector<int> targets;

  ModelBench(InjectionMode mode, std::size_t batch_size) {
    cfg.layers = 2;
    cfg.hidden = 64;
    cfg.heads = 4;
    cfg.ffn = 128;
    cfg.max_seq_len = 32;
    cfg.vocab_size = 200;
    cfg.embedding_dim = 16;
    cfg.mode = mode;
    Rng rng(3);
    params = ModelParams::initialize(cfg, rng);
    for (std::size_t b = 0; b < batch_size; ++b) {
      WordPieceSequence s;
      for (std::size_t j = 0; j < cfg.max_seq_len; ++j) {
        s.piece_ids.push_back(static_cast<std::int32_t>(4 + rng.below(cfg.vocab_size - 4)));
        s.segment_ids.push_back(j < cfg.max_seq_len / 2 ? 0 : 1);
        s.mask.push_back(1);
        s.alignment.emplace_back();
      }
      seqs.push_back(std::move(s));
      inj.push_back(filled({cfg.max_seq_len, cfg.embedding_dim}, rng));
      targets.push_back(static_cast<int>(b % 2));
    }
    std::vector<ModelInput> in;
    for (std::size_t b = 0; b < batch_size; ++b) in.push_back({&seqs[b], &inj[b]});
    batch = make_batch(in);
  }
};

void BM_Forward(benchmark::State& state) {
  ModelBench m(static_cast<InjectionMode>(state.range(0)), 16);
  for (auto _ : state) benchmark::DoNotOptimize(predict(m.batch, m.cfg, m.params).data().data());
}
BENCHMARK(BM_Forward)->ArgName("mode")->DenseRange(0, 3);

void BM_ForwardBackward(benchmark::State& state) {
  ModelBench m(static_cast<InjectionMode>(state.range(0)), 16);
  for (auto _ : state) {
    ad::Graph g;
    ad::Var loss = ad::cross_entropy(forward(g, m.batch, m.cfg, m.params).logits, m.targets);
    g.backward(loss);
    benchmark::DoNotOptimize(loss.value().data().data());
  }
}
BENCHMARK(BM_ForwardBackward)->ArgName("mode")->DenseRange(0, 3);

}  // namespace
}  // namespace gibert
BENCHMARK_MAIN();
