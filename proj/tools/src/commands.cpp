#include "gibert/tools/commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "gibert/checkpoint.hpp"
#include "gibert/error.hpp"
#include "gibert/evaluate.hpp"
#include "gibert/gate_analysis.hpp"
#include "gibert/injection_sequence.hpp"
#include "gibert/lexicon.hpp"
#include "gibert/param_count.hpp"
#include "gibert/rng.hpp"
#include "gibert/tools/synth.hpp"

namespace gibert::tools {
namespace fs = std::filesystem;
namespace {

std::string timestamp_header() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[64];
  std::strftime(buf, sizeof buf, "# generated %Y-%m-%dT%H:%M:%SZ\n", &utc);
  return buf;
}

void write_text(const fs::path& path, const std::string& text, bool header) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  if (header) out << timestamp_header();
  out << text;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string section(const std::string& name, const std::string& body) { return "[" + name + "]\n" + body; }

struct Resources {
  WordPieceVocab vocab;
  std::optional<EmbeddingStore> store;
  std::optional<PairLexicon> lexicon;
  const EmbeddingStore* store_ptr() const { return store ? &*store : nullptr; }
  const PairLexicon* lexicon_ptr() const { return lexicon ? &*lexicon : nullptr; }
};

std::string history_csv(const std::vector<EvalPoint>& history) {
  std::string out = "step,epoch,train_loss,dev_f1,improved\n";
  for (const EvalPoint& p : history) {
    out += std::to_string(p.step) + "," + std::to_string(p.epoch) + "," + fixed(p.train_loss, 6) + "," +
           fixed(p.dev_f1, 6) + "," + (p.improved ? "1" : "0") + "\n";
  }
  return out;
}

ModelConfig checkpoint_config_for_data(const Checkpoint& ckpt, const WordPieceVocab& vocab) {
  if (ckpt.config.vocab_size != vocab.size()) {
    throw DataError("checkpoint expects a vocabulary of " + std::to_string(ckpt.config.vocab_size) +
                    " pieces, vocab file has " + std::to_string(vocab.size()));
  }
  return ckpt.config;
}

std::string metadata_or(const Checkpoint& ckpt, const std::string& key) {
  auto it = ckpt.metadata.find(key);
  return it == ckpt.metadata.end() ? std::string() : it->second;
}

// ---- verbs ---------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::optional<std::string> mode;
  std::optional<std::size_t> layer;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> embeddings, lexicon, out;
};

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& log) {
  RunConfig cfg = RunConfig::load(args.config);
  if (args.mode) cfg.model.mode = parse_injection_mode(*args.mode);
  if (args.layer) cfg.model.injection_layer = *args.layer;
  if (args.seed) cfg.seeds = {*args.seed};
  if (args.embeddings) cfg.embeddings = fs::path(*args.embeddings);
  if (args.lexicon) cfg.lexicon = fs::path(*args.lexicon);
  if (args.out) cfg.out = fs::path(*args.out);
  out << run_training(cfg, log);
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint, data;
  std::optional<std::string> lexicon, embeddings, vocab, out, predictions;
};

int cmd_eval(const EvalArgs& args, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(args.checkpoint);
  Resources res;
  const std::string vocab_path = args.vocab ? *args.vocab : metadata_or(ckpt, "vocab");
  if (vocab_path.empty()) throw ConfigError("checkpoint records no vocab; pass --vocab");
  res.vocab = WordPieceVocab::load(vocab_path);
  const ModelConfig model = checkpoint_config_for_data(ckpt, res.vocab);
  if (model.mode != InjectionMode::none) {
    const std::string emb = args.embeddings ? *args.embeddings : metadata_or(ckpt, "embeddings");
    if (emb.empty()) throw ConfigError("injection model needs --embeddings");
    res.store = EmbeddingStore::load(emb, parse_oov_policy(metadata_or(ckpt, "oov").empty() ? "zero"
                                                                                             : metadata_or(ckpt, "oov")));
    if (res.store->dim() != model.embedding_dim) {
      throw DataError("embedding file has dimension " + std::to_string(res.store->dim()) + ", checkpoint expects " +
                      std::to_string(model.embedding_dim));
    }
  }
  if (args.lexicon) res.lexicon = PairLexicon::load(*args.lexicon);
  const std::vector<PairExample> data = load_dataset_tsv(args.data);
  const FeatureEncoder encoder(res.vocab, res.store_ptr(), model.max_seq_len);
  const std::vector<EncodedExample> encoded = encoder.encode_all(data);
  const std::string report = format_report(evaluate(model, ckpt.params, encoded, res.lexicon_ptr()));
  out << report;
  if (args.predictions) {
    const std::vector<int> preds = predict_labels(model, ckpt.params, encoded);
    std::string rows = "id\tgold\tpred\n";
    for (std::size_t i = 0; i < encoded.size(); ++i) {
      rows += encoded[i].id + "\t" + std::to_string(encoded[i].label) + "\t" + std::to_string(preds[i]) + "\n";
    }
    write_text(*args.predictions, rows, false);
  }
  if (args.out) write_text(*args.out, report, true);
  return kExitOk;
}

struct GatesArgs {
  std::string checkpoint;
  std::size_t bins = 10;
  double threshold = kBlockedGateThreshold;
  std::optional<std::string> out;
};

int cmd_gates(const GatesArgs& args, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(args.checkpoint);
  const GateSnapshot snap = export_gate_snapshot(ckpt.params, args.bins, args.threshold);
  const std::string csv = histogram_csv(snap.histogram);
  out << "dims=" << snap.gate.size() << "\nzero_threshold=" << snap.zero_threshold
      << "\nnear_zero=" << snap.near_zero << "\nmin=" << fixed(snap.min, 6) << "\nmax=" << fixed(snap.max, 6)
      << "\nmean=" << fixed(snap.mean, 6) << '\n';
  if (args.out) {
    write_text(*args.out, csv, false);
    out << "histogram=" << *args.out << '\n';
  } else {
    out << csv;
  }
  return kExitOk;
}

struct SynthArgs {
  SynthSpec spec;
  std::string out;
};

int cmd_synth(const SynthArgs& args, std::ostream& out) {
  const SynthData data = generate_synth(args.spec);
  write_synth(data, args.spec, args.out);
  out << "train=" << data.train.size() << "\ndev=" << data.dev.size() << "\ntest=" << data.test.size()
      << "\nvocab_pieces=" << data.vocab.size() << "\nsynonym_pairs=" << data.lexicon.count(Relation::synonym)
      << "\nantonym_pairs=" << data.lexicon.count(Relation::antonym) << "\nfillers=" << data.fillers.size()
      << "\nlabels_flipped=" << data.flipped << "\nout=" << args.out << '\n';
  return kExitOk;
}

struct AlignArgs {
  std::string first, second;
  std::optional<std::string> vocab, embeddings, checkpoint;
  std::size_t max_len = 64;
  std::size_t columns = 4;
};

int cmd_align(const AlignArgs& args, std::ostream& out) {
  std::string vocab_path = args.vocab.value_or("");
  std::string emb_path = args.embeddings.value_or("");
  std::size_t max_len = args.max_len;
  if (args.checkpoint) {
    const Checkpoint ckpt = load_checkpoint(*args.checkpoint);
    if (vocab_path.empty()) vocab_path = metadata_or(ckpt, "vocab");
    if (emb_path.empty()) emb_path = metadata_or(ckpt, "embeddings");
    max_len = ckpt.config.max_seq_len;
  }
  if (vocab_path.empty()) throw ConfigError("align-debug needs --vocab or --checkpoint");
  const WordPieceVocab vocab = WordPieceVocab::load(vocab_path);
  std::optional<EmbeddingStore> store;
  if (!emb_path.empty()) store = EmbeddingStore::load(emb_path);
  out << alignment_table(args.first, args.second, vocab, store ? &*store : nullptr, max_len, args.columns);
  return kExitOk;
}

}  // namespace

std::string run_training(const RunConfig& config, std::ostream& log) {
  config.validate();
  RunConfig cfg = config;
  Resources res;
  res.vocab = WordPieceVocab::load(cfg.vocab);
  if (cfg.model.vocab_size == 0) {
    cfg.model.vocab_size = res.vocab.size();
  } else if (cfg.model.vocab_size != res.vocab.size()) {
    throw ConfigError("vocab_size " + std::to_string(cfg.model.vocab_size) + " does not match " +
                      std::to_string(res.vocab.size()) + " pieces in " + cfg.vocab.string());
  }
  if (cfg.embeddings && cfg.model.mode != InjectionMode::none) {
    res.store = EmbeddingStore::load(*cfg.embeddings, cfg.oov);
    if (cfg.embedding_dim_explicit && cfg.model.embedding_dim != res.store->dim()) {
      throw ConfigError("embedding_dim " + std::to_string(cfg.model.embedding_dim) + " does not match " +
                        std::to_string(res.store->dim()) + " columns in " + cfg.embeddings->string());
    }
    cfg.model.embedding_dim = res.store->dim();
    if (res.store->duplicates_skipped() > 0) {
      log << "warning: " << res.store->duplicates_skipped() << " duplicate embedding rows skipped\n";
    }
  }
  cfg.model.validate();
  if (cfg.lexicon) res.lexicon = PairLexicon::load(*cfg.lexicon);

  const FeatureEncoder encoder(res.vocab, res.store_ptr(), cfg.model.max_seq_len);
  const auto train_set = encoder.encode_all(load_dataset_tsv(cfg.train_data));
  const auto dev_set = encoder.encode_all(load_dataset_tsv(cfg.dev_data));
  std::vector<EncodedExample> test_set;
  if (cfg.test_data) test_set = encoder.encode_all(load_dataset_tsv(*cfg.test_data));

  std::vector<EvalReport> dev_reports, test_reports;
  for (std::uint64_t seed : cfg.seeds) {
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    Rng rng(seed);
    log << "seed " << seed << ": training " << to_string(cfg.model.mode) << " model on " << train_set.size()
        << " pairs\n";
    TrainResult result = train(cfg.model, ModelParams::initialize(cfg.model, rng), train_set, dev_set, tc,
                               [&](const EvalPoint& p) {
                                 log << "  step " << p.step << " epoch " << p.epoch << " loss "
                                     << fixed(p.train_loss, 4) << " dev_f1 " << fixed(p.dev_f1, 4)
                                     << (p.improved ? " *" : "") << '\n';
                               });

    const fs::path dir = cfg.out / ("seed-" + std::to_string(seed));
    fs::create_directories(dir);
    std::map<std::string, std::string> meta = {
        {"seed", std::to_string(seed)},
        {"vocab", fs::absolute(cfg.vocab).string()},
        {"embeddings", cfg.embeddings && res.store ? fs::absolute(*cfg.embeddings).string() : ""},
        {"oov", std::string(to_string(cfg.oov))},
        {"best_step", std::to_string(result.best_step)},
        {"best_dev_f1", fixed(result.best_dev_f1, 6)},
        {"steps", std::to_string(result.steps)},
        {"stopped_early", result.stopped_early ? "true" : "false"},
        {"majority_label", std::to_string(result.majority_label)},
    };
    for (const auto& [k, v] : tc.to_key_values()) meta["train." + k] = v;
    save_checkpoint(dir / "model.manifest", cfg.model, result.best_params, meta);
    write_text(dir / "history.csv", history_csv(result.history), false);

    dev_reports.push_back(evaluate(cfg.model, result.best_params, dev_set, res.lexicon_ptr()));
    std::string report = section("dev", format_report(dev_reports.back()));
    if (!test_set.empty()) {
      test_reports.push_back(evaluate(cfg.model, result.best_params, test_set, res.lexicon_ptr()));
      report += "\n" + section("test", format_report(test_reports.back()));
    }
    write_text(dir / "report.txt", report, true);
    log << "seed " << seed << ": best dev f1 " << fixed(result.best_dev_f1, 4) << " at step " << result.best_step
        << (dev_reports.back().failed_run ? " (failed run: single-class predictions)" : "") << '\n';
  }

  std::string aggregate = "mode=" + std::string(to_string(cfg.model.mode)) +
                          "\ninjection_layer=" + std::to_string(cfg.model.injection_layer) + "\n" +
                          section("dev", format_report(seed_average(dev_reports)));
  if (!test_reports.empty()) aggregate += "\n" + section("test", format_report(seed_average(test_reports)));
  write_text(cfg.out / "report.txt", aggregate, true);
  return aggregate;
}

std::string alignment_table(const std::string& first, const std::string& second, const WordPieceVocab& vocab,
                            const EmbeddingStore* store, std::size_t max_seq_len, std::size_t columns) {
  const TokenizedText a = wordpiece_tokenize(first, vocab);
  const TokenizedText b = wordpiece_tokenize(second, vocab);
  const WordPieceSequence seq = pack_pair(a, b, max_seq_len, vocab);
  Tensor rows;
  if (store != nullptr) rows = build_injection_sequence(seq, a.tokens, b.tokens, *store);

  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-4s %-14s %-3s %-20s %s\n", "pos", "piece", "seg", "source", "injection");
  out << buf;
  for (std::size_t j = 0; j < seq.content_length(); ++j) {
    std::string source = "special";
    if (const auto& src = seq.alignment[j]) {
      const auto& tokens = src->sentence == 1 ? a.tokens : b.tokens;
      source = "s" + std::to_string(src->sentence) + ":" + std::to_string(src->token) + " " + tokens[src->token];
    }
    std::string row = "-";
    if (store != nullptr) {
      row.clear();
      const auto values = rows.row(j);
      for (std::size_t c = 0; c < std::min(columns, values.size()); ++c) {
        if (c > 0) row += ' ';
        row += fixed(values[c], 3);
      }
      if (values.size() > columns) row += " ...";
    }
    std::snprintf(buf, sizeof buf, "%-4zu %-14s %-3d %-20s ", j, vocab.piece(seq.piece_ids[j]).c_str(),
                  seq.segment_ids[j], source.c_str());
    out << buf << row << '\n';
  }
  if (seq.content_length() < seq.length()) out << "(+" << seq.length() - seq.content_length() << " [PAD])\n";
  return out.str();
}

std::string paramcount_table(std::uint64_t hidden, std::uint64_t embedding_dim) {
  const std::uint64_t gated = count_injection_params(InjectionMode::gated, hidden, embedding_dim);
  const std::uint64_t attention = count_injection_params(InjectionMode::attention, hidden, embedding_dim);
  const std::uint64_t ungated = count_injection_params(InjectionMode::ungated, hidden, embedding_dim);
  std::ostringstream out;
  out << "hidden=" << hidden << "\nembedding_dim=" << embedding_dim << "\ngated=" << gated
      << "\nungated=" << ungated << "\nattention=" << attention << "\ngated_vs_attention="
      << fixed(100.0 * static_cast<double>(gated) / static_cast<double>(attention), 2) << "%\n";
  return out.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"gated embedding injection for transformer sentence-pair classifiers", "gibert"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train one model per configured seed");
  train->add_option("--config", train_args.config, "run config file")->required();
  train->add_option("--mode", train_args.mode, "none|gated|ungated|attention");
  train->add_option("--layer", train_args.layer, "injection layer (0 = after embeddings)");
  train->add_option("--seed", train_args.seed, "train only this seed");
  train->add_option("--embeddings", train_args.embeddings, "embedding file");
  train->add_option("--lexicon", train_args.lexicon, "synonym/antonym lexicon TSV");
  train->add_option("--out", train_args.out, "output directory");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "score a checkpoint on a dataset");
  eval->add_option("--checkpoint", eval_args.checkpoint, "model.manifest")->required();
  eval->add_option("--data", eval_args.data, "dataset TSV")->required();
  eval->add_option("--lexicon", eval_args.lexicon, "adds the synonym/antonym partition block");
  eval->add_option("--embeddings", eval_args.embeddings, "override the recorded embedding file");
  eval->add_option("--vocab", eval_args.vocab, "override the recorded vocab file");
  eval->add_option("--out", eval_args.out, "also write the report here");
  eval->add_option("--predictions", eval_args.predictions, "write id, gold and predicted label per instance");

  SynthArgs synth_args;
  SynthSpec& spec = synth_args.spec;
  auto* synth = app.add_subcommand("synth", "generate the synthetic paraphrase task");
  synth->add_option("--out", synth_args.out, "output directory")->required();
  synth->add_option("--seed", spec.seed, "generator seed")->capture_default_str();
  synth->add_option("--pairs", spec.train_pairs, "training pairs")->capture_default_str();
  synth->add_option("--dev-pairs", spec.dev_pairs)->capture_default_str();
  synth->add_option("--test-pairs", spec.test_pairs)->capture_default_str();
  synth->add_option("--vocab-size", spec.vocab_size, "content words")->capture_default_str();
  synth->add_option("--synonyms", spec.synonym_pairs, "synonym pairs")->capture_default_str();
  synth->add_option("--antonyms", spec.antonym_pairs, "antonym pairs")->capture_default_str();
  synth->add_option("--noise", spec.noise, "label flip rate")->capture_default_str();
  synth->add_option("--positive-rate", spec.positive_rate)->capture_default_str();
  synth->add_option("--heldout", spec.heldout_fraction, "lexicon pairs kept out of training")->capture_default_str();
  synth->add_option("--dim", spec.embedding_dim, "embedding dimension")->capture_default_str();
  synth->add_option("--min-words", spec.min_words, "shortest sentence")->capture_default_str();
  synth->add_option("--max-words", spec.max_words, "longest sentence")->capture_default_str();
  synth->add_option("--identity-share", spec.identity_share, "positives that are exact copies")->capture_default_str();
  synth->add_option("--two-pivot-share", spec.two_pivot_share, "instances with two lexicon words")->capture_default_str();

  std::uint64_t pc_hidden = 768, pc_dim = 300;
  auto* paramcount = app.add_subcommand("paramcount", "injection parameter counts");
  paramcount->add_option("--hidden,-D", pc_hidden, "hidden size D")->capture_default_str();
  paramcount->add_option("--embedding-dim,-E", pc_dim, "external embedding size E")->capture_default_str();

  GatesArgs gates_args;
  auto* gates = app.add_subcommand("gates", "gate vector histogram");
  gates->add_option("--checkpoint", gates_args.checkpoint, "gated model.manifest")->required();
  gates->add_option("--bins", gates_args.bins)->capture_default_str()->check(CLI::PositiveNumber);
  gates->add_option("--threshold", gates_args.threshold, "|g| below this counts as blocked")->capture_default_str();
  gates->add_option("--out", gates_args.out, "histogram CSV path");

  AlignArgs align_args;
  auto* align = app.add_subcommand("align-debug", "show pieces, alignment and injection rows for a pair");
  align->add_option("first", align_args.first)->required();
  align->add_option("second", align_args.second)->required();
  align->add_option("--vocab", align_args.vocab);
  align->add_option("--embeddings", align_args.embeddings);
  align->add_option("--checkpoint", align_args.checkpoint, "take vocab and embeddings from a checkpoint");
  align->add_option("--max-len", align_args.max_len)->capture_default_str();
  align->add_option("--columns", align_args.columns, "injection values shown per row")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_args, out, err);
    if (*eval) return cmd_eval(eval_args, out);
    if (*synth) return cmd_synth(synth_args, out);
    if (*paramcount) {
      if (pc_hidden == 0) throw ConfigError("--hidden must be at least 1");
      out << paramcount_table(pc_hidden, pc_dim);
      return kExitOk;
    }
    if (*gates) return cmd_gates(gates_args, out);
    if (*align) return cmd_align(align_args, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace gibert::tools
