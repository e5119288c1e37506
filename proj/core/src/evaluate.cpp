#include "gibert/evaluate.hpp"

#include <cstdio>
#include <sstream>

#include "gibert/error.hpp"
#include "gibert/trainer.hpp"

namespace gibert {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "undefined"; }

PartitionScore score_subset(std::span<const int> preds, std::span<const int> golds, const std::vector<bool>& member) {
  std::vector<int> p, g;
  for (std::size_t i = 0; i < member.size(); ++i) {
    if (!member[i]) continue;
    p.push_back(preds[i]);
    g.push_back(golds[i]);
  }
  PartitionScore s;
  s.count = p.size();
  s.fraction = member.empty() ? 0.0 : static_cast<double>(s.count) / static_cast<double>(member.size());
  if (!p.empty()) s.f1 = f1_binary(p, g);
  return s;
}

// Running mean: identical inputs reproduce the input exactly.
class Mean {
 public:
  void add(std::optional<double> v) {
    if (!v) {
      ++out_.undefined;
      return;
    }
    ++out_.defined;
    value_ += (*v - value_) / static_cast<double>(out_.defined);
  }
  MetricMean result() const {
    MetricMean m = out_;
    if (m.defined > 0) m.mean = value_;
    return m;
  }

 private:
  MetricMean out_;
  double value_ = 0.0;
};

void write_mean(std::ostringstream& out, const std::string& key, const MetricMean& m) {
  out << key << '=' << fmt(m.mean) << '\n';
  if (m.undefined > 0) out << key << ".undefined_runs=" << m.undefined << '\n';
}

}  // namespace

EvalReport score_predictions(std::span<const int> preds, std::span<const int> golds, std::span<const double> overlaps,
                             const std::vector<PartitionTags>* tags) {
  EvalReport report;
  report.instances = golds.size();
  report.confusion = confusion(preds, golds);
  report.f1 = f1_score(report.confusion);
  report.accuracy = accuracy(report.confusion);
  report.non_obvious_f1 = non_obvious_f1(preds, golds, overlaps);
  for (bool b : non_obvious_mask(golds, overlaps)) report.non_obvious_count += b ? 1 : 0;
  report.failed_run = detect_failed_run(preds);
  if (preds.empty()) report.notes.push_back("no predictions; failed_run is vacuous");
  if (!report.non_obvious_f1) report.notes.push_back("no non-obvious instances; non_obvious_f1 undefined");

  if (tags != nullptr) {
    if (tags->size() != golds.size()) throw DimensionError("partition tags do not match instance count");
    std::vector<bool> syn, ant, neither;
    for (const PartitionTags& t : *tags) {
      syn.push_back(t.has_synonym);
      ant.push_back(t.has_antonym);
      neither.push_back(t.neither());
    }
    report.partitions = PartitionReport{score_subset(preds, golds, syn), score_subset(preds, golds, ant),
                                        score_subset(preds, golds, neither)};
  }
  return report;
}

EvalReport evaluate(const ModelConfig& config, const ModelParams& params, std::span<const EncodedExample> examples,
                    const PairLexicon* lexicon) {
  const std::vector<int> preds = predict_labels(config, params, examples);
  std::vector<int> golds;
  std::vector<double> overlaps;
  std::vector<PartitionTags> tags;
  for (const EncodedExample& ex : examples) {
    golds.push_back(ex.label);
    overlaps.push_back(lexical_overlap(ex.first_tokens, ex.second_tokens));
    if (lexicon != nullptr) tags.push_back(partition_instance(ex.first_tokens, ex.second_tokens, *lexicon));
  }
  return score_predictions(preds, golds, overlaps, lexicon != nullptr ? &tags : nullptr);
}

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  out << "instances=" << r.instances << '\n';
  out << "f1=" << fmt(r.f1) << '\n';
  out << "non_obvious_f1=" << fmt(r.non_obvious_f1) << '\n';
  out << "non_obvious_instances=" << r.non_obvious_count << '\n';
  out << "accuracy=" << fmt(r.accuracy) << '\n';
  out << "failed_run=" << (r.failed_run ? "true" : "false") << '\n';
  out << "tp=" << r.confusion.tp << "\nfp=" << r.confusion.fp << "\ntn=" << r.confusion.tn << "\nfn=" << r.confusion.fn
      << '\n';
  if (r.partitions) {
    const std::pair<const char*, const PartitionScore*> parts[] = {
        {"synonym", &r.partitions->synonym}, {"antonym", &r.partitions->antonym}, {"neither", &r.partitions->neither}};
    for (const auto& [name, score] : parts) {
      out << "partition." << name << ".count=" << score->count << '\n';
      out << "partition." << name << ".fraction=" << fmt(score->fraction) << '\n';
      out << "partition." << name << ".f1=" << fmt(score->f1) << '\n';
    }
  }
  for (const std::string& note : r.notes) out << "note=" << note << '\n';
  return out.str();
}

AggregateReport seed_average(std::span<const EvalReport> reports) {
  if (reports.empty()) throw DataError("seed_average needs at least one report");
  AggregateReport agg;
  agg.runs = reports.size();
  Mean f1, non_obvious, acc;
  bool all_partitioned = true;
  for (const EvalReport& r : reports) {
    f1.add(r.f1);
    non_obvious.add(r.non_obvious_f1);
    acc.add(r.accuracy);
    agg.failed_runs += r.failed_run ? 1 : 0;
    all_partitioned = all_partitioned && r.partitions.has_value();
  }
  agg.f1 = f1.result();
  agg.non_obvious_f1 = non_obvious.result();
  agg.accuracy = acc.result();

  if (all_partitioned) {
    auto average = [&](auto select) {
      Mean score, fraction;
      for (const EvalReport& r : reports) {
        const PartitionScore& s = select(*r.partitions);
        score.add(s.f1);
        fraction.add(s.fraction);
      }
      return AggregateReport::Partition{score.result(), fraction.result()};
    };
    agg.synonym = average([](const PartitionReport& p) -> const PartitionScore& { return p.synonym; });
    agg.antonym = average([](const PartitionReport& p) -> const PartitionScore& { return p.antonym; });
    agg.neither = average([](const PartitionReport& p) -> const PartitionScore& { return p.neither; });
  }
  return agg;
}

std::string format_report(const AggregateReport& r) {
  std::ostringstream out;
  out << "runs=" << r.runs << '\n';
  write_mean(out, "f1", r.f1);
  write_mean(out, "non_obvious_f1", r.non_obvious_f1);
  write_mean(out, "accuracy", r.accuracy);
  out << "failed_runs=" << r.failed_runs << '\n';
  const std::pair<const char*, const std::optional<AggregateReport::Partition>*> parts[] = {
      {"synonym", &r.synonym}, {"antonym", &r.antonym}, {"neither", &r.neither}};
  for (const auto& [name, part] : parts) {
    if (!*part) continue;
    write_mean(out, std::string("partition.") + name + ".fraction", (*part)->fraction);
    write_mean(out, std::string("partition.") + name + ".f1", (*part)->f1);
  }
  return out.str();
}

}  // namespace gibert
