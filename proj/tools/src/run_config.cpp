#include "gibert/tools/run_config.hpp"

#include <charconv>
#include <fstream>

#include "gibert/error.hpp"
#include "gibert/text_util.hpp"

namespace gibert::tools {
namespace fs = std::filesystem;

Sections parse_sections(std::istream& in, const std::string& origin) {
  Sections out;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto fail = [&](const std::string& why) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + why);
    };
    if (text.front() == '[') {
      if (text.back() != ']' || text.size() < 3) fail("malformed section header");
      section = std::string(trim(text.substr(1, text.size() - 2)));
      out[section];
      continue;
    }
    const std::size_t eq = text.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    const std::string key(trim(text.substr(0, eq)));
    if (key.empty()) fail("empty key");
    if (!out[section].emplace(key, std::string(trim(text.substr(eq + 1)))).second) fail("duplicate key '" + key + "'");
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (std::string_view part : split(text, ',')) {
    part = trim(part);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
      throw ConfigError("invalid seed '" + std::string(part) + "'");
    }
    seeds.push_back(v);
  }
  return seeds;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return from_sections(parse_sections(in, path.string()), path.parent_path());
}

RunConfig RunConfig::from_sections(const Sections& sections, const fs::path& base_dir) {
  RunConfig cfg;
  auto resolve = [&](const std::string& value) {
    fs::path p(value);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  for (const auto& [name, values] : sections) {
    if (name == "model") {
      cfg.model = ModelConfig::from_key_values(values);
      cfg.embedding_dim_explicit = values.contains("embedding_dim");
    } else if (name == "train") {
      if (values.contains("seed")) throw ConfigError("[train] seed is not allowed; list seeds under [run]");
      cfg.train = TrainConfig::from_key_values(values);
    } else if (name == "data") {
      for (const auto& [key, value] : values) {
        if (key == "vocab") cfg.vocab = resolve(value);
        else if (key == "train") cfg.train_data = resolve(value);
        else if (key == "dev") cfg.dev_data = resolve(value);
        else if (key == "test") cfg.test_data = resolve(value);
        else if (key == "embeddings") cfg.embeddings = resolve(value);
        else if (key == "lexicon") cfg.lexicon = resolve(value);
        else if (key == "oov") cfg.oov = parse_oov_policy(value);
        else throw ConfigError("unknown [data] key '" + key + "'");
      }
    } else if (name == "run") {
      for (const auto& [key, value] : values) {
        if (key == "seeds") cfg.seeds = parse_seed_list(value);
        else if (key == "out") cfg.out = resolve(value);
        else throw ConfigError("unknown [run] key '" + key + "'");
      }
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  return cfg;
}

void RunConfig::validate() const {
  if (seeds.empty()) throw ConfigError("no seeds configured");
  train.validate();
  auto require = [](const fs::path& p, const char* what) {
    if (p.empty()) throw ConfigError(std::string("missing [data] ") + what);
    if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " file not found: " + p.string());
  };
  require(vocab, "vocab");
  require(train_data, "train");
  require(dev_data, "dev");
  if (test_data) require(*test_data, "test");
  if (lexicon) require(*lexicon, "lexicon");
  if (embeddings) require(*embeddings, "embeddings");
  if (model.mode != InjectionMode::none && !embeddings) {
    throw ConfigError("injection mode " + std::string(to_string(model.mode)) + " needs [data] embeddings");
  }
  // vocab_size and embedding_dim may still be filled from the resources.
  ModelConfig probe = model;
  if (probe.vocab_size == 0) probe.vocab_size = 4;
  probe.validate();
}

}  // namespace gibert::tools
