#include "gibert/model_config.hpp"

#include <charconv>
#include <cstdio>

#include "gibert/error.hpp"

namespace gibert {
namespace {

std::size_t parse_count(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

// Shortest text that parses back to the same double.
std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string_view to_string(InjectionMode mode) {
  switch (mode) {
    case InjectionMode::none: return "none";
    case InjectionMode::gated: return "gated";
    case InjectionMode::ungated: return "ungated";
    case InjectionMode::attention: return "attention";
  }
  return "none";
}

InjectionMode parse_injection_mode(std::string_view text) {
  if (text == "none") return InjectionMode::none;
  if (text == "gated") return InjectionMode::gated;
  if (text == "ungated") return InjectionMode::ungated;
  if (text == "attention") return InjectionMode::attention;
  throw ConfigError("unknown injection mode '" + std::string(text) + "' (expected none, gated, ungated, attention)");
}

void ModelConfig::validate() const {
  if (layers == 0) throw ConfigError("layers must be at least 1");
  if (hidden == 0 || heads == 0 || ffn == 0) throw ConfigError("hidden, heads, and ffn must be positive");
  if (hidden % heads != 0) {
    throw ConfigError("hidden size " + std::to_string(hidden) + " is not divisible by " + std::to_string(heads) +
                      " heads");
  }
  if (injection_layer >= layers) {
    throw ConfigError("injection_layer " + std::to_string(injection_layer) + " must be below layers (" +
                      std::to_string(layers) + ")");
  }
  if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (max_seq_len < 3) throw ConfigError("max_seq_len must be at least 3");
  if (vocab_size < 4) throw ConfigError("vocab_size must cover the four special tokens");
  if (mode != InjectionMode::none && embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
  if (!(layer_norm_eps > 0.0)) throw ConfigError("layer_norm_eps must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
  if (!(init_stddev > 0.0)) throw ConfigError("init_stddev must be positive");
}

std::map<std::string, std::string> ModelConfig::to_key_values() const {
  return {
      {"layers", std::to_string(layers)},
      {"hidden", std::to_string(hidden)},
      {"embedding_dim", std::to_string(embedding_dim)},
      {"heads", std::to_string(heads)},
      {"ffn", std::to_string(ffn)},
      {"max_seq_len", std::to_string(max_seq_len)},
      {"vocab_size", std::to_string(vocab_size)},
      {"num_classes", std::to_string(num_classes)},
      {"mode", std::string(to_string(mode))},
      {"injection_layer", std::to_string(injection_layer)},
      {"layer_norm_eps", format_real(layer_norm_eps)},
      {"dropout", format_real(dropout)},
      {"init_stddev", format_real(init_stddev)},
  };
}

ModelConfig ModelConfig::from_key_values(const std::map<std::string, std::string>& values) {
  ModelConfig cfg;
  for (const auto& [key, value] : values) {
    if (key == "layers") cfg.layers = parse_count(key, value);
    else if (key == "hidden") cfg.hidden = parse_count(key, value);
    else if (key == "embedding_dim") cfg.embedding_dim = parse_count(key, value);
    else if (key == "heads") cfg.heads = parse_count(key, value);
    else if (key == "ffn") cfg.ffn = parse_count(key, value);
    else if (key == "max_seq_len") cfg.max_seq_len = parse_count(key, value);
    else if (key == "vocab_size") cfg.vocab_size = parse_count(key, value);
    else if (key == "num_classes") cfg.num_classes = parse_count(key, value);
    else if (key == "mode") cfg.mode = parse_injection_mode(value);
    else if (key == "injection_layer") cfg.injection_layer = parse_count(key, value);
    else if (key == "layer_norm_eps") cfg.layer_norm_eps = parse_real(key, value);
    else if (key == "dropout") cfg.dropout = parse_real(key, value);
    else if (key == "init_stddev") cfg.init_stddev = parse_real(key, value);
    else throw ConfigError("unknown model setting '" + key + "'");
  }
  return cfg;
}

}  // namespace gibert
