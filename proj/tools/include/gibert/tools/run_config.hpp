#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gibert/embedding_store.hpp"
#include "gibert/model_config.hpp"
#include "gibert/trainer.hpp"

namespace gibert::tools {

/// Section name -> key -> value. Keys outside any section land in "".
using Sections = std::map<std::string, std::map<std::string, std::string>>;

/// Parses "[section]" headers and "key = value" lines; '#' starts a comment
/// line. Throws ConfigError naming `origin` and the line.
Sections parse_sections(std::istream& in, const std::string& origin);

/// Everything a training invocation needs.
///
///   [model]  ModelConfig keys
///   [train]  TrainConfig keys (seed comes from [run] seeds)
///   [data]   vocab, train, dev, test?, embeddings?, lexicon?, oov?
///   [run]    seeds = 1,2,...   out = <directory>
///
/// Relative paths resolve against the config file's directory.
struct RunConfig {
  ModelConfig model;
  /// True when [model] pinned embedding_dim; otherwise it follows the file.
  bool embedding_dim_explicit = false;
  TrainConfig train;
  std::filesystem::path vocab;
  std::filesystem::path train_data;
  std::filesystem::path dev_data;
  std::optional<std::filesystem::path> test_data;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> lexicon;
  OovPolicy oov = OovPolicy::zero;
  std::vector<std::uint64_t> seeds = {1};
  std::filesystem::path out = "runs";

  static RunConfig load(const std::filesystem::path& path);
  static RunConfig from_sections(const Sections& sections, const std::filesystem::path& base_dir);

  /// Seeds non-empty, referenced files present, injection modes have
  /// embeddings, model settings consistent. Throws ConfigError.
  void validate() const;
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace gibert::tools
