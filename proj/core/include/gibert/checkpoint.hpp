#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "gibert/model_config.hpp"
#include "gibert/model_params.hpp"

namespace gibert {

inline constexpr int kCheckpointVersion = 1;

/// A saved model: configuration, weights, and free-form string metadata
/// (resource paths, seed, training summary).
struct Checkpoint {
  ModelConfig config;
  ModelParams params;
  std::map<std::string, std::string> metadata;
};

/// Writes `<stem>.manifest` (text) and `<stem>.bin` (little-endian doubles in
/// manifest order) next to each other. `manifest_path` must end in .manifest.
///
/// Manifest layout:
///   gibert-checkpoint
///   version = 1
///   blob = <file name>
///   blob_bytes = <size>
///   blob_crc32 = <hex>
///   [config]     key = value per ModelConfig field
///   [metadata]   key = value
///   [tensors]    name = <shape d0xd1...> @ <byte offset>
void save_checkpoint(const std::filesystem::path& manifest_path, const ModelConfig& config, ModelParams& params,
                     const std::map<std::string, std::string>& metadata = {});

/// Throws DataError on version, checksum, size, or tensor-set mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& manifest_path);

}  // namespace gibert
