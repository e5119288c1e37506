#include "gibert/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <zlib.h>

#include "gibert/error.hpp"
#include "gibert/text_util.hpp"

namespace gibert {
namespace {

constexpr std::string_view kMagic = "gibert-checkpoint";

std::uint32_t crc32_of(const std::vector<unsigned char>& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
    crc = crc32(crc, bytes.data() + offset, chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void append_le(std::vector<unsigned char>& out, double value) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

double read_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

std::size_t to_size(std::string_view s, const std::string& what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw DataError("checkpoint: bad " + what + " '" + std::string(s) + "'");
  return v;
}

Shape parse_shape(std::string_view text) {
  Shape shape;
  if (text == "scalar") return shape;
  for (std::string_view part : split(text, 'x')) shape.push_back(to_size(part, "shape"));
  return shape;
}

std::string format_shape(const Shape& shape) {
  if (shape.empty()) return "scalar";
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out;
}

std::filesystem::path blob_path_for(const std::filesystem::path& manifest) {
  std::filesystem::path blob = manifest;
  blob.replace_extension(".bin");
  return blob;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& manifest_path, const ModelConfig& config, ModelParams& params,
                     const std::map<std::string, std::string>& metadata) {
  if (manifest_path.extension() != ".manifest") throw DataError("checkpoint path must end in .manifest");
  const std::filesystem::path blob_path = blob_path_for(manifest_path);

  std::vector<unsigned char> blob;
  std::ostringstream tensors;
  for (const auto& [name, tensor] : params.named()) {
    tensors << name << " = " << format_shape(tensor->shape()) << " @ " << blob.size() << '\n';
    for (double v : tensor->data()) append_le(blob, v);
  }

  std::ostringstream manifest;
  manifest << kMagic << '\n';
  manifest << "version = " << kCheckpointVersion << '\n';
  manifest << "blob = " << blob_path.filename().string() << '\n';
  manifest << "blob_bytes = " << blob.size() << '\n';
  manifest << "blob_crc32 = " << hex32(crc32_of(blob)) << '\n';
  manifest << "[config]\n";
  for (const auto& [k, v] : config.to_key_values()) manifest << k << " = " << v << '\n';
  manifest << "[metadata]\n";
  for (const auto& [k, v] : metadata) {
    if (k.find('=') != std::string::npos || v.find('\n') != std::string::npos) {
      throw DataError("checkpoint metadata '" + k + "' cannot be stored");
    }
    manifest << k << " = " << v << '\n';
  }
  manifest << "[tensors]\n" << tensors.str();

  std::ofstream bout(blob_path, std::ios::binary);
  if (!bout) throw DataError("cannot write " + blob_path.string());
  bout.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  std::ofstream mout(manifest_path);
  if (!mout) throw DataError("cannot write " + manifest_path.string());
  mout << manifest.str();
}

Checkpoint load_checkpoint(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open checkpoint manifest " + manifest_path.string());

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || trim(line) != kMagic) throw DataError("not a gibert checkpoint manifest");
  ++line_no;

  std::map<std::string, std::string> header, config_values, metadata;
  struct TensorEntry {
    std::string name;
    Shape shape;
    std::size_t offset;
  };
  std::vector<TensorEntry> entries;
  std::string section;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '[' && view.back() == ']') {
      section = std::string(view.substr(1, view.size() - 2));
      continue;
    }
    const std::size_t eq = view.find('=');
    if (eq == std::string_view::npos) throw DataError("checkpoint manifest line " + std::to_string(line_no) + " lacks '='");
    std::string key(trim(view.substr(0, eq)));
    std::string value(trim(view.substr(eq + 1)));
    if (section.empty()) {
      header[key] = value;
    } else if (section == "config") {
      config_values[key] = value;
    } else if (section == "metadata") {
      metadata[key] = value;
    } else if (section == "tensors") {
      const std::size_t at = value.find('@');
      if (at == std::string::npos) throw DataError("checkpoint tensor entry '" + key + "' lacks an offset");
      entries.push_back({key, parse_shape(trim(std::string_view(value).substr(0, at))),
                         to_size(trim(std::string_view(value).substr(at + 1)), "offset")});
    } else {
      throw DataError("checkpoint manifest has unknown section [" + section + "]");
    }
  }

  if (!header.contains("version")) throw DataError("checkpoint manifest lacks a version");
  if (header["version"] != std::to_string(kCheckpointVersion)) {
    throw DataError("checkpoint version " + header["version"] + " is not supported (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }

  const std::filesystem::path blob_path = manifest_path.parent_path() / header["blob"];
  std::ifstream bin(blob_path, std::ios::binary);
  if (!bin) throw DataError("cannot open checkpoint blob " + blob_path.string());
  std::vector<unsigned char> blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  if (blob.size() != to_size(header["blob_bytes"], "blob_bytes")) {
    throw DataError("checkpoint blob has " + std::to_string(blob.size()) + " bytes, manifest says " +
                    header["blob_bytes"]);
  }
  if (hex32(crc32_of(blob)) != header["blob_crc32"]) throw DataError("checkpoint blob checksum mismatch");

  Checkpoint ckpt;
  try {
    ckpt.config = ModelConfig::from_key_values(config_values);
    ckpt.params = ModelParams::zeros(ckpt.config);
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint config invalid: ") + e.what());
  }
  ckpt.metadata = std::move(metadata);

  auto expected = ckpt.params.named();
  if (expected.size() != entries.size()) {
    throw DataError("checkpoint stores " + std::to_string(entries.size()) + " tensors, config expects " +
                    std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const TensorEntry& entry = entries[i];
    Tensor& target = *expected[i].tensor;
    if (entry.name != expected[i].name) {
      throw DataError("checkpoint tensor " + std::to_string(i) + " is '" + entry.name + "', expected '" +
                      expected[i].name + "'");
    }
    if (entry.shape != target.shape()) {
      throw DataError("checkpoint tensor '" + entry.name + "' has shape " + shape_string(entry.shape) +
                      ", expected " + shape_string(target.shape()));
    }
    if (entry.offset + target.size() * 8 > blob.size()) {
      throw DataError("checkpoint tensor '" + entry.name + "' runs past the end of the blob");
    }
    auto data = target.data();
    for (std::size_t j = 0; j < data.size(); ++j) data[j] = read_le(blob.data() + entry.offset + 8 * j);
  }
  ckpt.params.set_requires_grad(true);
  return ckpt;
}

}  // namespace gibert
