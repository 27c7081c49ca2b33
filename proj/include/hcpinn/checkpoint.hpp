#pragma once

// Binary parameter checkpoint, little-endian:
//
//   char[8]  magic "HCPINNCK"
//   u32      format version (1)
//   u32      number of layer widths L+1
//   u64[L+1] layer widths
//   f64[]    per layer: weights (row-major, out x in), then biases

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hcpinn/errors.hpp"
#include "hcpinn/network.hpp"

namespace hcpinn {

inline constexpr char kCheckpointMagic[8] = {'H', 'C', 'P', 'I', 'N', 'N', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes little-endian");

inline void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open checkpoint for writing: " + path.string());
  auto put = [&](const auto& v) { os.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put(kCheckpointVersion);
  put(static_cast<std::uint32_t>(params.layer_sizes().size()));
  for (auto s : params.layer_sizes()) put(static_cast<std::uint64_t>(s));
  const auto data = params.data();
  os.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()));
  if (!os) throw ConfigError("failed writing checkpoint: " + path.string());
}

inline NetworkParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint: " + path.string());
  auto get = [&](auto& v) {
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(v))) throw ConfigError("truncated checkpoint");
  };
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw ConfigError("not a checkpoint file: " + path.string());
  }
  std::uint32_t version = 0;
  get(version);
  if (version != kCheckpointVersion) {
    throw ConfigError("unsupported checkpoint version " + std::to_string(version));
  }
  std::uint32_t count = 0;
  get(count);
  if (count < 2 || count > 1024) throw ConfigError("implausible layer count in checkpoint");
  std::vector<std::size_t> sizes(count);
  for (auto& s : sizes) {
    std::uint64_t v = 0;
    get(v);
    s = static_cast<std::size_t>(v);
  }
  NetworkParams params(std::move(sizes));
  auto data = params.data();
  if (!is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()))) {
    throw ConfigError("truncated checkpoint parameters");
  }
  if (is.peek() != std::char_traits<char>::eof()) throw ConfigError("trailing bytes in checkpoint");
  return params;
}

}  // namespace hcpinn
