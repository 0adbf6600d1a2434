#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dgd/network.hpp"

namespace dgd {

// Checkpoint layout (little-endian):
//   "DGDW" | version u32 | entry count u32 |
//   per entry: name length u32, UTF-8 name, rank u32, dims u32 x rank, f64 payload.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<char> encode_tensors(const std::vector<ParamSet::Entry>& entries);
std::vector<ParamSet::Entry> decode_tensors(std::vector<char> bytes);

void write_checkpoint(const ParamSet& net, const std::filesystem::path& path);
/// Architecture is not stored in the file; names and shapes are checked against it.
ParamSet read_checkpoint(const std::filesystem::path& path, const Architecture& architecture);

}  // namespace dgd
