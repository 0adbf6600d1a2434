#include "dgd/checkpoint.hpp"

#include "dgd/binary_io.hpp"
#include "dgd/errors.hpp"

namespace dgd {

std::vector<char> encode_tensors(const std::vector<ParamSet::Entry>& entries) {
  ByteWriter w;
  w.bytes("DGDW");
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, t] : entries) {
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (double v : t.data()) w.f64(v);
  }
  return w.buffer();
}

std::vector<ParamSet::Entry> decode_tensors(std::vector<char> bytes) {
  ByteReader r(std::move(bytes));
  if (r.bytes(4) != "DGDW") throw FormatError("bad checkpoint magic", 0);
  const std::size_t version_at = r.offset();
  if (const auto version = r.u32(); version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), version_at);
  }
  const std::uint32_t count = r.u32();
  std::vector<ParamSet::Entry> entries;
  for (std::uint32_t e = 0; e < count; ++e) {
    const std::uint32_t name_len = r.u32();
    std::string name = r.bytes(name_len);
    const std::size_t rank_at = r.offset();
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw FormatError("implausible tensor rank " + std::to_string(rank), rank_at);
    Shape shape(rank);
    for (auto& d : shape) d = r.u32();
    const std::size_t n = shape_size(shape);
    if (n > r.remaining() / 8) throw FormatError("tensor payload for '" + name + "' truncated", r.offset());
    std::vector<double> data(n);
    for (double& v : data) v = r.f64();
    entries.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  r.expect_end("checkpoint");
  return entries;
}

void write_checkpoint(const ParamSet& net, const std::filesystem::path& path) {
  ByteWriter w;
  const auto bytes = encode_tensors(net.entries());
  w.bytes(std::string_view(bytes.data(), bytes.size()));
  w.save(path);
}

ParamSet read_checkpoint(const std::filesystem::path& path, const Architecture& architecture) {
  auto entries = decode_tensors(read_file(path));
  return ParamSet(architecture, std::move(entries));
}

}  // namespace dgd
