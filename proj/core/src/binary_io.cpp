#include "dgd/binary_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "dgd/errors.hpp"

namespace dgd {

void ByteWriter::f32(float v) { put(std::bit_cast<std::uint32_t>(v), 4); }
void ByteWriter::f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }

void ByteWriter::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return std::vector<char>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

ByteReader ByteReader::load(const std::filesystem::path& path) { return ByteReader(read_file(path)); }

std::string ByteReader::bytes(std::size_t n) {
  if (remaining() < n) throw FormatError("truncated input", pos_);
  std::string out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
  pos_ += n;
  return out;
}

float ByteReader::f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(get(4))); }
double ByteReader::f64() { return std::bit_cast<double>(get(8)); }

std::uint64_t ByteReader::get(int n) {
  if (remaining() < static_cast<std::size_t>(n)) throw FormatError("truncated input", pos_);
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
  }
  pos_ += static_cast<std::size_t>(n);
  return v;
}

void ByteReader::expect_end(const char* what) const {
  if (remaining() != 0) throw FormatError(std::string("trailing bytes after ") + what, pos_);
}

}  // namespace dgd
