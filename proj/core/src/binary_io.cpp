#include "binary_io.hpp"

#include <fstream>
#include <iterator>

namespace mfood::detail {

std::string ByteReader::bytes(std::size_t n) {
  if (remaining() < n) throw FormatError("unexpected end of data", pos_);
  std::string out(buf_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  buf_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
  pos_ += n;
  return out;
}

std::uint64_t ByteReader::get_le(std::size_t n) {
  if (remaining() < n) throw FormatError("unexpected end of data", pos_);
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
  pos_ += n;
  return v;
}

void ByteReader::expect_end() const {
  if (remaining() != 0) throw FormatError("trailing bytes after payload", pos_);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

}  // namespace mfood::detail
