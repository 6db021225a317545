#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mfood/tensor.hpp"

namespace mfood {

// One byte per coordinate: round(clamp(x, 0, 1) * 255).
struct QuantizedSample {
  std::vector<std::uint8_t> bytes;
  std::vector<std::size_t> shape;
  bool clamped = false;  // some input fell outside [0, 1]
};

// Throws NumericError on non-finite input.
QuantizedSample quantize(std::span<const double> x, std::vector<std::size_t> shape = {});
std::vector<double> dequantize(const QuantizedSample& q);

// Lossless byte compressor used for the input-complexity term.
class Codec {
 public:
  virtual ~Codec() = default;
  virtual std::string name() const = 0;
  virtual int level() const = 0;
  // Length of the compressed stream in bytes.
  virtual std::size_t compressed_size(std::span<const std::uint8_t> bytes) const = 0;
};

// Raw DEFLATE stream (RFC 1951, no zlib/gzip wrapper) via zlib.
class DeflateCodec final : public Codec {
 public:
  explicit DeflateCodec(int level = 9);
  std::string name() const override { return "deflate-raw"; }
  int level() const override { return level_; }
  std::size_t compressed_size(std::span<const std::uint8_t> bytes) const override;

 private:
  int level_;
};

// 8 * compressed length. Throws DomainError on an empty sample and
// NumericError (with the sample index when given) on codec failure.
std::uint64_t complexity_bits(const QuantizedSample& sample, const Codec& codec);

// NLL in bits per dimension minus compressed bits per dimension:
//   nll / (D ln 2) - bits / D.
double ic_adjusted_nll(double nll_nats, double bits, std::size_t dim);

}  // namespace mfood
