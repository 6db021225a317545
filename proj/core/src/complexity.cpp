#include "mfood/complexity.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfood/errors.hpp"

namespace mfood {

QuantizedSample quantize(std::span<const double> x, std::vector<std::size_t> shape) {
  QuantizedSample q;
  q.shape = shape.empty() ? std::vector<std::size_t>{x.size()} : std::move(shape);
  q.bytes.reserve(x.size());
  for (double v : x) {
    if (!std::isfinite(v)) throw NumericError("cannot quantize a non-finite value");
    if (v < 0.0 || v > 1.0) q.clamped = true;
    const double c = std::clamp(v, 0.0, 1.0);
    q.bytes.push_back(static_cast<std::uint8_t>(std::lround(c * 255.0)));
  }
  return q;
}

std::vector<double> dequantize(const QuantizedSample& q) {
  std::vector<double> out(q.bytes.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(q.bytes[i]) / 255.0;
  return out;
}

DeflateCodec::DeflateCodec(int level) : level_(level) {
  if (level < 0 || level > 9) throw ConfigError("deflate level must be in [0, 9]");
}

std::size_t DeflateCodec::compressed_size(std::span<const std::uint8_t> bytes) const {
  z_stream zs{};
  // Negative window bits select a raw DEFLATE stream.
  if (deflateInit2(&zs, level_, Z_DEFLATED, -15, 9, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw NumericError("deflateInit2 failed");
  }
  std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(bytes.size())) + 16);
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  const std::size_t produced = zs.total_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw NumericError("deflate did not finish the stream");
  return produced;
}

std::uint64_t complexity_bits(const QuantizedSample& sample, const Codec& codec) {
  if (sample.bytes.empty()) throw DomainError("complexity of an empty sample");
  return 8u * static_cast<std::uint64_t>(codec.compressed_size(sample.bytes));
}

double ic_adjusted_nll(double nll_nats, double bits, std::size_t dim) {
  if (dim == 0) throw DomainError("input complexity needs D > 0");
  const double d = static_cast<double>(dim);
  return nll_nats / (d * std::numbers::ln2) - bits / d;
}

}  // namespace mfood
