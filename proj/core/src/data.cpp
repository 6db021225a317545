#include "mfood/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "mfood/errors.hpp"
#include "mfood/rng.hpp"
#include "text_util.hpp"

namespace mfood {

ArcProfile parse_arc_profile(const std::string& text) {
  if (text == "uniform") return ArcProfile::kUniform;
  if (text == "concentrated") return ArcProfile::kConcentrated;
  throw ConfigError("unknown arc profile '" + text + "' (expected uniform or concentrated)");
}

double concentrated_angle(double u) {
  // F(theta) = (theta - sin(2 theta) / 2) / pi is increasing on [0, pi]; bisect.
  const double target = std::clamp(u, 0.0, 1.0) * std::numbers::pi;
  double lo = 0.0, hi = std::numbers::pi;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid - 0.5 * std::sin(2.0 * mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Dataset gen_semicircle(std::size_t n, double noise_sigma, ArcProfile profile, std::uint64_t seed) {
  if (n == 0) throw ConfigError("semicircle needs n > 0");
  if (!(noise_sigma >= 0.0)) throw ConfigError("semicircle noise must be >= 0");
  Rng rng(seed);
  Dataset ds{Tensor({n, 2}), {}};
  for (std::size_t r = 0; r < n; ++r) {
    const double u = rng.uniform();
    const double theta =
        profile == ArcProfile::kUniform ? u * std::numbers::pi : concentrated_angle(u);
    const double eps = noise_sigma > 0.0 ? noise_sigma * rng.normal() : 0.0;
    ds.data(r, 0) = std::cos(theta) * (1.0 + eps);
    ds.data(r, 1) = std::sin(theta) * (1.0 + eps);
  }
  ds.metadata = {{"generator", "semicircle"},
                 {"n", std::to_string(n)},
                 {"noise_sigma", detail::format_double(noise_sigma)},
                 {"profile", profile == ArcProfile::kUniform ? "uniform" : "concentrated"},
                 {"seed", std::to_string(seed)}};
  return ds;
}

Embedding parse_embedding(const std::string& text) {
  if (text == "none" || text == "linear") return Embedding::kLinear;
  if (text == "smooth") return Embedding::kSmooth;
  throw ConfigError("unknown embedding nonlinearity '" + text + "' (expected none or smooth)");
}

Dataset gen_embedded_manifold(std::size_t n, std::size_t d, std::size_t dim, Embedding embedding,
                              double noise_sigma, std::uint64_t seed,
                              std::uint64_t embedding_seed) {
  if (d < 1 || d >= dim) throw ConfigError("embedded manifold needs 1 <= d < D");
  if (!(noise_sigma >= 0.0)) throw ConfigError("embedded manifold noise must be >= 0");
  Rng erng(embedding_seed);
  std::vector<double> e(dim * d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (auto& v : e) v = scale * erng.normal();

  Rng rng(seed);
  Dataset ds{Tensor({n, dim}), {}};
  std::vector<double> g(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (auto& v : g) v = rng.normal();
    for (std::size_t i = 0; i < dim; ++i) {
      double y = 0.0;
      for (std::size_t j = 0; j < d; ++j) y += e[i * d + j] * g[j];
      if (embedding == Embedding::kSmooth) y += 0.25 * std::sin(2.0 * y);
      ds.data(r, i) = y + (noise_sigma > 0.0 ? noise_sigma * rng.normal() : 0.0);
    }
  }
  ds.metadata = {{"generator", "embedded_manifold"},
                 {"n", std::to_string(n)},
                 {"d", std::to_string(d)},
                 {"D", std::to_string(dim)},
                 {"nonlinearity", embedding == Embedding::kLinear ? "none" : "smooth"},
                 {"noise_sigma", detail::format_double(noise_sigma)},
                 {"seed", std::to_string(seed)},
                 {"embedding_seed", std::to_string(embedding_seed)}};
  return ds;
}

Dataset parse_idx(const std::vector<std::uint8_t>& bytes) {
  auto be32 = [&](std::size_t off) {
    if (off + 4 > bytes.size()) throw FormatError("truncated IDX header", bytes.size());
    return (std::uint32_t{bytes[off]} << 24) | (std::uint32_t{bytes[off + 1]} << 16) |
           (std::uint32_t{bytes[off + 2]} << 8) | std::uint32_t{bytes[off + 3]};
  };
  if (bytes.size() < 4) throw FormatError("truncated IDX magic", bytes.size());
  if (bytes[0] != 0 || bytes[1] != 0) throw FormatError("bad IDX magic", 0);
  if (bytes[2] != 0x08) throw FormatError("IDX element type must be unsigned byte (0x08)", 2);
  const std::size_t rank = bytes[3];
  if (rank < 1) throw FormatError("IDX rank must be >= 1", 3);
  std::vector<std::size_t> dims(rank);
  std::size_t total = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    dims[i] = be32(4 + 4 * i);
    total *= dims[i];
  }
  const std::size_t header = 4 + 4 * rank;
  if (bytes.size() < header + total) {
    throw FormatError("truncated IDX payload: expected " + std::to_string(total) + " bytes",
                      bytes.size());
  }
  if (bytes.size() != header + total) throw FormatError("trailing bytes in IDX file", header + total);
  const std::size_t items = dims[0];
  const std::size_t width = items == 0 ? 0 : total / items;
  std::vector<double> values(total);
  for (std::size_t i = 0; i < total; ++i) values[i] = static_cast<double>(bytes[header + i]) / 255.0;
  Dataset ds{Tensor({items, rank == 1 ? std::size_t{1} : width}, std::move(values)), {}};
  ds.metadata = {{"generator", "idx"}, {"items", std::to_string(items)}};
  return ds;
}

Dataset load_idx(const std::filesystem::path& path) {
  Dataset ds = parse_idx(detail::read_file(path));
  ds.metadata["path"] = path.string();
  return ds;
}

namespace {
constexpr std::string_view kTensorMagic = "MFOODTNS";
}

std::vector<std::uint8_t> serialize_tensor(const Tensor& t) {
  if (t.rank() == 0) throw FormatError("rank-0 tensors cannot be stored", 0);
  detail::ByteWriter w;
  w.bytes(kTensorMagic);
  w.u32(kTensorVersion);
  w.u64(t.rank());
  for (auto d : t.shape()) w.u64(d);
  for (double v : t.values()) w.f64(v);
  return w.take();
}

Tensor deserialize_tensor(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes);
  if (r.bytes(kTensorMagic.size()) != kTensorMagic) throw FormatError("not an mfood tensor", 0);
  const std::uint32_t version = r.u32();
  if (version != kTensorVersion) {
    throw FormatError("unsupported tensor version " + std::to_string(version), 8);
  }
  const std::uint64_t rank_offset = r.offset();
  const std::uint64_t rank = r.u64();
  if (rank == 0) throw FormatError("rank-0 tensor", rank_offset);
  if (rank > 16) throw FormatError("implausible tensor rank", rank_offset);
  std::vector<std::size_t> shape(rank);
  std::uint64_t total = 1;
  for (auto& d : shape) {
    d = r.u64();
    total *= d;
  }
  if (r.remaining() != total * 8) {
    throw FormatError("tensor payload length does not match its shape", r.offset());
  }
  std::vector<double> values(total);
  for (auto& v : values) v = r.f64();
  try {
    return Tensor(std::move(shape), std::move(values));
  } catch (const NumericError&) {
    throw FormatError("tensor payload contains non-finite values", rank_offset);
  }
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  detail::write_file(path, serialize_tensor(t));
}

Tensor load_tensor(const std::filesystem::path& path) {
  return deserialize_tensor(detail::read_file(path));
}

std::filesystem::path metadata_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".meta.json");
}

void write_metadata(const std::filesystem::path& path,
                    const std::map<std::string, std::string>& meta) {
  std::ofstream out(metadata_path(path), std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write metadata for '" + path.string() + "'");
  out << nlohmann::json(meta).dump() << "\n";
}

std::map<std::string, std::string> read_metadata(const std::filesystem::path& path) {
  std::ifstream in(metadata_path(path), std::ios::binary);
  if (!in) throw ConfigError("cannot read metadata for '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  try {
    return nlohmann::json::parse(line).get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad metadata sidecar: ") + e.what(), 0);
  }
}

}  // namespace mfood
