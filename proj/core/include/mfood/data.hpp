#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "mfood/tensor.hpp"

namespace mfood {

// Generated or loaded data with the parameters needed to regenerate it.
struct Dataset {
  Tensor data;
  std::map<std::string, std::string> metadata;
};

enum class ArcProfile {
  kUniform,
  // Raised cosine on [0, pi]: p(theta) = (1 - cos 2 theta) / pi, peaked at pi/2
  // and vanishing at both arc ends.
  kConcentrated,
};

ArcProfile parse_arc_profile(const std::string& text);

// Unit semicircle (cos theta, sin theta) * (1 + eps_r), eps_r ~ N(0, noise_sigma^2).
Dataset gen_semicircle(std::size_t n, double noise_sigma, ArcProfile profile, std::uint64_t seed);

// Inverse CDF of the concentrated profile, u in [0, 1].
double concentrated_angle(double u);

enum class Embedding { kLinear, kSmooth };

Embedding parse_embedding(const std::string& text);

// x = E(g) + eps with g ~ N(0, I_d), E a random linear map R^d -> R^D (entries
// N(0, 1/d)) optionally followed by the coordinate-wise map y + 0.25 sin(2y),
// and eps ~ N(0, noise_sigma^2 I_D). The embedding is drawn from embedding_seed,
// the samples from seed. Throws ConfigError unless 1 <= d < D.
Dataset gen_embedded_manifold(std::size_t n, std::size_t d, std::size_t dim, Embedding embedding,
                              double noise_sigma, std::uint64_t seed,
                              std::uint64_t embedding_seed);

// MNIST-style IDX file of unsigned bytes (magic 0x00000801 or 0x00000803).
// Pixels are scaled by 1/255 and each item is flattened. Throws FormatError
// with the byte offset on bad magic or truncation.
Dataset load_idx(const std::filesystem::path& path);
Dataset parse_idx(const std::vector<std::uint8_t>& bytes);

// Tensor container: "MFOODTNS" | u32 version | u64 rank | u64 dims[rank] |
// f64 payload, all little-endian. Rank 0 is rejected.
inline constexpr std::uint32_t kTensorVersion = 1;

std::vector<std::uint8_t> serialize_tensor(const Tensor& t);
Tensor deserialize_tensor(const std::vector<std::uint8_t>& bytes);
void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

// Sidecar "<path>.meta.json": one line of JSON holding the metadata map.
std::filesystem::path metadata_path(const std::filesystem::path& path);
void write_metadata(const std::filesystem::path& path, const std::map<std::string, std::string>& meta);
std::map<std::string, std::string> read_metadata(const std::filesystem::path& path);

}  // namespace mfood
