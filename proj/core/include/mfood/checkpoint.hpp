#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mfood/manifold.hpp"

namespace mfood {

// Binary model checkpoint:
//   "MFOODCKP" | u32 version | u64 D | u64 d | u8 penalty kind | f64 delta |
//   f64 lambda | u8 has_manifold_flow | flow(base) [| flow(h)]
// flow := u64 dim | u64 n_layers | layer descriptors | parameter arrays.
// Integers and float64 values are little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ManifoldFlowModel model;
  PenaltySpec penalty;
};

std::vector<std::uint8_t> serialize_checkpoint(const ManifoldFlowModel& model,
                                               const PenaltySpec& penalty);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const ManifoldFlowModel& model,
                     const PenaltySpec& penalty);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mfood
