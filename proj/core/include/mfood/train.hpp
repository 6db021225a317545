#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "mfood/adam.hpp"
#include "mfood/manifold.hpp"

namespace mfood {

struct TrainConfig {
  PenaltySpec penalty;
  AdamConfig optimizer;
  std::size_t batch_size = 64;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  // Written after every epoch, and with the last good state on divergence.
  std::optional<std::filesystem::path> checkpoint_path;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0, nll_u = 0.0, nll_v = 0.0, logdet = 0.0, penalty = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::uint64_t steps = 0;
};

// Minibatch Adam on the mean objective. Shuffling is seeded, so runs are
// reproducible bit-for-bit. ActNorm layers are initialized from the first
// batch. On a non-finite loss or gradient the model is rolled back to the
// state at the start of the failing epoch, checkpointed, and TrainingError
// is thrown.
TrainHistory train(ManifoldFlowModel& model, const Tensor& data, const TrainConfig& config,
                   const std::function<void(const EpochStats&)>& on_epoch = {});

}  // namespace mfood
