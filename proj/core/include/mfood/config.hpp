#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mfood/flow.hpp"
#include "mfood/manifold.hpp"
#include "mfood/train.hpp"

namespace mfood {

// Flat "key = value" experiment configuration. Blank lines and lines starting
// with '#' are ignored; unknown or repeated keys are rejected.
struct ExperimentConfig {
  std::size_t ambient_dim = 2;   // dims.D
  std::size_t manifold_dim = 1;  // dims.d
  PenaltyKind penalty_kind = PenaltyKind::kHuber;
  double penalty_delta = 0.1;
  double penalty_lambda = 1.0;
  double learning_rate = 1e-5;
  std::size_t batch_size = 64;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  std::string data_path;
  std::string checkpoint_path = "model.ckpt";
  bool manifold_flow_enabled = false;
  std::size_t manifold_flow_blocks = 4;
  std::size_t flow_blocks = 8;
  std::vector<std::size_t> flow_hidden = {64, 64};
  double flow_scale_clamp = 5.0;
  bool flow_permute = true;
  std::string eval_id_path;
  std::vector<std::string> eval_ood_paths;
  bool score_use_ic = true;
  double score_c_const = 1.0;
  std::string output_dir = ".";

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);

  // Every key in canonical order with its resolved value, one "key = value" line each.
  std::string echo() const;

  // Canonical key order.
  static const std::vector<std::string>& keys();

  PenaltySpec penalty() const;
  FlowConfig flow_config() const;
  FlowConfig manifold_flow_config() const;
  TrainConfig train_config() const;
  LatentSplit split() const;

  // Fresh untrained model for this configuration.
  ManifoldFlowModel build_model() const;
};

}  // namespace mfood
