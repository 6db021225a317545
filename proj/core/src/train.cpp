#include "mfood/train.hpp"

#include <cmath>
#include <numeric>

#include "mfood/checkpoint.hpp"
#include "mfood/errors.hpp"
#include "mfood/rng.hpp"

namespace mfood {

TrainHistory train(ManifoldFlowModel& model, const Tensor& data, const TrainConfig& config,
                   const std::function<void(const EpochStats&)>& on_epoch) {
  model.validate();
  config.penalty.validate();
  if (data.rank() != 2 || data.rows() == 0) throw ConfigError("training data must be nonempty");
  if (data.cols() != model.split.ambient_dim) {
    throw ConfigError("training data width " + std::to_string(data.cols()) +
                      " does not match D=" + std::to_string(model.split.ambient_dim));
  }
  if (config.batch_size == 0) throw ConfigError("batch size must be positive");

  TrainHistory history;
  if (config.epochs == 0) return history;

  const std::size_t n = data.rows();
  Rng rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  auto shuffle = [&] {
    for (std::size_t i = n; i-- > 1;) std::swap(order[i], order[rng.below(i + 1)]);
  };

  shuffle();
  if (!model.base.actnorm_initialized()) {
    const std::size_t first = std::min(config.batch_size, n);
    model.base.initialize_actnorm(
        gather_rows(data, std::span<const std::size_t>(order.data(), first)));
  }
  if (model.manifold_flow && !model.manifold_flow->actnorm_initialized()) {
    const std::size_t first = std::min(config.batch_size, n);
    const Tensor batch = gather_rows(data, std::span<const std::size_t>(order.data(), first));
    const SplitLatent s = split(model.base.forward(batch).z, model.split);
    model.manifold_flow->initialize_actnorm(s.u);
  }

  Adam adam(config.optimizer, parameters(model));
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (epoch > 0) shuffle();
    const ManifoldFlowModel last_good = model;
    EpochStats stats{epoch, 0, 0, 0, 0, 0};
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size, ++batches) {
      const std::size_t count = std::min(config.batch_size, n - begin);
      const Tensor batch =
          gather_rows(data, std::span<const std::size_t>(order.data() + begin, count));
      try {
        zero_grad(model);
        const BatchLoss bl = loss_and_gradient(model, batch, config.penalty);
        if (!std::isfinite(bl.loss)) throw NumericError("non-finite training loss");
        adam.step(parameters(model));
        stats.loss += bl.loss;
        stats.nll_u += bl.nll_u;
        stats.nll_v += bl.nll_v;
        stats.logdet += bl.logdet;
        stats.penalty += bl.penalty;
        ++history.steps;
      } catch (const NumericError& e) {
        model = last_good;
        if (config.checkpoint_path) save_checkpoint(*config.checkpoint_path, model, config.penalty);
        throw TrainingError(std::string("training diverged: ") + e.what(), epoch, batches);
      }
    }
    const double inv = 1.0 / static_cast<double>(batches);
    stats.loss *= inv;
    stats.nll_u *= inv;
    stats.nll_v *= inv;
    stats.logdet *= inv;
    stats.penalty *= inv;
    history.epochs.push_back(stats);
    if (config.checkpoint_path) save_checkpoint(*config.checkpoint_path, model, config.penalty);
    if (on_epoch) on_epoch(stats);
  }
  return history;
}

}  // namespace mfood
