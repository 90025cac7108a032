#pragma once

// Structured max-margin training of the linear frame scorer.
//
//   L_loc = [ max_{y != gt} (Δ(gt, y) + F_c(y)) - F_c(gt) ]_+
//   L_cls = 1/(C-1) [ M + max_{y, c' != c} F_c'(y) - F_c(gt) ]_+
//   L     = L_loc + λ L_cls
//
// where c is the ground-truth class and M the margin (|gt| by default).

#include "smsloc/core.hpp"
#include "smsloc/model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace smsloc {

struct TrainExample {
  FeatureMatrix features;
  Window gt;
  int class_id = 0;
  std::string id;

  int frames() const noexcept { return static_cast<int>(features.rows()); }
  void validate() const;
};

enum class MarginMode { GtLength, Fixed };

struct TrainConfig {
  double lambda_cls = 0.5;
  MarginMode margin_mode = MarginMode::GtLength;
  double fixed_margin = 1.0;
  double learning_rate = 0.02;
  int epochs = 50;
  std::uint64_t seed = 0;
  bool middle_balancing = true;
  bool boundary_jitter = false;
  bool step_decay = false;   // learning_rate / epoch instead of constant
  bool freeze_bias = false;
  PartWeights weights{};

  void validate() const;
  double margin(const Window& gt) const noexcept {
    return margin_mode == MarginMode::GtLength ? gt.length() : fixed_margin;
  }
};

struct LossTerm {
  double value = 0.0;
  ScoredWindow witness;  // maximiser of the inner max (class_id = offending class)
};

struct LossReport {
  double loc_loss = 0.0;
  double cls_loss = 0.0;
  double total = 0.0;
  ScoredWindow witness_loc;
  ScoredWindow witness_cls;
};

LossTerm loc_loss(const TrainExample& example, const ModelParams& params, const TrainConfig& config);
LossTerm cls_loss(const TrainExample& example, const ModelParams& params, const TrainConfig& config);
LossReport evaluate_loss(const TrainExample& example, const ModelParams& params, const TrainConfig& config);

/// Same layout as ModelParams::weights / ModelParams::biases.
struct ParamGradient {
  Eigen::MatrixXd weights;
  Eigen::VectorXd biases;

  static ParamGradient zeros_like(const ModelParams& params);
  bool is_zero() const { return weights.isZero(0.0) && biases.isZero(0.0); }
};

/// Adds sign · ∂F_c(window)/∂w to `grad`. With `balance_middle` the middle
/// rows are scaled by 1/|window|.
void accumulate_window_gradient(ParamGradient& grad, const FeatureMatrix& features, int class_id,
                                const Window& window, double sign, const PartWeights& weights,
                                bool balance_middle);

/// Subgradient of L_loc + λ L_cls for one example.
ParamGradient subgradient(const TrainExample& example, const ModelParams& params, const TrainConfig& config);

/// Same, reusing an already computed loss report (and its witnesses).
ParamGradient subgradient(const TrainExample& example, const ModelParams& params, const TrainConfig& config,
                          const LossReport& report);

struct EpochStats {
  int epoch = 0;
  double loc_loss = 0.0;
  double cls_loss = 0.0;
  double total = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
};

/// Jittered copy of gt: start drawn from the first 10% of the window, end
/// from the last 10%.
template <typename Rng>
Window jitter_boundaries(const Window& gt, Rng& rng);

/// Per-example subgradient descent with seeded shuffling. Epoch statistics
/// are means of the losses seen at each step, before that step's update.
TrainResult train(std::span<const TrainExample> dataset, ModelParams params, const TrainConfig& config);

/// Mean loss over a dataset in its given order.
EpochStats mean_loss(std::span<const TrainExample> dataset, const ModelParams& params, const TrainConfig& config);

}  // namespace smsloc

#include "smsloc/detail/jitter.hpp"
