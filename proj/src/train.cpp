#include "smsloc/train.hpp"

#include "smsloc/lossaug.hpp"
#include "smsloc/sms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace smsloc {

void TrainExample::validate() const {
  if (features.rows() < 2) throw std::invalid_argument("example '" + id + "' needs at least two frames");
  if (!gt.valid() || gt.end > features.rows() || gt.length() < 2)
    throw std::invalid_argument("example '" + id + "' has ground truth " + to_string(gt) + " outside " +
                                std::to_string(features.rows()) + " frames or shorter than 2");
  if (class_id < 0) throw std::invalid_argument("example '" + id + "' has a negative class id");
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning rate must be finite and non-negative");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (!std::isfinite(lambda_cls) || lambda_cls < 0.0) throw std::invalid_argument("lambda_cls must be >= 0");
}

namespace {

struct ExampleView {
  const FeatureMatrix& features;
  Window gt;
  int class_id;
};

void check(const ExampleView& ex, const ModelParams& params) {
  if (ex.features.rows() < 2) throw std::invalid_argument("example needs at least two frames");
  if (!ex.gt.valid() || ex.gt.end > ex.features.rows() || ex.gt.length() < 2)
    throw std::invalid_argument("ground truth " + to_string(ex.gt) + " is not a structured window of the example");
  if (ex.class_id < 0 || ex.class_id >= params.num_classes) throw std::invalid_argument("example class out of range");
}

LossTerm loc_term(const ExampleView& ex, const PartScores& own, const TrainConfig& config) {
  const double gt_score = window_score(own, ex.gt, config.weights);
  const auto worst = loss_augmented_argmax(own, ex.gt, config.weights, ex.class_id);
  if (!worst) return {0.0, {ex.gt, gt_score, ex.class_id}};
  return {std::max(0.0, worst->score - gt_score), *worst};
}

LossTerm cls_term(const ExampleView& ex, const std::vector<PartScores>& all, const TrainConfig& config) {
  const int num_classes = static_cast<int>(all.size());
  const double gt_score = window_score(all[ex.class_id], ex.gt, config.weights);
  if (num_classes < 2) return {0.0, {ex.gt, gt_score, ex.class_id}};
  SmsConfig sms;
  sms.k = 1;
  sms.weights = config.weights;
  std::optional<ScoredWindow> best;
  for (int c = 0; c < num_classes; ++c) {
    if (c == ex.class_id) continue;
    const auto top = sms_topk(all[c], sms, c);
    if (!top.empty() && (!best || top.front().score > best->score)) best = top.front();
  }
  const double hinge = config.margin(ex.gt) + best->score - gt_score;
  return {std::max(0.0, hinge) / (num_classes - 1), *best};
}

LossReport report_for(const ExampleView& ex, const ModelParams& params, const TrainConfig& config) {
  check(ex, params);
  const auto all = score_all_classes(params, ex.features);
  LossReport r;
  const LossTerm loc = loc_term(ex, all[ex.class_id], config);
  const LossTerm cls = cls_term(ex, all, config);
  r.loc_loss = loc.value;
  r.cls_loss = cls.value;
  r.total = loc.value + config.lambda_cls * cls.value;
  r.witness_loc = loc.witness;
  r.witness_cls = cls.witness;
  return r;
}

ParamGradient gradient_for(const ExampleView& ex, const ModelParams& params, const TrainConfig& config,
                           const LossReport& report) {
  ParamGradient g = ParamGradient::zeros_like(params);
  const bool balance = config.middle_balancing;
  if (report.loc_loss > 0.0) {
    accumulate_window_gradient(g, ex.features, ex.class_id, report.witness_loc.window, 1.0, config.weights, balance);
    accumulate_window_gradient(g, ex.features, ex.class_id, ex.gt, -1.0, config.weights, balance);
  }
  if (report.cls_loss > 0.0 && config.lambda_cls != 0.0) {
    const double scale = config.lambda_cls / (params.num_classes - 1);
    accumulate_window_gradient(g, ex.features, report.witness_cls.class_id, report.witness_cls.window, scale,
                               config.weights, balance);
    accumulate_window_gradient(g, ex.features, ex.class_id, ex.gt, -scale, config.weights, balance);
  }
  return g;
}

}  // namespace

LossTerm loc_loss(const TrainExample& example, const ModelParams& params, const TrainConfig& config) {
  const ExampleView ex{example.features, example.gt, example.class_id};
  check(ex, params);
  return loc_term(ex, score_frames(params, example.features, example.class_id), config);
}

LossTerm cls_loss(const TrainExample& example, const ModelParams& params, const TrainConfig& config) {
  const ExampleView ex{example.features, example.gt, example.class_id};
  check(ex, params);
  return cls_term(ex, score_all_classes(params, example.features), config);
}

LossReport evaluate_loss(const TrainExample& example, const ModelParams& params, const TrainConfig& config) {
  return report_for({example.features, example.gt, example.class_id}, params, config);
}

ParamGradient ParamGradient::zeros_like(const ModelParams& params) {
  return {Eigen::MatrixXd::Zero(params.weights.rows(), params.weights.cols()),
          Eigen::VectorXd::Zero(params.biases.size())};
}

void accumulate_window_gradient(ParamGradient& grad, const FeatureMatrix& features, int class_id,
                                const Window& window, double sign, const PartWeights& weights,
                                bool balance_middle) {
  const auto rs = ModelParams::row(class_id, Part::Start);
  const auto rm = ModelParams::row(class_id, Part::Middle);
  const auto re = ModelParams::row(class_id, Part::End);
  grad.weights.row(rs) += (sign * weights.start) * features.row(window.start - 1);
  grad.biases(rs) += sign * weights.start;
  const int middles = window.length() - 2;
  if (middles > 0) {
    double m = sign * weights.middle;
    if (balance_middle) m /= window.length();
    grad.weights.row(rm) += m * features.middleRows(window.start, middles).colwise().sum();
    grad.biases(rm) += m * middles;
  }
  grad.weights.row(re) += (sign * weights.end) * features.row(window.end - 1);
  grad.biases(re) += sign * weights.end;
}

ParamGradient subgradient(const TrainExample& example, const ModelParams& params, const TrainConfig& config,
                          const LossReport& report) {
  return gradient_for({example.features, example.gt, example.class_id}, params, config, report);
}

ParamGradient subgradient(const TrainExample& example, const ModelParams& params, const TrainConfig& config) {
  return subgradient(example, params, config, evaluate_loss(example, params, config));
}

EpochStats mean_loss(std::span<const TrainExample> dataset, const ModelParams& params, const TrainConfig& config) {
  EpochStats s;
  for (const auto& ex : dataset) {
    const auto r = evaluate_loss(ex, params, config);
    s.loc_loss += r.loc_loss;
    s.cls_loss += r.cls_loss;
    s.total += r.total;
  }
  if (!dataset.empty()) {
    const double m = static_cast<double>(dataset.size());
    s.loc_loss /= m;
    s.cls_loss /= m;
    s.total /= m;
  }
  return s;
}

TrainResult train(std::span<const TrainExample> dataset, ModelParams params, const TrainConfig& config) {
  config.validate();
  params.check_shape();
  if (dataset.empty()) throw std::invalid_argument("training set is empty");
  for (const auto& ex : dataset) {
    ex.validate();
    if (ex.features.cols() != params.dim)
      throw std::invalid_argument("example '" + ex.id + "' has feature dimension " +
                                  std::to_string(ex.features.cols()) + ", model expects " +
                                  std::to_string(params.dim));
    if (ex.class_id >= params.num_classes) throw std::invalid_argument("example '" + ex.id + "' class out of range");
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<LossReport> seen(dataset.size());

  TrainResult result;
  double first_total = 0.0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = config.step_decay ? config.learning_rate / epoch : config.learning_rate;
    for (std::size_t idx : order) {
      const TrainExample& ex = dataset[idx];
      const Window gt = config.boundary_jitter ? jitter_boundaries(ex.gt, rng) : ex.gt;
      const ExampleView view{ex.features, gt, ex.class_id};
      seen[idx] = report_for(view, params, config);
      if (lr == 0.0) continue;
      const ParamGradient g = gradient_for(view, params, config, seen[idx]);
      params.weights -= lr * g.weights;
      if (!config.freeze_bias) params.biases -= lr * g.biases;
    }

    // Reduce in dataset order so the statistics do not depend on the shuffle.
    EpochStats stats{epoch, 0.0, 0.0, 0.0};
    for (const auto& r : seen) {
      stats.loc_loss += r.loc_loss;
      stats.cls_loss += r.cls_loss;
      stats.total += r.total;
    }
    const double m = static_cast<double>(dataset.size());
    stats.loc_loss /= m;
    stats.cls_loss /= m;
    stats.total /= m;
    if (epoch == 1) first_total = stats.total;
    if (!std::isfinite(stats.total) || (first_total > 0.0 && stats.total > 1e6 * first_total))
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) + " (mean loss " +
                               std::to_string(stats.total) + ")");
    result.history.push_back(stats);
  }
  result.params = std::move(params);
  return result;
}

}  // namespace smsloc
