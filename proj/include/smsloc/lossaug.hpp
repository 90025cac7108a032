#pragma once

// Loss-augmented inference: argmax over windows y != gt of Δ(gt, y) + F(y).
//
// Δ(gt, y) = |y| + |gt| - 2|y ∩ gt| splits into a per-frame term over the
// frames of y (+1 outside gt, -1 inside) plus the constant |gt|. Adding that
// term to all three part tracks turns the maximisation into a plain
// structured maximal sum on the shifted scores.

#include "smsloc/core.hpp"
#include "smsloc/sms.hpp"

#include <optional>
#include <stdexcept>

namespace smsloc {

template <typename Scalar>
struct AugmentedProblem {
  BasicPartScores<Scalar> augmented_scores;
  Scalar additive_constant{};  // |gt|
};

template <typename Scalar>
AugmentedProblem<Scalar> augment_scores(const BasicPartScores<Scalar>& scores, const Window& gt) {
  if (!gt.valid() || gt.end > scores.size())
    throw std::invalid_argument("ground truth " + to_string(gt) + " outside " + std::to_string(scores.size()) +
                                " frames");
  Track<Scalar> shift = Track<Scalar>::Constant(scores.size(), Scalar(1));
  shift.segment(gt.start - 1, gt.length()).setConstant(Scalar(-1));
  return {{scores.start + shift, scores.middle + shift, scores.end + shift}, Scalar(gt.length())};
}

/// Most violating window for the margin-rescaled localization hinge.
///
/// The returned score is Δ(gt, y) + F(y) with F weighted by `weights`;
/// Δ itself is never weighted. Returns nullopt when gt is the only feasible
/// window (n == 2).
template <typename Scalar>
std::optional<BasicScoredWindow<Scalar>> loss_augmented_argmax(const BasicPartScores<Scalar>& scores,
                                                               const Window& gt,
                                                               const BasicPartWeights<Scalar>& weights = {},
                                                               int class_id = 0) {
  if (scores.size() < 2) throw std::invalid_argument("loss-augmented inference needs at least two frames");
  const auto problem = augment_scores(apply_weights(scores, weights), gt);
  BasicSmsConfig<Scalar> config;
  config.k = 2;
  const auto top = sms_topk(problem.augmented_scores, config, class_id);
  for (const auto& candidate : top) {
    if (candidate.window == gt) continue;
    auto out = candidate;
    out.score += problem.additive_constant;
    return out;
  }
  return std::nullopt;
}

}  // namespace smsloc
