#pragma once

// From per-class score tracks of a whole video to final detections:
// overlapping snippets, per-snippet top-K inference, length normalisation,
// duration priors, and per-class non-maximum suppression.

#include "smsloc/core.hpp"

#include <optional>
#include <span>
#include <vector>

namespace smsloc {

struct Snippet {
  int offset = 1;  // global 1-based index of the snippet's first frame
  int length = 0;

  Window window() const noexcept { return {offset, offset + length - 1}; }
};

inline constexpr double kMinLogStd = 0.05;

/// Log-normal distribution of window lengths (in frames).
struct DurationPrior {
  int class_id = 0;
  double log_mean = 0.0;
  double log_std = kMinLogStd;

  /// Density with respect to length.
  double density(double length) const;
  double median() const;
  /// Density of log(length) relative to its peak at the median, in (0, 1].
  /// Measured in log space so the 1/length factor of the length density
  /// does not add a second bias towards short windows.
  double relative_density(double length) const;
};

enum class DetectMode { Sms, Flat };

struct PipelineConfig {
  double fps = 5.0;
  double snippet_seconds = 20.0;
  double overlap_seconds = 18.0;
  int k = 100;
  double nms_iou = 0.2;
  bool use_prior = true;
  bool use_length_norm = true;
  DetectMode mode = DetectMode::Sms;
  bool mean_center = false;  // flat mode only
  PartWeights weights{};
  int threads = 1;

  void validate() const;
  int snippet_frames() const;
  int stride_frames() const;
};

std::vector<Snippet> split_snippets(int n, const PipelineConfig& config);

DurationPrior fit_duration_prior(std::span<const int> durations, int class_id = 0);

inline constexpr double kMinPriorMultiplier = 1e-6;

/// Final ranking score of one detection. Priors only rescale positive
/// scores; a negative score passes through.
double rank_score(const ScoredWindow& det, const DurationPrior* prior, const PipelineConfig& config);

/// Greedy NMS for detections of a single class. Survivors come back in
/// ranks_before order.
std::vector<ScoredWindow> nms(std::span<const ScoredWindow> dets, double iou_threshold);

/// Per-class score tracks covering the full video; priors indexed by class id
/// (missing entries mean "no prior for that class").
std::vector<ScoredWindow> detect(std::span<const PartScores> per_class,
                                 std::span<const std::optional<DurationPrior>> priors,
                                 const PipelineConfig& config);

}  // namespace smsloc
