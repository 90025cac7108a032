#pragma once

// Temporal detection evaluation: non-interpolated average precision with
// greedy best-IoU matching, and its mean over classes at several overlap
// thresholds.

#include "smsloc/core.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace smsloc {

struct VideoDetection {
  std::string video_id;
  ScoredWindow det;
};

struct GroundTruthSet {
  std::map<std::pair<std::string, int>, std::vector<Window>> windows;  // (video, class) -> windows

  void add(const std::string& video_id, int class_id, const Window& w) { windows[{video_id, class_id}].push_back(w); }
  int count(int class_id) const;
  std::vector<int> classes() const;  // classes with at least one window, ascending
};

/// One class's detections across videos, in rank order.
struct ClassDetection {
  std::string video_id;
  Window window;
  double score = 0.0;
};

/// Score desc, then start asc, then video id.
void sort_for_ranking(std::vector<ClassDetection>& dets);

/// AP of `ranked` (already in rank order) against the gt windows of the
/// same class keyed by video. nullopt when there is no ground truth.
std::optional<double> average_precision(std::span<const ClassDetection> ranked,
                                        const std::map<std::string, std::vector<Window>>& gts, double sigma);

inline const std::vector<double> kDefaultSigmas{0.1, 0.2, 0.3, 0.4, 0.5};

struct EvalResult {
  std::vector<double> sigmas;
  std::vector<int> classes;                // classes with ground truth
  std::vector<std::vector<double>> ap;     // [class index][sigma index]
  std::vector<double> mean_ap;             // [sigma index]
};

EvalResult mean_ap(std::span<const VideoDetection> dets, const GroundTruthSet& gts,
                   std::span<const double> sigmas = kDefaultSigmas);

}  // namespace smsloc
