#pragma once

// Unstructured maximum-sum baselines over a single score track. Windows may
// be a single frame here.

#include "smsloc/core.hpp"

#include <span>
#include <vector>

namespace smsloc {

using FlatScores = Track<double>;

/// Nonempty contiguous window with the largest sum.
ScoredWindow max_sum(const FlatScores& f, int class_id = 0);

/// The k highest-sum windows (overlaps allowed), sorted by ranks_before.
/// O(nk): one pass keeping the k best windows ending at the current frame.
std::vector<ScoredWindow> k_max_sums(const FlatScores& f, int k, int class_id = 0);

/// k_max_sums with every score replaced by the window's mean frame score,
/// then re-ranked. Expects signed (e.g. mean-centred) frame scores.
std::vector<ScoredWindow> baseline_detect(const FlatScores& per_frame_class_scores, int k, int class_id = 0);

}  // namespace smsloc
