#include "smsloc/maxsum.hpp"

#include "smsloc/sms.hpp"

#include <algorithm>
#include <stdexcept>

namespace smsloc {

std::vector<ScoredWindow> k_max_sums(const FlatScores& f, int k, int class_id) {
  if (f.size() == 0) throw std::invalid_argument("k_max_sums: empty score track");
  if (k < 1) throw std::invalid_argument("k_max_sums: k must be positive");
  using Entry = CandidateEntry<double>;
  const auto cap = static_cast<std::size_t>(k);
  std::vector<Entry> ending;  // best windows ending at the current frame
  std::vector<Entry> best, scratch;
  ending.reserve(cap + 1);
  for (Eigen::Index t = 0; t < f.size(); ++t) {
    const int frame = static_cast<int>(t) + 1;
    for (Entry& e : ending) {
      e.value += f(t);
      e.end = frame;
    }
    const Entry fresh{f(t), frame, frame};
    auto pos = std::upper_bound(ending.begin(), ending.end(), fresh,
                                [](const Entry& a, const Entry& b) { return ranks_before(a, b); });
    if (static_cast<std::size_t>(pos - ending.begin()) < cap) {
      ending.insert(pos, fresh);
      if (ending.size() > cap) ending.pop_back();
    }
    merge_topk_into<double>(best, ending, cap, scratch);
    best.swap(scratch);
  }
  std::vector<ScoredWindow> out;
  out.reserve(best.size());
  for (const Entry& e : best) out.push_back({Window{e.start, *e.end}, e.value, class_id});
  return out;
}

ScoredWindow max_sum(const FlatScores& f, int class_id) { return k_max_sums(f, 1, class_id).front(); }

std::vector<ScoredWindow> baseline_detect(const FlatScores& per_frame_class_scores, int k, int class_id) {
  auto windows = k_max_sums(per_frame_class_scores, k, class_id);
  for (auto& w : windows) w.score /= w.window.length();
  std::sort(windows.begin(), windows.end(), [](const auto& a, const auto& b) { return ranks_before(a, b); });
  return windows;
}

}  // namespace smsloc
