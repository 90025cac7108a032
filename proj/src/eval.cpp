#include "smsloc/eval.hpp"

#include <algorithm>
#include <set>

namespace smsloc {

int GroundTruthSet::count(int class_id) const {
  int n = 0;
  for (const auto& [key, ws] : windows)
    if (key.second == class_id) n += static_cast<int>(ws.size());
  return n;
}

std::vector<int> GroundTruthSet::classes() const {
  std::set<int> out;
  for (const auto& [key, ws] : windows)
    if (!ws.empty()) out.insert(key.second);
  return {out.begin(), out.end()};
}

void sort_for_ranking(std::vector<ClassDetection>& dets) {
  std::stable_sort(dets.begin(), dets.end(), [](const ClassDetection& a, const ClassDetection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.window.start != b.window.start) return a.window.start < b.window.start;
    if (a.video_id != b.video_id) return a.video_id < b.video_id;
    return a.window.end < b.window.end;
  });
}

std::optional<double> average_precision(std::span<const ClassDetection> ranked,
                                        const std::map<std::string, std::vector<Window>>& gts, double sigma) {
  std::size_t total_gt = 0;
  std::map<std::string, std::vector<bool>> matched;
  for (const auto& [video, ws] : gts) {
    total_gt += ws.size();
    matched[video].assign(ws.size(), false);
  }
  if (total_gt == 0) return std::nullopt;

  double sum_precision = 0.0;
  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
    const auto& d = ranked[rank];
    auto it = gts.find(d.video_id);
    if (it == gts.end()) continue;
    auto& used = matched[d.video_id];
    double best = sigma;
    std::optional<std::size_t> hit;
    for (std::size_t g = 0; g < it->second.size(); ++g) {
      if (used[g]) continue;
      const double o = iou(d.window, it->second[g]);
      if (o > best) {
        best = o;
        hit = g;
      }
    }
    if (!hit) continue;
    used[*hit] = true;
    ++tp;
    sum_precision += static_cast<double>(tp) / static_cast<double>(rank + 1);
  }
  return sum_precision / static_cast<double>(total_gt);
}

EvalResult mean_ap(std::span<const VideoDetection> dets, const GroundTruthSet& gts, std::span<const double> sigmas) {
  EvalResult r;
  r.sigmas.assign(sigmas.begin(), sigmas.end());
  r.classes = gts.classes();
  r.mean_ap.assign(sigmas.size(), 0.0);
  for (int c : r.classes) {
    std::vector<ClassDetection> ranked;
    for (const auto& d : dets)
      if (d.det.class_id == c) ranked.push_back({d.video_id, d.det.window, d.det.score});
    sort_for_ranking(ranked);
    std::map<std::string, std::vector<Window>> class_gts;
    for (const auto& [key, ws] : gts.windows)
      if (key.second == c) class_gts[key.first] = ws;
    std::vector<double> row;
    for (double sigma : sigmas) row.push_back(average_precision(ranked, class_gts, sigma).value_or(0.0));
    r.ap.push_back(std::move(row));
  }
  if (!r.classes.empty())
    for (std::size_t s = 0; s < sigmas.size(); ++s) {
      double sum = 0.0;
      for (const auto& row : r.ap) sum += row[s];
      r.mean_ap[s] = sum / static_cast<double>(r.classes.size());
    }
  return r;
}

}  // namespace smsloc
