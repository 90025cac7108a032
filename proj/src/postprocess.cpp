#include "smsloc/postprocess.hpp"

#include "smsloc/maxsum.hpp"
#include "smsloc/sms.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace smsloc {

void PipelineConfig::validate() const {
  if (!(fps > 0.0)) throw std::invalid_argument("fps must be positive");
  if (!(snippet_seconds > 0.0) || !(overlap_seconds >= 0.0) || overlap_seconds >= snippet_seconds)
    throw std::invalid_argument("need 0 <= overlap_seconds < snippet_seconds");
  if (k < 1) throw std::invalid_argument("k must be positive");
  if (!(nms_iou > 0.0 && nms_iou < 1.0)) throw std::invalid_argument("nms_iou must lie in (0, 1)");
  if (snippet_frames() < 2) throw std::invalid_argument("snippets must span at least two frames");
  if (stride_frames() < 1) throw std::invalid_argument("snippet stride rounds to zero frames");
}

int PipelineConfig::snippet_frames() const { return static_cast<int>(std::lround(fps * snippet_seconds)); }
int PipelineConfig::stride_frames() const {
  return static_cast<int>(std::lround(fps * (snippet_seconds - overlap_seconds)));
}

std::vector<Snippet> split_snippets(int n, const PipelineConfig& config) {
  const int len = config.snippet_frames();
  const int stride = config.stride_frames();
  if (n <= len) return {Snippet{1, n}};
  std::vector<Snippet> out;
  int offset = 1;
  for (; offset + len - 1 < n; offset += stride) out.push_back({offset, len});
  // Last snippet ends exactly at n.
  const int last = n - len + 1;
  if (out.empty() || out.back().offset < last) out.push_back({last, len});
  return out;
}

double DurationPrior::density(double length) const {
  if (!(length > 0.0)) return 0.0;
  const double z = (std::log(length) - log_mean) / log_std;
  return std::exp(-0.5 * z * z) / (length * log_std * std::sqrt(2.0 * std::numbers::pi));
}

double DurationPrior::median() const { return std::exp(log_mean); }

double DurationPrior::relative_density(double length) const {
  if (!(length > 0.0)) return 0.0;
  const double z = (std::log(length) - log_mean) / log_std;
  return std::exp(-0.5 * z * z);
}

DurationPrior fit_duration_prior(std::span<const int> durations, int class_id) {
  if (durations.empty()) throw std::invalid_argument("duration prior needs at least one duration");
  double mean = 0.0;
  for (int d : durations) {
    if (d < 1) throw std::invalid_argument("durations must be positive");
    mean += std::log(static_cast<double>(d));
  }
  mean /= static_cast<double>(durations.size());
  double var = 0.0;
  for (int d : durations) var += std::pow(std::log(static_cast<double>(d)) - mean, 2);
  var /= static_cast<double>(durations.size());
  return {class_id, mean, std::max(kMinLogStd, std::sqrt(var))};
}

double rank_score(const ScoredWindow& det, const DurationPrior* prior, const PipelineConfig& config) {
  double s = det.score;
  if (config.use_length_norm) s /= det.window.length();
  if (config.use_prior && prior != nullptr && s > 0.0)
    s *= std::clamp(prior->relative_density(det.window.length()), kMinPriorMultiplier, 1.0);
  return s;
}

std::vector<ScoredWindow> nms(std::span<const ScoredWindow> dets, double iou_threshold) {
  std::vector<ScoredWindow> ranked(dets.begin(), dets.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return ranks_before(a, b); });
  std::vector<ScoredWindow> kept;
  for (const auto& d : ranked) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(),
                                        [&](const ScoredWindow& k) { return iou(k.window, d.window) > iou_threshold; });
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

namespace {

std::vector<ScoredWindow> detect_class(const PartScores& scores, int class_id, const DurationPrior* prior,
                                       const PipelineConfig& config) {
  const int n = static_cast<int>(scores.size());
  std::vector<ScoredWindow> pooled;
  Track<double> flat;
  if (config.mode == DetectMode::Flat) {
    flat = scores.middle * config.weights.middle;
    if (config.mean_center) flat.array() -= flat.mean();
  }
  SmsConfig sms;
  sms.k = config.k;
  sms.weights = config.weights;
  for (const Snippet& snip : split_snippets(n, config)) {
    std::vector<ScoredWindow> local;
    if (config.mode == DetectMode::Sms) {
      local = sms_topk(scores.segment(snip.window()), sms, class_id);
    } else {
      local = baseline_detect(flat.segment(snip.offset - 1, snip.length), config.k, class_id);
    }
    for (auto& d : local) {
      d.window.start += snip.offset - 1;
      d.window.end += snip.offset - 1;
      pooled.push_back(d);
    }
  }
  // Flat scores are already frame averages.
  PipelineConfig ranking = config;
  if (config.mode == DetectMode::Flat) ranking.use_length_norm = false;
  for (auto& d : pooled) d.score = rank_score(d, prior, ranking);
  return nms(pooled, config.nms_iou);
}

}  // namespace

std::vector<ScoredWindow> detect(std::span<const PartScores> per_class,
                                 std::span<const std::optional<DurationPrior>> priors,
                                 const PipelineConfig& config) {
  config.validate();
  if (per_class.empty()) return {};
  const auto n = per_class.front().size();
  if (n < 1) throw std::invalid_argument("detect needs a non-empty video");
  for (const auto& s : per_class)
    if (s.size() != n) throw std::invalid_argument("class score tracks cover different numbers of frames");

  const int num_classes = static_cast<int>(per_class.size());
  std::vector<std::vector<ScoredWindow>> results(num_classes);
  auto run = [&](int c) {
    const DurationPrior* prior = (c < static_cast<int>(priors.size()) && priors[c]) ? &*priors[c] : nullptr;
    results[c] = detect_class(per_class[c], c, prior, config);
  };
  const int workers = std::clamp(config.threads, 1, num_classes);
  if (workers == 1) {
    for (int c = 0; c < num_classes; ++c) run(c);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          try {
            for (int c = w; c < num_classes; c += workers) run(c);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<ScoredWindow> out;
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.class_id != b.class_id) return a.class_id < b.class_id;
    return ranks_before(a, b);
  });
  return out;
}

}  // namespace smsloc
