#pragma once

// Top-K structured maximal sums.
//
// A structured window [s, e] (e >= s + 1) scores
//   start[s] + middle[s+1] + ... + middle[e-1] + end[e].
// One left-to-right pass keeps two sorted lists of at most K entries:
//   incomplete  best partial windows (start + middles) ending at the current
//               frame, not yet closed by an end frame;
//   best        best complete windows ending at or before the current frame.
// At frame i every incomplete entry is closed with end[i] as one already
// sorted batch and merged into `best`; then every incomplete entry absorbs
// middle[i] and a new partial window starting at i is inserted. Each step is
// O(K), so a sequence of n frames costs O(nK).

#include "smsloc/core.hpp"

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

namespace smsloc {

template <typename Scalar>
struct CandidateEntry {
  Scalar value{};
  int start = 0;
  std::optional<int> end;  // absent while the window is still open

  friend bool operator==(const CandidateEntry&, const CandidateEntry&) = default;
};

/// value desc, start asc, end asc.
template <typename Scalar>
constexpr bool ranks_before(const CandidateEntry<Scalar>& a, const CandidateEntry<Scalar>& b) {
  if (a.value != b.value) return a.value > b.value;
  if (a.start != b.start) return a.start < b.start;
  return a.end.value_or(0) < b.end.value_or(0);
}

template <typename Scalar>
void merge_topk_into(std::span<const CandidateEntry<Scalar>> a, std::span<const CandidateEntry<Scalar>> b,
                     std::size_t k, std::vector<CandidateEntry<Scalar>>& out) {
  out.clear();
  std::size_t i = 0, j = 0;
  while (out.size() < k && (i < a.size() || j < b.size())) {
    if (j == b.size() || (i < a.size() && !ranks_before(b[j], a[i])))
      out.push_back(a[i++]);
    else
      out.push_back(b[j++]);
  }
}

/// Top-k of the union of two lists already sorted by ranks_before.
template <typename Scalar>
std::vector<CandidateEntry<Scalar>> merge_topk(std::span<const CandidateEntry<Scalar>> a,
                                               std::span<const CandidateEntry<Scalar>> b, std::size_t k) {
  std::vector<CandidateEntry<Scalar>> out;
  out.reserve(std::min(k, a.size() + b.size()));
  merge_topk_into(a, b, k, out);
  return out;
}

template <typename Scalar>
std::vector<CandidateEntry<Scalar>> merge_topk(const std::vector<CandidateEntry<Scalar>>& a,
                                               const std::vector<CandidateEntry<Scalar>>& b, std::size_t k) {
  return merge_topk(std::span<const CandidateEntry<Scalar>>(a), std::span<const CandidateEntry<Scalar>>(b), k);
}

template <typename Scalar>
struct BasicSmsConfig {
  int k = 1;
  BasicPartWeights<Scalar> weights{};
  int min_length = 2;
  std::optional<int> max_length;

  void validate() const {
    if (k < 1) throw std::invalid_argument("k must be positive");
    if (min_length < 2) throw std::invalid_argument("min_length must be at least 2");
    if (max_length && *max_length < min_length) throw std::invalid_argument("max_length must be >= min_length");
  }
};
using SmsConfig = BasicSmsConfig<double>;

/// Streaming top-K structured maximal sums over pre-weighted scores.
///
/// Each frame is consumed by exactly one push(); no score is revisited.
/// Windows shorter than `min_length` are never completed: a new start waits
/// in a pending queue until it is old enough to be closed.
template <typename Scalar>
class StructuredMaxSums {
 public:
  using Entry = CandidateEntry<Scalar>;

  explicit StructuredMaxSums(int k, int min_length = 2) : k_(static_cast<std::size_t>(k)), min_length_(min_length) {
    if (k < 1) throw std::invalid_argument("k must be positive");
    if (min_length < 2) throw std::invalid_argument("min_length must be at least 2");
    incomplete_.reserve(k_ + 1);
    best_.reserve(k_);
    batch_.reserve(k_);
    scratch_.reserve(k_);
  }

  void push(Scalar start_score, Scalar middle_score, Scalar end_score) {
    ++frame_;
    if (!incomplete_.empty()) {
      batch_.clear();
      for (const Entry& e : incomplete_) batch_.push_back({e.value + end_score, e.start, frame_});
      merge_topk_into<Scalar>(best_, batch_, k_, scratch_);
      best_.swap(scratch_);
    }
    for (Entry& e : incomplete_) e.value += middle_score;
    for (Entry& e : pending_) e.value += middle_score;
    pending_.push_back({start_score, frame_, std::nullopt});
    // A start s may be closed at frame i + 1 once i + 1 - s + 1 >= min_length.
    while (!pending_.empty() && pending_.front().start <= frame_ - min_length_ + 2) {
      insert_incomplete(pending_.front());
      pending_.pop_front();
    }
  }

  int frames() const noexcept { return frame_; }

  /// Best partial windows ending at the last pushed frame, sorted.
  std::span<const Entry> incomplete() const noexcept { return incomplete_; }

  /// Best complete windows seen so far, sorted.
  std::span<const Entry> best() const noexcept { return best_; }

 private:
  void insert_incomplete(const Entry& entry) {
    // The newcomer has the largest start, so it goes after every equal value.
    auto pos = std::upper_bound(incomplete_.begin(), incomplete_.end(), entry,
                                [](const Entry& a, const Entry& b) { return ranks_before(a, b); });
    if (static_cast<std::size_t>(pos - incomplete_.begin()) >= k_) return;
    incomplete_.insert(pos, entry);
    if (incomplete_.size() > k_) incomplete_.pop_back();
  }

  std::size_t k_;
  int min_length_;
  int frame_ = 0;
  std::vector<Entry> incomplete_;
  std::vector<Entry> best_;
  std::vector<Entry> batch_;
  std::vector<Entry> scratch_;
  std::deque<Entry> pending_;
};

/// Streaming top-K with both a minimum and a maximum window length.
///
/// An open window that grows past max_length must be dropped, after which a
/// start that was previously crowded out of the top K may become eligible
/// again, so the incomplete list cannot be truncated to K. Candidates live in
/// an ordered set keyed by start[s] - prefix_middle[s], and the eligible start
/// range slides one frame per push. O(K + log L) per frame.
template <typename Scalar>
class BoundedStructuredMaxSums {
 public:
  using Entry = CandidateEntry<Scalar>;

  BoundedStructuredMaxSums(int k, int min_length, int max_length)
      : k_(static_cast<std::size_t>(k)), min_length_(min_length), max_length_(max_length) {
    BasicSmsConfig<Scalar>{k, {}, min_length, max_length}.validate();
  }

  void push(Scalar start_score, Scalar middle_score, Scalar end_score) {
    ++frame_;
    // Starts that may close at this frame: [frame - max + 1, frame - min + 1].
    const int newest = frame_ - min_length_ + 1;
    const int oldest = frame_ - max_length_ + 1;
    while (!waiting_.empty() && waiting_.front().start <= newest) {
      open_.insert(waiting_.front());
      eligible_.push_back(waiting_.front());
      waiting_.pop_front();
    }
    while (!eligible_.empty() && eligible_.front().start < oldest) {
      open_.erase(eligible_.front());
      eligible_.pop_front();
    }

    batch_.clear();
    for (auto it = open_.begin(); it != open_.end() && batch_.size() < k_; ++it)
      batch_.push_back({it->key + prefix_middle_ + end_score, it->start, frame_});
    if (!batch_.empty()) {
      merge_topk_into<Scalar>(best_, batch_, k_, scratch_);
      best_.swap(scratch_);
    }

    prefix_middle_ += middle_score;
    waiting_.push_back({start_score - prefix_middle_, frame_});
  }

  int frames() const noexcept { return frame_; }
  std::span<const Entry> best() const noexcept { return best_; }

 private:
  // key = start[s] - (middle[1] + ... + middle[s]); the open value at frame i
  // is key + middle[1..i].
  struct Key {
    Scalar key;
    int start;
  };
  struct KeyOrder {
    bool operator()(const Key& a, const Key& b) const {
      if (a.key != b.key) return a.key > b.key;
      return a.start < b.start;
    }
  };

  std::size_t k_;
  int min_length_;
  int max_length_;
  int frame_ = 0;
  Scalar prefix_middle_{};
  std::deque<Key> waiting_;   // too recent to close yet
  std::deque<Key> eligible_;  // members of open_, by start
  std::set<Key, KeyOrder> open_;
  std::vector<Entry> batch_;
  std::vector<Entry> best_;
  std::vector<Entry> scratch_;
};

/// K highest-scoring structured windows, sorted by ranks_before.
///
/// Returns fewer than K when fewer feasible windows exist and nothing at all
/// for sequences shorter than two frames.
template <typename Scalar>
std::vector<BasicScoredWindow<Scalar>> sms_topk(const BasicPartScores<Scalar>& scores,
                                                const BasicSmsConfig<Scalar>& config, int class_id = 0) {
  config.validate();
  std::vector<BasicScoredWindow<Scalar>> out;
  const Eigen::Index n = scores.size();
  if (n < 2) return out;
  const BasicPartScores<Scalar> weighted = apply_weights(scores, config.weights);

  auto collect = [&](std::span<const CandidateEntry<Scalar>> best) {
    out.reserve(best.size());
    for (const auto& e : best) out.push_back({Window{e.start, *e.end}, e.value, class_id});
  };
  if (config.max_length) {
    BoundedStructuredMaxSums<Scalar> engine(config.k, config.min_length, *config.max_length);
    for (Eigen::Index t = 0; t < n; ++t) engine.push(weighted.start(t), weighted.middle(t), weighted.end(t));
    collect(engine.best());
  } else {
    StructuredMaxSums<Scalar> engine(config.k, config.min_length);
    for (Eigen::Index t = 0; t < n; ++t) engine.push(weighted.start(t), weighted.middle(t), weighted.end(t));
    collect(engine.best());
  }
  return out;
}

}  // namespace smsloc
