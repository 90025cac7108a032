#pragma once

#include <Eigen/Core>

#include <compare>
#include <stdexcept>
#include <string>
#include <utility>

namespace smsloc {

template <typename Scalar>
using Track = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Closed interval of 1-based frame indices.
struct Window {
  int start = 1;
  int end = 1;

  constexpr int length() const noexcept { return end - start + 1; }
  constexpr bool valid() const noexcept { return 1 <= start && start <= end; }
  constexpr bool contains(int frame) const noexcept { return start <= frame && frame <= end; }

  friend constexpr bool operator==(const Window&, const Window&) = default;
  friend constexpr auto operator<=>(const Window&, const Window&) = default;
};

std::string to_string(const Window& w);

enum class Part : int { Start = 0, Middle = 1, End = 2 };
inline constexpr int kNumParts = 3;

/// Start, middle and end score tracks for one class over one sequence.
///
/// Storage is 0-based; the public frame arguments everywhere else in the
/// library are 1-based.
template <typename Scalar>
struct BasicPartScores {
  Track<Scalar> start;
  Track<Scalar> middle;
  Track<Scalar> end;

  BasicPartScores() = default;

  explicit BasicPartScores(Eigen::Index n)
      : start(Track<Scalar>::Zero(n)), middle(Track<Scalar>::Zero(n)), end(Track<Scalar>::Zero(n)) {}

  BasicPartScores(Track<Scalar> s, Track<Scalar> m, Track<Scalar> e)
      : start(std::move(s)), middle(std::move(m)), end(std::move(e)) {
    if (start.size() != middle.size() || start.size() != end.size())
      throw std::invalid_argument("part score tracks must have equal length");
  }

  Eigen::Index size() const noexcept { return start.size(); }

  const Track<Scalar>& track(Part p) const {
    switch (p) {
      case Part::Start: return start;
      case Part::Middle: return middle;
      case Part::End: return end;
    }
    throw std::invalid_argument("bad part");
  }
  Track<Scalar>& track(Part p) {
    return const_cast<Track<Scalar>&>(std::as_const(*this).track(p));
  }

  /// Copy of the frames covered by `w` (1-based, inclusive).
  BasicPartScores segment(const Window& w) const {
    if (!w.valid() || w.end > size()) throw std::out_of_range("segment " + to_string(w) + " outside track");
    return {start.segment(w.start - 1, w.length()), middle.segment(w.start - 1, w.length()),
            end.segment(w.start - 1, w.length())};
  }

  template <typename To>
  BasicPartScores<To> cast() const {
    return {start.template cast<To>(), middle.template cast<To>(), end.template cast<To>()};
  }
};
using PartScores = BasicPartScores<double>;

template <typename Scalar>
struct BasicPartWeights {
  Scalar start{1};
  Scalar middle{1};
  Scalar end{1};

  Scalar operator[](Part p) const {
    return p == Part::Start ? start : p == Part::Middle ? middle : end;
  }
};
using PartWeights = BasicPartWeights<double>;

template <typename Scalar>
struct BasicScoredWindow {
  Window window;
  Scalar score{};
  int class_id = 0;
};
using ScoredWindow = BasicScoredWindow<double>;

/// Ranking rule shared by every top-K list: score desc, start asc, length asc.
template <typename Scalar>
constexpr bool ranks_before(const BasicScoredWindow<Scalar>& a, const BasicScoredWindow<Scalar>& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.window.start != b.window.start) return a.window.start < b.window.start;
  return a.window.end < b.window.end;
}

int overlap_length(const Window& a, const Window& b) noexcept;

/// Temporal IoU on closed frame intervals.
double iou(const Window& a, const Window& b) noexcept;

/// Symmetric-difference size |a ∪ b| - |a ∩ b| in frames.
int delta(const Window& a, const Window& b) noexcept;

/// Each track multiplied by its part weight.
template <typename Scalar>
BasicPartScores<Scalar> apply_weights(const BasicPartScores<Scalar>& scores,
                                      const BasicPartWeights<Scalar>& weights) {
  return {scores.start * weights.start, scores.middle * weights.middle, scores.end * weights.end};
}

/// Structured confidence of `w`: weighted start score at w.start, weighted
/// middle scores strictly inside, weighted end score at w.end.
///
/// Accumulates left to right, the same order the streaming inference uses, so
/// both agree bit-for-bit on pre-weighted tracks.
template <typename Scalar>
Scalar window_score(const BasicPartScores<Scalar>& scores, const Window& w,
                    const BasicPartWeights<Scalar>& weights = {}) {
  if (!w.valid() || w.end > scores.size() || w.length() < 2)
    throw std::out_of_range("window " + to_string(w) + " not scorable on " + std::to_string(scores.size()) +
                            " frames");
  Scalar acc = scores.start(w.start - 1) * weights.start;
  for (int t = w.start + 1; t <= w.end - 1; ++t) acc += scores.middle(t - 1) * weights.middle;
  acc += scores.end(w.end - 1) * weights.end;
  return acc;
}

}  // namespace smsloc
