#include "oracles.hpp"

#include "smsloc/postprocess.hpp"
#include "smsloc/sms.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace smsloc;

namespace {

std::vector<std::pair<int, int>> spans(const std::vector<Snippet>& s) {
  std::vector<std::pair<int, int>> out;
  for (const auto& x : s) out.push_back({x.window().start, x.window().end});
  return out;
}

// Boundary frames score 1 and interior frames 2 (times `gain`), so under
// length normalisation the planted window has the best frame average.
PartScores planted(int n, Window w, double background = -0.5, double gain = 1.0) {
  PartScores s(n);
  s.start.setConstant(background);
  s.middle.setConstant(background);
  s.end.setConstant(background);
  s.start(w.start - 1) = gain;
  s.middle.segment(w.start, w.length() - 2).setConstant(2.0 * gain);
  s.end(w.end - 1) = gain;
  return s;
}

}  // namespace

TEST_CASE("snippet geometry at 5 fps") {
  PipelineConfig cfg;
  CHECK(cfg.snippet_frames() == 100);
  CHECK(cfg.stride_frames() == 10);
  using V = std::vector<std::pair<int, int>>;
  CHECK(spans(split_snippets(120, cfg)) == V{{1, 100}, {11, 110}, {21, 120}});
  CHECK(spans(split_snippets(50, cfg)) == V{{1, 50}});
  CHECK(spans(split_snippets(100, cfg)) == V{{1, 100}});
  CHECK(spans(split_snippets(125, cfg)) == V{{1, 100}, {11, 110}, {21, 120}, {26, 125}});
}

TEST_CASE("snippets tile the video with increasing offsets") {
  PipelineConfig cfg;
  cfg.fps = 2.5;
  for (int n = 1; n < 400; n += 7) {
    const auto snips = split_snippets(n, cfg);
    std::vector<int> cover(n + 1, 0);
    for (std::size_t i = 0; i < snips.size(); ++i) {
      if (i > 0) CHECK(snips[i].offset > snips[i - 1].offset);
      CHECK(snips[i].window().end <= n);
      for (int t = snips[i].window().start; t <= snips[i].window().end; ++t) ++cover[t];
    }
    for (int t = 1; t <= n; ++t) CHECK(cover[t] >= 1);
    CHECK(snips.back().window().end == n);
  }
}

TEST_CASE("pipeline config validation") {
  PipelineConfig cfg;
  cfg.overlap_seconds = 20.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.fps = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.nms_iou = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("duration prior fit") {
  const std::vector<int> flat{10, 10, 10};
  const auto p = fit_duration_prior(flat, 2);
  CHECK(p.class_id == 2);
  CHECK(p.log_mean == doctest::Approx(std::log(10.0)));
  CHECK(p.log_std == kMinLogStd);

  DurationPrior q{0, 2.0, 1.0};
  CHECK(q.median() == doctest::Approx(std::exp(2.0)));
  for (double d : {2.0, 7.0, 20.0}) {
    const double z = (std::log(d) - 2.0);
    const double direct = std::exp(-0.5 * z * z) / (d * std::sqrt(2.0 * std::numbers::pi));
    CHECK(q.density(d) == doctest::Approx(direct));
    CHECK(q.relative_density(d) == doctest::Approx(std::exp(-0.5 * z * z)));
  }
  // Symmetric in log length around the median.
  CHECK(q.relative_density(std::exp(2.0) * 3) == doctest::Approx(q.relative_density(std::exp(2.0) / 3)));
  CHECK(q.relative_density(q.median()) == doctest::Approx(1.0));
  CHECK(q.relative_density(30.0) < 1.0);
  CHECK(q.relative_density(0.0) == 0.0);
  CHECK(q.density(0.0) == 0.0);
  CHECK_THROWS_AS(fit_duration_prior(std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("duration prior fit on e and e cubed") {
  // Integer durations cannot be e exactly; fit the log-moments directly.
  const std::vector<int> ds{3, 20};
  const auto p = fit_duration_prior(ds);
  const double a = std::log(3.0), b = std::log(20.0);
  CHECK(p.log_mean == doctest::Approx((a + b) / 2));
  CHECK(p.log_std == doctest::Approx((b - a) / 2));
}

TEST_CASE("rank_score") {
  PipelineConfig cfg;
  cfg.use_prior = false;
  const ScoredWindow det{{1, 3}, 6.0, 0};
  CHECK(rank_score(det, nullptr, cfg) == 2.0);

  cfg.use_length_norm = false;
  const DurationPrior prior{0, std::log(3.0), 0.5};
  CHECK(rank_score(det, &prior, cfg) == 6.0);

  cfg.use_prior = true;
  CHECK(rank_score(det, &prior, cfg) == 6.0);  // length 3 is the median
  CHECK(rank_score({{1, 40}, 6.0, 0}, &prior, cfg) < 6.0);
  CHECK(rank_score({{1, 40}, -6.0, 0}, &prior, cfg) == -6.0);
  const DurationPrior sharp{0, 0.0, kMinLogStd};
  CHECK(rank_score({{1, 400}, 6.0, 0}, &sharp, cfg) == doctest::Approx(6.0 * kMinPriorMultiplier));

  cfg.use_length_norm = true;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 100; ++i) {
    const ScoredWindow d{oracle::random_window(50, rng, 2), u(rng), 0};
    CHECK((rank_score(d, &prior, cfg) > 0) == (d.score > 0));
  }
}

TEST_CASE("nms examples") {
  // [1,10] vs [4,12]: overlap 7, union 12.
  std::vector<ScoredWindow> d{{{1, 10}, 1.0, 0}, {{4, 12}, 2.0, 0}};
  CHECK(iou(d[0].window, d[1].window) > 0.4);
  CHECK(PipelineConfig{}.nms_iou == 0.2);
  auto kept = nms(d, 0.4);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].window == Window{4, 12});

  d = {{{1, 5}, 1.0, 0}, {{6, 9}, 2.0, 0}};
  CHECK(nms(d, 0.4).size() == 2);

  d = {{{3, 8}, 1.0, 0}, {{2, 7}, 1.0, 0}};
  kept = nms(d, 0.4);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].window == Window{2, 7});

  CHECK(nms(std::vector<ScoredWindow>{}, 0.4).empty());
}

TEST_CASE("nms properties") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ScoredWindow> d;
    for (int i = 0; i < 40; ++i) d.push_back({oracle::random_window(60, rng, 2), u(rng), 0});
    const auto kept = nms(d, 0.4);
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        CHECK(iou(kept[i].window, kept[j].window) <= 0.4);
        CHECK(kept[i].score >= kept[j].score);
      }
    // Every dropped detection is covered by a higher-ranked survivor.
    for (const auto& x : d) {
      bool ok = false;
      for (const auto& k : kept) ok |= (k.window == x.window && k.score == x.score) || iou(k.window, x.window) > 0.4;
      CHECK(ok);
    }
    const auto again = nms(kept, 0.4);
    REQUIRE(again.size() == kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) CHECK(again[i].window == kept[i].window);
  }
}

TEST_CASE("detect finds a dominant planted window") {
  const std::vector<PartScores> per_class{planted(60, {12, 30}), planted(60, {40, 50}, -1.0, 0.5)};
  std::vector<std::optional<DurationPrior>> priors(2);
  PipelineConfig cfg;
  const auto dets = detect(per_class, priors, cfg);
  REQUIRE_FALSE(dets.empty());
  CHECK(dets[0].window == Window{12, 30});
  CHECK(dets[0].class_id == 0);
  for (std::size_t i = 1; i < dets.size(); ++i) CHECK(dets[i - 1].score >= dets[i].score);
}

TEST_CASE("windows seen by several snippets survive once") {
  const std::vector<PartScores> per_class{planted(120, {30, 45})};
  std::vector<std::optional<DurationPrior>> priors(1);
  PipelineConfig cfg;
  const auto dets = detect(per_class, priors, cfg);
  int hits = 0;
  for (const auto& d : dets) hits += d.window == Window{30, 45};
  CHECK(hits == 1);
  CHECK(dets[0].window == Window{30, 45});
}

TEST_CASE("short videos reduce to sms_topk, rank_score and nms") {
  std::mt19937_64 rng(4);
  PipelineConfig cfg;
  cfg.k = 20;
  const auto s = oracle::random_scores(70, rng);
  const DurationPrior prior{0, std::log(12.0), 0.6};
  const std::vector<PartScores> per_class{s};
  const std::vector<std::optional<DurationPrior>> priors{prior};
  const auto dets = detect(per_class, priors, cfg);
  SmsConfig sc;
  sc.k = 20;
  auto direct = sms_topk(s, sc);
  for (auto& d : direct) d.score = rank_score(d, &prior, cfg);
  const auto expect = nms(direct, cfg.nms_iou);
  REQUIRE(dets.size() == expect.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    CHECK(dets[i].window == expect[i].window);
    CHECK(dets[i].score == expect[i].score);
  }
}

TEST_CASE("all-negative scores still produce negative detections") {
  PartScores s(30);
  s.start.setConstant(-1);
  s.middle.setConstant(-1);
  s.end.setConstant(-1);
  const std::vector<PartScores> per_class{s};
  const auto dets = detect(per_class, std::vector<std::optional<DurationPrior>>(1), PipelineConfig{});
  REQUIRE_FALSE(dets.empty());
  for (const auto& d : dets) CHECK(d.score < 0.0);
}

TEST_CASE("flat mode ranks by frame average") {
  PartScores s(40);
  s.middle.setConstant(-1.0);
  s.middle.segment(9, 10).setConstant(2.0);
  PipelineConfig cfg;
  cfg.mode = DetectMode::Flat;
  cfg.use_prior = false;
  const std::vector<PartScores> per_class{s};
  const auto dets = detect(per_class, std::vector<std::optional<DurationPrior>>(1), cfg);
  REQUIRE_FALSE(dets.empty());
  CHECK(dets[0].score == 2.0);
  CHECK(dets[0].window.start >= 10);
  CHECK(dets[0].window.end <= 19);
}

TEST_CASE("threaded detection is identical to sequential") {
  std::mt19937_64 rng(10);
  std::vector<PartScores> per_class;
  for (int c = 0; c < 5; ++c) per_class.push_back(oracle::random_scores(400, rng));
  std::vector<std::optional<DurationPrior>> priors(5, DurationPrior{0, std::log(15.0), 0.4});
  PipelineConfig cfg;
  const auto seq = detect(per_class, priors, cfg);
  cfg.threads = 3;
  const auto par = detect(per_class, priors, cfg);
  REQUIRE(seq.size() == par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CHECK(seq[i].window == par[i].window);
    CHECK(seq[i].class_id == par[i].class_id);
    CHECK(seq[i].score == par[i].score);
  }
  per_class[3] = PartScores(10);
  CHECK_THROWS_AS(detect(per_class, priors, cfg), std::invalid_argument);
}
