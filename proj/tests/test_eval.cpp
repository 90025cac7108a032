#include "oracles.hpp"

#include "smsloc/eval.hpp"

#include <doctest.h>

#include <random>

using namespace smsloc;

namespace {

using GtMap = std::map<std::string, std::vector<Window>>;

// Precision/recall bookkeeping over the whole ranking, then AP as the sum of
// precision at each recall step divided by the number of ground truths.
double reference_ap(const std::vector<ClassDetection>& ranked, const GtMap& gts, double sigma) {
  std::vector<std::pair<std::string, Window>> flat;
  for (const auto& [v, ws] : gts)
    for (const auto& w : ws) flat.push_back({v, w});
  std::vector<bool> used(flat.size(), false);
  std::vector<int> is_tp;
  for (const auto& d : ranked) {
    int pick = -1;
    double best = -1.0;
    for (std::size_t g = 0; g < flat.size(); ++g) {
      if (used[g] || flat[g].first != d.video_id) continue;
      const double o = oracle::set_iou(d.window, flat[g].second);
      if (o > sigma && o > best) {
        best = o;
        pick = static_cast<int>(g);
      }
    }
    if (pick >= 0) used[pick] = true;
    is_tp.push_back(pick >= 0);
  }
  double ap = 0.0;
  int tp = 0;
  for (std::size_t r = 0; r < is_tp.size(); ++r)
    if (is_tp[r]) ap += static_cast<double>(++tp) / static_cast<double>(r + 1);
  return ap / static_cast<double>(flat.size());
}

struct Fixture {
  std::vector<ClassDetection> ranked;
  GtMap gts;
};

Fixture random_fixture(std::mt19937_64& rng) {
  Fixture f;
  std::uniform_int_distribution<int> ng(1, 4), nd(0, 12), jit(-4, 4);
  std::uniform_real_distribution<double> u(0, 1);
  for (const char* v : {"a", "b"}) {
    const int k = ng(rng);
    for (int i = 0; i < k; ++i) {
      const int s = 1 + 30 * i + jit(rng) + 4;
      f.gts[v].push_back({s, s + 10 + jit(rng)});
    }
    const int m = nd(rng);
    for (int i = 0; i < m; ++i) {
      const Window near = f.gts[v][std::uniform_int_distribution<int>(0, k - 1)(rng)];
      Window w{std::max(1, near.start + 2 * jit(rng)), 0};
      w.end = std::max(w.start + 1, near.end + 2 * jit(rng));
      if (u(rng) < 0.2) w = oracle::random_window(130, rng, 2);
      f.ranked.push_back({v, w, u(rng)});
    }
  }
  sort_for_ranking(f.ranked);
  return f;
}

}  // namespace

TEST_CASE("average precision examples") {
  const GtMap gts{{"v", {Window{1, 10}}}};
  // [1,6] vs [1,10]: IoU 0.6.
  std::vector<ClassDetection> d{{"v", {1, 6}, 1.0}};
  CHECK(*average_precision(d, gts, 0.5) == 1.0);

  d = {{"v", {20, 30}, 2.0}, {"v", {1, 10}, 1.0}};
  CHECK(*average_precision(d, gts, 0.5) == 0.5);

  d = {{"v", {1, 10}, 2.0}, {"v", {1, 9}, 1.0}};
  CHECK(*average_precision(d, gts, 0.5) == 1.0);
  const GtMap two{{"v", {Window{1, 10}, Window{50, 60}}}};
  CHECK(*average_precision(d, two, 0.5) == 0.5);  // duplicate is a false positive

  CHECK_FALSE(average_precision(d, GtMap{}, 0.5).has_value());
  CHECK(*average_precision({}, gts, 0.5) == 0.0);
  // Detections in a different video never match.
  d = {{"w", {1, 10}, 1.0}};
  CHECK(*average_precision(d, gts, 0.1) == 0.0);
  // IoU must be strictly above the threshold: [1,5] vs [1,10] is exactly 0.5.
  d = {{"v", {1, 5}, 1.0}};
  CHECK(*average_precision(d, gts, 0.5) == 0.0);
}

TEST_CASE("a detection matches its best-overlap unmatched ground truth") {
  const GtMap gts{{"v", {Window{1, 10}, Window{6, 15}}}};
  // [5,14] overlaps [6,15] more than [1,10]; the second detection then takes [1,10].
  std::vector<ClassDetection> d{{"v", {5, 14}, 2.0}, {"v", {2, 10}, 1.0}};
  CHECK(*average_precision(d, gts, 0.3) == 1.0);
}

TEST_CASE("average precision agrees with the reference on random fixtures") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 500; ++trial) {
    const auto f = random_fixture(rng);
    double prev = 2.0;
    for (double sigma : kDefaultSigmas) {
      const double ap = *average_precision(f.ranked, f.gts, sigma);
      CHECK(oracle::close(ap, reference_ap(f.ranked, f.gts, sigma), 1e-12));
      CHECK(ap >= 0.0);
      CHECK(ap <= 1.0);
      CHECK(ap <= prev + 1e-12);
      prev = ap;
    }
  }
}

TEST_CASE("appending a miss at the bottom never raises AP") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 300; ++trial) {
    auto f = random_fixture(rng);
    for (double sigma : kDefaultSigmas) {
      const double before = *average_precision(f.ranked, f.gts, sigma);
      auto more = f.ranked;
      more.push_back({"a", {500, 510}, -1.0});
      CHECK(*average_precision(more, f.gts, sigma) <= before);
    }
  }
}

TEST_CASE("mean_ap over classes") {
  GroundTruthSet gts;
  gts.add("v1", 0, {1, 10});
  gts.add("v1", 2, {20, 30});
  gts.add("v2", 2, {5, 9});
  CHECK(gts.count(2) == 2);
  CHECK(gts.classes() == std::vector<int>{0, 2});

  std::vector<VideoDetection> perfect{
      {"v1", {{1, 10}, 0.9, 0}}, {"v1", {{20, 30}, 0.8, 2}}, {"v2", {{5, 9}, 0.7, 2}}, {"v1", {{40, 45}, 0.1, 1}}};
  auto r = mean_ap(perfect, gts);
  CHECK(r.classes == std::vector<int>{0, 2});
  for (double m : r.mean_ap) CHECK(m == 1.0);

  r = mean_ap({}, gts);
  for (double m : r.mean_ap) CHECK(m == 0.0);

  // Class 2 only half found: its AP is 0.5 and the mean is unweighted.
  std::vector<VideoDetection> half{{"v1", {{1, 10}, 0.9, 0}}, {"v1", {{20, 30}, 0.8, 2}}};
  r = mean_ap(half, gts);
  REQUIRE(r.ap.size() == 2);
  CHECK(r.ap[1][0] == 0.5);
  CHECK(r.mean_ap[0] == 0.75);
}

TEST_CASE("ranking ties break by start") {
  std::vector<ClassDetection> d{{"b", {5, 9}, 1.0}, {"a", {7, 9}, 1.0}, {"a", {5, 8}, 1.0}, {"z", {1, 2}, 2.0}};
  sort_for_ranking(d);
  CHECK(d[0].video_id == "z");
  CHECK(d[1].video_id == "a");
  CHECK(d[1].window.start == 5);
  CHECK(d[2].video_id == "b");
  CHECK(d[3].window.start == 7);
}
