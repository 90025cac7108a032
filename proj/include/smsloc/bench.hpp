#pragma once

// Scaling measurements for top-K structured maximal sums.

#include "smsloc/core.hpp"

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace smsloc {

struct BenchRow {
  int n = 0;
  int k = 0;
  std::string algorithm;  // "sms", "brute" or "kmaxsum"
  double median_seconds = 0.0;
  double checksum = 0.0;  // top-1 score
};

struct BenchConfig {
  std::vector<int> ns{10'000, 30'000, 100'000, 300'000, 1'000'000};
  int k = 100;
  int reps = 5;
  int warmup = 1;
  std::uint64_t seed = 0;
  int brute_cap = 2000;  // exhaustive search only for n <= brute_cap
  bool include_kmaxsum = true;

  void validate() const;
};

/// Signed uniform scores in [-1, 1] on all three tracks.
PartScores random_part_scores(int n, std::uint64_t seed);

/// Exhaustive top-K over all structured windows; O(n^2 log K).
std::vector<ScoredWindow> brute_force_topk(const PartScores& scores, int k);

/// Median wall time of `reps` calls after `warmup` untimed calls.
double median_seconds(const std::function<void()>& body, int reps, int warmup);

std::vector<BenchRow> bench_scaling(const BenchConfig& config);

/// Least-squares slope of log(time) against log(n) for one algorithm over
/// rows with n >= min_n.
double scaling_slope(std::span<const BenchRow> rows, const std::string& algorithm, int min_n = 0);

void write_bench_report(std::ostream& out, std::span<const BenchRow> rows);
void write_plot_data(std::ostream& out, std::span<const BenchRow> rows, const std::string& algorithm);

}  // namespace smsloc
