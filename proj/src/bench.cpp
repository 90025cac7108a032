#include "smsloc/bench.hpp"

#include "smsloc/io.hpp"
#include "smsloc/maxsum.hpp"
#include "smsloc/sms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <random>
#include <stdexcept>

namespace smsloc {

void BenchConfig::validate() const {
  if (ns.empty()) throw std::invalid_argument("bench needs at least one n");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 2) throw std::invalid_argument("bench sizes must be >= 2");
    if (i > 0 && ns[i] <= ns[i - 1]) throw std::invalid_argument("bench sizes must be increasing");
  }
  if (k < 1) throw std::invalid_argument("k must be positive");
  if (reps < 5) throw std::invalid_argument("bench needs at least 5 repetitions");
}

PartScores random_part_scores(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PartScores s(n);
  for (int t = 0; t < n; ++t) {
    s.start(t) = u(rng);
    s.middle(t) = u(rng);
    s.end(t) = u(rng);
  }
  return s;
}

std::vector<ScoredWindow> brute_force_topk(const PartScores& scores, int k) {
  const int n = static_cast<int>(scores.size());
  auto worse = [](const ScoredWindow& a, const ScoredWindow& b) { return ranks_before(a, b); };
  // Max-heap on "worse", so top() is the current worst kept window.
  std::priority_queue<ScoredWindow, std::vector<ScoredWindow>, decltype(worse)> heap(worse);
  for (int s = 1; s <= n; ++s) {
    double open = scores.start(s - 1);
    for (int e = s + 1; e <= n; ++e) {
      const ScoredWindow w{{s, e}, open + scores.end(e - 1), 0};
      if (static_cast<int>(heap.size()) < k) {
        heap.push(w);
      } else if (ranks_before(w, heap.top())) {
        heap.pop();
        heap.push(w);
      }
      open += scores.middle(e - 1);
    }
  }
  std::vector<ScoredWindow> out;
  while (!heap.empty()) {
    out.push_back(heap.top());
    heap.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

double median_seconds(const std::function<void()>& body, int reps, int warmup) {
  for (int i = 0; i < warmup; ++i) body();
  std::vector<double> times;
  times.reserve(reps);
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  return times.size() % 2 ? times[times.size() / 2]
                          : 0.5 * (times[times.size() / 2 - 1] + times[times.size() / 2]);
}

std::vector<BenchRow> bench_scaling(const BenchConfig& config) {
  config.validate();
  std::vector<BenchRow> rows;
  for (std::size_t i = 0; i < config.ns.size(); ++i) {
    const int n = config.ns[i];
    const PartScores scores = random_part_scores(n, config.seed + i);
    SmsConfig sms;
    sms.k = config.k;

    double top = 0.0;
    const double t_sms = median_seconds([&] { top = sms_topk(scores, sms).front().score; }, config.reps, config.warmup);
    rows.push_back({n, config.k, "sms", t_sms, top});

    if (n <= config.brute_cap) {
      double brute_top = 0.0;
      const double t = median_seconds([&] { brute_top = brute_force_topk(scores, config.k).front().score; },
                                      config.reps, config.warmup);
      rows.push_back({n, config.k, "brute", t, brute_top});
    }
    if (config.include_kmaxsum) {
      double flat_top = 0.0;
      const double t = median_seconds([&] { flat_top = k_max_sums(scores.middle, config.k).front().score; },
                                      config.reps, config.warmup);
      rows.push_back({n, config.k, "kmaxsum", t, flat_top});
    }
  }
  return rows;
}

double scaling_slope(std::span<const BenchRow> rows, const std::string& algorithm, int min_n) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& r : rows) {
    if (r.algorithm != algorithm || r.n < min_n || !(r.median_seconds > 0.0)) continue;
    const double x = std::log(static_cast<double>(r.n));
    const double y = std::log(r.median_seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) throw std::invalid_argument("slope needs at least two timed sizes for " + algorithm);
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

void write_bench_report(std::ostream& out, std::span<const BenchRow> rows) {
  out << "# n\tk\talgorithm\tmedian_seconds\tchecksum\n";
  for (const auto& r : rows)
    out << r.n << '\t' << r.k << '\t' << r.algorithm << '\t' << format_double(r.median_seconds) << '\t'
        << format_double(r.checksum) << '\n';
}

void write_plot_data(std::ostream& out, std::span<const BenchRow> rows, const std::string& algorithm) {
  for (const auto& r : rows)
    if (r.algorithm == algorithm) out << r.n << ' ' << format_double(r.median_seconds) << '\n';
}

}  // namespace smsloc
