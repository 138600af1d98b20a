#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace pnet {

/// Binary confusion counts; class 1 is positive.
struct Confusion {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::size_t total() const noexcept { return tp + tn + fp + fn; }
  std::size_t positives() const noexcept { return tp + fn; }
  std::size_t negatives() const noexcept { return tn + fp; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Throws InputShapeError on empty or mismatched input, DataError on a value
/// other than 0 or 1.
Confusion confusion(std::span<const int> labels, std::span<const int> predictions);

/// Counts with the roles of the two classes exchanged.
Confusion swap_classes(const Confusion& c) noexcept;

// Each throws UndefinedMetric when its denominator is zero.
double sensitivity(const Confusion& c);  // TP / (TP + FN)
double specificity(const Confusion& c);  // TN / (TN + FP)
double performance(const Confusion& c);  // (TP + TN) / total

/// How RunStats::half_width is derived from the per-run values.
enum class Interval {
  spread,  // 1.96 * sample standard deviation
  standard_error,  // 1.96 * sample standard deviation / sqrt(runs)
};
const char* to_string(Interval i) noexcept;

struct RunStats {
  double mean = 0.0;
  double half_width = 0.0;
  std::size_t runs = 0;
  Interval convention = Interval::spread;
  std::vector<double> values;  // in seed order
};

/// Mean and 95% half-width of `values`. The sum is taken over the sorted
/// values, so the result does not depend on their order.
RunStats summarize(std::span<const double> values, Interval convention = Interval::spread);

/// R seeds derived from `base`.
std::vector<std::uint64_t> run_seeds(std::uint64_t base, std::size_t runs);

/// Runs `run` once per seed (up to `threads` at a time) and summarizes each of
/// the K metrics it returns. A throwing run is rethrown as RunFailure with its
/// seed.
std::vector<RunStats> repeated_runs(
    const std::function<std::vector<double>(std::uint64_t seed)>& run,
    std::span<const std::uint64_t> seeds, Interval convention = Interval::spread,
    unsigned threads = 1);

/// Single-metric form.
RunStats repeated_runs(const std::function<double(std::uint64_t seed)>& run,
                       std::span<const std::uint64_t> seeds,
                       Interval convention = Interval::spread, unsigned threads = 1);

}  // namespace pnet
