#include "pnet/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"
#include "pnet/error.hpp"
#include "pnet/rng.hpp"

namespace pnet {

Confusion confusion(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.empty()) throw InputShapeError("confusion needs at least one row");
  if (labels.size() != predictions.size())
    throw InputShapeError("labels and predictions differ in length");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i], p = predictions[i];
    if ((l != 0 && l != 1) || (p != 0 && p != 1))
      throw DataError("labels and predictions must be 0 or 1");
    if (l == 1)
      (p == 1 ? c.tp : c.fn)++;
    else
      (p == 1 ? c.fp : c.tn)++;
  }
  return c;
}

Confusion swap_classes(const Confusion& c) noexcept {
  return Confusion{c.tn, c.tp, c.fn, c.fp};
}

namespace {

double ratio(std::size_t num, std::size_t den, const char* what) {
  if (den == 0) throw UndefinedMetric(std::string(what) + " is undefined: zero denominator");
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double sensitivity(const Confusion& c) { return ratio(c.tp, c.positives(), "sensitivity"); }
double specificity(const Confusion& c) { return ratio(c.tn, c.negatives(), "specificity"); }
double performance(const Confusion& c) { return ratio(c.tp + c.tn, c.total(), "performance"); }

const char* to_string(Interval i) noexcept {
  return i == Interval::spread ? "spread" : "stderr";
}

RunStats summarize(std::span<const double> values, Interval convention) {
  if (values.empty()) throw InvalidArgument("need at least one run");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  RunStats s;
  s.mean = sum / n;
  s.runs = sorted.size();
  s.convention = convention;
  s.values.assign(values.begin(), values.end());
  if (sorted.size() > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    s.half_width = 1.96 * sd;
    if (convention == Interval::standard_error) s.half_width /= std::sqrt(n);
  }
  return s;
}

std::vector<std::uint64_t> run_seeds(std::uint64_t base, std::size_t runs) {
  std::vector<std::uint64_t> seeds(runs);
  for (std::size_t i = 0; i < runs; ++i) seeds[i] = derive_seed(base, i);
  return seeds;
}

std::vector<RunStats> repeated_runs(
    const std::function<std::vector<double>(std::uint64_t seed)>& run,
    std::span<const std::uint64_t> seeds, Interval convention, unsigned threads) {
  if (seeds.empty()) throw InvalidArgument("need at least one run");
  std::vector<std::vector<double>> results(seeds.size());
  detail::parallel_for(seeds.size(), threads, [&](std::size_t i) {
    try {
      results[i] = run(seeds[i]);
    } catch (const RunFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw RunFailure(seeds[i], e.what());
    }
  });
  const std::size_t k = results[0].size();
  for (const auto& r : results)
    if (r.size() != k) throw InvalidArgument("runs returned different metric counts");
  std::vector<RunStats> out;
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> v(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) v[i] = results[i][j];
    out.push_back(summarize(v, convention));
  }
  return out;
}

RunStats repeated_runs(const std::function<double(std::uint64_t seed)>& run,
                       std::span<const std::uint64_t> seeds, Interval convention,
                       unsigned threads) {
  return repeated_runs([&](std::uint64_t s) { return std::vector<double>{run(s)}; }, seeds,
                       convention, threads)[0];
}

}  // namespace pnet
