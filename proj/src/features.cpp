#include "pnet/features.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "parallel.hpp"
#include "pnet/error.hpp"

namespace pnet {

void validate_bands(std::span<const BandSpec> bands) {
  if (bands.empty()) throw InvalidArgument("band set is empty");
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto& b = bands[i];
    if (!(b.lo >= 0.0 && b.lo < b.hi) || !std::isfinite(b.hi))
      throw InvalidArgument("band '" + b.name + "' needs 0 <= lo < hi");
    if (i > 0 && b.lo < bands[i - 1].hi)
      throw InvalidArgument("bands '" + bands[i - 1].name + "' and '" + b.name +
                            "' overlap or are out of order");
  }
}

std::vector<BandSpec> band_preset(std::string_view name) {
  if (name == "alz4")
    return {{"Delta", 0.0, 4.0}, {"Theta", 4.0, 8.0}, {"Alpha", 8.0, 14.0}, {"Beta", 14.0, 20.0}};
  if (name == "neo6")
    return {{"Subdelta", 0.0, 1.5}, {"Delta", 1.5, 3.5},  {"Theta", 3.5, 7.5},
            {"Alpha", 7.5, 13.5},   {"Beta1", 13.5, 19.5}, {"Beta2", 19.5, 25.0}};
  throw InvalidArgument("unknown band preset '" + std::string(name) + "'");
}

std::vector<std::string> band_preset_names() { return {"alz4", "neo6"}; }

void SegmentSpec::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
    throw InvalidArgument("sample rate must be positive");
  if (!(window_s > 0.0) || !std::isfinite(window_s))
    throw InvalidArgument("window length must be positive");
  if (!(step_s > 0.0 && step_s <= window_s)) throw InvalidArgument("step must lie in (0, window]");
  if (window_samples() < 2) throw InvalidArgument("window must span at least two samples");
  if (step_samples() < 1) throw InvalidArgument("step must span at least one sample");
}

std::size_t SegmentSpec::window_samples() const {
  return static_cast<std::size_t>(std::llround(window_s * sample_rate_hz));
}

std::size_t SegmentSpec::step_samples() const {
  return static_cast<std::size_t>(std::llround(step_s * sample_rate_hz));
}

std::size_t segment_count(std::size_t signal_len, const SegmentSpec& spec) {
  spec.validate();
  const std::size_t w = spec.window_samples();
  if (signal_len < w)
    throw DataError("signal of " + std::to_string(signal_len) +
                    " samples is shorter than one window of " + std::to_string(w));
  return (signal_len - w) / spec.step_samples() + 1;
}

std::vector<std::vector<double>> segment(std::span<const double> signal, const SegmentSpec& spec) {
  const std::size_t count = segment_count(signal.size(), spec);
  const std::size_t w = spec.window_samples();
  const std::size_t s = spec.step_samples();
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.emplace_back(signal.begin() + i * s, signal.begin() + i * s + w);
  return out;
}

const char* to_string(Taper t) noexcept { return t == Taper::rect ? "rect" : "hann"; }
const char* to_string(PowerMode m) noexcept {
  return m == PowerMode::absolute ? "abs" : "abs+rel";
}

namespace {

// Direct DFT restricted to the bins that are asked for. Twiddles come from a
// table indexed by (k * n) mod N, which keeps the phases exact.
class Dft {
public:
  Dft(std::span<const double> window, Taper taper) : n_(window.size()), x_(window.begin(), window.end()) {
    if (n_ == 0) throw InputShapeError("window is empty");
    for (double v : x_)
      if (!std::isfinite(v)) throw InputShapeError("window has a non-finite sample");
    if (taper == Taper::hann && n_ > 1) {
      for (std::size_t i = 0; i < n_; ++i) {
        const double h = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                              static_cast<double>(n_ - 1));
        x_[i] *= h;
        wsum2_ += h * h;
      }
    } else {
      wsum2_ = static_cast<double>(n_);
    }
    cos_.resize(n_);
    sin_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_);
      cos_[j] = std::cos(a);
      sin_[j] = std::sin(a);
    }
  }

  std::size_t size() const { return n_; }
  std::size_t last_bin() const { return n_ / 2; }

  // One-sided power of bin k.
  double power(std::size_t k) const {
    double re = 0.0, im = 0.0;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      re += x_[i] * cos_[idx];
      im -= x_[i] * sin_[idx];
      idx += k;
      if (idx >= n_) idx -= n_;
    }
    double p = (re * re + im * im) / wsum2_;
    const bool nyquist = n_ % 2 == 0 && k == n_ / 2;
    if (k != 0 && !nyquist) p *= 2.0;
    return p;
  }

private:
  std::size_t n_;
  std::vector<double> x_;
  double wsum2_ = 0.0;
  std::vector<double> cos_, sin_;
};

bool bin_in_band(std::size_t k, std::size_t n, double rate, const BandSpec& b) {
  const double f = static_cast<double>(k) * rate / static_cast<double>(n);
  if (f >= b.lo && f < b.hi) return true;
  const double nyq = rate / 2.0;
  return n % 2 == 0 && k == n / 2 && b.hi == nyq;
}

void check_nyquist(std::span<const BandSpec> bands, double rate) {
  if (!(rate > 0.0)) throw InvalidArgument("sample rate must be positive");
  for (const auto& b : bands)
    if (b.hi > rate / 2.0)
      throw InvalidArgument("band '" + b.name + "' reaches above the Nyquist frequency");
}

}  // namespace

std::vector<double> periodogram(std::span<const double> window, Taper taper) {
  const Dft dft(window, taper);
  std::vector<double> out(dft.last_bin() + 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = dft.power(k);
  return out;
}

std::vector<double> band_powers(std::span<const double> window, double rate_hz,
                                std::span<const BandSpec> bands, Taper taper) {
  validate_bands(bands);
  check_nyquist(bands, rate_hz);
  const Dft dft(window, taper);
  std::vector<double> out(bands.size(), 0.0);
  for (std::size_t k = 0; k <= dft.last_bin(); ++k) {
    for (std::size_t b = 0; b < bands.size(); ++b) {
      if (bin_in_band(k, dft.size(), rate_hz, bands[b])) {
        out[b] += dft.power(k);
        break;
      }
    }
  }
  return out;
}

double band_power(std::span<const double> window, double rate_hz, const BandSpec& band,
                  Taper taper) {
  return band_powers(window, rate_hz, std::span<const BandSpec>(&band, 1), taper)[0];
}

SumChannel parse_sum_channel(std::string_view text) {
  SumChannel s;
  std::string_view body = text;
  if (auto eq = text.find('='); eq != std::string_view::npos) {
    s.label = std::string(text.substr(eq + 1));
    body = text.substr(0, eq);
  }
  const auto plus = body.find('+');
  if (plus == std::string_view::npos || plus == 0 || plus + 1 == body.size() ||
      body.find('+', plus + 1) != std::string_view::npos)
    throw InvalidArgument("sum channel '" + std::string(text) + "' must look like A+B or A+B=label");
  s.a = std::string(body.substr(0, plus));
  s.b = std::string(body.substr(plus + 1));
  return s;
}

std::vector<std::string> band_feature_names(std::span<const std::string> channel_labels,
                                            std::span<const BandSpec> bands, PowerMode mode) {
  std::vector<std::string> names;
  auto block = [&](const char* prefix) {
    for (const auto& b : bands)
      for (const auto& c : channel_labels) names.push_back(prefix + b.name + c);
  };
  block("AbsPow");
  if (mode == PowerMode::absolute_relative) block("RelPow");
  return names;
}

ExtractResult extract_band_features(std::span<const Channel> channels,
                                    std::span<const BandSpec> bands, const SegmentSpec& spec,
                                    const ExtractOptions& options) {
  spec.validate();
  validate_bands(bands);
  check_nyquist(bands, spec.sample_rate_hz);
  if (channels.empty()) throw DataError("no channels to extract from");
  const std::size_t len = channels[0].samples.size();
  for (const auto& c : channels)
    if (c.samples.size() != len) throw DataError("channels differ in length");

  // Resolve the channel list: plain channels, then sums.
  std::vector<std::vector<double>> sums;
  std::vector<std::string> labels;
  for (const auto& c : channels) labels.push_back(c.name);
  auto find = [&](const std::string& name) -> const Channel& {
    for (const auto& c : channels)
      if (c.name == name) return c;
    throw DataError("sum channel references unknown channel '" + name + "'");
  };
  for (const auto& s : options.sums) {
    const auto& a = find(s.a);
    const auto& b = find(s.b);
    std::vector<double> v(len);
    for (std::size_t i = 0; i < len; ++i) v[i] = a.samples[i] + b.samples[i];
    sums.push_back(std::move(v));
    labels.push_back(s.label);
  }
  std::vector<std::span<const double>> signals;
  for (const auto& c : channels) signals.emplace_back(c.samples);
  for (const auto& s : sums) signals.emplace_back(s);

  const std::size_t rows = segment_count(len, spec);
  const std::size_t w = spec.window_samples();
  const std::size_t step = spec.step_samples();
  const std::size_t nb = bands.size(), nc = signals.size();
  const bool rel = options.mode == PowerMode::absolute_relative;

  ExtractResult result;
  result.table = FeatureTable(band_feature_names(labels, bands, options.mode), rows);
  std::vector<char> undefined(rows, 0);
  FeatureTable& t = result.table;
  detail::parallel_for(rows, options.threads, [&](std::size_t r) {
    for (std::size_t c = 0; c < nc; ++c) {
      const auto win = signals[c].subspan(r * step, w);
      const auto p = band_powers(win, spec.sample_rate_hz, bands, options.taper);
      double total = 0.0;
      for (double v : p) total += v;
      for (std::size_t b = 0; b < nb; ++b) {
        t.at(r, b * nc + c) = p[b];
        if (rel) {
          t.at(r, nb * nc + b * nc + c) =
              total > 0.0 ? p[b] / total : std::numeric_limits<double>::quiet_NaN();
        }
      }
      if (rel && !(total > 0.0)) undefined[r] = 1;
    }
  });
  for (std::size_t r = 0; r < rows; ++r)
    if (undefined[r]) result.undefined_segments.push_back(r);
  return result;
}

std::vector<Channel> read_signal_csv(std::istream& in) {
  const FeatureTable t = read_csv(in);
  if (t.rows() == 0) throw DataError("signal CSV has no samples");
  std::vector<Channel> out;
  for (std::size_t c = 0; c < t.cols(); ++c) {
    const auto col = t.column(c);
    for (double v : col)
      if (!std::isfinite(v)) throw DataError("channel '" + t.names()[c] + "' has a non-finite sample");
    out.push_back({t.names()[c], std::vector<double>(col.begin(), col.end())});
  }
  return out;
}

std::vector<Channel> read_signal_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_signal_csv(in);
}

NormStats normalize_fit(const FeatureTable& table) {
  if (table.rows() < 2) throw DataError("normalization needs at least two rows");
  NormStats stats;
  stats.names = table.names();
  const double n = static_cast<double>(table.rows());
  for (std::size_t c = 0; c < table.cols(); ++c) {
    const auto col = table.column(c);
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0) || !std::isfinite(sd))
      throw DataError("column '" + table.names()[c] + "' has zero or undefined variance");
    stats.entries.push_back({mean, sd});
  }
  return stats;
}

FeatureTable normalize_apply(const FeatureTable& table, const NormStats& stats) {
  if (table.names() != stats.names)
    throw InputShapeError("table columns do not match the normalization statistics");
  FeatureTable out = table;
  for (std::size_t c = 0; c < out.cols(); ++c) {
    const auto [mean, sd] = stats.entries[c];
    for (double& v : out.column(c)) v = (v - mean) / sd;
  }
  return out;
}

}  // namespace pnet
