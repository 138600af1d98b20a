#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pnet/feature_table.hpp"
#include "pnet/model.hpp"

namespace pnet {

/// Frequency band [lo, hi) in Hz.
struct BandSpec {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
};

/// Throws InvalidArgument unless every band has 0 <= lo < hi and the set is
/// sorted and non-overlapping.
void validate_bands(std::span<const BandSpec> bands);

/// Named band sets: "alz4" (Delta/Theta/Alpha/Beta up to 20 Hz) and "neo6"
/// (Subdelta/Delta/Theta/Alpha/Beta1/Beta2 up to 25 Hz).
std::vector<BandSpec> band_preset(std::string_view name);
std::vector<std::string> band_preset_names();

struct SegmentSpec {
  double window_s = 1.0;
  double step_s = 1.0;
  double sample_rate_hz = 100.0;

  void validate() const;
  std::size_t window_samples() const;
  std::size_t step_samples() const;
};

/// floor((len - window) / step) + 1 in samples; throws DataError when the
/// signal is shorter than one window.
std::size_t segment_count(std::size_t signal_len, const SegmentSpec& spec);

/// Windows starting at multiples of the step.
std::vector<std::vector<double>> segment(std::span<const double> signal, const SegmentSpec& spec);

enum class Taper { rect, hann };
const char* to_string(Taper t) noexcept;

/// One-sided periodogram: bins k = 0..N/2 at k*rate/N Hz, power |X_k|^2 / sum(w^2)
/// with every bin except DC and Nyquist doubled. With the rectangular taper
/// the bins sum to the window energy sum(x^2).
std::vector<double> periodogram(std::span<const double> window, Taper taper = Taper::rect);

/// Sum of periodogram bins whose frequency lies in [lo, hi). A band whose hi
/// equals the Nyquist frequency also takes the Nyquist bin.
double band_power(std::span<const double> window, double rate_hz, const BandSpec& band,
                  Taper taper = Taper::rect);

/// Per-band powers of one window, sharing one DFT pass.
std::vector<double> band_powers(std::span<const double> window, double rate_hz,
                                std::span<const BandSpec> bands, Taper taper = Taper::rect);

struct Channel {
  std::string name;
  std::vector<double> samples;
};

/// Time-domain sum of two channels, named `label` in the output columns.
struct SumChannel {
  std::string a, b;
  std::string label;
};

/// Parses "A+B" or "A+B=label". Without a label the sum channel adds no
/// suffix to its column names (e.g. AbsPowAlpha).
SumChannel parse_sum_channel(std::string_view text);

enum class PowerMode { absolute, absolute_relative };
const char* to_string(PowerMode m) noexcept;

struct ExtractOptions {
  PowerMode mode = PowerMode::absolute;
  std::vector<SumChannel> sums;
  Taper taper = Taper::rect;
  unsigned threads = 1;
};

struct ExtractResult {
  FeatureTable table;
  /// Segments whose band-set power is zero on some channel; their relative
  /// powers are NaN.
  std::vector<std::size_t> undefined_segments;
};

/// One row per segment. Columns are AbsPow<Band><Channel> in band-major order
/// (all channels of the first band, then the next band), followed by the
/// RelPow block in the same order when relative powers are requested. Sum
/// channels come after the plain channels.
ExtractResult extract_band_features(std::span<const Channel> channels,
                                    std::span<const BandSpec> bands, const SegmentSpec& spec,
                                    const ExtractOptions& options = {});

/// Column names extract_band_features would produce.
std::vector<std::string> band_feature_names(std::span<const std::string> channel_labels,
                                            std::span<const BandSpec> bands, PowerMode mode);

/// Raw multichannel CSV: a header of channel names, one sample per row.
std::vector<Channel> read_signal_csv(std::istream& in);
std::vector<Channel> read_signal_csv_file(const std::string& path);

/// Per-column mean and sample standard deviation (n - 1).
struct NormStats {
  std::vector<std::string> names;
  std::vector<NormEntry> entries;
};

NormStats normalize_fit(const FeatureTable& table);
FeatureTable normalize_apply(const FeatureTable& table, const NormStats& stats);

}  // namespace pnet
