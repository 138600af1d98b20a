#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pnet/feature_table.hpp"
#include "pnet/fitting.hpp"
#include "pnet/model.hpp"
#include "pnet/rng.hpp"

namespace pnet {

enum class NoiseFamily { gaussian, laplace, student_t };
const char* to_string(NoiseFamily f) noexcept;
NoiseFamily parse_noise_family(const std::string& text);

/// Additive noise. `scale` is sigma (gaussian), b (laplace) or the multiplier
/// of a standard t variate with `nu` degrees of freedom. Scale 0 means no noise.
struct Noise {
  NoiseFamily family = NoiseFamily::gaussian;
  double scale = 0.1;
  double nu = 3.0;

  void validate() const;
  /// Standard deviation of one sample (infinite for student-t with nu <= 2).
  double theoretical_std() const;
};

/// Draws one noise sample.
double sample_noise(const Noise& noise, Rng& rng);

enum class LabelRuleKind { fixed, median };

/// label = 1 iff the clean output >= threshold. The median rule uses the
/// (upper) median clean output of the generated rows.
struct LabelRule {
  LabelRuleKind kind = LabelRuleKind::median;
  double threshold = 0.5;
};

struct SynthSpec {
  PolyNetwork generator;
  /// Columns 0..generator.m-1 feed the generator; any further columns are
  /// pure-noise distractors.
  std::size_t m_total = 0;
  std::size_t n_rows = 1000;
  Noise noise;
  LabelRule label_rule;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthData {
  FeatureTable table;          // features + labels
  std::vector<double> clean;   // generator output per row
  std::vector<double> target;  // clean + noise
  double threshold = 0.0;      // the label threshold actually used
};

/// Row i draws its features, then its noise, from stream derive_seed(seed, i),
/// so any subset of rows can be regenerated independently.
SynthData gen_dataset(const SynthSpec& spec);

/// The two published networks: a 3-neuron chain over 76 features and a
/// 7-neuron, three-layer network over the 36 neonatal band-power columns.
PolyNetwork paper_alzheimer_model();
PolyNetwork paper_sleep_model();
std::vector<PolyNetwork> planted_paper_models();

/// Names x1..xm.
std::vector<std::string> numbered_feature_names(std::size_t m);

/// Single-neuron regression task: v1, v2 ~ N(0, 1), y = g(v; w) + noise.
/// The first n - round(ratio * n) rows train, the rest validate.
inline const Weights4 kStandardNeuronWeights{{0.3, -0.2, 0.5, 0.1}};

DesignPair neuron_task(std::size_t n, const Weights4& w, const Noise& noise, double split_ratio,
                       std::uint64_t seed);

/// The reference task: 500 rows, kStandardNeuronWeights, gaussian noise 0.1, half validation.
DesignPair standard_neuron_task(std::uint64_t seed);

}  // namespace pnet
