#include "pnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pnet/error.hpp"
#include "pnet/features.hpp"

namespace pnet {

const char* to_string(NoiseFamily f) noexcept {
  switch (f) {
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::laplace: return "laplace";
    case NoiseFamily::student_t: return "student-t";
  }
  return "?";
}

NoiseFamily parse_noise_family(const std::string& text) {
  if (text == "gaussian") return NoiseFamily::gaussian;
  if (text == "laplace") return NoiseFamily::laplace;
  if (text == "student-t" || text == "t") return NoiseFamily::student_t;
  throw InvalidArgument("unknown noise family '" + text + "'");
}

void Noise::validate() const {
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw InvalidArgument("noise scale must be >= 0");
  if (family == NoiseFamily::student_t && !(nu > 0.0))
    throw InvalidArgument("student-t degrees of freedom must be positive");
}

double Noise::theoretical_std() const {
  switch (family) {
    case NoiseFamily::gaussian: return scale;
    case NoiseFamily::laplace: return std::sqrt(2.0) * scale;
    case NoiseFamily::student_t:
      return nu > 2.0 ? scale * std::sqrt(nu / (nu - 2.0)) : std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

double sample_noise(const Noise& noise, Rng& rng) {
  switch (noise.family) {
    case NoiseFamily::gaussian: return noise.scale * std::normal_distribution<double>(0.0, 1.0)(rng);
    case NoiseFamily::laplace: {
      // Inverse CDF on u in (-1/2, 1/2).
      double u = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
      while (u == -0.5) u = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
      const double mag = -std::log1p(-2.0 * std::fabs(u));
      return noise.scale * (u < 0.0 ? -mag : mag);
    }
    case NoiseFamily::student_t:
      return noise.scale * std::student_t_distribution<double>(noise.nu)(rng);
  }
  return 0.0;
}

void SynthSpec::validate() const {
  if (m_total < generator.feature_count())
    throw InvalidArgument("m_total is smaller than the generator's feature count");
  if (n_rows < 1) throw InvalidArgument("need at least one row");
  noise.validate();
}

std::vector<std::string> numbered_feature_names(std::size_t m) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < m; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

SynthData gen_dataset(const SynthSpec& spec) {
  spec.validate();
  const std::size_t m = spec.m_total, n = spec.n_rows, mg = spec.generator.feature_count();
  std::vector<std::string> names = spec.generator.feature_names();
  if (names.empty()) names = numbered_feature_names(mg);
  for (std::size_t j = mg; j < m; ++j) names.push_back("d" + std::to_string(j - mg + 1));

  SynthData out;
  out.table = FeatureTable(names, n);
  out.clean.resize(n);
  out.target.resize(n);
  std::vector<double> x(m);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(spec.seed, i));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t j = 0; j < m; ++j) {
      x[j] = normal(rng);
      out.table.at(i, j) = x[j];
    }
    out.clean[i] = eval_network(spec.generator, std::span<const double>(x.data(), mg));
    out.target[i] = out.clean[i];
    if (spec.noise.scale > 0.0) out.target[i] += sample_noise(spec.noise, rng);
  }

  if (spec.label_rule.kind == LabelRuleKind::median) {
    std::vector<double> sorted = out.clean;
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    out.threshold = sorted[n / 2];
  } else {
    out.threshold = spec.label_rule.threshold;
  }
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = out.clean[i] >= out.threshold ? 1 : 0;
  out.table.set_labels(std::move(labels));
  return out;
}

PolyNetwork paper_alzheimer_model() {
  using R = InputRef;
  std::vector<Neuron> neurons{
      {{R::feature(10), R::feature(68)}, Weights4{{0.696, 0.391, 0.248, -0.231}}, 1},
      {{R::neuron(0), R::feature(72)}, Weights4{{0.386, 0.564, 0.542, -0.485}}, 2},
      {{R::neuron(1), R::feature(75)}, Weights4{{0.191, 0.776, 0.238, -0.204}}, 3},
  };
  return PolyNetwork(76, std::move(neurons), 2, numbered_feature_names(76));
}

PolyNetwork paper_sleep_model() {
  const auto bands = band_preset("neo6");
  const std::vector<std::string> channels{"C3", "C4", ""};
  const auto names = band_feature_names(channels, bands, PowerMode::absolute_relative);
  auto f = [&](const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    return InputRef::feature(static_cast<std::size_t>(it - names.begin()));
  };
  using R = InputRef;
  std::vector<Neuron> neurons{
      {{f("AbsPowThetaC4"), f("RelPowThetaC4")}, Weights4{{0.947, -0.087, 0.073, 0.070}}, 1},
      {{f("AbsPowSubdeltaC3"), f("RelPowBeta2C3")}, Weights4{{0.933, -0.131, -0.066, -0.065}}, 1},
      {{f("AbsPowSubdeltaC4"), f("RelPowTheta")}, Weights4{{0.932, -0.204, -0.008, 0.003}}, 1},
      {{f("AbsPowAlpha"), f("RelPowAlphaC4")}, Weights4{{0.929, -0.193, 0.034, 0.036}}, 1},
      {{R::neuron(0), R::neuron(1)}, Weights4{{0.189, -0.595, 0.666, 0.764}}, 2},
      {{R::neuron(2), R::neuron(3)}, Weights4{{0.250, -0.003, -0.540, 1.331}}, 2},
      {{R::neuron(4), R::neuron(5)}, Weights4{{0.282, -0.104, 0.045, 0.783}}, 3},
  };
  return PolyNetwork(names.size(), std::move(neurons), 6, names);
}

std::vector<PolyNetwork> planted_paper_models() {
  return {paper_alzheimer_model(), paper_sleep_model()};
}

DesignPair neuron_task(std::size_t n, const Weights4& w, const Noise& noise, double split_ratio,
                       std::uint64_t seed) {
  noise.validate();
  if (!(split_ratio > 0.0 && split_ratio < 1.0))
    throw InvalidArgument("split ratio must lie in (0, 1)");
  const auto nb = static_cast<std::size_t>(std::llround(split_ratio * static_cast<double>(n)));
  if (nb < 1 || nb >= n) throw InvalidArgument("split leaves the training or validation part empty");
  DesignPair d;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, i));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double v1 = normal(rng);
    const double v2 = normal(rng);
    double y = eval_transfer(v1, v2, w);
    if (noise.scale > 0.0) y += sample_noise(noise, rng);
    Design2& part = i < n - nb ? d.train : d.valid;
    part.v1.push_back(v1);
    part.v2.push_back(v2);
    part.y.push_back(y);
  }
  return d;
}

DesignPair standard_neuron_task(std::uint64_t seed) {
  return neuron_task(500, kStandardNeuronWeights, Noise{NoiseFamily::gaussian, 0.1}, 0.5, seed);
}

}  // namespace pnet
