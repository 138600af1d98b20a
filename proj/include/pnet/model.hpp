#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pnet {

/// Coefficients of the bilinear supporting-neuron polynomial
/// y = w0 + w1*v1 + w2*v2 + w3*v1*v2.
struct Weights4 {
  std::array<double, 4> w{};

  constexpr double& operator[](std::size_t i) { return w[i]; }
  constexpr double operator[](std::size_t i) const { return w[i]; }

  bool finite() const noexcept;
  friend bool operator==(const Weights4&, const Weights4&) = default;
};

/// Bilinear transfer function, summed left to right.
constexpr double eval_transfer(double v1, double v2, const Weights4& w) noexcept {
  double y = w[0];
  y += w[1] * v1;
  y += w[2] * v2;
  y += w[3] * (v1 * v2);
  return y;
}

struct InputRef {
  enum class Kind { feature, neuron };

  Kind kind = Kind::feature;
  std::size_t index = 0;

  static constexpr InputRef feature(std::size_t i) { return {Kind::feature, i}; }
  static constexpr InputRef neuron(std::size_t i) { return {Kind::neuron, i}; }

  bool is_feature() const noexcept { return kind == Kind::feature; }
  bool is_neuron() const noexcept { return kind == Kind::neuron; }

  friend bool operator==(const InputRef&, const InputRef&) = default;
  friend auto operator<=>(const InputRef&, const InputRef&) = default;
};

std::string to_string(const InputRef& ref);

struct Neuron {
  std::array<InputRef, 2> inputs;
  Weights4 weights;
  int layer = 1;

  friend bool operator==(const Neuron&, const Neuron&) = default;
};

struct NormEntry {
  double mean = 0.0;
  double stddev = 1.0;
  friend bool operator==(const NormEntry&, const NormEntry&) = default;
};

/// A feed-forward DAG of supporting neurons over m input features.
///
/// Neurons are stored in topological order: a neuron may only reference
/// features or neurons with a smaller index. The network is immutable once
/// constructed, so a single instance can be evaluated from many threads.
class PolyNetwork {
public:
  static constexpr double default_threshold = 0.5;

  /// Validates every structural invariant and throws InputShapeError on violation.
  PolyNetwork(std::size_t feature_count, std::vector<Neuron> neurons, std::size_t output,
              std::vector<std::string> feature_names = {},
              std::optional<std::vector<NormEntry>> norm_stats = std::nullopt,
              double threshold = default_threshold);

  std::size_t feature_count() const noexcept { return m_; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }
  const std::optional<std::vector<NormEntry>>& norm_stats() const noexcept { return norm_; }
  const std::vector<Neuron>& neurons() const noexcept { return neurons_; }
  std::size_t output() const noexcept { return output_; }
  double threshold() const noexcept { return threshold_; }

  /// Depth of the output neuron (features are layer 0).
  int depth() const { return neurons_[output_].layer; }

  /// Sorted, de-duplicated feature indices that feed the output.
  std::vector<std::size_t> used_features() const;

  PolyNetwork with_threshold(double threshold) const;
  PolyNetwork without_norm_stats() const;

  friend bool operator==(const PolyNetwork&, const PolyNetwork&) = default;

private:
  std::size_t m_;
  std::vector<std::string> names_;
  std::optional<std::vector<NormEntry>> norm_;
  std::vector<Neuron> neurons_;
  std::size_t output_;
  double threshold_;
};

/// Evaluates the network on one raw feature vector. Applies norm_stats first
/// when present. Throws InputShapeError on length mismatch or non-finite input.
double eval_network(const PolyNetwork& net, std::span<const double> x);

/// 1 when eval_network(net, x) >= net.threshold(), else 0.
int classify(const PolyNetwork& net, std::span<const double> x);

/// Text serialization in the PNMODEL v1 format.
std::string render_model(const PolyNetwork& net);
PolyNetwork parse_model(std::string_view text);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_real(double value);

}  // namespace pnet
