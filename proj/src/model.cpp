#include "pnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pnet/error.hpp"

namespace pnet {

bool Weights4::finite() const noexcept {
  return std::all_of(w.begin(), w.end(), [](double v) { return std::isfinite(v); });
}

std::string to_string(const InputRef& ref) {
  return (ref.is_feature() ? "f" : "n") + std::to_string(ref.index);
}

PolyNetwork::PolyNetwork(std::size_t feature_count, std::vector<Neuron> neurons, std::size_t output,
                         std::vector<std::string> feature_names,
                         std::optional<std::vector<NormEntry>> norm_stats, double threshold)
    : m_(feature_count),
      names_(std::move(feature_names)),
      norm_(std::move(norm_stats)),
      neurons_(std::move(neurons)),
      output_(output),
      threshold_(threshold) {
  if (neurons_.empty()) throw InputShapeError("network has no neurons");
  if (output_ >= neurons_.size()) throw InputShapeError("output index out of range");
  if (!names_.empty() && names_.size() != m_)
    throw InputShapeError("feature name count does not match feature count");
  if (!std::isfinite(threshold_)) throw InputShapeError("threshold must be finite");
  if (norm_) {
    if (norm_->size() != m_) throw InputShapeError("norm stats size does not match feature count");
    for (const auto& e : *norm_)
      if (!std::isfinite(e.mean) || !std::isfinite(e.stddev) || !(e.stddev > 0.0))
        throw InputShapeError("norm stats require finite mean and positive std");
  }
  for (std::size_t i = 0; i < neurons_.size(); ++i) {
    const Neuron& n = neurons_[i];
    if (n.inputs[0] == n.inputs[1])
      throw InputShapeError("neuron " + std::to_string(i) + " has identical inputs");
    if (!n.weights.finite())
      throw InputShapeError("neuron " + std::to_string(i) + " has non-finite weights");
    int max_in = 0;
    for (const InputRef& in : n.inputs) {
      if (in.is_feature()) {
        if (in.index >= m_)
          throw InputShapeError("neuron " + std::to_string(i) + " references missing feature");
      } else {
        if (in.index >= i)
          throw InputShapeError("neuron " + std::to_string(i) + " breaks topological order");
        max_in = std::max(max_in, neurons_[in.index].layer);
      }
    }
    if (n.layer <= max_in)
      throw InputShapeError("neuron " + std::to_string(i) + " layer must exceed its inputs' layers");
  }
}

std::vector<std::size_t> PolyNetwork::used_features() const {
  std::vector<char> reach(neurons_.size(), 0);
  reach[output_] = 1;
  std::set<std::size_t> features;
  for (std::size_t i = neurons_.size(); i-- > 0;) {
    if (!reach[i]) continue;
    for (const InputRef& in : neurons_[i].inputs) {
      if (in.is_feature())
        features.insert(in.index);
      else
        reach[in.index] = 1;
    }
  }
  return {features.begin(), features.end()};
}

PolyNetwork PolyNetwork::with_threshold(double threshold) const {
  return PolyNetwork(m_, neurons_, output_, names_, norm_, threshold);
}

PolyNetwork PolyNetwork::without_norm_stats() const {
  return PolyNetwork(m_, neurons_, output_, names_, std::nullopt, threshold_);
}

double eval_network(const PolyNetwork& net, std::span<const double> x) {
  const std::size_t m = net.feature_count();
  if (x.size() != m)
    throw InputShapeError("expected " + std::to_string(m) + " features, got " +
                          std::to_string(x.size()));
  std::vector<double> features(x.begin(), x.end());
  for (double v : features)
    if (!std::isfinite(v)) throw InputShapeError("feature vector contains a non-finite value");
  if (const auto& norm = net.norm_stats()) {
    for (std::size_t j = 0; j < m; ++j) features[j] = (features[j] - (*norm)[j].mean) / (*norm)[j].stddev;
  }

  const auto& neurons = net.neurons();
  std::vector<double> values(net.output() + 1);
  auto value_of = [&](const InputRef& in) {
    return in.is_feature() ? features[in.index] : values[in.index];
  };
  // Neurons past the output cannot feed it.
  for (std::size_t i = 0; i <= net.output(); ++i) {
    const Neuron& n = neurons[i];
    values[i] = eval_transfer(value_of(n.inputs[0]), value_of(n.inputs[1]), n.weights);
  }
  return values[net.output()];
}

int classify(const PolyNetwork& net, std::span<const double> x) {
  return eval_network(net, x) >= net.threshold() ? 1 : 0;
}

}  // namespace pnet
