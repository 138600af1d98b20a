#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pnet/feature_table.hpp"
#include "pnet/fitting.hpp"
#include "pnet/model.hpp"

namespace pnet {

enum class Strategy { layered, incremental };
enum class FitterKind { projection, least_squares };

/// Which refs a layer r >= 2 may pair in layered growth.
enum class LayerLinks {
  strict,       // only the F survivors of layer r-1
  with_inputs,  // survivors with each other and with every input feature
};

/// Initial pool of the incremental strategy.
enum class IncrementalPool {
  features,   // the m input features, scored by an affine least-squares fit
  survivors,  // the F best first-layer neurons
};

const char* to_string(Strategy s) noexcept;
const char* to_string(FitterKind f) noexcept;
const char* to_string(LayerLinks l) noexcept;
const char* to_string(IncrementalPool p) noexcept;

struct GrowthParams {
  Strategy strategy = Strategy::layered;
  FitterKind fitter = FitterKind::projection;
  std::size_t F = 0;  // 0 selects default_F(m)
  double Delta = 1e-4;
  int fail_budget = 7;
  int max_layers = 10;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  LayerLinks links = LayerLinks::strict;
  IncrementalPool pool = IncrementalPool::features;
  bool keep_fit_traces = false;

  void validate() const;
};

/// round(0.4 * C(m, 2)), at least 1.
std::size_t default_F(std::size_t m);

/// All unordered pairs (i < j) of `pool`, in lexicographic order.
std::vector<std::pair<InputRef, InputRef>> generate_layer_candidates(std::span<const InputRef> pool);

struct Candidate {
  std::pair<InputRef, InputRef> inputs;
  Weights4 weights;
  double criterion = 0.0;
  std::size_t creation_index = 0;
};

/// The F candidates with the smallest criterion, ascending; ties go to the
/// smaller creation_index.
std::vector<Candidate> select_best(std::span<const Candidate> candidates, std::size_t F);

/// Incremental acceptance rule.
constexpr bool accepts(double mu_new, double mu_parent1, double mu_parent2) noexcept {
  return mu_new < (mu_parent1 < mu_parent2 ? mu_parent1 : mu_parent2);
}

struct AttemptRecord {
  std::size_t attempt = 0;
  std::size_t parent1 = 0, parent2 = 0;  // pool positions
  double mu_new = 0.0, mu_parent1 = 0.0, mu_parent2 = 0.0;
  bool accepted = false;
  std::optional<std::size_t> pool_position;  // of the new member when accepted
};

struct GrowthTrace {
  Strategy strategy = Strategy::layered;

  // layered: minimal criterion and candidate count of layers 1..r*
  std::vector<double> layer_min_criterion;
  std::vector<std::size_t> layer_candidates;
  int final_layer = 0;  // r*
  bool stopped_by_rule = false;

  // incremental: the initial pool, then every attempt in order
  std::vector<std::string> pool_labels;
  std::vector<double> pool_criteria;
  std::size_t initial_pool = 0;
  std::vector<AttemptRecord> attempts;
  bool stopped_by_budget = false;

  /// Fit traces of the returned network's neurons, in network order.
  std::vector<FitTrace> neuron_traces;
  /// Every projection fit of the run, in creation order (keep_fit_traces only).
  std::vector<FitTrace> fit_traces;
  std::size_t fits = 0;
};

struct GrowthResult {
  PolyNetwork network;
  GrowthTrace trace;
};

enum class SplitMode { stratified, interleaved, random };
const char* to_string(SplitMode m) noexcept;

struct RowSplit {
  std::vector<std::size_t> train;  // D_A
  std::vector<std::size_t> valid;  // D_B
};

/// Partitions rows 0..n-1 with |D_B| ~= ratio * n. Stratified mode needs labels
/// and keeps the class proportions; interleaved alternates rows with a fixed
/// stride pattern; random shuffles.
RowSplit make_split(std::size_t n, double ratio, std::uint64_t seed, SplitMode mode,
                    std::span<const int> labels = {});

GrowthResult grow_layered(const FeatureTable& data, std::span<const double> targets,
                          const RowSplit& split, const GrowthParams& growth,
                          const FitParams& fit);

GrowthResult grow_incremental(const FeatureTable& data, std::span<const double> targets,
                              const RowSplit& split, const GrowthParams& growth,
                              const FitParams& fit);

/// Dispatches on growth.strategy.
GrowthResult grow(const FeatureTable& data, std::span<const double> targets,
                  const RowSplit& split, const GrowthParams& growth, const FitParams& fit);

/// Trains on the table's 0/1 labels with a stratified split seeded by growth.seed.
GrowthResult grow(const FeatureTable& data, const GrowthParams& growth, const FitParams& fit);

}  // namespace pnet
