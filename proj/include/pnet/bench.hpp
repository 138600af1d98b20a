#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "json.hpp"

#include "pnet/growth.hpp"
#include "pnet/metrics.hpp"
#include "pnet/synth.hpp"

namespace pnet::bench {

/// A planted-network recovery experiment: train on noisy regression targets
/// from `generator`, classify fresh rows at the training median.
struct RecoverySetup {
  PolyNetwork generator;
  std::size_t n_train = 1000;
  std::size_t n_test = 1000;
  Noise noise{NoiseFamily::gaussian, 0.05};
  GrowthParams growth;
  FitParams fit;
};

/// The 3-neuron chain over 76 features, layered growth with F = 1.
RecoverySetup layered_recovery_setup();
/// The 7-neuron network over 36 band-power features, incremental growth.
RecoverySetup incremental_recovery_setup();

struct RecoveryOutcome {
  PolyNetwork network;
  GrowthTrace trace;
  Confusion test;
  double threshold = 0.0;
  std::vector<std::size_t> informative;  // features the generator reads
  double seconds = 0.0;
};

RecoveryOutcome run_recovery(const RecoverySetup& setup, std::uint64_t seed, unsigned threads = 1);

/// Equal-variance noise of the given family (student-t uses nu = 3).
Noise noise_with_std(NoiseFamily family, double std);

nlohmann::json to_json(const RunStats& s);

struct SuiteOptions {
  std::size_t runs = 30;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  Interval convention = Interval::spread;
};

/// Learning curves of the projection rule for chi in {1.25, 1.5, 1.75, 2.0}.
nlohmann::json convergence_suite(const SuiteOptions& opt, int curve_steps = 25);

/// Validation MSE of projection and least squares under three noise families.
nlohmann::json robustness_suite(const SuiteOptions& opt, double noise_std = 0.5,
                                const FitParams& fit = {});

/// Planted-model accuracy of both recovery setups.
nlohmann::json recovery_suite(const SuiteOptions& opt);

}  // namespace pnet::bench
