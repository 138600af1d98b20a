#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pnet/model.hpp"

namespace pnet {

/// Knobs of the projection learning rule.
struct FitParams {
  double chi = 1.9;          // learning rate, (0, 2]
  double delta = 0.015;      // stop once the validation MSE improves by less than this
  double split_ratio = 0.5;  // n_B / n used when splitting rows into train/validation
  int max_steps = 200;
  std::uint64_t seed = 0;    // initial weights ~ N(0, 1)
  /// Run the iteration in per-input standardized coordinates and map the
  /// weights back afterwards. The raw-coordinate rule converges slowly when
  /// an input has a large mean relative to its spread (typical for neuron
  /// outputs); the returned weights are always raw-coordinate weights.
  bool standardize = false;

  void validate() const;
};

/// Two input columns and a target over the same rows.
struct Design2 {
  std::vector<double> v1, v2, y;
  std::size_t size() const noexcept { return y.size(); }
};

/// Training (A) and validation (B) rows of one neuron's inputs.
struct DesignPair {
  Design2 train;
  Design2 valid;

  void validate() const;
};

enum class StopReason { delta_rule, step_cap };
const char* to_string(StopReason r) noexcept;

/// Learning curve of one projection fit.
///
/// Entry k of each vector describes the accepted weights after k updates.
/// `steps_taken` counts every attempted update. When the last attempted update
/// did not lower the validation error it is not applied: its error goes to
/// `rejected_valid_mse` and the vectors hold `steps_taken` entries instead of
/// `steps_taken + 1`.
struct FitTrace {
  std::vector<double> valid_mse;
  std::vector<double> train_rse;
  std::vector<Weights4> weights;
  int steps_taken = 0;
  StopReason stop_reason = StopReason::delta_rule;
  std::optional<double> rejected_valid_mse;
};

struct ProjectionFit {
  Weights4 weights;
  FitTrace trace;
};

/// Row of the expanded design: [1, v1, v2, v1*v2].
std::array<double, 4> expand_row(double v1, double v2) noexcept;

/// Standard normal initial weights drawn from `seed`.
Weights4 initial_weights(std::uint64_t seed);

/// Batch projection fit: w <- w - chi * ||Phi_A||_F^-2 * Phi_A^T * eta_A, stopping
/// when e_B(k-1) - e_B(k) < delta or after max_steps updates.
ProjectionFit fit_projection(const DesignPair& data, const FitParams& params);
ProjectionFit fit_projection(const DesignPair& data, const FitParams& params,
                             const Weights4& initial);

/// Runs exactly `steps` raw-coordinate updates with no stopping rule.
FitTrace learning_curve(const DesignPair& data, double chi, int steps, const Weights4& initial);

inline constexpr double kLeastSquaresDamping = 1e-8;

/// Minimizes sum (g(v_k; w) - y_k)^2 through the damped normal equations
/// (Phi^T Phi + eps I) w = Phi^T y.
Weights4 fit_least_squares(std::span<const double> v1, std::span<const double> v2,
                           std::span<const double> y, double damping = kLeastSquaresDamping);

/// Damped least-squares fit of y ~ a + b*x; returns {a, b}.
std::array<double, 2> fit_affine_least_squares(std::span<const double> x,
                                               std::span<const double> y,
                                               double damping = kLeastSquaresDamping);

/// Sum of squared residuals over all rows.
double exterior_criterion(std::span<const double> predictions, std::span<const double> targets);

}  // namespace pnet
