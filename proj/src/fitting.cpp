#include "pnet/fitting.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "pnet/error.hpp"
#include "pnet/rng.hpp"

namespace pnet {

void FitParams::validate() const {
  if (!(chi > 0.0 && chi <= 2.0)) throw InvalidArgument("chi must lie in (0, 2]");
  if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
  if (!(split_ratio > 0.0 && split_ratio < 1.0))
    throw InvalidArgument("split ratio must lie in (0, 1)");
  if (max_steps < 1) throw InvalidArgument("max_steps must be at least 1");
}

namespace {

void check_design(const Design2& d, const char* which) {
  if (d.size() == 0) throw InputShapeError(std::string(which) + " design is empty");
  if (d.v1.size() != d.size() || d.v2.size() != d.size())
    throw InputShapeError(std::string(which) + " design columns differ in length");
}

}  // namespace

void DesignPair::validate() const {
  check_design(train, "training");
  check_design(valid, "validation");
}

const char* to_string(StopReason r) noexcept {
  return r == StopReason::delta_rule ? "delta-rule" : "step-cap";
}

std::array<double, 4> expand_row(double v1, double v2) noexcept {
  return {1.0, v1, v2, v1 * v2};
}

Weights4 initial_weights(std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Weights4 w;
  for (auto& x : w.w) x = normal(rng);
  return w;
}

namespace {

// Affine change of input coordinates v = mean + scale * u.
struct Coords {
  double m1 = 0.0, s1 = 1.0, m2 = 0.0, s2 = 1.0;

  // Weights acting on u -> weights acting on v.
  Weights4 to_raw(const Weights4& a) const {
    const double c = a[3] / (s1 * s2);
    Weights4 w;
    w[3] = c;
    w[1] = a[1] / s1 - c * m2;
    w[2] = a[2] / s2 - c * m1;
    w[0] = a[0] - a[1] * m1 / s1 - a[2] * m2 / s2 + c * m1 * m2;
    return w;
  }

  Weights4 from_raw(const Weights4& w) const {
    Weights4 a;
    a[0] = w[0] + w[1] * m1 + w[2] * m2 + w[3] * m1 * m2;
    a[1] = s1 * (w[1] + w[3] * m2);
    a[2] = s2 * (w[2] + w[3] * m1);
    a[3] = w[3] * s1 * s2;
    return a;
  }
};

std::pair<double, double> mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

// Expanded design stored column-wise for the inner loops.
struct Expanded {
  std::vector<double> c1, c2, c3;  // column 0 is all ones
  const std::vector<double>* y = nullptr;

  Expanded(const Design2& d, const Coords& k) : y(&d.y) {
    const std::size_t n = d.size();
    c1.resize(n);
    c2.resize(n);
    c3.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      c1[i] = (d.v1[i] - k.m1) / k.s1;
      c2[i] = (d.v2[i] - k.m2) / k.s2;
      c3[i] = c1[i] * c2[i];
    }
  }

  std::size_t size() const { return c1.size(); }

  double residual(std::size_t i, const Weights4& w) const {
    double g = w[0];
    g += w[1] * c1[i];
    g += w[2] * c2[i];
    g += w[3] * c3[i];
    return g - (*y)[i];
  }

  double sse(const Weights4& w) const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      const double r = residual(i, w);
      s += r * r;
    }
    return s;
  }

  double frobenius2() const {
    double s = static_cast<double>(size());
    for (std::size_t i = 0; i < size(); ++i) s += c1[i] * c1[i] + c2[i] * c2[i] + c3[i] * c3[i];
    return s;
  }

  // One projection update; also returns the training SSE at `w` before the step.
  Weights4 step(const Weights4& w, double scale, double* sse_before) const {
    double g0 = 0.0, g1 = 0.0, g2 = 0.0, g3 = 0.0, s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      const double r = residual(i, w);
      s += r * r;
      g0 += r;
      g1 += c1[i] * r;
      g2 += c2[i] * r;
      g3 += c3[i] * r;
    }
    if (sse_before) *sse_before = s;
    Weights4 out = w;
    out[0] -= scale * g0;
    out[1] -= scale * g1;
    out[2] -= scale * g2;
    out[3] -= scale * g3;
    return out;
  }
};

Coords choose_coords(const DesignPair& data, bool standardize) {
  Coords k;
  if (!standardize) return k;
  auto [m1, s1] = mean_std(data.train.v1);
  auto [m2, s2] = mean_std(data.train.v2);
  // Constant columns keep raw coordinates; the bias column already spans them.
  if (s1 > 0.0 && std::isfinite(s1)) k.m1 = m1, k.s1 = s1;
  if (s2 > 0.0 && std::isfinite(s2)) k.m2 = m2, k.s2 = s2;
  return k;
}

ProjectionFit run_projection(const DesignPair& data, const FitParams& params,
                             const Weights4& initial_u, const Coords& coords) {
  const Expanded train(data.train, coords);
  const Expanded valid(data.valid, coords);
  const double norm2 = train.frobenius2();
  if (!(norm2 > 0.0) || !std::isfinite(norm2))
    throw DegenerateDesignError("training design has zero or non-finite Frobenius norm");
  const double scale = params.chi / norm2;
  const double inv_nb = 1.0 / static_cast<double>(valid.size());

  FitTrace trace;
  auto record = [&](const Weights4& a, double eb, double rse) {
    trace.valid_mse.push_back(eb);
    trace.train_rse.push_back(rse);
    trace.weights.push_back(coords.to_raw(a));
  };

  Weights4 w = initial_u;
  double eb_prev = valid.sse(w) * inv_nb;
  double rse = 0.0;
  Weights4 next = train.step(w, scale, &rse);
  record(w, eb_prev, rse);

  trace.stop_reason = StopReason::step_cap;
  for (int k = 1; k <= params.max_steps; ++k) {
    trace.steps_taken = k;
    const double eb = valid.sse(next) * inv_nb;
    if (!std::isfinite(eb)) throw DegenerateDesignError("projection update diverged");
    const bool improved = eb < eb_prev;
    const bool stop = eb_prev - eb < params.delta;
    if (improved) {
      w = next;
      eb_prev = eb;
      next = train.step(w, scale, &rse);
      record(w, eb, rse);
    } else {
      trace.rejected_valid_mse = eb;
    }
    if (stop) {
      trace.stop_reason = StopReason::delta_rule;
      break;
    }
  }
  return {coords.to_raw(w), std::move(trace)};
}

}  // namespace

ProjectionFit fit_projection(const DesignPair& data, const FitParams& params) {
  params.validate();
  data.validate();
  const Coords coords = choose_coords(data, params.standardize);
  return run_projection(data, params, initial_weights(params.seed), coords);
}

ProjectionFit fit_projection(const DesignPair& data, const FitParams& params,
                             const Weights4& initial) {
  params.validate();
  data.validate();
  if (!initial.finite()) throw InputShapeError("initial weights must be finite");
  const Coords coords = choose_coords(data, params.standardize);
  return run_projection(data, params, coords.from_raw(initial), coords);
}

FitTrace learning_curve(const DesignPair& data, double chi, int steps, const Weights4& initial) {
  data.validate();
  if (!(chi > 0.0 && chi <= 2.0)) throw InvalidArgument("chi must lie in (0, 2]");
  if (steps < 0) throw InvalidArgument("steps must be non-negative");
  const Coords raw;
  const Expanded train(data.train, raw);
  const Expanded valid(data.valid, raw);
  const double norm2 = train.frobenius2();
  if (!(norm2 > 0.0) || !std::isfinite(norm2))
    throw DegenerateDesignError("training design has zero or non-finite Frobenius norm");
  const double inv_nb = 1.0 / static_cast<double>(valid.size());

  FitTrace trace;
  trace.stop_reason = StopReason::step_cap;
  Weights4 w = initial;
  for (int k = 0;; ++k) {
    double rse = 0.0;
    Weights4 next = train.step(w, chi / norm2, &rse);
    trace.valid_mse.push_back(valid.sse(w) * inv_nb);
    trace.train_rse.push_back(rse);
    trace.weights.push_back(w);
    if (k == steps) break;
    w = next;
  }
  trace.steps_taken = steps;
  return trace;
}

Weights4 fit_least_squares(std::span<const double> v1, std::span<const double> v2,
                           std::span<const double> y, double damping) {
  if (y.empty()) throw InputShapeError("least squares needs at least one row");
  if (v1.size() != y.size() || v2.size() != y.size())
    throw InputShapeError("least squares columns differ in length");
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  Eigen::Vector4d b = Eigen::Vector4d::Zero();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto r = expand_row(v1[i], v2[i]);
    const Eigen::Vector4d phi(r[0], r[1], r[2], r[3]);
    a.noalias() += phi * phi.transpose();
    b.noalias() += phi * y[i];
  }
  a.diagonal().array() += damping;
  const Eigen::Vector4d w = a.ldlt().solve(b);
  return Weights4{{w[0], w[1], w[2], w[3]}};
}

std::array<double, 2> fit_affine_least_squares(std::span<const double> x,
                                               std::span<const double> y, double damping) {
  if (y.empty()) throw InputShapeError("least squares needs at least one row");
  if (x.size() != y.size()) throw InputShapeError("least squares columns differ in length");
  double n = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    n += 1.0;
    sx += x[i];
    sxx += x[i] * x[i];
    sy += y[i];
    sxy += x[i] * y[i];
  }
  Eigen::Matrix2d a;
  a << n + damping, sx, sx, sxx + damping;
  const Eigen::Vector2d sol = a.ldlt().solve(Eigen::Vector2d(sy, sxy));
  return {sol[0], sol[1]};
}

double exterior_criterion(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size())
    throw InputShapeError("predictions and targets differ in length");
  if (predictions.empty()) throw InputShapeError("criterion needs at least one row");
  double s = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double r = predictions[i] - targets[i];
    s += r * r;
  }
  return s;
}

}  // namespace pnet
