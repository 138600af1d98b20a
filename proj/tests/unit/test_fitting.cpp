#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "pnet/error.hpp"
#include "pnet/fitting.hpp"
#include "pnet/synth.hpp"

using namespace pnet;

namespace {

double linf(const Weights4& a, const Weights4& b) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double l2(const Weights4& a, const Weights4& b) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Textbook projection step in long double: build Phi row by row, form
// eta = Phi w - y, then w - chi / ||Phi||_F^2 * Phi^T eta.
Weights4 oracle_step(const Design2& d, const Weights4& w, double chi) {
  long double norm2 = 0, g[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < d.size(); ++i) {
    const long double phi[4] = {1.0L, d.v1[i], d.v2[i], static_cast<long double>(d.v1[i]) * d.v2[i]};
    long double eta = -static_cast<long double>(d.y[i]);
    for (int j = 0; j < 4; ++j) {
      eta += phi[j] * w[j];
      norm2 += phi[j] * phi[j];
    }
    for (int j = 0; j < 4; ++j) g[j] += phi[j] * eta;
  }
  Weights4 out;
  for (int j = 0; j < 4; ++j) out[j] = static_cast<double>(w[j] - chi / norm2 * g[j]);
  return out;
}

// Solves a 4x4 system by Gaussian elimination with partial pivoting.
std::array<long double, 4> solve4(std::array<std::array<long double, 5>, 4> m) {
  for (int c = 0; c < 4; ++c) {
    int p = c;
    for (int r = c + 1; r < 4; ++r)
      if (std::abs(m[r][c]) > std::abs(m[p][c])) p = r;
    std::swap(m[c], m[p]);
    for (int r = 0; r < 4; ++r) {
      if (r == c) continue;
      const long double f = m[r][c] / m[c][c];
      for (int k = c; k < 5; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return {m[0][4] / m[0][0], m[1][4] / m[1][1], m[2][4] / m[2][2], m[3][4] / m[3][3]};
}

Design2 planted(std::size_t n, const Weights4& w, std::uint64_t seed, double noise = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Design2 d;
  for (std::size_t i = 0; i < n; ++i) {
    const double v1 = g(rng), v2 = g(rng);
    d.v1.push_back(v1);
    d.v2.push_back(v2);
    d.y.push_back(eval_transfer(v1, v2, w) + noise * g(rng));
  }
  return d;
}

void check_trace_shape(const FitTrace& t, double delta) {
  const std::size_t n = t.valid_mse.size();
  REQUIRE(n >= 1);
  CHECK(t.train_rse.size() == n);
  CHECK(t.weights.size() == n);
  CHECK(static_cast<std::size_t>(t.steps_taken) == n - 1 + (t.rejected_valid_mse ? 1 : 0));
  for (std::size_t k = 1; k < n; ++k) CHECK(t.valid_mse[k] < t.valid_mse[k - 1]);
  if (t.stop_reason == StopReason::delta_rule) {
    const bool accepted_last = !t.rejected_valid_mse;
    const std::size_t gated = accepted_last ? n - 1 : n;
    for (std::size_t k = 1; k < gated; ++k) CHECK(t.valid_mse[k - 1] - t.valid_mse[k] >= delta);
    if (accepted_last) {
      REQUIRE(n >= 2);
      CHECK(t.valid_mse[n - 2] - t.valid_mse[n - 1] < delta);
    } else {
      CHECK(*t.rejected_valid_mse >= t.valid_mse[n - 1]);
    }
  }
}

}  // namespace

TEST_CASE("expand_row examples") {
  CHECK(expand_row(0, 0) == std::array<double, 4>{1, 0, 0, 0});
  CHECK(expand_row(2, 3) == std::array<double, 4>{1, 2, 3, 6});
  CHECK(expand_row(-1, -1) == std::array<double, 4>{1, -1, -1, 1});
}

TEST_CASE("single projection step on one row") {
  DesignPair d{{{1.0}, {0.0}, {1.0}}, {{1.0}, {0.0}, {1.0}}};
  const FitTrace t = learning_curve(d, 1.0, 1, Weights4{});
  REQUIRE(t.weights.size() == 2);
  CHECK(t.weights[1] == Weights4{{0.5, 0.5, 0.0, 0.0}});
  CHECK(eval_transfer(1.0, 0.0, t.weights[1]) == 1.0);
  CHECK(t.train_rse[0] == 1.0);
  CHECK(t.train_rse[1] == 0.0);
}

TEST_CASE("projection steps agree with a long-double oracle") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Design2 train = planted(37 + seed, Weights4{{0.4, -1.0, 0.2, 0.7}}, seed, 0.3);
    DesignPair d{train, planted(10, Weights4{}, seed + 100)};
    const double chi = 0.25 + 0.0875 * static_cast<double>(seed);
    const Weights4 w0 = initial_weights(seed);
    const FitTrace t = learning_curve(d, chi, 6, w0);
    Weights4 w = w0;
    for (int k = 1; k <= 6; ++k) {
      w = oracle_step(train, w, chi);
      CHECK(linf(t.weights[k], w) <= 1e-12);
    }
  }
}

TEST_CASE("noise-free planted weights are recovered") {
  const Weights4 truth{{0.3, -0.2, 0.5, 0.1}};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DesignPair d = neuron_task(200, truth, Noise{NoiseFamily::gaussian, 0.0}, 0.5, seed);
    FitParams p;
    p.chi = 1.9;
    p.delta = 1e-12;
    p.max_steps = 2000;
    p.seed = seed;
    const ProjectionFit fit = fit_projection(d, p);
    CHECK(linf(fit.weights, truth) <= 1e-3);
    check_trace_shape(fit.trace, p.delta);
  }
}

TEST_CASE("a consistent starting point is a fixed point") {
  const Weights4 truth{{0.3, -0.2, 0.5, 0.1}};
  const DesignPair d = neuron_task(100, truth, Noise{NoiseFamily::gaussian, 0.0}, 0.5, 4);
  FitParams p;
  const ProjectionFit fit = fit_projection(d, p, truth);
  CHECK(fit.trace.steps_taken == 1);
  CHECK(linf(fit.weights, truth) <= 1e-15);
  CHECK(fit.trace.weights.size() == 1);
  CHECK(fit.trace.stop_reason == StopReason::delta_rule);
}

TEST_CASE("validation traces decrease strictly and honour the stopping rule") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    FitParams p;
    p.seed = seed;
    p.chi = 0.5 + 1.5 * static_cast<double>(seed % 4) / 3.0;
    p.delta = seed % 2 ? 0.015 : 1e-4;
    p.max_steps = seed % 5 == 0 ? 3 : 200;
    p.standardize = seed % 3 == 0;
    const ProjectionFit fit = fit_projection(standard_neuron_task(seed), p);
    check_trace_shape(fit.trace, p.delta);
    if (fit.trace.stop_reason == StopReason::step_cap) CHECK(fit.trace.steps_taken == p.max_steps);
    CHECK(fit.weights == fit.trace.weights.back());
  }
}

TEST_CASE("distance to consistent weights never grows") {
  const Weights4 truth = kStandardNeuronWeights;
  for (double chi : {0.5, 1.0, 1.5, 2.0}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const DesignPair d = neuron_task(200, truth, Noise{NoiseFamily::gaussian, 0.0}, 0.5, seed);
      const FitTrace t = learning_curve(d, chi, 30, initial_weights(seed));
      for (std::size_t k = 1; k < t.weights.size(); ++k)
        CHECK(l2(t.weights[k], truth) <= l2(t.weights[k - 1], truth));
    }
  }
}

TEST_CASE("converged projection weights match least squares") {
  int agree = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DesignPair d = standard_neuron_task(seed);
    FitParams p;
    p.delta = 1e-6;
    p.seed = seed;
    const Weights4 proj = fit_projection(d, p).weights;
    const Weights4 ls = fit_least_squares(d.train.v1, d.train.v2, d.train.y);
    agree += linf(proj, ls) <= 0.05;
  }
  CHECK(agree >= 9);
}

TEST_CASE("standardized iteration returns raw-coordinate weights") {
  // inputs with large offsets, where the raw iteration crawls
  Design2 train = planted(400, Weights4{}, 9), valid = planted(400, Weights4{}, 10);
  const Weights4 truth{{-1.0, 0.25, 0.5, -0.125}};
  for (Design2* d : {&train, &valid})
    for (std::size_t i = 0; i < d->size(); ++i) {
      d->v1[i] = 8.0 + 0.5 * d->v1[i];
      d->v2[i] = -3.0 + 2.0 * d->v2[i];
      d->y[i] = eval_transfer(d->v1[i], d->v2[i], truth);
    }
  FitParams p;
  p.delta = 1e-14;
  p.max_steps = 500;
  p.standardize = true;
  const ProjectionFit fit = fit_projection(DesignPair{train, valid}, p);
  CHECK(linf(fit.weights, truth) <= 1e-6);

  // the first recorded weights are the caller's starting point
  const Weights4 start{{0.1, 0.2, 0.3, 0.4}};
  const ProjectionFit from = fit_projection(DesignPair{train, valid}, p, start);
  CHECK(linf(from.trace.weights.front(), start) <= 1e-12);
}

TEST_CASE("projection fits are seed-deterministic") {
  const DesignPair d = standard_neuron_task(3);
  FitParams p;
  p.seed = 42;
  const ProjectionFit a = fit_projection(d, p), b = fit_projection(d, p);
  CHECK(a.weights == b.weights);
  CHECK(a.trace.valid_mse == b.trace.valid_mse);
}

TEST_CASE("projection argument errors") {
  const DesignPair d = standard_neuron_task(0);
  FitParams p;
  p.chi = 0.0;
  CHECK_THROWS_AS(fit_projection(d, p), InvalidArgument);
  p.chi = 2.5;
  CHECK_THROWS_AS(fit_projection(d, p), InvalidArgument);
  p = FitParams{};
  p.delta = 0.0;
  CHECK_THROWS_AS(fit_projection(d, p), InvalidArgument);
  p = FitParams{};
  DesignPair empty{{}, d.valid};
  CHECK_THROWS_AS(fit_projection(empty, p), InputShapeError);
  DesignPair bad = d;
  bad.train.v1[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(fit_projection(bad, p), DegenerateDesignError);
}

TEST_CASE("least squares examples") {
  const Weights4 truth{{1, 2, 3, 4}};
  const std::vector<double> v1{0, 1, 0, 1}, v2{0, 0, 1, 1};
  std::vector<double> y;
  for (int i = 0; i < 4; ++i) y.push_back(eval_transfer(v1[i], v2[i], truth));
  CHECK(linf(fit_least_squares(v1, v2, y, 0.0), truth) <= 1e-9);

  // the damped solution (A + eps I)^-1 A w*, from an independent elimination
  std::array<std::array<long double, 5>, 4> m{};
  for (int i = 0; i < 4; ++i) {
    const long double phi[4] = {1.0L, v1[i], v2[i], static_cast<long double>(v1[i]) * v2[i]};
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) m[r][c] += phi[r] * phi[c];
      m[r][4] += phi[r] * y[i];
    }
  }
  for (int r = 0; r < 4; ++r) m[r][r] += kLeastSquaresDamping;
  const auto damped = solve4(m);
  const Weights4 w = fit_least_squares(v1, v2, y);
  for (int j = 0; j < 4; ++j) CHECK(w[j] == doctest::Approx(static_cast<double>(damped[j])).epsilon(1e-12));
  CHECK(linf(w, truth) <= 1e-6);

  const std::vector<double> zeros(4, 0.0);
  CHECK(fit_least_squares(v1, v2, zeros) == Weights4{});

  const Weights4 one = fit_least_squares(std::vector<double>{0.0}, std::vector<double>{0.0},
                                         std::vector<double>{5.0});
  CHECK(one[0] == doctest::Approx(5.0 / (1.0 + kLeastSquaresDamping)).epsilon(1e-15));
  CHECK(one[1] == 0.0);
  CHECK(one[2] == 0.0);
  CHECK(one[3] == 0.0);

  CHECK_THROWS_AS(fit_least_squares(std::vector<double>{}, std::vector<double>{}, std::vector<double>{}),
                  InputShapeError);
}

TEST_CASE("least squares residual satisfies the damped normal equations") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Design2 d = planted(50 + 10 * seed, Weights4{{0.5, 1.0, -2.0, 0.3}}, seed, 1.0);
    const Weights4 w = fit_least_squares(d.v1, d.v2, d.y);
    double g[4] = {0, 0, 0, 0}, wn = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto phi = expand_row(d.v1[i], d.v2[i]);
      const double r = eval_transfer(d.v1[i], d.v2[i], w) - d.y[i];
      for (int j = 0; j < 4; ++j) g[j] += phi[j] * r;
    }
    for (int j = 0; j < 4; ++j) wn += w[j] * w[j];
    for (int j = 0; j < 4; ++j) CHECK(std::abs(g[j]) <= kLeastSquaresDamping * std::sqrt(wn) + 1e-8);
  }
}

TEST_CASE("exterior criterion") {
  CHECK(exterior_criterion(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 0.0);
  CHECK(exterior_criterion(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<double>{0, 1, 0, 1}) == 1.0);
  CHECK(exterior_criterion(std::vector<double>{0.1, 0.9}, std::vector<double>{0, 1}) ==
        doctest::Approx(0.02).epsilon(1e-14));
  CHECK_THROWS_AS(exterior_criterion(std::vector<double>{1}, std::vector<double>{1, 2}), InputShapeError);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> p(100), t(100);
  for (std::size_t i = 0; i < 100; ++i) p[i] = g(rng), t[i] = g(rng);
  const double base = exterior_criterion(p, t);
  std::vector<std::size_t> idx(100);
  for (std::size_t i = 0; i < 100; ++i) idx[i] = i;
  for (int rep = 0; rep < 10; ++rep) {
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<double> ps, ts;
    for (std::size_t i : idx) ps.push_back(p[i]), ts.push_back(t[i]);
    CHECK(exterior_criterion(ps, ts) == doctest::Approx(base).epsilon(1e-13));
  }
}
