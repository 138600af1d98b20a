#include "pnet/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pnet/error.hpp"
#include "pnet/rng.hpp"

namespace pnet::bench {

using nlohmann::json;

RecoverySetup layered_recovery_setup() {
  RecoverySetup s{paper_alzheimer_model(), 1000, 1000, {NoiseFamily::gaussian, 0.05}, {}, {}};
  s.growth.strategy = Strategy::layered;
  s.growth.F = 1;
  s.growth.links = LayerLinks::with_inputs;
  s.growth.Delta = 0.5;
  s.fit.delta = 1e-5;
  s.fit.standardize = true;
  return s;
}

RecoverySetup incremental_recovery_setup() {
  RecoverySetup s{paper_sleep_model(), 8000, 1000, {NoiseFamily::gaussian, 0.05}, {}, {}};
  s.growth.strategy = Strategy::incremental;
  s.growth.pool = IncrementalPool::survivors;
  s.growth.F = 240;
  s.growth.fail_budget = 7;
  s.fit.delta = 1.5e-4;
  s.fit.standardize = true;
  return s;
}

RecoveryOutcome run_recovery(const RecoverySetup& setup, std::uint64_t seed, unsigned threads) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t m = setup.generator.feature_count();
  SynthSpec train_spec{setup.generator, m, setup.n_train, setup.noise, {}, derive_seed(seed, 1)};
  const SynthData train = gen_dataset(train_spec);
  SynthSpec test_spec{setup.generator, m, setup.n_test, setup.noise,
                      {LabelRuleKind::fixed, train.threshold}, derive_seed(seed, 2)};
  const SynthData test = gen_dataset(test_spec);

  GrowthParams g = setup.growth;
  FitParams f = setup.fit;
  g.seed = seed;
  g.threads = threads;
  f.seed = seed;
  const RowSplit split = make_split(train.table.rows(), f.split_ratio, seed, SplitMode::stratified,
                                    train.table.labels());
  GrowthResult grown = grow(train.table, train.target, split, g, f);

  RecoveryOutcome out{grown.network.with_threshold(train.threshold), std::move(grown.trace), {}, 0.0, {}, 0.0};
  out.threshold = train.threshold;
  std::vector<int> preds(test.table.rows());
  for (std::size_t i = 0; i < preds.size(); ++i) preds[i] = classify(out.network, test.table.row(i));
  out.test = confusion(test.table.labels(), preds);
  out.informative = setup.generator.used_features();
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

Noise noise_with_std(NoiseFamily family, double std) {
  Noise n{family, std};
  if (family == NoiseFamily::laplace) n.scale = std / std::sqrt(2.0);
  if (family == NoiseFamily::student_t) n.scale = std / std::sqrt(n.nu / (n.nu - 2.0));
  return n;
}

json to_json(const RunStats& s) {
  return json{{"mean", s.mean},
              {"half_width", s.half_width},
              {"runs", s.runs},
              {"convention", to_string(s.convention)},
              {"values", s.values}};
}

namespace {

double mse(const Design2& d, const Weights4& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double r = eval_transfer(d.v1[i], d.v2[i], w) - d.y[i];
    s += r * r;
  }
  return s / static_cast<double>(d.size());
}

double clean_mse(const Design2& d, const Weights4& w, const Weights4& truth) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double r = eval_transfer(d.v1[i], d.v2[i], w) - eval_transfer(d.v1[i], d.v2[i], truth);
    s += r * r;
  }
  return s / static_cast<double>(d.size());
}

}  // namespace

json convergence_suite(const SuiteOptions& opt, int curve_steps) {
  const std::vector<double> chis{1.25, 1.5, 1.75, 2.0};
  const auto seeds = run_seeds(opt.seed, opt.runs);
  json curves = json::array();
  for (double chi : chis) {
    FitParams p;
    p.chi = chi;
    std::vector<std::vector<double>> rse(seeds.size()), emse(seeds.size());
    const auto kstar = repeated_runs(
        [&](std::uint64_t s) {
          const DesignPair d = standard_neuron_task(s);
          FitParams q = p;
          q.seed = s;
          return static_cast<double>(fit_projection(d, q).trace.steps_taken);
        },
        seeds, opt.convention, opt.threads);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const DesignPair d = standard_neuron_task(seeds[i]);
      const FitTrace t = learning_curve(d, chi, curve_steps, initial_weights(seeds[i]));
      rse[i] = t.train_rse;
      emse[i] = t.valid_mse;
    }
    std::vector<double> mean_rse(curve_steps + 1, 0.0), mean_emse(curve_steps + 1, 0.0);
    for (std::size_t i = 0; i < seeds.size(); ++i)
      for (int k = 0; k <= curve_steps; ++k) {
        mean_rse[k] += rse[i][k] / static_cast<double>(seeds.size());
        mean_emse[k] += emse[i][k] / static_cast<double>(seeds.size());
      }
    curves.push_back(json{{"chi", chi},
                          {"k_star", to_json(kstar)},
                          {"steps", curve_steps},
                          {"mean_train_rse", mean_rse},
                          {"mean_valid_mse", mean_emse}});
  }
  return json{{"suite", "convergence"},
              {"runs", opt.runs},
              {"seed", opt.seed},
              {"task", {{"rows", 500}, {"noise", "gaussian"}, {"noise_std", 0.1}, {"split", 0.5}}},
              {"curves", curves}};
}

json robustness_suite(const SuiteOptions& opt, double noise_std, const FitParams& fit) {
  fit.validate();
  const auto seeds = run_seeds(opt.seed, opt.runs);
  json rows = json::array();
  for (NoiseFamily fam : {NoiseFamily::gaussian, NoiseFamily::laplace, NoiseFamily::student_t}) {
    const Noise noise = noise_with_std(fam, noise_std);
    for (FitterKind fitter : {FitterKind::projection, FitterKind::least_squares}) {
      const auto stats = repeated_runs(
          [&](std::uint64_t s) {
            const DesignPair d = neuron_task(500, kStandardNeuronWeights, noise, fit.split_ratio, s);
            Weights4 w;
            if (fitter == FitterKind::projection) {
              FitParams q = fit;
              q.seed = s;
              w = fit_projection(d, q).weights;
            } else {
              w = fit_least_squares(d.train.v1, d.train.v2, d.train.y);
            }
            return std::vector<double>{mse(d.valid, w), clean_mse(d.valid, w, kStandardNeuronWeights)};
          },
          seeds, opt.convention, opt.threads);
      rows.push_back(json{{"noise", to_string(fam)},
                          {"fitter", to_string(fitter)},
                          {"valid_mse", to_json(stats[0])},
                          {"clean_mse", to_json(stats[1])}});
    }
  }
  return json{{"suite", "robustness"},
              {"runs", opt.runs},
              {"seed", opt.seed},
              {"noise_std", noise_std},
              {"chi", fit.chi},
              {"delta", fit.delta},
              {"rows", rows}};
}

json recovery_suite(const SuiteOptions& opt) {
  const auto seeds = run_seeds(opt.seed, opt.runs);
  json results = json::array();
  const std::pair<const char*, RecoverySetup> setups[] = {
      {"layered", layered_recovery_setup()}, {"incremental", incremental_recovery_setup()}};
  for (const auto& [name, setup] : setups) {
    const auto stats = repeated_runs(
        [&](std::uint64_t s) {
          const auto r = run_recovery(setup, s);
          return std::vector<double>{sensitivity(r.test), specificity(r.test), performance(r.test),
                                     static_cast<double>(r.network.neurons().size())};
        },
        seeds, opt.convention, opt.threads);
    results.push_back(json{{"strategy", name},
                           {"generator_neurons", setup.generator.neurons().size()},
                           {"features", setup.generator.feature_count()},
                           {"train_rows", setup.n_train},
                           {"test_rows", setup.n_test},
                           {"sensitivity", to_json(stats[0])},
                           {"specificity", to_json(stats[1])},
                           {"performance", to_json(stats[2])},
                           {"neurons", to_json(stats[3])}});
  }
  return json{{"suite", "recovery"}, {"runs", opt.runs}, {"seed", opt.seed}, {"results", results}};
}

}  // namespace pnet::bench
