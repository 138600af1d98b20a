#include "pnet/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pnet/bench.hpp"
#include "pnet/error.hpp"
#include "pnet/feature_table.hpp"
#include "pnet/features.hpp"
#include "pnet/growth.hpp"
#include "pnet/metrics.hpp"
#include "pnet/synth.hpp"

namespace pnet::cli {

namespace {

using nlohmann::json;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

void write_json(const std::string& path, const json& j, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-")
    out << text;
  else
    write_text(path, text);
}

template <class E>
E pick(const std::string& text, std::initializer_list<std::pair<const char*, E>> table,
       const char* what) {
  for (const auto& [name, value] : table)
    if (text == name) return value;
  throw InvalidArgument(std::string("unknown ") + what + " '" + text + "'");
}

// ---------------------------------------------------------------- extract

struct ExtractArgs {
  std::string in, out, bands = "preset:alz4", mode = "abs", taper = "rect";
  double rate = 0.0, window = 1.0, step = 0.0;
  std::vector<std::string> sums;
  std::optional<int> label;
  unsigned threads = 1;
};

std::vector<BandSpec> parse_bands(const std::string& text) {
  if (text.rfind("preset:", 0) == 0) return band_preset(text.substr(7));
  const std::string body = text.rfind('@', 0) == 0 ? read_text(text.substr(1)) : text;
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("--bands is neither a preset nor valid JSON: ") + e.what());
  }
  if (!j.is_array()) throw InvalidArgument("--bands JSON must be an array of {name, lo, hi}");
  std::vector<BandSpec> bands;
  for (const auto& b : j) {
    if (!b.is_object() || !b.contains("name") || !b.contains("lo") || !b.contains("hi") ||
        b.size() != 3)
      throw InvalidArgument("each band needs exactly the keys name, lo, hi");
    try {
      bands.push_back({b["name"].get<std::string>(), b["lo"].get<double>(), b["hi"].get<double>()});
    } catch (const json::exception&) {
      throw InvalidArgument("band entries need a string name and numeric lo/hi");
    }
  }
  return bands;
}

int cmd_extract(const ExtractArgs& a, std::ostream& out, std::ostream& err) {
  const SegmentSpec spec{a.window, a.step > 0.0 ? a.step : a.window, a.rate};
  spec.validate();
  const auto bands = parse_bands(a.bands);
  validate_bands(bands);
  ExtractOptions opt;
  opt.mode = pick<PowerMode>(a.mode, {{"abs", PowerMode::absolute},
                                      {"abs+rel", PowerMode::absolute_relative}}, "mode");
  opt.taper = pick<Taper>(a.taper, {{"rect", Taper::rect}, {"hann", Taper::hann}}, "taper");
  for (const auto& s : a.sums) opt.sums.push_back(parse_sum_channel(s));
  opt.threads = a.threads;
  if (a.label && *a.label != 0 && *a.label != 1) throw InvalidArgument("--label must be 0 or 1");

  const auto channels = read_signal_csv_file(a.in);
  ExtractResult r = extract_band_features(channels, bands, spec, opt);
  if (a.label) r.table.set_labels(std::vector<int>(r.table.rows(), *a.label));
  for (auto seg : r.undefined_segments)
    err << "warning: segment " << seg << " has zero band power; its relative powers are NaN\n";
  if (a.out.empty() || a.out == "-")
    write_csv(out, r.table);
  else
    write_csv_file(a.out, r.table);
  return ok;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string in, out, trace;
  std::string algo = "layered", fitter = "projection", split_mode = "stratified";
  std::string links = "strict", pool = "features", target;
  std::size_t F = 0;
  double Delta = 1e-4, chi = 1.9, delta = 0.015, split = 0.5;
  int max_steps = 200, max_layers = 10, fail_budget = 7;
  std::uint64_t seed = 0;
  bool standardize = false, normalize = false, all_fits = false;
  std::optional<double> threshold;
  unsigned threads = 1;
};

json trace_json(const FitTrace& t) {
  json w = json::array();
  for (const auto& x : t.weights) w.push_back(x.w);
  json j{{"valid_mse", t.valid_mse},
         {"train_rse", t.train_rse},
         {"weights", w},
         {"steps_taken", t.steps_taken},
         {"stop_reason", to_string(t.stop_reason)}};
  if (t.rejected_valid_mse) j["rejected_valid_mse"] = *t.rejected_valid_mse;
  return j;
}

json growth_trace_json(const GrowthTrace& t, const GrowthParams& g, const FitParams& f) {
  json j{{"strategy", to_string(t.strategy)},
         {"fitter", to_string(g.fitter)},
         {"params",
          {{"F", g.F},
           {"Delta", g.Delta},
           {"fail_budget", g.fail_budget},
           {"max_layers", g.max_layers},
           {"links", to_string(g.links)},
           {"pool", to_string(g.pool)},
           {"chi", f.chi},
           {"delta", f.delta},
           {"split", f.split_ratio},
           {"max_steps", f.max_steps},
           {"standardize", f.standardize},
           {"seed", g.seed}}},
         {"fits", t.fits}};
  if (t.strategy == Strategy::layered) {
    json layers = json::array();
    for (std::size_t r = 0; r < t.layer_min_criterion.size(); ++r)
      layers.push_back({{"layer", r + 1},
                        {"min_criterion", t.layer_min_criterion[r]},
                        {"candidates", t.layer_candidates[r]}});
    j["layers"] = layers;
    j["final_layer"] = t.final_layer;
    j["stopped_by_rule"] = t.stopped_by_rule;
  } else {
    json pool = json::array();
    for (std::size_t i = 0; i < t.pool_labels.size(); ++i)
      pool.push_back({{"label", t.pool_labels[i]}, {"mu", t.pool_criteria[i]}});
    json attempts = json::array();
    for (const auto& a : t.attempts) {
      json r{{"attempt", a.attempt},  {"parent1", a.parent1},       {"parent2", a.parent2},
             {"mu_new", a.mu_new},    {"mu_parent1", a.mu_parent1}, {"mu_parent2", a.mu_parent2},
             {"accepted", a.accepted}};
      if (a.pool_position) r["pool_position"] = *a.pool_position;
      attempts.push_back(r);
    }
    j["initial_pool"] = t.initial_pool;
    j["pool"] = pool;
    j["attempts"] = attempts;
    j["stopped_by_budget"] = t.stopped_by_budget;
  }
  json neurons = json::array();
  for (const auto& nt : t.neuron_traces) neurons.push_back(trace_json(nt));
  j["neuron_traces"] = neurons;
  if (!t.fit_traces.empty()) {
    json all = json::array();
    for (const auto& ft : t.fit_traces) all.push_back(trace_json(ft));
    j["fit_traces"] = all;
  }
  return j;
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  GrowthParams g;
  g.strategy = pick<Strategy>(a.algo, {{"layered", Strategy::layered},
                                       {"incremental", Strategy::incremental}}, "algorithm");
  g.fitter = pick<FitterKind>(a.fitter, {{"projection", FitterKind::projection},
                                         {"ls", FitterKind::least_squares}}, "fitter");
  g.links = pick<LayerLinks>(a.links, {{"strict", LayerLinks::strict},
                                       {"with-inputs", LayerLinks::with_inputs}}, "links");
  g.pool = pick<IncrementalPool>(a.pool, {{"features", IncrementalPool::features},
                                          {"survivors", IncrementalPool::survivors}}, "pool");
  g.F = a.F;
  g.Delta = a.Delta;
  g.fail_budget = a.fail_budget;
  g.max_layers = a.max_layers;
  g.seed = a.seed;
  g.threads = a.threads;
  g.keep_fit_traces = a.all_fits;
  FitParams f;
  f.chi = a.chi;
  f.delta = a.delta;
  f.split_ratio = a.split;
  f.max_steps = a.max_steps;
  f.seed = a.seed;
  f.standardize = a.standardize;
  const SplitMode mode = pick<SplitMode>(
      a.split_mode, {{"stratified", SplitMode::stratified},
                     {"interleaved", SplitMode::interleaved},
                     {"random", SplitMode::random}}, "split mode");
  g.validate();
  f.validate();
  if (a.threshold && !std::isfinite(*a.threshold)) throw InvalidArgument("threshold must be finite");

  FeatureTable table = read_csv_file(a.in);
  if (!table.has_labels()) throw DataError("training data needs a binary 'label' column");
  std::vector<double> y;
  if (!a.target.empty()) {
    const auto col = table.find(a.target);
    if (!col) throw DataError("no target column '" + a.target + "'");
    table = table.drop_column(*col, &y);
  } else {
    y.assign(table.labels().begin(), table.labels().end());
  }
  if (table.cols() < 2) throw DataError("training data needs at least two feature columns");

  std::optional<std::vector<NormEntry>> norm;
  if (a.normalize) {
    const NormStats stats = normalize_fit(table);
    table = normalize_apply(table, stats);
    norm = stats.entries;
  }

  const RowSplit split = make_split(table.rows(), f.split_ratio, a.seed, mode, table.labels());
  const GrowthResult r = grow(table, y, split, g, f);
  const PolyNetwork& grown = r.network;
  const PolyNetwork net(grown.feature_count(), grown.neurons(), grown.output(),
                        grown.feature_names(), norm,
                        a.threshold.value_or(PolyNetwork::default_threshold));

  const std::string model_text = render_model(net);
  if (a.out.empty() || a.out == "-")
    out << model_text;
  else
    write_text(a.out, model_text);
  const std::string trace_path =
      !a.trace.empty() ? a.trace : (a.out.empty() || a.out == "-" ? "" : a.out + ".trace.json");
  if (!trace_path.empty()) write_text(trace_path, growth_trace_json(r.trace, g, f).dump(2) + "\n");

  err << "trained " << net.neurons().size() << " neuron(s), depth " << net.depth() << ", "
      << net.used_features().size() << " input feature(s), " << r.trace.fits << " fits\n";
  return ok;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string model, in, report;
  std::optional<double> threshold;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  PolyNetwork net = parse_model(read_text(a.model));
  if (a.threshold) net = net.with_threshold(*a.threshold);
  const FeatureTable table = read_csv_file(a.in);
  if (!table.has_labels()) throw DataError("evaluation data needs a binary 'label' column");
  if (table.cols() != net.feature_count())
    throw DataError("model expects " + std::to_string(net.feature_count()) +
                    " feature columns, table has " + std::to_string(table.cols()));
  if (!net.feature_names().empty() && net.feature_names() != table.names())
    throw DataError("table column names do not match the model's feature names");

  std::vector<int> preds(table.rows());
  for (std::size_t i = 0; i < table.rows(); ++i) preds[i] = classify(net, table.row(i));
  const Confusion c = confusion(table.labels(), preds);

  json report{{"rows", table.rows()},
              {"threshold", net.threshold()},
              {"confusion", {{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}}}};
  const std::pair<const char*, double (*)(const Confusion&)> metrics[] = {
      {"sensitivity", sensitivity}, {"specificity", specificity}, {"performance", performance}};
  for (const auto& [name, fn] : metrics) {
    try {
      report[name] = fn(c);
    } catch (const UndefinedMetric& e) {
      report[name] = json{{"error", e.what()}};
      err << "warning: " << e.what() << "\n";
    }
  }
  if (!a.report.empty()) write_json(a.report, report, out);
  if (a.report != "-") out << report.dump(2) << "\n";
  return ok;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string model = "paper-alz", out, sidecar, model_out, noise = "gaussian";
  std::string label_rule = "median";
  std::size_t m_total = 0, rows = 1000;
  double scale = 0.1, nu = 3.0;
  std::uint64_t seed = 0;
  bool emit_target = false, emit_clean = false;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream&) {
  Noise noise{parse_noise_family(a.noise), a.scale, a.nu};
  noise.validate();
  LabelRule rule;
  if (a.label_rule == "median") {
    rule.kind = LabelRuleKind::median;
  } else if (a.label_rule.rfind("fixed:", 0) == 0) {
    rule.kind = LabelRuleKind::fixed;
    try {
      std::size_t used = 0;
      const std::string num = a.label_rule.substr(6);
      rule.threshold = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw InvalidArgument("bad --label-rule '" + a.label_rule + "'");
    }
  } else {
    throw InvalidArgument("--label-rule must be 'median' or 'fixed:<real>'");
  }
  if (a.rows < 1) throw InvalidArgument("--rows must be at least 1");

  PolyNetwork gen = a.model == "paper-alz"     ? paper_alzheimer_model()
                    : a.model == "paper-sleep" ? paper_sleep_model()
                                               : parse_model(read_text(a.model));
  const std::size_t m = a.m_total ? a.m_total : gen.feature_count();
  SynthSpec spec{gen, m, a.rows, noise, rule, a.seed};
  spec.validate();
  SynthData d = gen_dataset(spec);

  FeatureTable table = d.table;
  if (a.emit_target || a.emit_clean) {
    std::vector<std::string> names = table.names();
    if (a.emit_target) names.push_back("target");
    if (a.emit_clean) names.push_back("clean");
    FeatureTable wide(names, table.rows());
    for (std::size_t c = 0; c < table.cols(); ++c) {
      auto src = table.column(c);
      std::copy(src.begin(), src.end(), wide.column(c).begin());
    }
    std::size_t c = table.cols();
    if (a.emit_target) std::copy(d.target.begin(), d.target.end(), wide.column(c++).begin());
    if (a.emit_clean) std::copy(d.clean.begin(), d.clean.end(), wide.column(c).begin());
    wide.set_labels(table.labels());
    table = std::move(wide);
  }

  const PolyNetwork planted = gen.with_threshold(d.threshold);
  std::size_t positives = 0;
  for (int l : d.table.labels()) positives += static_cast<std::size_t>(l);
  json side{{"generator", render_model(planted)},
            {"informative", gen.used_features()},
            {"m_total", m},
            {"rows", a.rows},
            {"noise",
             {{"family", to_string(noise.family)},
              {"scale", noise.scale},
              {"nu", noise.nu},
              {"std", noise.theoretical_std()}}},
            {"label_rule",
             {{"kind", rule.kind == LabelRuleKind::median ? "median" : "fixed"},
              {"threshold", d.threshold}}},
            {"positives", positives},
            {"seed", a.seed},
            {"columns", table.names()}};

  if (a.out.empty() || a.out == "-") {
    write_csv(out, table);
  } else {
    write_csv_file(a.out, table);
  }
  const std::string side_path =
      !a.sidecar.empty() ? a.sidecar : (a.out.empty() || a.out == "-" ? "" : a.out + ".json");
  if (!side_path.empty()) write_text(side_path, side.dump(2) + "\n");
  if (!a.model_out.empty()) write_text(a.model_out, render_model(planted));
  return ok;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string suite, out, convention = "spread";
  std::size_t runs = 30;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  int steps = 25;
  double noise_std = 0.5, chi = 1.9, delta = 0.015;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream&) {
  bench::SuiteOptions opt;
  opt.runs = a.runs;
  opt.seed = a.seed;
  opt.threads = a.threads;
  opt.convention = pick<Interval>(a.convention, {{"spread", Interval::spread},
                                                 {"stderr", Interval::standard_error}}, "convention");
  if (a.runs < 1) throw InvalidArgument("--runs must be at least 1");
  json j;
  if (a.suite == "convergence") {
    if (a.steps < 1 || a.steps > 200) throw InvalidArgument("--steps must lie in [1, 200]");
    j = bench::convergence_suite(opt, a.steps);
  } else if (a.suite == "robustness") {
    if (!(a.noise_std > 0.0)) throw InvalidArgument("--noise-std must be positive");
    FitParams f;
    f.chi = a.chi;
    f.delta = a.delta;
    j = bench::robustness_suite(opt, a.noise_std, f);
  } else if (a.suite == "recovery") {
    j = bench::recovery_suite(opt);
  } else {
    throw InvalidArgument("unknown suite '" + a.suite + "'");
  }
  write_json(a.out, j, out);
  return ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polynomial-network induction with a projection learning rule"};
  app.name("pnet");
  app.require_subcommand(1);

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Band-power features from a raw multichannel CSV");
  extract->add_option("input", ex.in, "Raw signal CSV (header of channel names)")->required();
  extract->add_option("--rate", ex.rate, "Sampling rate in Hz")->required();
  extract->add_option("--window", ex.window, "Segment length in seconds");
  extract->add_option("--step", ex.step, "Segment step in seconds (default: window)");
  extract->add_option("--bands", ex.bands, "preset:alz4, preset:neo6, a JSON array or @file.json");
  extract->add_option("--mode", ex.mode, "abs or abs+rel");
  extract->add_option("--sum-channels", ex.sums, "A+B or A+B=label; repeatable");
  extract->add_option("--taper", ex.taper, "rect or hann");
  extract->add_option("--label", ex.label, "Label (0 or 1) for every segment");
  extract->add_option("--threads", ex.threads, "Worker threads");
  extract->add_option("-o,--out", ex.out, "Output feature CSV (default stdout)");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Grow a polynomial network from a feature CSV");
  train->add_option("input", tr.in, "Feature CSV with a label column")->required();
  train->add_option("--algo", tr.algo, "layered or incremental");
  train->add_option("--fitter", tr.fitter, "projection or ls");
  train->add_option("--F", tr.F, "Survivors per layer (0: 0.4 * C(m,2))");
  train->add_option("--Delta", tr.Delta, "Layer stopping threshold");
  train->add_option("--chi", tr.chi, "Projection learning rate");
  train->add_option("--delta", tr.delta, "Per-neuron stopping threshold");
  train->add_option("--split", tr.split, "Validation share n_B/n");
  train->add_option("--split-mode", tr.split_mode, "stratified, interleaved or random");
  train->add_option("--max-steps", tr.max_steps, "Projection step cap");
  train->add_option("--max-layers", tr.max_layers, "Layer cap");
  train->add_option("--fail-budget", tr.fail_budget, "Consecutive failures ending incremental growth");
  train->add_option("--links", tr.links, "strict or with-inputs (layered)");
  train->add_option("--pool", tr.pool, "features or survivors (incremental)");
  train->add_flag("--standardize", tr.standardize, "Fit each neuron in standardized input coordinates");
  train->add_option("--target", tr.target, "Regress this column instead of the labels");
  train->add_option("--threshold", tr.threshold, "Decision threshold stored in the model");
  train->add_flag("--normalize", tr.normalize, "Standardize features and store the statistics");
  train->add_flag("--all-fits", tr.all_fits, "Record every candidate fit in the trace");
  train->add_option("--seed", tr.seed, "Seed (unsigned 64-bit)");
  train->add_option("--threads", tr.threads, "Worker threads");
  train->add_option("-o,--out", tr.out, "Model file (default stdout)");
  train->add_option("--trace", tr.trace, "Trace JSON (default <out>.trace.json)");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score a model on a labeled feature CSV");
  eval->add_option("model", ev.model, "PNMODEL file")->required();
  eval->add_option("input", ev.in, "Feature CSV with a label column")->required();
  eval->add_option("--report", ev.report, "Report JSON path");
  eval->add_option("--threshold", ev.threshold, "Override the model's decision threshold");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Generate a labeled dataset from a planted network");
  synth->add_option("--model", sy.model, "paper-alz, paper-sleep or a PNMODEL file");
  synth->add_option("--m-total", sy.m_total, "Total feature columns (extra ones are distractors)");
  synth->add_option("--rows", sy.rows, "Row count");
  synth->add_option("--noise", sy.noise, "gaussian, laplace or student-t");
  synth->add_option("--scale", sy.scale, "Noise scale (sigma, b, or t multiplier)");
  synth->add_option("--nu", sy.nu, "Student-t degrees of freedom");
  synth->add_option("--label-rule", sy.label_rule, "median or fixed:<threshold>");
  synth->add_option("--seed", sy.seed, "Seed (unsigned 64-bit)");
  synth->add_flag("--emit-target", sy.emit_target, "Add the noisy regression target column");
  synth->add_flag("--emit-clean", sy.emit_clean, "Add the noiseless generator output column");
  synth->add_option("-o,--out", sy.out, "Output CSV (default stdout)");
  synth->add_option("--sidecar", sy.sidecar, "Dataset description JSON (default <out>.json)");
  synth->add_option("--model-out", sy.model_out, "Write the planted model with its label threshold");

  BenchArgs be;
  auto* benchc = app.add_subcommand("bench", "Run a benchmark suite");
  benchc->add_option("--suite", be.suite, "convergence, robustness or recovery")->required();
  benchc->add_option("--runs", be.runs, "Runs per configuration");
  benchc->add_option("--seed", be.seed, "Base seed");
  benchc->add_option("--threads", be.threads, "Worker threads");
  benchc->add_option("--convention", be.convention, "spread or stderr");
  benchc->add_option("--steps", be.steps, "Learning-curve length (convergence)");
  benchc->add_option("--noise-std", be.noise_std, "Noise standard deviation (robustness)");
  benchc->add_option("--chi", be.chi, "Projection learning rate (robustness)");
  benchc->add_option("--delta", be.delta, "Projection stopping threshold (robustness)");
  benchc->add_option("-o,--out", be.out, "Output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (extract->parsed()) return cmd_extract(ex, out, err);
    if (train->parsed()) return cmd_train(tr, out, err);
    if (eval->parsed()) return cmd_eval(ev, out, err);
    if (synth->parsed()) return cmd_synth(sy, out, err);
    if (benchc->parsed()) return cmd_bench(be, out, err);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  } catch (const GrowthFailure& e) {
    err << "growth failure: " << e.what() << "\n";
    return growth_failure;
  } catch (const DegenerateDesignError& e) {
    err << "fit failure: " << e.what() << "\n";
    return growth_failure;
  } catch (const RunFailure& e) {
    err << "run failure: " << e.what() << "\n";
    return growth_failure;
  } catch (const ParseError& e) {
    err << "model error: " << e.what() << "\n";
    return data_error;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return data_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return data_error;
  }
  return usage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("pnet");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace pnet::cli
