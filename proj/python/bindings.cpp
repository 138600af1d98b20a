#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pnet/cli.hpp"
#include "pnet/error.hpp"
#include "pnet/features.hpp"
#include "pnet/fitting.hpp"
#include "pnet/growth.hpp"
#include "pnet/metrics.hpp"
#include "pnet/synth.hpp"

namespace py = pybind11;
using namespace pnet;

namespace {

Weights4 to_weights(const std::array<double, 4>& w) { return Weights4{w}; }

py::dict trace_dict(const FitTrace& t) {
  py::dict d;
  d["valid_mse"] = t.valid_mse;
  d["train_rse"] = t.train_rse;
  std::vector<std::array<double, 4>> w;
  for (const auto& x : t.weights) w.push_back(x.w);
  d["weights"] = w;
  d["steps_taken"] = t.steps_taken;
  d["stop_reason"] = to_string(t.stop_reason);
  if (t.rejected_valid_mse) d["rejected_valid_mse"] = *t.rejected_valid_mse;
  return d;
}

FeatureTable table_from_rows(const std::vector<std::vector<double>>& rows,
                             std::vector<std::string> names) {
  const std::size_t m = rows.empty() ? names.size() : rows[0].size();
  if (names.empty()) names = numbered_feature_names(m);
  if (names.size() != m) throw InputShapeError("name count does not match the row width");
  FeatureTable t(names, rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m) throw InputShapeError("rows differ in length");
    for (std::size_t c = 0; c < m; ++c) t.at(r, c) = rows[r][c];
  }
  return t;
}

std::vector<std::vector<double>> table_rows(const FeatureTable& t) {
  std::vector<std::vector<double>> rows(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) rows[r] = t.row(r);
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Polynomial networks grown with a projection learning rule";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputShapeError>(m, "InputShapeError", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<DegenerateDesignError>(m, "DegenerateDesignError", base.ptr());
  py::register_exception<GrowthFailure>(m, "GrowthFailure", base.ptr());
  py::register_exception<UndefinedMetric>(m, "UndefinedMetric", base.ptr());
  py::register_exception<RunFailure>(m, "RunFailure", base.ptr());

  m.def("eval_transfer", [](double v1, double v2, const std::array<double, 4>& w) {
    return eval_transfer(v1, v2, to_weights(w));
  });

  py::class_<PolyNetwork>(m, "PolyNetwork")
      .def_static("parse", [](const std::string& text) { return parse_model(text); })
      .def("render", [](const PolyNetwork& n) { return render_model(n); })
      .def("eval", [](const PolyNetwork& n, const std::vector<double>& x) { return eval_network(n, x); })
      .def("classify", [](const PolyNetwork& n, const std::vector<double>& x) { return classify(n, x); })
      .def("with_threshold", &PolyNetwork::with_threshold)
      .def_property_readonly("feature_count", &PolyNetwork::feature_count)
      .def_property_readonly("feature_names", &PolyNetwork::feature_names)
      .def_property_readonly("threshold", &PolyNetwork::threshold)
      .def_property_readonly("depth", &PolyNetwork::depth)
      .def_property_readonly("output", &PolyNetwork::output)
      .def_property_readonly("used_features", &PolyNetwork::used_features)
      .def_property_readonly("neurons",
                             [](const PolyNetwork& n) {
                               py::list out;
                               for (const auto& nr : n.neurons()) {
                                 py::dict d;
                                 d["inputs"] = py::make_tuple(to_string(nr.inputs[0]), to_string(nr.inputs[1]));
                                 d["weights"] = nr.weights.w;
                                 d["layer"] = nr.layer;
                                 out.append(d);
                               }
                               return out;
                             })
      .def("__eq__", [](const PolyNetwork& a, const PolyNetwork& b) { return a == b; });

  m.def("paper_alzheimer_model", &paper_alzheimer_model);
  m.def("paper_sleep_model", &paper_sleep_model);

  m.def(
      "fit_projection",
      [](const std::vector<double>& v1a, const std::vector<double>& v2a, const std::vector<double>& ya,
         const std::vector<double>& v1b, const std::vector<double>& v2b, const std::vector<double>& yb,
         double chi, double delta, int max_steps, std::uint64_t seed, bool standardize) {
        DesignPair d{{v1a, v2a, ya}, {v1b, v2b, yb}};
        FitParams p;
        p.chi = chi;
        p.delta = delta;
        p.max_steps = max_steps;
        p.seed = seed;
        p.standardize = standardize;
        const auto fit = fit_projection(d, p);
        return py::make_tuple(fit.weights.w, trace_dict(fit.trace));
      },
      py::arg("v1_train"), py::arg("v2_train"), py::arg("y_train"), py::arg("v1_valid"),
      py::arg("v2_valid"), py::arg("y_valid"), py::arg("chi") = 1.9, py::arg("delta") = 0.015,
      py::arg("max_steps") = 200, py::arg("seed") = 0, py::arg("standardize") = false);

  m.def(
      "fit_least_squares",
      [](const std::vector<double>& v1, const std::vector<double>& v2, const std::vector<double>& y,
         double damping) { return fit_least_squares(v1, v2, y, damping).w; },
      py::arg("v1"), py::arg("v2"), py::arg("y"), py::arg("damping") = kLeastSquaresDamping);

  m.def("exterior_criterion", [](const std::vector<double>& p, const std::vector<double>& t) {
    return exterior_criterion(p, t);
  });
  m.def("default_F", &default_F);

  m.def(
      "grow",
      [](const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
         std::optional<std::vector<double>> target, std::vector<std::string> names,
         const std::string& algo, const std::string& fitter, std::size_t F, const std::string& links,
         double Delta, int fail_budget, double chi, double delta, double split, std::uint64_t seed,
         bool standardize, unsigned threads) {
        FeatureTable t = table_from_rows(rows, std::move(names));
        t.set_labels(labels);
        GrowthParams g;
        if (algo == "layered")
          g.strategy = Strategy::layered;
        else if (algo == "incremental")
          g.strategy = Strategy::incremental;
        else
          throw InvalidArgument("unknown algorithm '" + algo + "'");
        if (fitter == "projection")
          g.fitter = FitterKind::projection;
        else if (fitter == "ls")
          g.fitter = FitterKind::least_squares;
        else
          throw InvalidArgument("unknown fitter '" + fitter + "'");
        if (links == "strict")
          g.links = LayerLinks::strict;
        else if (links == "with_inputs")
          g.links = LayerLinks::with_inputs;
        else
          throw InvalidArgument("unknown links '" + links + "'");
        g.F = F;
        g.Delta = Delta;
        g.fail_budget = fail_budget;
        g.seed = seed;
        g.threads = threads;
        FitParams f;
        f.chi = chi;
        f.delta = delta;
        f.split_ratio = split;
        f.seed = seed;
        f.standardize = standardize;
        std::vector<double> y = target ? *target : std::vector<double>(labels.begin(), labels.end());
        const RowSplit s = make_split(t.rows(), split, seed, SplitMode::stratified, t.labels());
        auto r = grow(t, y, s, g, f);
        py::dict trace;
        trace["layer_min_criterion"] = r.trace.layer_min_criterion;
        trace["final_layer"] = r.trace.final_layer;
        trace["attempts"] = r.trace.attempts.size();
        trace["stopped_by_budget"] = r.trace.stopped_by_budget;
        trace["fits"] = r.trace.fits;
        return py::make_tuple(r.network, trace);
      },
      py::arg("rows"), py::arg("labels"), py::arg("target") = py::none(),
      py::arg("names") = std::vector<std::string>{}, py::arg("algo") = "layered",
      py::arg("fitter") = "projection", py::arg("F") = 0, py::arg("links") = "strict", py::arg("Delta") = 1e-4,
      py::arg("fail_budget") = 7, py::arg("chi") = 1.9, py::arg("delta") = 0.015,
      py::arg("split") = 0.5, py::arg("seed") = 0, py::arg("standardize") = false,
      py::arg("threads") = 1);

  m.def("band_preset", [](const std::string& name) {
    std::vector<std::tuple<std::string, double, double>> out;
    for (const auto& b : band_preset(name)) out.emplace_back(b.name, b.lo, b.hi);
    return out;
  });
  m.def("segment_count", [](std::size_t len, double window, double step, double rate) {
    return segment_count(len, SegmentSpec{window, step, rate});
  });
  m.def(
      "band_power",
      [](const std::vector<double>& window, double rate, double lo, double hi) {
        return band_power(window, rate, BandSpec{"band", lo, hi});
      },
      py::arg("window"), py::arg("rate"), py::arg("lo"), py::arg("hi"));
  m.def(
      "extract_band_features",
      [](const std::vector<std::pair<std::string, std::vector<double>>>& channels,
         const std::string& preset, double rate, double window, double step, bool relative,
         const std::vector<std::string>& sums) {
        std::vector<Channel> ch;
        for (const auto& [name, samples] : channels) ch.push_back({name, samples});
        ExtractOptions opt;
        opt.mode = relative ? PowerMode::absolute_relative : PowerMode::absolute;
        for (const auto& s : sums) opt.sums.push_back(parse_sum_channel(s));
        const auto bands = band_preset(preset);
        const auto r = extract_band_features(ch, bands, SegmentSpec{window, step, rate}, opt);
        return py::make_tuple(r.table.names(), table_rows(r.table));
      },
      py::arg("channels"), py::arg("preset"), py::arg("rate"), py::arg("window"), py::arg("step"),
      py::arg("relative") = false, py::arg("sums") = std::vector<std::string>{});

  m.def("confusion", [](const std::vector<int>& labels, const std::vector<int>& preds) {
    const Confusion c = confusion(labels, preds);
    py::dict d;
    d["tp"] = c.tp;
    d["tn"] = c.tn;
    d["fp"] = c.fp;
    d["fn"] = c.fn;
    return d;
  });
  auto metric = [](double (*fn)(const Confusion&)) {
    return [fn](std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn_) {
      return fn(Confusion{tp, tn, fp, fn_});
    };
  };
  m.def("sensitivity", metric(sensitivity), py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"));
  m.def("specificity", metric(specificity), py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"));
  m.def("performance", metric(performance), py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"));
  m.def(
      "summarize",
      [](const std::vector<double>& values, const std::string& convention) {
        const RunStats s = summarize(values, convention == "stderr" ? Interval::standard_error
                                                                    : Interval::spread);
        return py::make_tuple(s.mean, s.half_width, s.runs);
      },
      py::arg("values"), py::arg("convention") = "spread");

  m.def(
      "gen_dataset",
      [](const PolyNetwork& generator, std::size_t m_total, std::size_t rows, const std::string& noise,
         double scale, std::uint64_t seed) {
        SynthSpec spec{generator, m_total ? m_total : generator.feature_count(), rows,
                       Noise{parse_noise_family(noise), scale}, {}, seed};
        const SynthData d = gen_dataset(spec);
        py::dict out;
        out["names"] = d.table.names();
        out["rows"] = table_rows(d.table);
        out["labels"] = d.table.labels();
        out["clean"] = d.clean;
        out["target"] = d.target;
        out["threshold"] = d.threshold;
        return out;
      },
      py::arg("generator"), py::arg("m_total") = 0, py::arg("rows") = 1000,
      py::arg("noise") = "gaussian", py::arg("scale") = 0.1, py::arg("seed") = 0);

  m.def(
      "neuron_task",
      [](std::size_t n, const std::array<double, 4>& w, double noise, double split, std::uint64_t seed) {
        const DesignPair d = neuron_task(n, Weights4{w}, Noise{NoiseFamily::gaussian, noise}, split, seed);
        py::dict out;
        for (const auto& [key, part] : {std::pair{"train", &d.train}, std::pair{"valid", &d.valid}})
          out[key] = py::make_tuple(part->v1, part->v2, part->y);
        return out;
      },
      py::arg("n"), py::arg("w") = kStandardNeuronWeights.w, py::arg("noise") = 0.1, py::arg("split") = 0.5,
      py::arg("seed") = 0);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
