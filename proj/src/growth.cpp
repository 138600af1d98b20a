#include "pnet/growth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "parallel.hpp"
#include "pnet/error.hpp"
#include "pnet/rng.hpp"

namespace pnet {

const char* to_string(Strategy s) noexcept {
  return s == Strategy::layered ? "layered" : "incremental";
}
const char* to_string(FitterKind f) noexcept {
  return f == FitterKind::projection ? "projection" : "ls";
}
const char* to_string(LayerLinks l) noexcept {
  return l == LayerLinks::strict ? "strict" : "with-inputs";
}
const char* to_string(IncrementalPool p) noexcept {
  return p == IncrementalPool::features ? "features" : "survivors";
}
const char* to_string(SplitMode m) noexcept {
  switch (m) {
    case SplitMode::stratified: return "stratified";
    case SplitMode::interleaved: return "interleaved";
    case SplitMode::random: return "random";
  }
  return "?";
}

void GrowthParams::validate() const {
  if (!(Delta > 0.0)) throw InvalidArgument("Delta must be positive");
  if (fail_budget < 1) throw InvalidArgument("fail budget must be at least 1");
  if (max_layers < 2) throw InvalidArgument("max layers must be at least 2");
}

std::size_t default_F(std::size_t m) {
  if (m < 2) throw InvalidArgument("default_F needs at least two features");
  const double pairs = 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.4 * pairs)));
}

std::vector<std::pair<InputRef, InputRef>> generate_layer_candidates(
    std::span<const InputRef> pool) {
  if (pool.size() < 2) throw InvalidArgument("candidate generation needs at least two refs");
  std::vector<std::pair<InputRef, InputRef>> out;
  out.reserve(pool.size() * (pool.size() - 1) / 2);
  for (std::size_t i = 0; i < pool.size(); ++i)
    for (std::size_t j = i + 1; j < pool.size(); ++j) out.emplace_back(pool[i], pool[j]);
  return out;
}

std::vector<Candidate> select_best(std::span<const Candidate> candidates, std::size_t F) {
  if (candidates.empty()) throw InvalidArgument("no candidates to select from");
  std::vector<Candidate> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end(), [](const Candidate& a, const Candidate& b) {
    if (a.criterion != b.criterion) return a.criterion < b.criterion;
    return a.creation_index < b.creation_index;
  });
  if (sorted.size() > F) sorted.resize(F);
  return sorted;
}

RowSplit make_split(std::size_t n, double ratio, std::uint64_t seed, SplitMode mode,
                    std::span<const int> labels) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("split ratio must lie in (0, 1)");
  if (n < 2) throw DataError("need at least two rows to split into training and validation");
  RowSplit split;
  auto assign = [&](const std::vector<std::size_t>& rows) {
    // The first round(ratio * k) rows go to validation, but never all or none.
    const std::size_t k = rows.size();
    std::size_t nb = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(k)));
    if (k >= 2) nb = std::clamp<std::size_t>(nb, 1, k - 1);
    for (std::size_t i = 0; i < k; ++i) (i < nb ? split.valid : split.train).push_back(rows[i]);
  };

  switch (mode) {
    case SplitMode::interleaved: {
      // Bresenham-style: row i goes to validation when floor((i+1)r) > floor(i r).
      for (std::size_t i = 0; i < n; ++i) {
        const auto a = static_cast<long long>(std::floor(static_cast<double>(i) * ratio));
        const auto b = static_cast<long long>(std::floor(static_cast<double>(i + 1) * ratio));
        (b > a ? split.valid : split.train).push_back(i);
      }
      break;
    }
    case SplitMode::random: {
      std::vector<std::size_t> rows(n);
      std::iota(rows.begin(), rows.end(), 0);
      Rng rng(derive_seed(seed, 0x5b17));
      std::shuffle(rows.begin(), rows.end(), rng);
      assign(rows);
      break;
    }
    case SplitMode::stratified: {
      if (labels.size() != n) throw DataError("stratified split needs one label per row");
      Rng rng(derive_seed(seed, 0x5b17));
      for (int cls : {0, 1}) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < n; ++i)
          if (labels[i] == cls) rows.push_back(i);
        std::shuffle(rows.begin(), rows.end(), rng);
        assign(rows);
      }
      std::sort(split.train.begin(), split.train.end());
      std::sort(split.valid.begin(), split.valid.end());
      break;
    }
  }
  if (split.train.empty() || split.valid.empty())
    throw DataError("split leaves the training or validation part empty");
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.valid.begin(), split.valid.end());
  return split;
}

namespace {

struct Node {
  InputRef in1, in2;
  Weights4 weights;
  int layer = 1;
  double criterion = 0.0;
  std::vector<double> values;  // output on every row
  FitTrace trace;
};

struct FitOutcome {
  Weights4 weights;
  double criterion = 0.0;
  FitTrace trace;
};

class Grower {
public:
  Grower(const FeatureTable& data, std::span<const double> targets, const RowSplit& split,
         const GrowthParams& growth, const FitParams& fit)
      : data_(data), y_(targets), split_(split), g_(growth), f_(fit) {
    growth.validate();
    fit.validate();
    if (data.rows() == 0) throw DataError("training data is empty");
    if (data.cols() < 2) throw DataError("growth needs at least two features");
    if (targets.size() != data.rows()) throw InputShapeError("target count does not match rows");
    for (double t : targets)
      if (!std::isfinite(t)) throw DataError("targets must be finite");
    for (std::size_t c = 0; c < data.cols(); ++c)
      for (double v : data.column(c))
        if (!std::isfinite(v)) throw DataError("feature '" + data.names()[c] + "' has a non-finite value");
    if (split.train.empty() || split.valid.empty())
      throw DataError("split leaves the training or validation part empty");
    for (auto idx : split.train)
      if (idx >= data.rows()) throw InputShapeError("split row out of range");
    for (auto idx : split.valid)
      if (idx >= data.rows()) throw InputShapeError("split row out of range");
    y_train_ = gather(y_, split_.train);
    y_valid_ = gather(y_, split_.valid);
  }

  std::span<const double> values(const InputRef& r) const {
    return r.is_feature() ? data_.column(r.index) : std::span<const double>(nodes_[r.index].values);
  }

  int layer_of(const InputRef& r) const { return r.is_feature() ? 0 : nodes_[r.index].layer; }

  FitOutcome fit_pair(const InputRef& a, const InputRef& b, std::size_t creation_index) const {
    const auto va = values(a);
    const auto vb = values(b);
    FitOutcome out;
    if (g_.fitter == FitterKind::projection) {
      DesignPair d;
      d.train = {gather(va, split_.train), gather(vb, split_.train), y_train_};
      d.valid = {gather(va, split_.valid), gather(vb, split_.valid), y_valid_};
      FitParams p = f_;
      p.seed = derive_seed(f_.seed, creation_index);
      auto fit = fit_projection(d, p);
      out.weights = fit.weights;
      out.trace = std::move(fit.trace);
    } else {
      out.weights = fit_least_squares(gather(va, split_.train), gather(vb, split_.train), y_train_);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      const double r = eval_transfer(va[i], vb[i], out.weights) - y_[i];
      s += r * r;
    }
    out.criterion = s;
    return out;
  }

  std::vector<FitOutcome> fit_all(const std::vector<std::pair<InputRef, InputRef>>& pairs) {
    std::vector<FitOutcome> out(pairs.size());
    const std::size_t base = next_index_;
    detail::parallel_for(pairs.size(), g_.threads, [&](std::size_t i) {
      out[i] = fit_pair(pairs[i].first, pairs[i].second, base + i);
    });
    next_index_ += pairs.size();
    record_fits(out);
    return out;
  }

  FitOutcome fit_one(const InputRef& a, const InputRef& b) {
    std::vector<FitOutcome> one(1);
    one[0] = fit_pair(a, b, next_index_++);
    record_fits(one);
    return std::move(one[0]);
  }

  std::size_t add_node(const InputRef& a, const InputRef& b, FitOutcome fit) {
    Node n;
    n.in1 = a;
    n.in2 = b;
    n.weights = fit.weights;
    n.layer = 1 + std::max(layer_of(a), layer_of(b));
    n.criterion = fit.criterion;
    n.trace = std::move(fit.trace);
    const auto va = values(a);
    const auto vb = values(b);
    n.values.resize(y_.size());
    for (std::size_t i = 0; i < y_.size(); ++i) n.values[i] = eval_transfer(va[i], vb[i], n.weights);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  const Node& node(std::size_t i) const { return nodes_[i]; }
  std::size_t next_index() const { return next_index_; }

  // Ancestors of `output`, renumbered in creation order (which is topological).
  PolyNetwork build_network(std::size_t output, GrowthTrace& trace) const {
    std::vector<char> keep(nodes_.size(), 0);
    keep[output] = 1;
    for (std::size_t i = output + 1; i-- > 0;) {
      if (!keep[i]) continue;
      for (const InputRef& in : {nodes_[i].in1, nodes_[i].in2})
        if (in.is_neuron()) keep[in.index] = 1;
    }
    std::vector<std::size_t> remap(nodes_.size(), 0);
    std::vector<Neuron> neurons;
    trace.neuron_traces.clear();
    for (std::size_t i = 0; i <= output; ++i) {
      if (!keep[i]) continue;
      remap[i] = neurons.size();
      auto map_ref = [&](const InputRef& r) {
        return r.is_feature() ? r : InputRef::neuron(remap[r.index]);
      };
      neurons.push_back(Neuron{{map_ref(nodes_[i].in1), map_ref(nodes_[i].in2)},
                               nodes_[i].weights, nodes_[i].layer});
      trace.neuron_traces.push_back(nodes_[i].trace);
    }
    return PolyNetwork(data_.cols(), std::move(neurons), remap[output], data_.names());
  }

  void finish(GrowthTrace& trace) {
    trace.fits = next_index_;
    trace.fit_traces = std::move(fit_traces_);
  }

  const FeatureTable& data() const { return data_; }
  std::span<const double> targets() const { return y_; }
  const RowSplit& split() const { return split_; }
  const std::vector<double>& train_targets() const { return y_train_; }

private:
  template <class T>
  static std::vector<double> gather(T&& src, const std::vector<std::size_t>& rows) {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = src[rows[i]];
    return out;
  }

  void record_fits(std::vector<FitOutcome>& fits) {
    if (!g_.keep_fit_traces || g_.fitter != FitterKind::projection) return;
    for (const auto& f : fits) fit_traces_.push_back(f.trace);
  }

  const FeatureTable& data_;
  std::span<const double> y_;
  const RowSplit& split_;
  const GrowthParams& g_;
  const FitParams& f_;
  std::vector<double> y_train_, y_valid_;
  std::vector<Node> nodes_;
  std::size_t next_index_ = 0;
  std::vector<FitTrace> fit_traces_;
};

std::vector<InputRef> feature_refs(std::size_t m) {
  std::vector<InputRef> refs;
  for (std::size_t j = 0; j < m; ++j) refs.push_back(InputRef::feature(j));
  return refs;
}

// Fits every pair, keeps the F best as nodes, returns their node ids (best first).
std::vector<std::size_t> grow_layer(Grower& grower,
                                    const std::vector<std::pair<InputRef, InputRef>>& pairs,
                                    std::size_t F, GrowthTrace& trace) {
  const std::size_t base = grower.next_index();
  auto fits = grower.fit_all(pairs);
  std::vector<Candidate> cands(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    cands[i] = Candidate{pairs[i], fits[i].weights, fits[i].criterion, base + i};
  const auto best = select_best(cands, F);
  std::vector<std::size_t> ids;
  for (const auto& c : best)
    ids.push_back(grower.add_node(c.inputs.first, c.inputs.second,
                                  std::move(fits[c.creation_index - base])));
  trace.layer_min_criterion.push_back(best.front().criterion);
  trace.layer_candidates.push_back(pairs.size());
  return ids;
}

}  // namespace

GrowthResult grow_layered(const FeatureTable& data, std::span<const double> targets,
                          const RowSplit& split, const GrowthParams& growth,
                          const FitParams& fit) {
  Grower grower(data, targets, split, growth, fit);
  const std::size_t m = data.cols();
  const std::size_t F = growth.F ? growth.F : default_F(m);
  const auto features = feature_refs(m);

  GrowthTrace trace;
  trace.strategy = Strategy::layered;
  std::vector<std::vector<std::size_t>> survivors;
  std::size_t output_layer = 0;  // 1-based

  auto pairs = generate_layer_candidates(features);
  for (int r = 1;; ++r) {
    survivors.push_back(grow_layer(grower, pairs, F, trace));
    trace.final_layer = r;
    const auto& crit = trace.layer_min_criterion;
    if (r >= 2 && std::fabs(crit[r - 1] - crit[r - 2]) < growth.Delta) {
      trace.stopped_by_rule = true;
      output_layer = r - 1;
      break;
    }
    if (r >= growth.max_layers) {
      output_layer = r - 1;
      break;
    }

    std::vector<InputRef> refs;
    for (auto id : survivors.back()) refs.push_back(InputRef::neuron(id));
    pairs.clear();
    if (refs.size() >= 2) pairs = generate_layer_candidates(refs);
    if (growth.links == LayerLinks::with_inputs)
      for (const auto& s : refs)
        for (const auto& f : features) pairs.emplace_back(s, f);
    if (pairs.empty()) {
      output_layer = r;
      break;
    }
  }

  const std::size_t output = survivors[output_layer - 1].front();
  PolyNetwork net = grower.build_network(output, trace);
  grower.finish(trace);
  return {std::move(net), std::move(trace)};
}

GrowthResult grow_incremental(const FeatureTable& data, std::span<const double> targets,
                              const RowSplit& split, const GrowthParams& growth,
                              const FitParams& fit) {
  Grower grower(data, targets, split, growth, fit);
  const std::size_t m = data.cols();

  GrowthTrace trace;
  trace.strategy = Strategy::incremental;
  std::vector<InputRef> pool;
  std::vector<double> mu;

  if (growth.pool == IncrementalPool::features) {
    const auto& rows = grower.split().train;
    std::vector<double> y_train = grower.train_targets();
    for (std::size_t j = 0; j < m; ++j) {
      const auto col = data.column(j);
      std::vector<double> x(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) x[i] = col[rows[i]];
      const auto ab = fit_affine_least_squares(x, y_train);
      double s = 0.0;
      for (std::size_t i = 0; i < col.size(); ++i) {
        const double r = ab[0] + ab[1] * col[i] - targets[i];
        s += r * r;
      }
      pool.push_back(InputRef::feature(j));
      mu.push_back(s);
    }
  } else {
    const std::size_t F = growth.F ? growth.F : default_F(m);
    GrowthTrace layer_trace;
    for (auto id : grow_layer(grower, generate_layer_candidates(feature_refs(m)), F, layer_trace)) {
      pool.push_back(InputRef::neuron(id));
      mu.push_back(grower.node(id).criterion);
    }
  }
  trace.initial_pool = pool.size();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    trace.pool_labels.push_back(to_string(pool[i]));
    trace.pool_criteria.push_back(mu[i]);
  }

  Rng rng(derive_seed(growth.seed, 0x1ce));
  const std::size_t cap = 10 * static_cast<std::size_t>(growth.fail_budget) * std::max(m, pool.size());
  int fails = 0;
  std::optional<std::size_t> best;  // pool position of the best accepted neuron
  std::size_t attempt = 0;
  while (fails < growth.fail_budget && attempt < cap) {
    ++attempt;
    const std::size_t p = pool.size();
    std::size_t i = std::uniform_int_distribution<std::size_t>(0, p - 1)(rng);
    std::size_t j = std::uniform_int_distribution<std::size_t>(0, p - 2)(rng);
    if (j >= i) ++j;

    auto outcome = grower.fit_one(pool[i], pool[j]);
    AttemptRecord rec;
    rec.attempt = attempt;
    rec.parent1 = i;
    rec.parent2 = j;
    rec.mu_new = outcome.criterion;
    rec.mu_parent1 = mu[i];
    rec.mu_parent2 = mu[j];
    rec.accepted = accepts(outcome.criterion, mu[i], mu[j]);
    if (rec.accepted) {
      const double crit = outcome.criterion;
      const auto id = grower.add_node(pool[i], pool[j], std::move(outcome));
      pool.push_back(InputRef::neuron(id));
      mu.push_back(crit);
      rec.pool_position = pool.size() - 1;
      trace.pool_labels.push_back(to_string(pool.back()));
      trace.pool_criteria.push_back(crit);
      if (!best || crit < mu[*best]) best = pool.size() - 1;
      fails = 0;
    } else {
      ++fails;
    }
    trace.attempts.push_back(rec);
  }
  trace.stopped_by_budget = fails >= growth.fail_budget;

  if (!best)
    throw GrowthFailure("incremental growth accepted no neuron in " + std::to_string(attempt) +
                            " attempts",
                        attempt);

  PolyNetwork net = grower.build_network(pool[*best].index, trace);
  grower.finish(trace);
  return {std::move(net), std::move(trace)};
}

GrowthResult grow(const FeatureTable& data, std::span<const double> targets,
                  const RowSplit& split, const GrowthParams& growth, const FitParams& fit) {
  return growth.strategy == Strategy::layered ? grow_layered(data, targets, split, growth, fit)
                                              : grow_incremental(data, targets, split, growth, fit);
}

GrowthResult grow(const FeatureTable& data, const GrowthParams& growth, const FitParams& fit) {
  const auto& labels = data.labels();
  std::vector<double> y(labels.begin(), labels.end());
  const RowSplit split =
      make_split(data.rows(), fit.split_ratio, growth.seed, SplitMode::stratified, labels);
  return grow(data, y, split, growth, fit);
}

}  // namespace pnet
