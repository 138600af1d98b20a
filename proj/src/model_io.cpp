// PNMODEL v1: a line-oriented text rendering of a PolyNetwork.
//
//   PNMODEL v1
//   m 76
//   names a,b,c            (optional)
//   norm 0 0.25 1.5        (optional, one line per feature)
//   threshold 0.5
//   neuron 0 layer 1 in f10 f68 w 0.696 0.391 0.248 -0.231
//   output n0
//
// Blank lines and '#' comments are ignored.

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <system_error>

#include "pnet/error.hpp"
#include "pnet/model.hpp"

namespace pnet {

std::string format_real(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw InvalidArgument("cannot format real");
  return std::string(buf, end);
}

std::string render_model(const PolyNetwork& net) {
  std::ostringstream out;
  out << "PNMODEL v1\n";
  out << "m " << net.feature_count() << "\n";
  if (!net.feature_names().empty()) {
    out << "names ";
    for (std::size_t i = 0; i < net.feature_names().size(); ++i) {
      if (i) out << ',';
      out << net.feature_names()[i];
    }
    out << "\n";
  }
  if (const auto& norm = net.norm_stats()) {
    for (std::size_t j = 0; j < norm->size(); ++j)
      out << "norm " << j << ' ' << format_real((*norm)[j].mean) << ' '
          << format_real((*norm)[j].stddev) << "\n";
  }
  out << "threshold " << format_real(net.threshold()) << "\n";
  const auto& neurons = net.neurons();
  for (std::size_t i = 0; i < neurons.size(); ++i) {
    const Neuron& n = neurons[i];
    out << "neuron " << i << " layer " << n.layer << " in " << to_string(n.inputs[0]) << ' '
        << to_string(n.inputs[1]) << " w";
    for (double w : n.weights.w) out << ' ' << format_real(w);
    out << "\n";
  }
  out << "output n" << net.output() << "\n";
  return out.str();
}

namespace {

using Kind = ParseError::Kind;

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

double parse_real(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw ParseError(Kind::malformed, line, "bad real '" + std::string(tok) + "'");
  return v;
}

long long parse_int(std::string_view tok, std::size_t line) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(Kind::malformed, line, "bad integer '" + std::string(tok) + "'");
  return v;
}

std::size_t parse_index(std::string_view tok, std::size_t line) {
  long long v = parse_int(tok, line);
  if (v < 0) throw ParseError(Kind::malformed, line, "negative index");
  return static_cast<std::size_t>(v);
}

struct RawRef {
  bool feature;
  std::size_t id;
};

RawRef parse_ref(std::string_view tok, std::size_t line) {
  if (tok.size() < 2 || (tok[0] != 'f' && tok[0] != 'n'))
    throw ParseError(Kind::malformed, line, "bad reference '" + std::string(tok) + "'");
  return {tok[0] == 'f', parse_index(tok.substr(1), line)};
}

struct RawNeuron {
  std::size_t id;
  int layer;
  RawRef in[2];
  Weights4 w;
  std::size_t line;
};

}  // namespace

PolyNetwork parse_model(std::string_view text) {
  std::optional<std::size_t> m;
  std::vector<std::string> names;
  std::map<std::size_t, NormEntry> norm;
  double threshold = PolyNetwork::default_threshold;
  std::vector<RawNeuron> raw;
  std::optional<std::pair<std::size_t, std::size_t>> output;  // id, line
  bool header = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tok = split_ws(line);
    if (tok.empty()) continue;

    if (!header) {
      if (tok.size() != 2 || tok[0] != "PNMODEL" || tok[1] != "v1")
        throw ParseError(Kind::malformed, line_no, "expected 'PNMODEL v1' header");
      header = true;
      continue;
    }

    const std::string_view key = tok[0];
    if (key == "m") {
      if (tok.size() != 2 || m) throw ParseError(Kind::malformed, line_no, "bad 'm' line");
      m = parse_index(tok[1], line_no);
    } else if (key == "names") {
      if (tok.size() != 2 || !names.empty())
        throw ParseError(Kind::malformed, line_no, "bad 'names' line");
      std::string_view list = tok[1];
      std::size_t start = 0;
      while (true) {
        std::size_t comma = list.find(',', start);
        names.emplace_back(list.substr(start, comma == list.npos ? list.npos : comma - start));
        if (names.back().empty()) throw ParseError(Kind::malformed, line_no, "empty feature name");
        if (comma == list.npos) break;
        start = comma + 1;
      }
    } else if (key == "norm") {
      if (tok.size() != 4) throw ParseError(Kind::malformed, line_no, "bad 'norm' line");
      std::size_t idx = parse_index(tok[1], line_no);
      NormEntry e{parse_real(tok[2], line_no), parse_real(tok[3], line_no)};
      if (!(e.stddev > 0.0)) throw ParseError(Kind::malformed, line_no, "norm std must be positive");
      if (!norm.emplace(idx, e).second)
        throw ParseError(Kind::malformed, line_no, "duplicate norm entry");
    } else if (key == "threshold") {
      if (tok.size() != 2) throw ParseError(Kind::malformed, line_no, "bad 'threshold' line");
      threshold = parse_real(tok[1], line_no);
    } else if (key == "neuron") {
      if (tok.size() != 12 || tok[2] != "layer" || tok[4] != "in" || tok[7] != "w")
        throw ParseError(Kind::malformed, line_no, "bad 'neuron' line");
      RawNeuron n{};
      n.id = parse_index(tok[1], line_no);
      long long layer = parse_int(tok[3], line_no);
      if (layer < 1) throw ParseError(Kind::malformed, line_no, "layer must be positive");
      n.layer = static_cast<int>(layer);
      n.in[0] = parse_ref(tok[5], line_no);
      n.in[1] = parse_ref(tok[6], line_no);
      for (int k = 0; k < 4; ++k) n.w[k] = parse_real(tok[8 + k], line_no);
      n.line = line_no;
      raw.push_back(n);
    } else if (key == "output") {
      if (tok.size() != 2 || output) throw ParseError(Kind::malformed, line_no, "bad 'output' line");
      RawRef r = parse_ref(tok[1], line_no);
      if (r.feature) throw ParseError(Kind::malformed, line_no, "output must be a neuron");
      output = std::make_pair(r.id, line_no);
    } else {
      throw ParseError(Kind::unknown_key, line_no, std::string(key));
    }
  }

  if (!header) throw ParseError(Kind::malformed, line_no, "missing 'PNMODEL v1' header");
  if (!m) throw ParseError(Kind::malformed, line_no, "missing 'm' line");
  if (!names.empty() && names.size() != *m)
    throw ParseError(Kind::malformed, line_no, "names count does not match m");

  std::map<std::size_t, std::size_t> position;  // file id -> order of appearance
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!position.emplace(raw[i].id, i).second)
      throw ParseError(Kind::duplicate_id, raw[i].line, "n" + std::to_string(raw[i].id));
  }

  std::vector<Neuron> neurons;
  neurons.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const RawNeuron& r = raw[i];
    Neuron n;
    n.layer = r.layer;
    n.weights = r.w;
    int max_in = 0;
    for (int k = 0; k < 2; ++k) {
      const RawRef& ref = r.in[k];
      if (ref.feature) {
        if (ref.id >= *m)
          throw ParseError(Kind::dangling_reference, r.line, "f" + std::to_string(ref.id));
        n.inputs[k] = InputRef::feature(ref.id);
      } else {
        auto it = position.find(ref.id);
        if (it == position.end())
          throw ParseError(Kind::dangling_reference, r.line, "n" + std::to_string(ref.id));
        if (it->second >= i)
          throw ParseError(Kind::cyclic_reference, r.line, "n" + std::to_string(ref.id));
        n.inputs[k] = InputRef::neuron(it->second);
        max_in = std::max(max_in, neurons[it->second].layer);
      }
    }
    if (n.inputs[0] == n.inputs[1])
      throw ParseError(Kind::malformed, r.line, "neuron inputs must be distinct");
    if (n.layer <= max_in)
      throw ParseError(Kind::malformed, r.line, "layer must exceed the layers of its inputs");
    neurons.push_back(n);
  }

  if (!output) throw ParseError(Kind::no_output, line_no, "");
  auto out_it = position.find(output->first);
  if (out_it == position.end())
    throw ParseError(Kind::dangling_reference, output->second, "n" + std::to_string(output->first));

  std::optional<std::vector<NormEntry>> stats;
  if (!norm.empty()) {
    if (norm.size() != *m || norm.rbegin()->first != *m - 1)
      throw ParseError(Kind::malformed, line_no, "norm entries must cover every feature");
    stats.emplace();
    for (const auto& [idx, e] : norm) stats->push_back(e);
  }

  try {
    return PolyNetwork(*m, std::move(neurons), out_it->second, std::move(names), std::move(stats),
                       threshold);
  } catch (const InputShapeError& e) {
    throw ParseError(Kind::malformed, line_no, e.what());
  }
}

}  // namespace pnet
