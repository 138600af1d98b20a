#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "pnet/error.hpp"
#include "pnet/model.hpp"
#include "pnet/synth.hpp"

using namespace pnet;

namespace {

PolyNetwork identity_net() {
  return PolyNetwork(2, {{{InputRef::feature(0), InputRef::feature(1)}, Weights4{{0, 1, 0, 0}}, 1}}, 0);
}

ParseError::Kind parse_kind(const std::string& text) {
  try {
    parse_model(text);
  } catch (const ParseError& e) {
    return e.kind();
  }
  FAIL("no parse error");
  return ParseError::Kind::malformed;
}

}  // namespace

TEST_CASE("transfer function examples") {
  CHECK(eval_transfer(0, 0, Weights4{{0.696, 0.391, 0.248, -0.231}}) == 0.696);
  CHECK(eval_transfer(3.5, -2.0, Weights4{{0, 1, 0, 0}}) == 3.5);
  CHECK(eval_transfer(1, 1, Weights4{{1, 2, 3, 4}}) == 10);
}

TEST_CASE("transfer swap symmetry and identity embedding") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int t = 0; t < 1000; ++t) {
    const double v1 = u(rng), v2 = u(rng), a = u(rng), b = u(rng), c = u(rng), w0 = u(rng);
    // the two linear terms are added in the other order
    const double lhs = eval_transfer(v1, v2, Weights4{{w0, a, b, c}});
    const double rhs = eval_transfer(v2, v1, Weights4{{w0, b, a, c}});
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
    CHECK(eval_transfer(v1, v2, Weights4{{0, 1, 0, 0}}) == v1);
  }
}

TEST_CASE("chain of three printed polynomials evaluates to the hand composition") {
  const PolyNetwork net = paper_alzheimer_model();
  std::vector<double> x(76, 1.25);  // non-informative values are irrelevant
  x[10] = x[68] = x[72] = x[75] = 0.0;
  const double y1 = 0.696;
  const double y2 = 0.386 + 0.564 * y1;
  const double y3 = 0.191 + 0.776 * y2;
  CHECK(y2 == doctest::Approx(0.778544).epsilon(1e-12));
  CHECK(eval_network(net, x) == doctest::Approx(y3).epsilon(1e-14));
  CHECK(std::abs(eval_network(net, x) - 0.795150) <= 1e-6);
  CHECK(classify(net, x) == 1);
  CHECK(net.depth() == 3);
  CHECK(net.used_features() == std::vector<std::size_t>{10, 68, 72, 75});
}

TEST_CASE("network evaluation errors and identity network") {
  const PolyNetwork net = identity_net();
  CHECK(eval_network(net, std::vector<double>{4.5, -1.0}) == 4.5);
  CHECK_THROWS_AS(eval_network(net, std::vector<double>{1.0}), InputShapeError);
  CHECK_THROWS_AS(eval_network(net, std::vector<double>{std::nan(""), 1.0}), InputShapeError);
  CHECK_THROWS_AS(eval_network(net, std::vector<double>{std::numeric_limits<double>::infinity(), 1.0}),
                  InputShapeError);
}

TEST_CASE("classification threshold boundary") {
  const PolyNetwork net = identity_net();
  CHECK(classify(net, std::vector<double>{0.5, 0}) == 1);
  CHECK(classify(net, std::vector<double>{-0.3, 0}) == 0);
  CHECK(classify(net.with_threshold(0.8), std::vector<double>{0.7951, 0}) == 0);
  CHECK(classify(net, std::vector<double>{0.7951, 0}) == 1);
}

TEST_CASE("structural validation at construction") {
  using R = InputRef;
  CHECK_THROWS_AS(PolyNetwork(2, {{{R::feature(0), R::feature(2)}, {}, 1}}, 0), InputShapeError);
  CHECK_THROWS_AS(PolyNetwork(2, {{{R::feature(0), R::neuron(0)}, {}, 1}}, 0), InputShapeError);
  CHECK_THROWS_AS(PolyNetwork(2, {}, 0), InputShapeError);
  CHECK_THROWS_AS(PolyNetwork(2, {{{R::feature(0), R::feature(1)}, {}, 1}}, 1), InputShapeError);
}

TEST_CASE("topological order does not change the output") {
  using R = InputRef;
  const Weights4 a{{0.1, 0.2, -0.3, 0.4}}, b{{-0.5, 0.6, 0.7, -0.8}}, c{{0.9, -1.0, 1.1, 0.3}};
  // two independent layer-1 neurons listed in both orders
  PolyNetwork n1(3, {{{R::feature(0), R::feature(1)}, a, 1},
                     {{R::feature(1), R::feature(2)}, b, 1},
                     {{R::neuron(0), R::neuron(1)}, c, 2}},
                 2);
  PolyNetwork n2(3, {{{R::feature(1), R::feature(2)}, b, 1},
                     {{R::feature(0), R::feature(1)}, a, 1},
                     {{R::neuron(1), R::neuron(0)}, c, 2}},
                 2);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x{g(rng), g(rng), g(rng)};
    CHECK(eval_network(n1, x) == eval_network(n2, x));
  }
}

TEST_CASE("norm stats are applied before evaluation") {
  using R = InputRef;
  const std::vector<Neuron> neurons{{{R::feature(0), R::feature(1)}, Weights4{{0.2, 1.5, -0.7, 0.9}}, 1}};
  const std::vector<NormEntry> stats{{2.0, 0.5}, {-1.0, 4.0}};
  PolyNetwork with(2, neurons, 0, {}, stats);
  PolyNetwork without = with.without_norm_stats();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0, 3);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x{g(rng), g(rng)};
    std::vector<double> z{(x[0] - 2.0) / 0.5, (x[1] + 1.0) / 4.0};
    CHECK(eval_network(with, x) == eval_network(without, z));
  }
}

TEST_CASE("both printed models round-trip exactly") {
  for (const PolyNetwork& net : planted_paper_models()) {
    const std::string text = render_model(net);
    const PolyNetwork back = parse_model(text);
    CHECK(back == net);
    CHECK(render_model(back) == text);
  }
  const std::string alz = render_model(paper_alzheimer_model());
  std::size_t neuron_lines = 0;
  for (std::size_t p = alz.find("\nneuron "); p != std::string::npos; p = alz.find("\nneuron ", p + 1))
    ++neuron_lines;
  CHECK(neuron_lines == 3);
  CHECK(alz.rfind("PNMODEL v1\n", 0) == 0);
}

TEST_CASE("round trip preserves awkward reals, norm stats and thresholds") {
  using R = InputRef;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int t = 0; t < 200; ++t) {
    const Weights4 w{{u(rng) * 1e-7, u(rng), std::nextafter(u(rng), 0.0), 1.0 / 3.0}};
    std::vector<NormEntry> stats{{u(rng), 0.1 + std::abs(u(rng))}, {u(rng), 1e-12 + std::abs(u(rng))}};
    PolyNetwork net(2, {{{R::feature(1), R::feature(0)}, w, 1}}, 0, {"a", "b"}, stats, u(rng));
    CHECK(parse_model(render_model(net)) == net);
  }
}

TEST_CASE("format_real is shortest round-trip") {
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(-0.231) == "-0.231");
  CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("parse errors carry a kind and a line number") {
  using K = ParseError::Kind;
  CHECK(parse_kind("PNMODEL v1\nm 2\n") == K::no_output);
  CHECK(parse_kind("PNMODEL v1\nm 2\nneuron 0 layer 1 in f0 n1 w 0 0 0 0\n"
                   "neuron 1 layer 1 in f0 f1 w 0 0 0 0\noutput n1\n") == K::cyclic_reference);
  CHECK(parse_kind("PNMODEL v1\nm 2\nneuron 0 layer 1 in f0 f5 w 0 0 0 0\noutput n0\n") ==
        K::dangling_reference);
  CHECK(parse_kind("PNMODEL v1\nm 2\nneuron 0 layer 1 in f0 n7 w 0 0 0 0\noutput n0\n") ==
        K::dangling_reference);
  CHECK(parse_kind("PNMODEL v1\nm 2\nneuron 0 layer 1 in f0 f1 w 0 0 0 0\n"
                   "neuron 0 layer 1 in f0 f1 w 0 0 0 0\noutput n0\n") == K::duplicate_id);
  CHECK(parse_kind("PNMODEL v1\nm 2\ncolour blue\n") == K::unknown_key);
  CHECK(parse_kind("PNMODEL v1\nm 2\nneuron 0 layer 1 in f0 f1 w 0 x 0 0\noutput n0\n") == K::malformed);
  CHECK(parse_kind("PNMODEL v2\n") == K::malformed);

  try {
    parse_model("PNMODEL v1\n# comment\nm 2\n\nneuron 0 layer 1 in f0 f9 w 1 2 3 4\noutput n0\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
    CHECK(std::string(e.what()).find("5") != std::string::npos);
  }
}

TEST_CASE("parser accepts comments, blank lines and arbitrary neuron ids") {
  const PolyNetwork net = parse_model(
      "# header comment\nPNMODEL v1\nm 3\n\nneuron 10 layer 1 in f0 f2 w 1 0 0 0  # tail\n"
      "neuron 4 layer 2 in n10 f1 w 0 1 0 0\noutput n4\n");
  CHECK(net.neurons().size() == 2);
  CHECK(net.output() == 1);
  CHECK(eval_network(net, std::vector<double>{9, 9, 9}) == 1.0);
}
