#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "pnet/error.hpp"
#include "pnet/features.hpp"

using namespace pnet;

namespace {

std::vector<double> tone(double freq, double rate, double seconds, double amp = 1.0, double phase = 0.0) {
  const auto n = static_cast<std::size_t>(std::llround(rate * seconds));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate + phase);
  return x;
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (double& v : x) v = g(rng);
  return x;
}

// Two-sided DFT by definition; one-sided power folds bin k with bin N-k.
std::vector<double> oracle_periodogram(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> two(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<long double> s = 0;
    for (std::size_t i = 0; i < n; ++i)
      s += static_cast<long double>(x[i]) *
           std::polar(1.0L, -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k * i % n) /
                                static_cast<long double>(n));
    two[k] = static_cast<double>(std::norm(s) / static_cast<long double>(n));
  }
  std::vector<double> one(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) one[k] = two[k] + ((k != 0 && 2 * k != n) ? two[n - k] : 0.0);
  return one;
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("segmentation examples") {
  CHECK(segment_count(8 * 256, SegmentSpec{0.5, 0.25, 256}) == 31);
  CHECK(segment_count(8 * 200, SegmentSpec{0.5, 0.25, 200}) == 31);
  CHECK(segment_count(50, SegmentSpec{0.5, 0.25, 100}) == 1);
  CHECK(segment_count(12000, SegmentSpec{10, 10, 100}) == 12);
  CHECK_THROWS_AS(segment_count(49, SegmentSpec{0.5, 0.25, 100}), DataError);
  CHECK_THROWS_AS(segment_count(100, SegmentSpec{0.5, 0.75, 100}), InvalidArgument);

  std::vector<double> ramp(20);
  for (std::size_t i = 0; i < 20; ++i) ramp[i] = static_cast<double>(i);
  const auto windows = segment(ramp, SegmentSpec{0.5, 0.3, 10});  // 5 samples, step 3
  REQUIRE(windows.size() == 6);
  CHECK(windows[1] == std::vector<double>{3, 4, 5, 6, 7});
  CHECK(windows.back().back() == 19);
}

TEST_CASE("segment count matches a window-walking count") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t w = 2 + rng() % 50;
    const std::size_t s = 1 + rng() % w;
    const std::size_t len = w + rng() % 500;
    std::size_t count = 0;
    for (std::size_t start = 0; start + w <= len; start += s) ++count;
    CHECK(segment_count(len, SegmentSpec{static_cast<double>(w) / 10.0, static_cast<double>(s) / 10.0, 10.0}) ==
          count);
  }
}

TEST_CASE("periodogram matches a direct complex DFT") {
  for (std::size_t n : {2u, 7u, 16u, 33u, 100u}) {
    const auto x = noise(n, n);
    const auto p = periodogram(x);
    const auto o = oracle_periodogram(x);
    REQUIRE(p.size() == o.size());
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(p[k] == doctest::Approx(o[k]).epsilon(1e-10).scale(1e-12));
    CHECK(sum(p) == doctest::Approx([&] {
            double e = 0;
            for (double v : x) e += v * v;
            return e;
          }()).epsilon(1e-12));
  }
}

TEST_CASE("band power of a pure tone, zeros and a constant") {
  const auto x = tone(10.0, 100.0, 10.0);
  const auto neo = band_preset("neo6");
  const auto p = band_powers(x, 100.0, neo);
  CHECK(p[3] / sum(p) >= 0.95);
  CHECK(band_power(x, 100.0, BandSpec{"alpha", 7.5, 13.5}) == doctest::Approx(sum(p)).epsilon(1e-9));

  const std::vector<double> zeros(256, 0.0);
  for (double v : band_powers(zeros, 100.0, neo)) CHECK(v == 0.0);

  const std::vector<double> dc(256, 2.5);
  const auto q = band_powers(dc, 100.0, neo);
  CHECK(q[0] == doctest::Approx(2.5 * 2.5 * 256).epsilon(1e-12));
  for (std::size_t b = 1; b < q.size(); ++b) CHECK(std::abs(q[b]) <= 1e-18 * 256);

  CHECK_THROWS_AS(band_power(x, 40.0, BandSpec{"beta", 13.5, 25.0}), InvalidArgument);
}

TEST_CASE("bands covering the spectrum conserve power") {
  for (std::size_t n : {100u, 101u, 256u}) {
    const auto x = noise(n, 40 + n);
    double energy = 0.0;
    for (double v : x) energy += v * v;
    const std::vector<BandSpec> cover{{"lo", 0.0, 12.5}, {"mid", 12.5, 31.0}, {"hi", 31.0, 50.0}};
    CHECK(sum(band_powers(x, 100.0, cover)) == doctest::Approx(energy).epsilon(1e-9));
  }
}

TEST_CASE("an out-of-band tone leaves band power unchanged") {
  const auto a = tone(10.0, 100.0, 10.0);
  const auto b = tone(37.3, 100.0, 10.0, 3.0, 0.4);  // off-bin: leaks under the rectangular taper
  std::vector<double> mix(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) mix[i] = a[i] + b[i];
  const BandSpec alpha{"alpha", 7.5, 13.5};
  const double clean = band_power(a, 100.0, alpha);
  CHECK(std::abs(band_power(mix, 100.0, alpha) - clean) / clean <= 1e-2);
}

TEST_CASE("feature layout for both recipes") {
  const double rate = 100.0;
  std::vector<Channel> two{{"C3", tone(10, rate, 8)}, {"C4", noise(800, 1)}};
  ExtractOptions opt;
  opt.mode = PowerMode::absolute_relative;
  opt.sums = {parse_sum_channel("C3+C4")};
  const auto neo = extract_band_features(two, band_preset("neo6"), SegmentSpec{2, 1, rate}, opt);
  CHECK(neo.table.cols() == 36);
  CHECK(neo.table.rows() == 7);
  for (const char* name : {"AbsPowThetaC4", "RelPowThetaC4", "AbsPowSubdeltaC3", "RelPowBeta2C3",
                           "AbsPowSubdeltaC4", "RelPowTheta", "AbsPowAlpha", "RelPowAlphaC4"})
    CHECK(neo.table.find(name).has_value());
  CHECK(neo.table.names()[0] == "AbsPowSubdeltaC3");
  CHECK(neo.table.names()[18] == "RelPowSubdeltaC3");

  std::vector<Channel> nineteen;
  for (int c = 1; c <= 19; ++c) nineteen.push_back({"C" + std::to_string(c), noise(1600, c)});
  const auto alz = extract_band_features(nineteen, band_preset("alz4"), SegmentSpec{0.5, 0.25, 200});
  CHECK(alz.table.cols() == 76);
  CHECK(alz.table.rows() == 31);
  CHECK(alz.table.names()[10] == "AbsPowDeltaC11");
  CHECK(alz.table.names()[68] == "AbsPowBetaC12");
  CHECK(alz.table.names()[72] == "AbsPowBetaC16");
  CHECK(alz.table.names()[75] == "AbsPowBetaC19");
}

TEST_CASE("relative powers sum to one and isolate an in-band tone") {
  std::vector<Channel> ch{{"A", tone(10, 100, 20)}, {"B", noise(2000, 9)}};
  ExtractOptions opt;
  opt.mode = PowerMode::absolute_relative;
  const auto bands = band_preset("neo6");
  const auto r = extract_band_features(ch, bands, SegmentSpec{10, 5, 100}, opt);
  CHECK(r.undefined_segments.empty());
  for (std::size_t row = 0; row < r.table.rows(); ++row) {
    for (const char* c : {"A", "B"}) {
      double s = 0.0;
      for (const auto& b : bands) s += r.table.at(row, *r.table.find("RelPow" + b.name + c));
      CHECK(std::abs(s - 1.0) <= 1e-9);
    }
    CHECK(r.table.at(row, *r.table.find("RelPowAlphaA")) >= 0.95);
  }
}

TEST_CASE("sum channel equals summing the signals first") {
  const auto a = noise(1000, 3), b = noise(1000, 4);
  std::vector<double> s(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) s[i] = a[i] + b[i];
  ExtractOptions opt;
  opt.mode = PowerMode::absolute_relative;
  opt.sums = {parse_sum_channel("C3+C4=S")};
  const auto bands = band_preset("neo6");
  const SegmentSpec spec{2, 1, 100};
  const auto with_sum = extract_band_features(std::vector<Channel>{{"C3", a}, {"C4", b}}, bands, spec, opt);
  const auto direct = extract_band_features(std::vector<Channel>{{"S", s}}, bands, spec,
                                            ExtractOptions{PowerMode::absolute_relative, {}, Taper::rect, 1});
  for (const auto& name : direct.table.names()) {
    const auto c1 = *with_sum.table.find(name), c2 = *direct.table.find(name);
    for (std::size_t r = 0; r < direct.table.rows(); ++r) CHECK(with_sum.table.at(r, c1) == direct.table.at(r, c2));
  }
}

TEST_CASE("silent segments have undefined relative powers") {
  std::vector<double> x = noise(400, 5);
  for (std::size_t i = 100; i < 200; ++i) x[i] = 0.0;
  ExtractOptions opt;
  opt.mode = PowerMode::absolute_relative;
  const auto r = extract_band_features(std::vector<Channel>{{"A", x}}, band_preset("alz4"), SegmentSpec{1, 1, 100}, opt);
  CHECK(r.undefined_segments == std::vector<std::size_t>{1});
  CHECK(std::isnan(r.table.at(1, *r.table.find("RelPowAlphaA"))));
  CHECK(r.table.at(1, *r.table.find("AbsPowAlphaA")) == 0.0);
  CHECK_FALSE(std::isnan(r.table.at(0, *r.table.find("RelPowAlphaA"))));
}

TEST_CASE("extraction is thread-count invariant") {
  std::vector<Channel> ch{{"C3", noise(3000, 1)}, {"C4", noise(3000, 2)}};
  ExtractOptions opt;
  opt.mode = PowerMode::absolute_relative;
  opt.sums = {parse_sum_channel("C3+C4")};
  const auto a = extract_band_features(ch, band_preset("neo6"), SegmentSpec{1, 0.5, 100}, opt);
  opt.threads = 4;
  const auto b = extract_band_features(ch, band_preset("neo6"), SegmentSpec{1, 0.5, 100}, opt);
  for (std::size_t c = 0; c < a.table.cols(); ++c)
    for (std::size_t r = 0; r < a.table.rows(); ++r) CHECK(a.table.at(r, c) == b.table.at(r, c));
}

TEST_CASE("band and sum channel parsing") {
  CHECK_THROWS_AS(band_preset("nope"), InvalidArgument);
  CHECK_THROWS_AS(validate_bands(std::vector<BandSpec>{{"a", 0, 4}, {"b", 3, 8}}), InvalidArgument);
  CHECK_THROWS_AS(validate_bands(std::vector<BandSpec>{{"a", 4, 4}}), InvalidArgument);
  const SumChannel s = parse_sum_channel("C3+C4=Sum");
  CHECK(s.a == "C3");
  CHECK(s.b == "C4");
  CHECK(s.label == "Sum");
  CHECK(parse_sum_channel("C3+C4").label.empty());
  CHECK_THROWS_AS(parse_sum_channel("C3"), InvalidArgument);
  CHECK_THROWS_AS(parse_sum_channel("C3+"), InvalidArgument);
  CHECK_THROWS_AS(extract_band_features(std::vector<Channel>{{"C3", noise(200, 1)}}, band_preset("alz4"),
                                        SegmentSpec{1, 1, 100}, ExtractOptions{PowerMode::absolute, {parse_sum_channel("C3+C9")}, Taper::rect, 1}),
                  DataError);
}

TEST_CASE("signal CSV reading") {
  std::istringstream in("C3,C4\n1,2\n3,4\n5,6\n");
  const auto ch = read_signal_csv(in);
  REQUIRE(ch.size() == 2);
  CHECK(ch[1].name == "C4");
  CHECK(ch[1].samples == std::vector<double>{2, 4, 6});
  std::istringstream bad("C3\nx\n");
  CHECK_THROWS(read_signal_csv(bad));
}

TEST_CASE("normalization") {
  FeatureTable t({"a", "b"}, 3);
  const double a[] = {1, 2, 3}, b[] = {10, -4, 7.5};
  for (std::size_t i = 0; i < 3; ++i) t.at(i, 0) = a[i], t.at(i, 1) = b[i];
  const NormStats s = normalize_fit(t);
  CHECK(s.entries[0].mean == 2.0);
  CHECK(s.entries[0].stddev == 1.0);
  const FeatureTable z = normalize_apply(t, s);
  CHECK(z.column(0)[0] == -1.0);
  CHECK(z.column(0)[1] == 0.0);
  CHECK(z.column(0)[2] == 1.0);

  FeatureTable big({"x", "y", "z"}, 500);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(5.0, 3.0);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 500; ++i) big.at(i, c) = g(rng) * static_cast<double>(c + 1);
  const FeatureTable nz = normalize_apply(big, normalize_fit(big));
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0, ss = 0;
    for (double v : nz.column(c)) m += v;
    m /= 500;
    for (double v : nz.column(c)) ss += (v - m) * (v - m);
    CHECK(std::abs(m) <= 1e-9);
    CHECK(std::abs(std::sqrt(ss / 499) - 1.0) <= 1e-9);
  }

  FeatureTable other({"a", "c"}, 3);
  CHECK_THROWS_AS(normalize_apply(other, s), InputShapeError);
  FeatureTable flat({"a"}, 3);
  CHECK_THROWS_AS(normalize_fit(flat), DataError);
}
