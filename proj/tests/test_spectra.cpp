#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "wigner/ensembles.hpp"
#include "wigner/rng.hpp"
#include "wigner/spectra.hpp"

using namespace wigner;
using Catch::Approx;

namespace {
RealMatrix random_symmetric(std::size_t n, std::uint64_t seed) {
  rng::Stream s(seed);
  RealMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = s.normal();
  return a;
}

Tridiagonal random_tridiagonal(std::size_t n, std::uint64_t seed) {
  rng::Stream s(seed);
  Tridiagonal t;
  for (std::size_t i = 0; i < n; ++i) t.diag.push_back(s.normal());
  for (std::size_t i = 0; i + 1 < n; ++i) t.offdiag.push_back(s.normal());
  return t;
}

const Tridiagonal kPair{{0.0, 0.0}, {1.0}};
}  // namespace

TEST_CASE("tridiagonalize validates its input", "[spectra]") {
  RealMatrix a(2);
  a(0, 1) = 1.0;
  a(1, 0) = 1.0 + 1e-15;
  CHECK_THROWS_AS(tridiagonalize(a), ShapeError);
  a(1, 0) = std::nan("");
  CHECK_THROWS_AS(tridiagonalize(a), InvalidArgument);
}

TEST_CASE("tridiagonal input is a fixed point up to signs", "[spectra]") {
  const Tridiagonal t = random_tridiagonal(6, 11);
  const Tridiagonal r = tridiagonalize(oracle::dense(t));
  for (std::size_t i = 0; i < 6; ++i) CHECK(r.diag[i] == Approx(t.diag[i]).margin(1e-14));
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(r.offdiag[i]) == Approx(std::abs(t.offdiag[i])).margin(1e-14));
}

TEST_CASE("2x2 closed form", "[spectra]") {
  RealMatrix a(2);
  a(0, 0) = a(1, 1) = 1.0;
  a(0, 1) = a(1, 0) = 2.0;
  const auto ev = eigenvalues_ql(tridiagonalize(a));
  CHECK(ev[0] == Approx(-1.0).margin(1e-12));
  CHECK(ev[1] == Approx(3.0).margin(1e-12));
}

TEST_CASE("eigenvalue sum equals the trace", "[spectra]") {
  const RealMatrix a = random_symmetric(10, 5);
  double tr = 0;
  for (std::size_t i = 0; i < 10; ++i) tr += a(i, i);
  double s = 0;
  for (double x : eigenvalues_ql(tridiagonalize(a))) s += x;
  CHECK(s == Approx(tr).epsilon(1e-10));
}

TEST_CASE("small tridiagonal spectra", "[spectra]") {
  const auto two = eigenvalues_bisection(kPair);
  CHECK(two[0] == Approx(-1.0).margin(1e-14));
  CHECK(two[1] == Approx(1.0).margin(1e-14));
  const Tridiagonal three{{0.0, 0.0, 0.0}, {1.0, 1.0}};
  for (auto ev : {eigenvalues_ql(three), eigenvalues_bisection(three)}) {
    CHECK(ev[0] == Approx(-std::numbers::sqrt2).margin(1e-14));
    CHECK(ev[1] == Approx(0.0).margin(1e-14));
    CHECK(ev[2] == Approx(std::numbers::sqrt2).margin(1e-14));
  }
}

TEST_CASE("QL and bisection agree with the Jacobi oracle", "[spectra]") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RealMatrix a = random_symmetric(40, seed);
    const auto ref = oracle::jacobi_eigenvalues(a);
    const Tridiagonal t = tridiagonalize(a);
    const auto ql = eigenvalues_ql(t), bis = eigenvalues_bisection(t);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(ql[i] == Approx(ref[i]).margin(1e-10));
      CHECK(bis[i] == Approx(ref[i]).margin(1e-10));
    }
  }
}

TEST_CASE("fast path matches the bisection reference on GOE samples", "[spectra]") {
  for (std::size_t n : {50u, 200u}) {
    const auto r = reduce(sample_goe(n, 99));
    const auto ql = eigenvalues_ql(r.tridiagonal), bis = eigenvalues_bisection(r.tridiagonal);
    for (std::size_t i = 0; i < n; ++i) CHECK(ql[i] == Approx(bis[i]).margin(1e-10));
  }
}

TEST_CASE("QL converges on clustered near-zero spectra", "[spectra]") {
  // Rank-2 matrix: many exactly-zero eigenvalues.
  const std::size_t n = 60;
  RealMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      a(i, j) = a(j, i) = std::sin(0.1 * i) * std::sin(0.1 * j) + 1e-3 * std::cos(0.2 * i) * std::cos(0.2 * j);
  const auto ev = eigenvalues_ql(tridiagonalize(a));
  const auto ref = oracle::jacobi_eigenvalues(a);
  for (std::size_t i = 0; i < n; ++i) CHECK(ev[i] == Approx(ref[i]).margin(1e-12));
}

TEST_CASE("Sturm counts", "[spectra]") {
  CHECK(sturm_count_below(kPair, 0.0) == 1);
  CHECK(sturm_count_below(kPair, 2.0) == 2);
  CHECK(sturm_count_below(kPair, -2.0) == 0);
  CHECK(sturm_count_below(kPair, 1.0) == 1);
  CHECK(sturm_count_at_or_below(kPair, 1.0) == 2);
  CHECK(sturm_count_below(kPair, std::numeric_limits<double>::infinity()) == 2);
  CHECK(sturm_count_below(kPair, -std::numeric_limits<double>::infinity()) == 0);
  CHECK_THROWS_AS(sturm_count_below(kPair, std::nan("")), InvalidArgument);
}

TEST_CASE("Sturm counts match the full-solver oracle", "[spectra]") {
  const RealMatrix a = random_symmetric(50, 17);
  const auto ref = oracle::jacobi_eigenvalues(a);
  const Tridiagonal t = tridiagonalize(a);
  rng::Stream s(4);
  for (int i = 0; i < 100; ++i) {
    const double x = 30.0 * (s.uniform() - 0.5);
    const long expect = std::count_if(ref.begin(), ref.end(), [&](double v) { return v < x; });
    CHECK(sturm_count_below(t, x) == expect);
  }
}

TEST_CASE("Sturm count is monotone and saturates above the Gershgorin bound", "[spectra]") {
  const Tridiagonal t = random_tridiagonal(30, 8);
  const auto b = gershgorin_bounds(t);
  long prev = 0;
  for (double x = b.lo - 1; x <= b.hi + 1; x += 0.01) {
    const long c = sturm_count_below(t, x);
    CHECK(c >= prev);
    prev = c;
  }
  CHECK(sturm_count_below(t, b.hi + 1e-9) == 30);
}

TEST_CASE("interval counts", "[spectra]") {
  CHECK(count_in_interval(kPair, {0.0, std::numeric_limits<double>::infinity()}).count == 1);
  CHECK(count_in_interval(kPair, {-2.0, 2.0}).count == 2);
  const auto hit = count_in_interval(kPair, {-1.0, 2.0});
  CHECK(hit.count == 1);
  CHECK(hit.endpoint_hit);
  CHECK_FALSE(count_in_interval(kPair, {-2.0, 2.0}).endpoint_hit);
  CHECK_THROWS_AS(count_in_interval(kPair, {1.0, 0.0}), InvalidArgument);
}

TEST_CASE("interval counts are additive and match brute force", "[spectra]") {
  rng::Stream s(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto m = sample_goe(12, 1000 + static_cast<std::uint64_t>(trial));
    const auto r = reduce(m);
    const auto ev = eigenvalues(m).values;
    double p[3] = {12 * (s.uniform() - 0.5), 12 * (s.uniform() - 0.5), 12 * (s.uniform() - 0.5)};
    std::sort(p, p + 3);
    const Interval ab{p[0], p[1]}, bc{p[1], p[2]}, ac{p[0], p[2]};
    const long brute = std::count_if(ev.begin(), ev.end(), [&](double v) { return ac.contains(v); });
    REQUIRE(count_in_interval(r, ac).count == brute);
    REQUIRE(count_in_interval(r, ac).count == count_in_interval(r, ab).count + count_in_interval(r, bc).count);
  }
}

TEST_CASE("complex storages are deduplicated", "[spectra]") {
  const auto gue = eigenvalues(sample_gue(7, 3));
  CHECK(gue.size() == 7);
  const auto gse = eigenvalues(sample_gse(3, 3));
  CHECK(gse.size() == 3);
  const auto r = reduce(sample_gue(7, 3));
  CHECK(r.multiplicity == 2);
  CHECK(count_in_interval(r, Interval::whole()).count == 7);
  const auto sel = selected_eigenvalues(r, std::vector<std::size_t>{1, 7});
  CHECK(sel[0] == Approx(gue.at(1)).margin(1e-10));
  CHECK(sel[1] == Approx(gue.at(7)).margin(1e-10));
}

TEST_CASE("deduplicate rejects non-degenerate groups", "[spectra]") {
  const std::vector<double> v{1.0, 1.5};
  CHECK_THROWS_AS(deduplicate(v, 2), NumericalFailure);
  const std::vector<double> odd{1.0, 1.0, 2.0};
  CHECK_THROWS_AS(deduplicate(odd, 2), ShapeError);
}

TEST_CASE("eigenvalue sum matches the trace for every sampler", "[spectra]") {
  const std::vector<EnsembleSpec> specs{
      EnsembleSpec::make(EnsembleKind::GOE, 120, 1),          EnsembleSpec::make(EnsembleKind::GUE, 60, 2),
      EnsembleSpec::make(EnsembleKind::GSE, 30, 3),           EnsembleSpec::make(EnsembleKind::WignerRealMatched, 120, 4),
      EnsembleSpec::make(EnsembleKind::WignerHermitianMatched, 60, 5),
      EnsembleSpec::make(EnsembleKind::TridiagBeta, 500, 6, 2)};
  for (const auto& spec : specs) {
    const auto m = sample(spec);
    double tr = 0;
    switch (m.storage) {
      case Storage::RealSymmetric:
        for (std::size_t i = 0; i < m.real().size(); ++i) tr += m.real()(i, i);
        break;
      case Storage::ComplexHermitian:
        for (std::size_t i = 0; i < m.complex().size(); ++i) tr += m.complex()(i, i).real();
        break;
      case Storage::QuaternionEmbedded:
        for (std::size_t i = 0; i < m.complex().size(); ++i) tr += 0.5 * m.complex()(i, i).real();
        break;
      case Storage::Tridiagonal:
        for (double d : m.tridiagonal().diag) tr += d * m.eigenvalue_scale;
        break;
      default: FAIL("unexpected storage");
    }
    double s = 0;
    for (double x : eigenvalues(m).values) s += x;
    INFO(to_string(spec.kind));
    CHECK(s == Approx(tr).epsilon(1e-10).margin(1e-9));
  }
}

TEST_CASE("interlacing", "[spectra]") {
  RealMatrix a(2);
  a(0, 1) = a(1, 0) = 1.0;
  const auto parent = eigenvalues_ql(tridiagonalize(a));
  const auto child = eigenvalues_ql(tridiagonalize(principal_submatrix(a)));
  CHECK(check_interlacing(parent, child));
  CHECK_FALSE(check_interlacing(std::vector<double>{0.0, 1.0}, std::vector<double>{2.0}));
  CHECK_THROWS_AS(check_interlacing(std::vector<double>{0.0}, std::vector<double>{0.0}), ShapeError);
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto m = sample_goe(20, seed);
    failures += !check_interlacing(eigenvalues(m).values, eigenvalues_ql(tridiagonalize(principal_submatrix(m.real()))));
  }
  CHECK(failures == 0);
}

TEST_CASE("GOE_200 empirical spectral CDF is close to the semicircle", "[spectra]") {
  const auto ev = eigenvalues(sample_goe(200, 5)).values;
  const double s = std::sqrt(400.0);
  double d = 0.0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const double t = std::clamp(ev[i] / s, -1.0, 1.0);
    const double g = (t * std::sqrt(1 - t * t) + std::asin(t) + std::numbers::pi / 2) / std::numbers::pi;
    d = std::max({d, std::abs((i + 1) / 200.0 - g), std::abs(i / 200.0 - g)});
  }
  CHECK(d < 0.08);
}
