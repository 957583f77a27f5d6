#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gwb/bary1d.hpp"
#include "gwb/error.hpp"
#include "random_instances.hpp"

using namespace gwb;

namespace {

using D = DiscreteMeasure1D;

SignedFamily fam(std::vector<FamilyEntry> e) { return SignedFamily(std::move(e)); }

const D& as_discrete(const Law& l) { return std::get<D>(l); }

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidMeasure;
}

// Energy by brute force: W2^2 from the quantile pair evaluated on a fine
// midpoint grid of a common refinement built by hand.
double w2sq_by_breakpoints(const D& a, const D& b) {
  std::vector<double> cuts{0.0, 1.0};
  double c = 0.0;
  for (double m : a.masses()) cuts.push_back(c += m);
  c = 0.0;
  for (double m : b.masses()) cuts.push_back(c += m);
  std::sort(cuts.begin(), cuts.end());
  const auto qa = quantile_of(a);
  const auto qb = quantile_of(b);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = std::min(cuts[i + 1], 1.0) - cuts[i];
    if (len <= 1e-15) continue;
    const double t = 0.5 * (cuts[i] + std::min(cuts[i + 1], 1.0));
    s += len * (qa(t) - qb(t)) * (qa(t) - qb(t));
  }
  return s;
}

}  // namespace

TEST_CASE("family validation") {
  CHECK(code_of([] { fam({{0.5, D::dirac(0)}}); }) == ErrorCode::WeightSumInvalid);
  CHECK(code_of([] { fam({}); }) == ErrorCode::WeightSumInvalid);
  CHECK(code_of([] { fam({{0.7, D::dirac(0)}, {0.7, D::dirac(1)}}); }) == ErrorCode::WeightSumInvalid);
  CHECK_NOTHROW(fam({{0.5 + 5e-11, D::dirac(0)}, {0.5, D::dirac(1)}}));
}

TEST_CASE("barycenter examples") {
  const D nu({0.3, 1.7}, {0.4, 0.6});
  CHECK(as_discrete(barycenter(fam({{1, nu}}))) == nu);

  const auto b = as_discrete(barycenter(fam({{2, D({0, 2}, {0.5, 0.5})}, {-1, D::dirac(1)}})));
  CHECK(b == D({-1, 3}, {0.5, 0.5}));

  const auto pooled = as_discrete(barycenter(fam({{2, D::dirac(0)}, {-1, D({-1, 1}, {0.5, 0.5})}})));
  CHECK(pooled == D::dirac(0));
}

TEST_CASE("energy examples") {
  CHECK(energy(fam({{1, D::dirac(0)}}), D::dirac(0)) == 0.0);
  CHECK(energy(fam({{2, D::dirac(0)}, {-1, D::dirac(1)}}), D::dirac(2)) == doctest::Approx(7.0));
  CHECK(energy(fam({{2, D::dirac(0)}, {-1, D({-1, 1}, {0.5, 0.5})}}), D::dirac(0)) == doctest::Approx(-1.0));
}

TEST_CASE("family stats") {
  auto s = family_stats(fam({{1, D::dirac(0)}}));
  CHECK(s.total_variation == 1.0);
  CHECK(s.moment2 == 0.0);
  s = family_stats(fam({{2, D::dirac(1)}, {-1, D::dirac(2)}}));
  CHECK(s.total_variation == 3.0);
  CHECK(s.moment2 == 6.0);
  s = family_stats(fam({{0.5, D::dirac(0)}, {0.5, D::dirac(2)}}));
  CHECK(s.total_variation == 1.0);
  CHECK(s.moment2 == 2.0);
}

TEST_CASE("lower bound examples") {
  auto oracle_rhs = [](const SignedFamily& f, const D& mu) {
    double m = 0.0, m2 = 0.0;
    for (const auto& e : f.entries()) {
      m += std::abs(e.weight);
      m2 += std::abs(e.weight) * second_moment(e.measure).value;
    }
    return 0.5 * second_moment(mu).value - (1.0 + 2.0 * m) * m2;
  };
  auto b = lower_bound(fam({{1, D::dirac(0)}}), D::dirac(0));
  CHECK(b.lhs == 0.0);
  CHECK(b.rhs == 0.0);
  b = lower_bound(fam({{1, D::dirac(1)}}), D::dirac(0));
  CHECK(b.lhs == doctest::Approx(1.0));
  CHECK(b.rhs == doctest::Approx(-3.0));
  const auto f = fam({{2, D::dirac(0)}, {-1, D::dirac(1)}});
  b = lower_bound(f, D::dirac(0));
  CHECK(b.lhs == doctest::Approx(-1.0));
  CHECK(b.rhs == doctest::Approx(oracle_rhs(f, D::dirac(0))));
  CHECK(b.rhs == doctest::Approx(-7.0));
}

TEST_CASE("stability examples") {
  const std::vector<D> a{D::dirac(0), D::dirac(1)};
  const std::vector<double> w{0.5, 0.5};
  auto g = stability_gap(a, a, w);
  CHECK(g.lhs == 0.0);
  CHECK(g.rhs == 0.0);
  const std::vector<D> b{D::dirac(1), D::dirac(2)};
  g = stability_gap(a, b, w);
  CHECK(g.lhs == doctest::Approx(1.0));
  CHECK(g.rhs == doctest::Approx(1.0));
}

TEST_CASE("gauss-dirac parameters") {
  auto p = gauss_dirac_params({0, 2}, {0, 1});
  CHECK(p.lambda_bar == 0.5);
  CHECK(p.z_bar == 0.0);
  p = gauss_dirac_params({1, 2}, {0, 1});
  CHECK(p.lambda_bar == 0.5);
  CHECK(p.z_bar == -1.0);
  CHECK(code_of([] { gauss_dirac_params({0, 1}, {0, 2}); }) == ErrorCode::StdOrder);
  CHECK(code_of([] { gauss_dirac_params({0, 1}, {0, 1}); }) == ErrorCode::StdOrder);
  CHECK(code_of([] { gauss_dirac_params({0, 1}, {0, 0}); }) == ErrorCode::InvalidMeasure);
}

TEST_CASE("gauss-dirac collapse") {
  for (auto [g1, g2] : std::vector<std::pair<GaussianParams, GaussianParams>>{
           {{1, 2}, {0, 1}}, {{0, 2}, {0, 1}}, {{-3, 5}, {2, 0.5}}, {{0.5, 1.2}, {0.1, 1.0}}}) {
    const auto p = gauss_dirac_params(g1, g2);
    const auto family = gauss_dirac_family(g1, g2, 2000);
    // the weighted grid sum is already constant up to rounding
    const auto sum = quantile_sum(family);
    for (double v : sum.values) CHECK(v == doctest::Approx(p.z_bar).epsilon(1e-9).scale(1.0));
    CHECK(w2(barycenter(family), D::dirac(p.z_bar)) <= 0.05);
  }
}

TEST_CASE("grid and discrete entries share a grid") {
  const auto f = fam({{0.5, uniform_grid(0, 1, 4)}, {0.5, D({0, 1}, {0.5, 0.5})}});
  CHECK(f.grid_size() == 4);
  const auto b = std::get<GridQuantile>(barycenter(f));
  CHECK(b.values() == std::vector<double>{0.0625, 0.1875, 0.8125, 0.9375});
}

TEST_CASE("certificate examples") {
  const auto f = fam({{2, D({0, 2}, {0.5, 0.5})}, {-1, D({-1, 4}, {0.7, 0.3})}});
  const Law b = barycenter(f);
  CHECK(argmin_certificate(f, b, 500, 0.5, 1));

  const auto& bd = as_discrete(b);
  std::vector<double> shifted = bd.atoms();
  for (auto& x : shifted) x += 1.0;
  CHECK_FALSE(argmin_certificate(f, D(shifted, bd.masses()), 500, 0.5, 1));

  CHECK(argmin_certificate(fam({{1, D::dirac(0)}}), D::dirac(0), 500, 0.5, 1));
}

TEST_CASE("energy of a shift is quadratic") {
  // E(b + c) = E(b) + c^2 when the family weights sum to 1 and b is the minimizer.
  testing::Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = testing::random_family(rng);
    const auto b = as_discrete(barycenter(f));
    std::vector<double> shifted = b.atoms();
    for (auto& x : shifted) x += 0.75;
    CHECK(energy(f, D(shifted, b.masses())) == doctest::Approx(energy(f, b) + 0.5625).epsilon(1e-9));
  }
}

TEST_CASE("energy matches a hand refinement") {
  testing::Rng rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = testing::random_family(rng);
    const auto mu = testing::random_measure(rng);
    double expected = 0.0;
    for (const auto& e : f.entries()) expected += e.weight * w2sq_by_breakpoints(mu, std::get<D>(e.measure));
    CHECK(energy(f, mu) == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("translation equivariance") {
  testing::Rng rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = testing::random_family(rng);
    const double t = testing::uniform(rng, -4, 4);
    std::vector<FamilyEntry> moved;
    for (const auto& e : f.entries()) {
      const auto& m = std::get<D>(e.measure);
      std::vector<double> atoms = m.atoms();
      for (auto& x : atoms) x += t;
      moved.push_back({e.weight, D(atoms, m.masses())});
    }
    const auto b0 = as_discrete(barycenter(f));
    const auto b1 = as_discrete(barycenter(SignedFamily(moved)));
    const auto q0 = quantile_of(b0);
    const auto q1 = quantile_of(b1);
    for (int i = 0; i < 50; ++i) {
      const double s = (i + 0.5) / 50.0;
      CHECK(q1(s) == doctest::Approx(q0(s) + t).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("monotone sums need no projection") {
  testing::Rng rng(34);
  int seen = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const auto f = testing::random_family(rng);
    const auto sum = quantile_sum(f);
    if (!std::is_sorted(sum.values.begin(), sum.values.end())) continue;
    ++seen;
    const auto b = quantile_of(barycenter(f));
    // compare pointwise; merged equal values change the partition, not the function
    double c = 0.0;
    for (std::size_t i = 0; i < sum.values.size(); ++i) {
      const double mid = c + 0.5 * sum.weights[i];
      c += sum.weights[i];
      CHECK(b(mid) == sum.values[i]);
    }
  }
  CHECK(seen > 20);
}

TEST_CASE("properties on random families") {
  testing::Rng rng(35);
  for (int trial = 0; trial < 300; ++trial) {
    const auto f = testing::random_family(rng);
    const Law b = barycenter(f);
    const auto mu = testing::random_measure(rng);
    CHECK(energy(f, b) <= energy(f, mu) + 1e-9);
    const auto lb = lower_bound(f, mu);
    CHECK(lb.lhs >= lb.rhs);
    const auto st = family_stats(f);
    CHECK(st.total_variation >= 1.0 - 1e-12);
  }
}
