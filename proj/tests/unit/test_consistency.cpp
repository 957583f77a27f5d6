#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "gwb/consistency.hpp"
#include "gwb/error.hpp"
#include "gwb/parallel.hpp"

using namespace gwb;
using namespace gwb::consistency;

namespace {

using D = DiscreteMeasure1D;

Population uniform_population() {
  Population p;
  p.positive_mass = 1.5;
  p.positive = {LawPopulation::Kind::Uniform, 0.0, 1.0, 0.5, 2.0, 8};
  p.negative = {LawPopulation::Kind::Dirac, 0.0, 0.5, 0.0, 0.0, 1};
  return p;
}

ApproximationSchedule population_schedule(std::vector<int> ks, std::vector<std::uint64_t> seeds, int ref = 0) {
  return {std::move(ks), std::move(seeds), uniform_population(), ref};
}

double weight_sum(const SignedFamily& f) {
  double s = 0.0;
  for (const auto& e : f.entries()) s += e.weight;
  return s;
}

}  // namespace

TEST_CASE("finite target is returned when k covers it") {
  const SignedFamily target({{2, D::dirac(0)}, {-1, D({-1, 1}, {0.5, 0.5})}});
  const ApproximationSchedule s{{1, 2, 5}, {3}, target, 0};
  const auto f = build_family(s, 2, 3);
  REQUIRE(f.size() == 2);
  CHECK(f.entries()[0].weight == 2.0);
  CHECK(std::get<D>(f.entries()[1].measure) == D({-1, 1}, {0.5, 0.5}));
  CHECK(build_family(s, 5, 9).size() == 2);
}

TEST_CASE("single-measure population collapses") {
  Population p;
  p.positive_mass = 1.0;
  p.positive = {LawPopulation::Kind::Dirac, 2.5, 0.0, 0.0, 0.0, 1};
  p.negative = p.positive;
  const ApproximationSchedule s{{1, 8, 64}, {1}, p, 0};
  for (int k : {1, 8, 64}) {
    const auto f = build_family(s, k, 1);
    REQUIRE(f.size() == 1);
    CHECK(f.entries()[0].weight == 1.0);
    CHECK(std::get<D>(f.entries()[0].measure) == D::dirac(2.5));
  }
}

TEST_CASE("sampled families are reproducible") {
  const auto s = population_schedule({8}, {42});
  const auto a = build_family(s, 8, 42);
  const auto b = build_family(s, 8, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.entries()[i].weight == b.entries()[i].weight);
    CHECK(std::get<D>(a.entries()[i].measure) == std::get<D>(b.entries()[i].measure));
  }
  const auto c = build_family(s, 8, 43);
  CHECK(std::get<D>(c.entries()[0].measure) != std::get<D>(a.entries()[0].measure));
}

TEST_CASE("larger families extend smaller ones") {
  const auto s = population_schedule({4, 16, 64}, {11});
  const auto small = build_family(s, 16, 11);
  const auto large = build_family(s, 64, 11);
  for (const auto& e : small.entries()) {
    const auto& m = std::get<D>(e.measure);
    CHECK(std::any_of(large.entries().begin(), large.entries().end(), [&](const FamilyEntry& x) {
      return std::get<D>(x.measure) == m && (x.weight > 0) == (e.weight > 0);
    }));
  }
}

TEST_CASE("hypothesis fidelity") {
  const auto s = population_schedule({4, 16, 64, 256}, {1, 2, 3, 4, 5});
  const double bound = uniform_population().moment_bound();
  for (std::uint64_t seed : s.seeds) {
    for (int k : s.k_values) {
      const auto f = build_family(s, k, seed);
      CHECK(std::abs(weight_sum(f) - 1.0) <= 1e-15 * k);
      CHECK(f.size() <= static_cast<std::size_t>(k));
      const auto st = family_stats(f);
      CHECK(st.total_variation == doctest::Approx(2.0));
      CHECK(st.moment2 <= 2.0 * bound);
      double plus = 0.0;
      for (const auto& e : f.entries()) plus += std::max(e.weight, 0.0);
      CHECK(plus == doctest::Approx(1.5));
    }
  }
}

TEST_CASE("expected second moment matches sampling") {
  const LawPopulation lp{LawPopulation::Kind::Uniform, 0.3, 0.7, 0.5, 2.0, 5};
  std::mt19937_64 rng(5);
  double acc = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) acc += second_moment(lp.sample(rng)).value;
  CHECK(acc / n == doctest::Approx(lp.expected_moment2()).epsilon(0.01));
}

TEST_CASE("sampling a finite target") {
  const SignedFamily target({{0.75, D::dirac(0)}, {0.75, D::dirac(1)}, {-0.5, D::dirac(4)}});
  const ApproximationSchedule s{{2}, {1}, target, 0};
  const auto f = build_family(s, 2, 1);
  CHECK(std::abs(weight_sum(f) - 1.0) <= 1e-15);
  double minus = 0.0;
  for (const auto& e : f.entries()) minus += std::min(e.weight, 0.0);
  CHECK(minus == doctest::Approx(-0.5));
}

TEST_CASE("exact target gives zero gap") {
  const SignedFamily target({{2, D({0, 2}, {0.5, 0.5})}, {-1, D::dirac(1)}});
  const ApproximationSchedule s{{2, 4}, {1, 2}, target, 0};
  const auto r = run_consistency(s);
  CHECK_FALSE(r.reference_is_proxy);
  REQUIRE(r.runs.size() == 4);
  for (const auto& run : r.runs) {
    CHECK(run.w2_gap == 0.0);
    CHECK(run.energy == r.references.front().energy);
  }
}

TEST_CASE("report order and determinism across thread counts") {
  const auto s = population_schedule({4, 16, 64}, {7, 8, 9}, 128);
  setenv("GWB_THREADS", "1", 1);
  const auto serial = run_consistency(s);
  setenv("GWB_THREADS", "4", 1);
  const auto parallel = run_consistency(s);
  unsetenv("GWB_THREADS");
  REQUIRE(serial.runs.size() == 9);
  for (std::size_t i = 0; i < serial.runs.size(); ++i) {
    CHECK(serial.runs[i].seed == s.seeds[i / 3]);
    CHECK(serial.runs[i].k == s.k_values[i % 3]);
    CHECK(serial.runs[i].energy == parallel.runs[i].energy);
    CHECK(serial.runs[i].w2_gap == parallel.runs[i].w2_gap);
  }
  CHECK(serial.reference_is_proxy);
  CHECK(serial.reference_k == 128);
  CHECK(median_trend(serial).size() == 3);
}

TEST_CASE("schedule validation") {
  CHECK_THROWS_AS(population_schedule({4, 4}, {1}).validate(), Error);
  CHECK_THROWS_AS(population_schedule({0, 4}, {1}).validate(), Error);
  CHECK_THROWS_AS(population_schedule({4}, {}).validate(), Error);
  auto s = population_schedule({4}, {1});
  std::get<Population>(s.target).positive_mass = 0.5;
  CHECK_THROWS_AS(s.validate(), Error);
  CHECK(population_schedule({4, 16}, {1}).effective_reference_k() == 64);
}

TEST_CASE("parallel_for runs every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 3) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}
