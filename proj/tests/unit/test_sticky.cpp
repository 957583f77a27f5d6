#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "gwb/error.hpp"
#include "gwb/sticky.hpp"
#include "random_instances.hpp"

using namespace gwb;
using sticky::ParticleState;

namespace {

using D = DiscreteMeasure1D;

const ParticleState head_on({-1, 1}, {1, -1}, {0.5, 0.5});

double mean(const D& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m.masses()[i] * m.atoms()[i];
  return s;
}

double total(const D& m) { return std::accumulate(m.masses().begin(), m.masses().end(), 0.0); }

// Event-driven reference: advance to the next adjacent collision, merge the
// colliding clusters with momentum conservation, repeat.
D simulate(const ParticleState& s, double t_end) {
  struct Cluster {
    double x, v, m;
  };
  std::vector<Cluster> c;
  for (std::size_t i = 0; i < s.size(); ++i) c.push_back({s.positions()[i], s.velocities()[i], s.masses()[i]});
  double t = 0.0;
  while (true) {
    double dt = std::numeric_limits<double>::infinity();
    std::size_t hit = 0;
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
      if (c[i].v > c[i + 1].v) {
        const double tau = (c[i + 1].x - c[i].x) / (c[i].v - c[i + 1].v);
        if (tau < dt) {
          dt = tau;
          hit = i;
        }
      }
    }
    if (t + dt > t_end) break;
    for (auto& p : c) p.x += dt * p.v;
    t += dt;
    const double m = c[hit].m + c[hit + 1].m;
    const Cluster merged{(c[hit].m * c[hit].x + c[hit + 1].m * c[hit + 1].x) / m,
                         (c[hit].m * c[hit].v + c[hit + 1].m * c[hit + 1].v) / m, m};
    c[hit] = merged;
    c.erase(c.begin() + static_cast<std::ptrdiff_t>(hit) + 1);
  }
  std::vector<double> x, m;
  for (const auto& p : c) {
    x.push_back(p.x + (t_end - t) * p.v);
    m.push_back(p.m);
  }
  return {x, m};
}

}  // namespace

TEST_CASE("evolve examples") {
  testing::Rng rng(41);
  for (int i = 0; i < 20; ++i) {
    const auto s = testing::random_state(rng);
    CHECK(sticky::evolve(s, 0.0) == s.initial_measure());
  }
  for (double t : {1.0, 1.5, 2.0, 10.0, 1e6}) CHECK(sticky::evolve(head_on, t) == D::dirac(0.0));
  CHECK(sticky::evolve(head_on, 0.5) == D({-0.5, 0.5}, {0.5, 0.5}));
}

TEST_CASE("first collision time") {
  CHECK(sticky::first_collision_time(head_on) == 1.0);
  CHECK(std::isinf(sticky::first_collision_time(ParticleState({0, 1}, {0, 0}, {0.5, 0.5}))));
  CHECK(std::isinf(sticky::first_collision_time(ParticleState({0, 1}, {1, 3}, {0.5, 0.5}))));
}

TEST_CASE("extrapolation identity examples") {
  auto [lhs, rhs] = sticky::extrapolation_identity(head_on, 0.5, 2.0);
  CHECK(lhs == D::dirac(0.0));
  CHECK(w2_1d(rhs, D::dirac(0.0)) <= 1e-12);

  const ParticleState single({0}, {1}, {1});
  std::tie(lhs, rhs) = sticky::extrapolation_identity(single, 1.0, 3.0);
  CHECK(lhs == D::dirac(3.0));
  CHECK(rhs == D::dirac(3.0));

  try {
    sticky::extrapolation_identity(head_on, 1.5, 3.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CollisionBeforeS);
  }
}

TEST_CASE("coincident particles are merged") {
  const ParticleState s({0, 0, 2}, {1, -1, 0}, {0.25, 0.25, 0.5});
  CHECK(s.size() == 2);
  CHECK(s.velocities()[0] == 0.0);
  CHECK(s.masses()[0] == 0.5);
}

TEST_CASE("invalid states") {
  CHECK_THROWS_AS(ParticleState({0, 1}, {0}, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(ParticleState({0, 1}, {0, 0}, {0.5, 0.6}), Error);
  CHECK_THROWS_AS(ParticleState({0, 1}, {0, 0}, {1.0, 0.0}), Error);
}

TEST_CASE("projection matches event-driven simulation") {
  testing::Rng rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = testing::random_state(rng, 12);
    const double t = testing::uniform(rng, 0.0, 8.0);
    const auto got = sticky::evolve(s, t);
    const auto ref = simulate(s, t);
    CHECK(w2_1d(got, ref) <= 1e-9);
  }
}

TEST_CASE("conservation") {
  testing::Rng rng(43);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = testing::random_state(rng, 20);
    for (double t : {0.0, 0.3, 1.0, 4.0, 25.0}) {
      const auto rho = sticky::evolve(s, t);
      CHECK(std::abs(total(rho) - 1.0) <= 1e-12);
      CHECK(std::abs(mean(rho) - s.free_flight_mean(t)) <= 1e-12 * (1.0 + t));
    }
  }
}

TEST_CASE("support never grows once particles stick") {
  testing::Rng rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = testing::random_state(rng, 15);
    std::size_t previous = s.size();
    for (int k = 0; k <= 200; ++k) {
      const std::size_t now = sticky::evolve(s, 0.05 * k).size();
      CHECK(now <= previous);
      previous = now;
    }
  }
}

TEST_CASE("extrapolation identity on random states") {
  testing::Rng rng(45);
  int checked = 0;
  while (checked < 500) {
    const auto s = testing::random_state(rng, 20);
    if (s.size() < 2) continue;
    const double delta = sticky::first_collision_time(s);
    const double s_max = std::isinf(delta) ? 5.0 : delta;
    const double sv = testing::uniform(rng, 0.05, 1.0) * s_max;
    const double tv = sv * testing::uniform(rng, 1.01, 6.0);
    const auto [lhs, rhs] = sticky::extrapolation_identity(s, sv, tv);
    CHECK(w2_1d(lhs, rhs) <= 1e-10);
    ++checked;
  }
}
