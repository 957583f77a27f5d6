#include "gwb/sticky.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gwb/bary1d.hpp"
#include "gwb/error.hpp"
#include "gwb/isotonic.hpp"

namespace gwb::sticky {

ParticleState::ParticleState(std::vector<double> positions, std::vector<double> velocities,
                             std::vector<double> masses) {
  if (positions.empty() || positions.size() != velocities.size() || positions.size() != masses.size()) {
    throw Error(ErrorCode::InvalidMeasure, "positions, velocities and masses must be nonempty and equally long");
  }
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!std::isfinite(positions[i]) || !std::isfinite(velocities[i])) {
      throw Error(ErrorCode::InvalidMeasure, "non-finite particle data");
    }
    if (!(masses[i] > 0.0)) throw Error(ErrorCode::InvalidMeasure, "particle masses must be positive");
  }
  if (std::abs(std::accumulate(masses.begin(), masses.end(), 0.0) - 1.0) > kMassTolerance) {
    throw Error(ErrorCode::InvalidMeasure, "particle masses must sum to 1");
  }

  std::vector<std::size_t> order(positions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return positions[a] < positions[b]; });

  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && positions[order[j]] - positions[order[j - 1]] < kAtomMergeTolerance) ++j;
    if (j == i + 1) {
      positions_.push_back(positions[order[i]]);
      velocities_.push_back(velocities[order[i]]);
      masses_.push_back(masses[order[i]]);
    } else {
      double m = 0.0, mx = 0.0, mv = 0.0;
      for (std::size_t k = i; k < j; ++k) {
        m += masses[order[k]];
        mx += masses[order[k]] * positions[order[k]];
        mv += masses[order[k]] * velocities[order[k]];
      }
      positions_.push_back(mx / m);
      velocities_.push_back(mv / m);
      masses_.push_back(m);
    }
    i = j;
  }
}

double ParticleState::free_flight_mean(double t) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) acc += masses_[i] * (positions_[i] + t * velocities_[i]);
  return acc;
}

DiscreteMeasure1D evolve(const ParticleState& state, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidMeasure, "time must be nonnegative");
  isotonic::WeightedSteps flight{std::vector<double>(state.size()), state.masses()};
  for (std::size_t i = 0; i < state.size(); ++i) {
    flight.values[i] = state.positions()[i] + t * state.velocities()[i];
  }
  const auto projected = isotonic::project_pava(flight);
  return measure_of(StepQuantile(projected.values, projected.weights));
}

double first_collision_time(const ParticleState& state) {
  double best = std::numeric_limits<double>::infinity();
  const auto& x = state.positions();
  const auto& v = state.velocities();
  for (std::size_t i = 0; i + 1 < state.size(); ++i) {
    if (v[i] > v[i + 1]) best = std::min(best, (x[i + 1] - x[i]) / (v[i] - v[i + 1]));
  }
  return best;
}

std::pair<DiscreteMeasure1D, DiscreteMeasure1D> extrapolation_identity(const ParticleState& state, double s,
                                                                       double t) {
  if (!(s > 0.0) || !(t > s)) throw Error(ErrorCode::InvalidMeasure, "need 0 < s < t");
  if (s > first_collision_time(state)) {
    throw Error(ErrorCode::CollisionBeforeS, "s exceeds the first collision time");
  }
  const double ratio = t / s;
  const SignedFamily family({{1.0 - ratio, state.initial_measure()}, {ratio, evolve(state, s)}});
  return {evolve(state, t), std::get<DiscreteMeasure1D>(barycenter(family))};
}

}  // namespace gwb::sticky
