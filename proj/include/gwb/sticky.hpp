#pragma once

// One-dimensional sticky particle dynamics from atomic initial data.
//
// With X0 the initial quantile and V0 the velocity carried along it, the
// state at time t is the monotone projection of X0 + t V0. No time stepping
// is involved: any t is evaluated directly.

#include <utility>
#include <vector>

#include "gwb/measures.hpp"

namespace gwb::sticky {

class ParticleState {
 public:
  /// Sorts by position. Particles closer than kAtomMergeTolerance are merged
  /// into one with the summed mass and mass-weighted position and velocity.
  /// Throws Error(InvalidMeasure) on bad sizes, masses or totals.
  ParticleState(std::vector<double> positions, std::vector<double> velocities, std::vector<double> masses);

  const std::vector<double>& positions() const noexcept { return positions_; }
  const std::vector<double>& velocities() const noexcept { return velocities_; }
  const std::vector<double>& masses() const noexcept { return masses_; }
  std::size_t size() const noexcept { return positions_.size(); }

  DiscreteMeasure1D initial_measure() const { return {positions_, masses_}; }
  /// sum m_i (x_i + t v_i).
  double free_flight_mean(double t) const;

 private:
  std::vector<double> positions_;
  std::vector<double> velocities_;
  std::vector<double> masses_;
};

/// Density at time t >= 0 as a discrete measure.
DiscreteMeasure1D evolve(const ParticleState& state, double t);

/// First time an adjacent pair meets under free flight; +inf if never.
double first_collision_time(const ParticleState& state);

/// lhs = evolve(state, t); rhs = barycenter of (1 - t/s, rho_0), (t/s, rho_s).
/// The two agree whenever 0 < s <= first collision time and t > s.
/// Throws Error(CollisionBeforeS) if s exceeds the first collision time.
std::pair<DiscreteMeasure1D, DiscreteMeasure1D> extrapolation_identity(const ParticleState& state, double s,
                                                                       double t);

}  // namespace gwb::sticky
