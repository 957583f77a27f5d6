#pragma once

// Empirical consistency of signed barycenters in 1D: approximate a target
// signed weighting by k-entry families drawn i.i.d. from its positive and
// negative parts, and track how the minimal energies and minimizers of the
// approximations approach those of the target as k grows.

#include <cstdint>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "gwb/bary1d.hpp"

namespace gwb::consistency {

/// Distribution over 1D measures. Dirac: delta_c. Uniform: `atoms` equally
/// weighted points spread evenly over a window of width w centred at c.
/// In both cases c ~ N(center_mean, center_std^2); w ~ U(width_min, width_max).
struct LawPopulation {
  enum class Kind { Dirac, Uniform };
  Kind kind = Kind::Dirac;
  double center_mean = 0.0;
  double center_std = 1.0;
  double width_min = 1.0;
  double width_max = 1.0;
  int atoms = 8;

  DiscreteMeasure1D sample(std::mt19937_64& rng) const;
  /// Expected second moment of a draw.
  double expected_moment2() const;
};

/// Signed weighting with total positive mass `positive_mass` spread by
/// `positive` and total negative mass positive_mass - 1 spread by `negative`.
struct Population {
  double positive_mass = 1.0;
  LawPopulation positive;
  LawPopulation negative;

  double negative_mass() const { return positive_mass - 1.0; }
  /// Integral of m2^2 against |lambda|.
  double moment_bound() const;
};

struct ApproximationSchedule {
  std::vector<int> k_values;
  std::vector<std::uint64_t> seeds;
  std::variant<SignedFamily, Population> target;
  /// Family size of the proxy reference for sampled populations; 0 means
  /// four times the largest k.
  int reference_k = 0;

  /// Throws Error(InvalidMeasure) unless k_values are positive and strictly
  /// increasing, seeds are present and a population has positive_mass >= 1.
  void validate() const;
  int effective_reference_k() const;
};

/// k-entry approximation for one seed. Positive entries carry weight
/// lambda+/k+ and negative ones -lambda-/k-, with identical draws collapsed
/// into a single entry; the weights sum to 1 up to rounding. A finite target
/// with at most k entries is returned unchanged.
/// Draws are nested: for a fixed seed the k-entry family uses the first k+
/// positive and k- negative draws of two fixed streams, so the proxy
/// reference extends every smaller family of the same seed.
SignedFamily build_family(const ApproximationSchedule& schedule, int k, std::uint64_t seed);

struct Run {
  std::uint64_t seed;
  int k;
  double energy;    // E_k(mu_k)
  double w2_gap;    // W2(mu_k, reference barycenter)
  double m2_bound;  // M2^2(|lambda_k|)
};

struct Reference {
  std::uint64_t seed;
  double energy;
  Law barycenter;
};

struct Report {
  std::vector<Run> runs;  // ordered by (seed, k) as in the schedule
  std::vector<Reference> references;
  bool reference_is_proxy = false;
  int reference_k = 0;
  std::optional<double> population_moment_bound;
};

/// Runs every (seed, k) pair, in parallel, and merges results in schedule order.
Report run_consistency(const ApproximationSchedule& schedule);

/// Median over seeds of |energy - reference energy| and of w2_gap, per k in
/// schedule order.
struct TrendRow {
  int k;
  double median_energy_gap;
  double median_w2_gap;
};
std::vector<TrendRow> median_trend(const Report& report);

}  // namespace gwb::consistency
