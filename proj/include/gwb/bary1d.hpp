#pragma once

// Generalized (signed-weight) Wasserstein barycenters on the real line.
//
// For a finite family {(w_i, nu_i)} with sum w_i = 1 and weights of either
// sign, the energy E(mu) = sum_i w_i W2^2(mu, nu_i) has a unique minimizer
// whose quantile is the monotone projection of sum_i w_i X_{nu_i}. When the
// weighted quantile sum is already nondecreasing no projection happens and
// the result is the classical 1D barycenter formula.

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "gwb/isotonic.hpp"
#include "gwb/measures.hpp"

namespace gwb {

/// A law on R, either atomic or sampled on a grid (e.g. a Gaussian).
using Law = std::variant<DiscreteMeasure1D, GridQuantile>;

StepQuantile quantile_of(const Law& law);
Moment2 second_moment(const Law& law);
double w2(const Law& a, const Law& b);

/// Tolerance on the sum of family weights. Violations are errors, never
/// silently renormalized.
inline constexpr double kWeightSumTolerance = 1e-10;

struct FamilyEntry {
  double weight;
  Law measure;
};

class SignedFamily {
 public:
  /// Throws Error(WeightSumInvalid) if empty, a weight is non-finite, or the
  /// weights do not sum to 1 within kWeightSumTolerance.
  explicit SignedFamily(std::vector<FamilyEntry> entries);

  const std::vector<FamilyEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  /// Largest grid size over grid-based entries, 0 if all are discrete.
  std::size_t grid_size() const noexcept;

 private:
  std::vector<FamilyEntry> entries_;
};

struct FamilyStats {
  double total_variation;  // sum |w_i|
  double moment2;          // sum |w_i| m2^2(nu_i)
};

struct GaussianParams {
  double mean;
  double std;
};

struct GaussDirac {
  double lambda_bar;
  double z_bar;
};

/// A two-sided inequality check; the contract is stated at each producer.
struct BoundCheck {
  double lhs;
  double rhs;
};

/// Weighted quantile sum on the family's common partition: the refinement of
/// all step quantiles, or a uniform grid of size grid_size() if any entry is
/// grid-based (discrete entries are then evaluated at the grid midpoints).
/// The discrete sum is swept over sorted breakpoints with compensated
/// accumulation; the result does not depend on thread count or timing.
isotonic::WeightedSteps quantile_sum(const SignedFamily& family);

/// Unique minimizer of the energy. Grid-based families yield a GridQuantile.
Law barycenter(const SignedFamily& family);

/// sum_i w_i W2^2(mu, nu_i). May be negative.
double energy(const SignedFamily& family, const Law& mu);

FamilyStats family_stats(const SignedFamily& family);

/// lhs = E(mu), rhs = m2^2(mu)/2 - (1 + 2 M) M2^2; lhs >= rhs always.
BoundCheck lower_bound(const SignedFamily& family, const Law& mu);

/// lhs = W2(bary(a), bary(b)), rhs = sum |w_i| W2(a_i, b_i); lhs <= rhs.
BoundCheck stability_gap(std::span<const DiscreteMeasure1D> a, std::span<const DiscreteMeasure1D> b,
                         std::span<const double> weights);

/// Weight and location such that delta_{z_bar} is the generalized barycenter
/// of N(m1, s1^2) and N(m2, s2^2). Throws Error(InvalidMeasure) for a
/// nonpositive std and Error(StdOrder) unless s1 > s2.
GaussDirac gauss_dirac_params(GaussianParams g1, GaussianParams g2);

/// The family whose barycenter is delta_{z_bar}: weight 1/lambda_bar on the
/// narrower Gaussian g2 and (lambda_bar - 1)/lambda_bar on the wider g1, both
/// sampled on a grid of size m.
SignedFamily gauss_dirac_family(GaussianParams g1, GaussianParams g2, std::size_t m);

GridQuantile gaussian_grid(GaussianParams g, std::size_t m);
GridQuantile uniform_grid(double a, double b, std::size_t m);

/// Numerical optimality check. Draws `trials` perturbations of the
/// candidate's quantile (a common shift plus independent jitter, each bounded
/// by radius/2, then re-projected onto the monotone cone) and returns false
/// as soon as one has energy lower than the candidate's by more than 1e-9.
bool argmin_certificate(const SignedFamily& family, const Law& candidate, int trials, double radius,
                        std::uint64_t seed);

}  // namespace gwb
