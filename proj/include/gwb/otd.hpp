#pragma once

// Exact optimal transport between finitely supported measures on R^d, d <= 3,
// and the signed-energy tools built on it, including the planar family whose
// generalized barycenter is not unique.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace gwb::otd {

/// Combined support size accepted by solve_w2.
inline constexpr std::size_t kMaxAtoms = 2000;

using Point = std::array<double, 3>;

/// Finitely supported probability measure on R^dim. Atoms are stored with
/// unused trailing coordinates set to zero.
class DiscreteMeasureRd {
 public:
  /// Merges atoms within 1e-12 of each other (max-norm) at their
  /// mass-weighted mean. Throws Error(InvalidMeasure) on bad dim, sizes,
  /// masses or total mass, Error(DimensionMismatch) if a point has the
  /// wrong number of coordinates.
  DiscreteMeasureRd(int dim, const std::vector<std::vector<double>>& atoms, std::vector<double> masses);
  DiscreteMeasureRd(int dim, std::vector<Point> atoms, std::vector<double> masses);

  static DiscreteMeasureRd dirac(int dim, Point p) { return {dim, std::vector<Point>{p}, {1.0}}; }

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  const std::vector<Point>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& masses() const noexcept { return masses_; }
  double second_moment() const;

  friend bool operator==(const DiscreteMeasureRd&, const DiscreteMeasureRd&) = default;

 private:
  int dim_;
  std::vector<Point> atoms_;
  std::vector<double> masses_;
};

/// Dense coupling matrix, row-major.
struct TransportPlan {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;

  double operator()(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
  double row_sum(std::size_t i) const;
  double col_sum(std::size_t j) const;
};

struct W2Solution {
  double cost;  // squared W2
  TransportPlan plan;
  std::vector<double> u;  // row potentials
  std::vector<double> v;  // column potentials
};

/// Transportation simplex: north-west-corner start, potentials (MODI)
/// pricing, mass perturbation against degeneracy with a Bland's-rule
/// fallback. The returned plan solves the unperturbed problem and its
/// potentials are checked to certify optimality before returning.
/// Throws Error(DimensionMismatch) or Error(TooLarge).
W2Solution solve_w2(const DiscreteMeasureRd& a, const DiscreteMeasureRd& b);

struct PlanCheck {
  double max_marginal_error;
  double min_entry;
  double min_reduced_cost;
  double complementary_slackness;  // max |reduced cost| over cells carrying mass
};

/// Independent verification of a solution against its inputs.
PlanCheck check_solution(const DiscreteMeasureRd& a, const DiscreteMeasureRd& b, const W2Solution& s);

struct FamilyEntryRd {
  double weight;
  DiscreteMeasureRd measure;
};

class SignedFamilyRd {
 public:
  /// Throws Error(WeightSumInvalid) or Error(DimensionMismatch).
  explicit SignedFamilyRd(std::vector<FamilyEntryRd> entries);

  const std::vector<FamilyEntryRd>& entries() const noexcept { return entries_; }
  int dim() const noexcept { return entries_.front().measure.dim(); }

 private:
  std::vector<FamilyEntryRd> entries_;
};

double energy_rd(const SignedFamilyRd& family, const DiscreteMeasureRd& mu);

/// W2^2(a, b) - m2^2(a) - m2^2(b), i.e. the minimal value of -2 int x.y d gamma.
double coupling_remainder(const DiscreteMeasureRd& a, const DiscreteMeasureRd& b);

/// -W2^2(., d_(0,0)) + W2^2(., nu_1) + W2^2(., nu_2) with nu_1 on the main
/// diagonal corners (+-1, +-1) and nu_2 on the anti-diagonal corners.
SignedFamilyRd counterexample_family();

/// (1/2) d_(0,1) + (1/2) d_(0,-1), which has energy 1.
DiscreteMeasureRd counterexample_eta();

/// Swap coordinates on {|x| > |y|}, identity elsewhere.
Point swap_on_horizontal(const Point& p);
/// Negated swap on {|y| > |x|}, identity elsewhere.
Point negswap_on_vertical(const Point& p);

DiscreteMeasureRd push_forward(const DiscreteMeasureRd& mu, const std::function<Point(const Point&)>& map);

/// Random measure on {|x| = |y|}: 1-6 atoms on either diagonal with
/// coordinates in [-2, 2] and Dirichlet(1) masses.
DiscreteMeasureRd random_diagonal_measure(std::mt19937_64& rng);

/// Minimum counterexample energy over `samples` random diagonal measures.
/// Every such energy is at least 2.
double diagonal_energy_bound(int samples, std::uint64_t seed);

struct SymmetryEnergies {
  double e;
  double e_swap;     // E(T#mu), T = swap_on_horizontal
  double e_negswap;  // E(S#mu), S = negswap_on_vertical
};

/// Counterexample energies of mu and its two images. The three agree for
/// Diracs and for measures carried by U = {|x| > |y|} or by V = {|y| > |x|}
/// alone, where each map acts as a linear symmetry of the family. They can
/// differ when the support meets both regions. Throws Error(DimensionMismatch) unless mu is planar.
SymmetryEnergies symmetry_energy_check(const DiscreteMeasureRd& mu);

}  // namespace gwb::otd
