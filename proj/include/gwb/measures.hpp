#pragma once

// Probability measures on the real line and their quantile functions.
//
// A measure mu is represented either by its atoms (DiscreteMeasure1D), by the
// right-continuous pseudo-inverse of its distribution function (StepQuantile),
// or by samples of a continuous quantile at grid midpoints (GridQuantile).
// Quantile functions live in L^2(0,1); the map mu -> X_mu is an isometry onto
// the cone of nondecreasing functions, which is what makes the 1D barycenter
// problem exactly computable.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gwb {

/// Tolerance on total mass at construction. Inputs further off are rejected.
inline constexpr double kMassTolerance = 1e-12;
/// Atoms closer than this are merged at their mass-weighted mean.
inline constexpr double kAtomMergeTolerance = 1e-12;
/// Breakpoints of different quantiles closer than this are identified.
inline constexpr double kBreakpointTolerance = 1e-14;

/// Finitely supported probability measure on R with strictly increasing atoms.
class DiscreteMeasure1D {
 public:
  /// Sorts, merges near-duplicate atoms and checks the total mass.
  /// Throws Error(InvalidMeasure) on empty input, length mismatch, non-finite
  /// atoms, nonpositive masses, or total mass off by more than kMassTolerance.
  DiscreteMeasure1D(std::vector<double> atoms, std::vector<double> masses);

  static DiscreteMeasure1D dirac(double x) { return {{x}, {1.0}}; }

  const std::vector<double>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& masses() const noexcept { return masses_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  friend bool operator==(const DiscreteMeasure1D&, const DiscreteMeasure1D&) = default;

 private:
  std::vector<double> atoms_;
  std::vector<double> masses_;
};

/// Piecewise-constant function on (0,1): values[i] holds on the i-th
/// subinterval, whose length is lengths[i]. Not necessarily monotone, so it
/// also represents signed combinations of quantiles before projection.
///
/// Lengths are stored rather than breakpoints so that quantile_of/measure_of
/// round-trip masses bit-for-bit; breakpoints() derives the partition.
class StepQuantile {
 public:
  /// Throws Error(InvalidMeasure) if sizes differ, a length is nonpositive,
  /// a value is non-finite, or lengths do not sum to 1 within kMassTolerance.
  StepQuantile(std::vector<double> values, std::vector<double> lengths);

  /// Builds from interior breakpoints (strictly increasing in (0,1)) and
  /// breakpoints.size() + 1 values.
  static StepQuantile from_breakpoints(const std::vector<double>& breakpoints,
                                       std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& lengths() const noexcept { return lengths_; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Interior breakpoints: cumulative lengths strictly inside (0,1).
  std::vector<double> breakpoints() const;
  bool is_nondecreasing() const noexcept;
  /// Right-continuous evaluation at t in (0,1).
  double operator()(double t) const;

  friend bool operator==(const StepQuantile&, const StepQuantile&) = default;

 private:
  std::vector<double> values_;
  std::vector<double> lengths_;
};

/// Quantile samples at the midpoints (i + 1/2)/m of a uniform grid on (0,1).
/// Each sample stands for the subinterval [i/m, (i+1)/m).
class GridQuantile {
 public:
  /// Throws Error(InvalidGrid) if empty or any entry is non-finite.
  explicit GridQuantile(std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  static double midpoint(std::size_t i, std::size_t m) {
    return (static_cast<double>(i) + 0.5) / static_cast<double>(m);
  }

  /// Value on the cell containing t.
  double operator()(double t) const;
  /// Resample onto a grid of size m by evaluating at its midpoints.
  GridQuantile resample(std::size_t m) const;
  StepQuantile as_step() const;
  bool is_nondecreasing() const noexcept;

  friend bool operator==(const GridQuantile&, const GridQuantile&) = default;

 private:
  std::vector<double> values_;
};

struct Moment2 {
  double value = 0.0;  // integral of x^2 d mu
};

/// Several step functions expressed on one common partition of (0,1).
struct Refinement {
  std::vector<double> lengths;
  /// values[k][j] is the k-th input on the j-th piece.
  std::vector<std::vector<double>> values;
};

/// Sorted cut points 0 = e_0 < ... < e_n = 1 of the common refinement, with
/// breakpoints within kBreakpointTolerance identified.
std::vector<double> partition_edges(std::span<const StepQuantile> quantiles);
/// Value of q on each piece [e_j, e_{j+1}).
std::vector<double> values_on(const StepQuantile& q, const std::vector<double>& edges);

/// Common refinement of the inputs' partitions. A single input is returned
/// unchanged; otherwise breakpoints within kBreakpointTolerance are identified.
Refinement refine(std::span<const StepQuantile> quantiles);

/// mu((-inf, x]).
double cdf(const DiscreteMeasure1D& measure, double x);

StepQuantile quantile_of(const DiscreteMeasure1D& measure);

/// Push-forward of Lebesgue measure on (0,1) through a monotone quantile.
/// Throws Error(NonMonotone) if the values decrease anywhere.
DiscreteMeasure1D measure_of(const StepQuantile& q);
DiscreteMeasure1D measure_of(const GridQuantile& q);

Moment2 second_moment(const DiscreteMeasure1D& measure);
Moment2 second_moment(const GridQuantile& q);

/// Squared L^2(0,1) distance between two step functions.
double l2_distance_squared(const StepQuantile& a, const StepQuantile& b);

/// Quadratic Wasserstein distance via the quantile isometry.
double w2_1d(const DiscreteMeasure1D& a, const DiscreteMeasure1D& b);

/// values[i] = quantile((i + 1/2)/m). Throws Error(InvalidGrid) if m < 2.
GridQuantile grid_sample(const std::function<double(double)>& quantile, std::size_t m);

/// Standard normal quantile: Acklam's rational approximation polished with a
/// Halley step against std::erfc. Returns +-inf at p = 1 and p = 0.
double normal_quantile(double p);

}  // namespace gwb
