#pragma once

// L^2(0,1) projection onto the cone of nondecreasing functions, restricted to
// step functions. Two independent algorithms are provided so each can serve
// as an oracle for the other:
//
//   project_pava      pool-adjacent-violators on weighted blocks
//   project_envelope  right derivative of the lower convex envelope of the
//                     integral function F(t) = int_0^t f
//
// The projection of a step function is a step function on the same
// partition, so both return values per input subinterval.

#include <vector>

namespace gwb::isotonic {

/// A step function on (0,1): values[i] on a subinterval of length weights[i].
struct WeightedSteps {
  std::vector<double> values;
  std::vector<double> weights;

  /// Throws Error(PartitionMismatch) on length mismatch, nonpositive weights
  /// or weights not summing to 1 within 1e-12.
  void validate() const;
  double mean() const;
};

WeightedSteps project_pava(const WeightedSteps& f);
WeightedSteps project_envelope(const WeightedSteps& f);

/// Weighted L^2 distance. Inputs on different partitions are compared on
/// their common refinement.
double distance_l2(const WeightedSteps& f, const WeightedSteps& g);

}  // namespace gwb::isotonic
