#include "gwb/isotonic.hpp"

#include <cmath>
#include <numeric>

#include "gwb/error.hpp"
#include "gwb/measures.hpp"

namespace gwb::isotonic {
namespace {

struct Block {
  double weight;
  double weighted_sum;
  double mean;
  std::size_t count;
};

}  // namespace

void WeightedSteps::validate() const {
  if (values.empty() || values.size() != weights.size()) {
    throw Error(ErrorCode::PartitionMismatch, "values and weights must be nonempty and of equal length");
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw Error(ErrorCode::PartitionMismatch, "weights must be positive");
  }
  if (std::abs(std::accumulate(weights.begin(), weights.end(), 0.0) - 1.0) > 1e-12) {
    throw Error(ErrorCode::PartitionMismatch, "weights must sum to 1");
  }
}

double WeightedSteps::mean() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += weights[i] * values[i];
  return acc;
}

WeightedSteps project_pava(const WeightedSteps& f) {
  f.validate();
  std::vector<Block> stack;
  stack.reserve(f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    Block cur{f.weights[i], f.weights[i] * f.values[i], f.values[i], 1};
    // Equal means are pooled too; the mean is kept as-is in that case so that
    // already monotone input comes back bit-identical.
    while (!stack.empty() && stack.back().mean >= cur.mean) {
      const Block& prev = stack.back();
      const bool tie = prev.mean == cur.mean;
      cur.weight += prev.weight;
      cur.weighted_sum += prev.weighted_sum;
      cur.count += prev.count;
      if (!tie) cur.mean = cur.weighted_sum / cur.weight;
      stack.pop_back();
    }
    stack.push_back(cur);
  }

  WeightedSteps out{{}, f.weights};
  out.values.reserve(f.values.size());
  for (const Block& b : stack) out.values.insert(out.values.end(), b.count, b.mean);
  return out;
}

WeightedSteps project_envelope(const WeightedSteps& f) {
  f.validate();
  const std::size_t n = f.values.size();

  // Graph of the integral function at the partition nodes.
  std::vector<long double> xs(n + 1, 0.0L);
  std::vector<long double> ys(n + 1, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i + 1] = xs[i] + static_cast<long double>(f.weights[i]);
    ys[i + 1] = ys[i] + static_cast<long double>(f.weights[i]) * static_cast<long double>(f.values[i]);
  }

  // Monotone-chain lower hull; x is already sorted. Collinear points dropped.
  std::vector<std::size_t> hull;
  hull.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2];
      const std::size_t b = hull.back();
      const long double cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
      if (cross > 0.0L) break;
      hull.pop_back();
    }
    hull.push_back(i);
  }

  WeightedSteps out{std::vector<double>(n), f.weights};
  for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
    const std::size_t a = hull[h];
    const std::size_t b = hull[h + 1];
    const auto slope = static_cast<double>((ys[b] - ys[a]) / (xs[b] - xs[a]));
    for (std::size_t i = a; i < b; ++i) out.values[i] = slope;
  }
  return out;
}

double distance_l2(const WeightedSteps& f, const WeightedSteps& g) {
  f.validate();
  g.validate();
  if (f.weights == g.weights) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      const double d = f.values[i] - g.values[i];
      acc += f.weights[i] * d * d;
    }
    return std::sqrt(acc);
  }
  return std::sqrt(l2_distance_squared(StepQuantile(f.values, f.weights), StepQuantile(g.values, g.weights)));
}

}  // namespace gwb::isotonic
