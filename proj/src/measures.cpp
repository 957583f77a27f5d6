#include "gwb/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gwb/error.hpp"

namespace gwb {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double sum_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0);
}

// Rescale only when the total is off by more than rounding noise, so that
// normalizing an already normalized vector is a no-op.
void renormalize(std::vector<double>& masses, double total) {
  if (std::abs(total - 1.0) > 4.0 * kEps * static_cast<double>(masses.size())) {
    for (double& m : masses) m /= total;
  }
}

}  // namespace

DiscreteMeasure1D::DiscreteMeasure1D(std::vector<double> atoms, std::vector<double> masses) {
  if (atoms.empty() || atoms.size() != masses.size()) {
    throw Error(ErrorCode::InvalidMeasure, "atoms and masses must be nonempty and of equal length");
  }
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i])) throw Error(ErrorCode::InvalidMeasure, "non-finite atom");
    if (!(masses[i] > 0.0) || !std::isfinite(masses[i])) {
      throw Error(ErrorCode::InvalidMeasure, "masses must be strictly positive");
    }
  }
  const double total = sum_of(masses);
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw Error(ErrorCode::InvalidMeasure, "total mass " + std::to_string(total) + " is not 1");
  }

  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });

  atoms_.reserve(atoms.size());
  masses_.reserve(atoms.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && atoms[order[j]] - atoms[order[j - 1]] < kAtomMergeTolerance) ++j;
    if (j == i + 1) {
      atoms_.push_back(atoms[order[i]]);
      masses_.push_back(masses[order[i]]);
    } else {
      double mass = 0.0;
      double moment = 0.0;
      for (std::size_t k = i; k < j; ++k) {
        mass += masses[order[k]];
        moment += masses[order[k]] * atoms[order[k]];
      }
      atoms_.push_back(moment / mass);
      masses_.push_back(mass);
    }
    i = j;
  }
  renormalize(masses_, sum_of(masses_));
}

StepQuantile::StepQuantile(std::vector<double> values, std::vector<double> lengths)
    : values_(std::move(values)), lengths_(std::move(lengths)) {
  if (values_.empty() || values_.size() != lengths_.size()) {
    throw Error(ErrorCode::InvalidMeasure, "step quantile needs equal, nonzero numbers of values and lengths");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw Error(ErrorCode::InvalidMeasure, "non-finite quantile value");
    if (!(lengths_[i] > 0.0)) throw Error(ErrorCode::InvalidMeasure, "subinterval lengths must be positive");
  }
  if (std::abs(sum_of(lengths_) - 1.0) > kMassTolerance) {
    throw Error(ErrorCode::InvalidMeasure, "subinterval lengths must sum to 1");
  }
}

StepQuantile StepQuantile::from_breakpoints(const std::vector<double>& breakpoints,
                                            std::vector<double> values) {
  if (values.size() != breakpoints.size() + 1) {
    throw Error(ErrorCode::InvalidMeasure, "need one more value than breakpoints");
  }
  std::vector<double> lengths;
  lengths.reserve(values.size());
  double prev = 0.0;
  for (double b : breakpoints) {
    if (!(b > prev) || !(b < 1.0)) {
      throw Error(ErrorCode::InvalidMeasure, "breakpoints must be strictly increasing in (0,1)");
    }
    lengths.push_back(b - prev);
    prev = b;
  }
  lengths.push_back(1.0 - prev);
  return {std::move(values), std::move(lengths)};
}

std::vector<double> StepQuantile::breakpoints() const {
  std::vector<double> out;
  out.reserve(lengths_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < lengths_.size(); ++i) {
    acc += lengths_[i];
    out.push_back(acc);
  }
  return out;
}

bool StepQuantile::is_nondecreasing() const noexcept {
  return std::is_sorted(values_.begin(), values_.end());
}

double StepQuantile::operator()(double t) const {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < lengths_.size(); ++i) {
    acc += lengths_[i];
    if (t < acc) return values_[i];
  }
  return values_.back();
}

GridQuantile::GridQuantile(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::InvalidGrid, "grid quantile must be nonempty");
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidGrid, "non-finite grid quantile value");
  }
}

double GridQuantile::operator()(double t) const {
  const auto m = static_cast<double>(values_.size());
  const auto cell = static_cast<std::ptrdiff_t>(std::floor(t * m));
  const auto last = static_cast<std::ptrdiff_t>(values_.size()) - 1;
  return values_[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(cell, 0, last))];
}

GridQuantile GridQuantile::resample(std::size_t m) const {
  if (m == values_.size()) return *this;
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = (*this)(midpoint(i, m));
  return GridQuantile(std::move(out));
}

StepQuantile GridQuantile::as_step() const {
  const double h = 1.0 / static_cast<double>(values_.size());
  return {values_, std::vector<double>(values_.size(), h)};
}

bool GridQuantile::is_nondecreasing() const noexcept {
  return std::is_sorted(values_.begin(), values_.end());
}

std::vector<double> partition_edges(std::span<const StepQuantile> quantiles) {
  std::vector<double> cuts;
  for (const auto& q : quantiles) {
    const auto b = q.breakpoints();
    cuts.insert(cuts.end(), b.begin(), b.end());
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> edges{0.0};
  for (double c : cuts) {
    if (c - edges.back() > kBreakpointTolerance && 1.0 - c > kBreakpointTolerance) edges.push_back(c);
  }
  edges.push_back(1.0);
  return edges;
}

std::vector<double> values_on(const StepQuantile& q, const std::vector<double>& edges) {
  const auto b = q.breakpoints();
  std::vector<double> vals(edges.size() - 1);
  std::size_t k = 0;
  for (std::size_t j = 0; j < vals.size(); ++j) {
    const double mid = 0.5 * (edges[j] + edges[j + 1]);
    while (k < b.size() && b[k] <= mid) ++k;
    vals[j] = q.values()[k];
  }
  return vals;
}

Refinement refine(std::span<const StepQuantile> quantiles) {
  Refinement out;
  if (quantiles.empty()) return out;
  if (quantiles.size() == 1) {
    out.lengths = quantiles[0].lengths();
    out.values.push_back(quantiles[0].values());
    return out;
  }

  const std::vector<double> edges = partition_edges(quantiles);
  out.lengths.resize(edges.size() - 1);
  for (std::size_t j = 0; j < out.lengths.size(); ++j) out.lengths[j] = edges[j + 1] - edges[j];
  out.values.reserve(quantiles.size());
  for (const auto& q : quantiles) out.values.push_back(values_on(q, edges));
  return out;
}

double cdf(const DiscreteMeasure1D& measure, double x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < measure.size() && measure.atoms()[i] <= x; ++i) acc += measure.masses()[i];
  return std::min(acc, 1.0);
}

StepQuantile quantile_of(const DiscreteMeasure1D& measure) {
  return {measure.atoms(), measure.masses()};
}

DiscreteMeasure1D measure_of(const StepQuantile& q) {
  if (!q.is_nondecreasing()) {
    throw Error(ErrorCode::NonMonotone, "quantile values decrease; project onto the monotone cone first");
  }
  std::vector<double> atoms;
  std::vector<double> masses;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!atoms.empty() && atoms.back() == q.values()[i]) {
      masses.back() += q.lengths()[i];
    } else {
      atoms.push_back(q.values()[i]);
      masses.push_back(q.lengths()[i]);
    }
  }
  return {std::move(atoms), std::move(masses)};
}

DiscreteMeasure1D measure_of(const GridQuantile& q) { return measure_of(q.as_step()); }

Moment2 second_moment(const DiscreteMeasure1D& measure) {
  double acc = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    acc += measure.masses()[i] * measure.atoms()[i] * measure.atoms()[i];
  }
  return {acc};
}

Moment2 second_moment(const GridQuantile& q) {
  double acc = 0.0;
  for (double v : q.values()) acc += v * v;
  return {acc / static_cast<double>(q.size())};
}

double l2_distance_squared(const StepQuantile& a, const StepQuantile& b) {
  const StepQuantile pair[] = {a, b};
  const Refinement r = refine(pair);
  double acc = 0.0;
  for (std::size_t j = 0; j < r.lengths.size(); ++j) {
    const double d = r.values[0][j] - r.values[1][j];
    acc += r.lengths[j] * d * d;
  }
  return acc;
}

double w2_1d(const DiscreteMeasure1D& a, const DiscreteMeasure1D& b) {
  return std::sqrt(l2_distance_squared(quantile_of(a), quantile_of(b)));
}

GridQuantile grid_sample(const std::function<double(double)>& quantile, std::size_t m) {
  if (m < 2) throw Error(ErrorCode::InvalidGrid, "grid size must be at least 2");
  std::vector<double> values(m);
  for (std::size_t i = 0; i < m; ++i) values[i] = quantile(GridQuantile::midpoint(i, m));
  return GridQuantile(std::move(values));
}

double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  // 1 - p is exact here, and the lower tail keeps erfc accurate.
  if (p > 0.5) return -normal_quantile(1.0 - p);

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }

  // Halley refinement; the rational approximation alone is good to ~1e-9.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace gwb
