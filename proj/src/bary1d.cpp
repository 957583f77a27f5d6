#include "gwb/bary1d.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "gwb/error.hpp"

namespace gwb {
namespace {

std::vector<double> sample_at_midpoints(const StepQuantile& q, std::size_t m) {
  const auto b = q.breakpoints();
  std::vector<double> out(m);
  std::size_t k = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = GridQuantile::midpoint(i, m);
    while (k < b.size() && b[k] <= t) ++k;
    out[i] = q.values()[k];
  }
  return out;
}

std::size_t grid_size_of(const Law& law) {
  if (const auto* g = std::get_if<GridQuantile>(&law)) return g->size();
  return 0;
}

// All laws on one partition: a uniform grid if any law is grid-based,
// otherwise the refinement of their step quantiles.
struct CommonPartition {
  Refinement refinement;
  std::size_t grid = 0;
};

CommonPartition common_partition(std::span<const Law* const> laws) {
  CommonPartition out;
  for (const Law* law : laws) out.grid = std::max(out.grid, grid_size_of(*law));

  if (out.grid == 0) {
    std::vector<StepQuantile> qs;
    qs.reserve(laws.size());
    for (const Law* law : laws) qs.push_back(quantile_of(*law));
    out.refinement = refine(qs);
    return out;
  }

  const std::size_t m = out.grid;
  out.refinement.lengths.assign(m, 1.0 / static_cast<double>(m));
  for (const Law* law : laws) {
    if (const auto* g = std::get_if<GridQuantile>(law)) {
      out.refinement.values.push_back(g->resample(m).values());
    } else {
      out.refinement.values.push_back(sample_at_midpoints(quantile_of(*law), m));
    }
  }
  return out;
}

double weighted_sq_distance(const std::vector<double>& f, const std::vector<double>& g,
                            const std::vector<double>& lengths) {
  double acc = 0.0;
  for (std::size_t j = 0; j < lengths.size(); ++j) {
    const double d = f[j] - g[j];
    acc += lengths[j] * d * d;
  }
  return acc;
}

Law to_law(const isotonic::WeightedSteps& projected, bool grid) {
  if (grid) return GridQuantile(projected.values);
  return measure_of(StepQuantile(projected.values, projected.weights));
}

void require_positive_std(GaussianParams g) {
  if (!(g.std > 0.0) || !std::isfinite(g.std) || !std::isfinite(g.mean)) {
    throw Error(ErrorCode::InvalidMeasure, "Gaussian needs finite mean and positive std");
  }
}

}  // namespace

StepQuantile quantile_of(const Law& law) {
  return std::visit(
      [](const auto& l) -> StepQuantile {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, DiscreteMeasure1D>) {
          return quantile_of(l);
        } else {
          return l.as_step();
        }
      },
      law);
}

Moment2 second_moment(const Law& law) {
  return std::visit([](const auto& l) { return second_moment(l); }, law);
}

double w2(const Law& a, const Law& b) {
  const auto* ga = std::get_if<GridQuantile>(&a);
  const auto* gb = std::get_if<GridQuantile>(&b);
  if (ga && gb && ga->size() == gb->size()) {
    const std::vector<double> lengths(ga->size(), 1.0 / static_cast<double>(ga->size()));
    return std::sqrt(weighted_sq_distance(ga->values(), gb->values(), lengths));
  }
  return std::sqrt(l2_distance_squared(quantile_of(a), quantile_of(b)));
}

SignedFamily::SignedFamily(std::vector<FamilyEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorCode::WeightSumInvalid, "family must have at least one entry");
  double total = 0.0;
  for (const auto& e : entries_) {
    if (!std::isfinite(e.weight)) throw Error(ErrorCode::WeightSumInvalid, "non-finite weight");
    total += e.weight;
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    throw Error(ErrorCode::WeightSumInvalid, "weights sum to " + std::to_string(total) + ", expected 1");
  }
}

std::size_t SignedFamily::grid_size() const noexcept {
  std::size_t m = 0;
  for (const auto& e : entries_) m = std::max(m, grid_size_of(e.measure));
  return m;
}

isotonic::WeightedSteps quantile_sum(const SignedFamily& family) {
  // Entries are accumulated one at a time so large families never hold the
  // full entries-by-pieces table.
  const std::size_t m = family.grid_size();
  isotonic::WeightedSteps sum;
  if (m > 0) {
    sum.weights.assign(m, 1.0 / static_cast<double>(m));
    sum.values.assign(m, 0.0);
    for (const auto& e : family.entries()) {
      const auto* g = std::get_if<GridQuantile>(&e.measure);
      const std::vector<double> v = g ? g->resample(m).values() : sample_at_midpoints(quantile_of(e.measure), m);
      for (std::size_t j = 0; j < m; ++j) sum.values[j] += e.weight * v[j];
    }
    return sum;
  }

  if (family.size() == 1) {
    const auto& e = family.entries().front();
    const StepQuantile q = quantile_of(e.measure);
    sum.weights = q.lengths();
    for (double v : q.values()) sum.values.push_back(e.weight * v);
    return sum;
  }

  // Sweep over all breakpoints: the sum starts at sum_i w_i X_i(0+) and jumps
  // by w_i times the step of X_i at each breakpoint of entry i. Jumps are
  // accumulated with Neumaier compensation in a fixed (position, entry) order.
  struct Jump {
    double at;
    double delta;
  };
  std::vector<Jump> jumps;
  double start = 0.0;
  for (const auto& e : family.entries()) {
    const StepQuantile q = quantile_of(e.measure);
    start += e.weight * q.values().front();
    double at = 0.0;
    for (std::size_t j = 0; j + 1 < q.size(); ++j) {
      at += q.lengths()[j];
      jumps.push_back({at, e.weight * (q.values()[j + 1] - q.values()[j])});
    }
  }
  std::stable_sort(jumps.begin(), jumps.end(), [](const Jump& x, const Jump& y) { return x.at < y.at; });

  double total = start, comp = 0.0, left = 0.0;
  auto add = [&](double d) {
    const double t = total + d;
    comp += std::abs(total) >= std::abs(d) ? (total - t) + d : (d - t) + total;
    total = t;
  };
  for (const Jump& j : jumps) {
    if (1.0 - j.at <= kBreakpointTolerance) break;
    if (j.at - left > kBreakpointTolerance) {
      sum.values.push_back(total + comp);
      sum.weights.push_back(j.at - left);
      left = j.at;
    }
    add(j.delta);
  }
  sum.values.push_back(total + comp);
  sum.weights.push_back(1.0 - left);
  return sum;
}

Law barycenter(const SignedFamily& family) {
  return to_law(isotonic::project_pava(quantile_sum(family)), family.grid_size() > 0);
}

double energy(const SignedFamily& family, const Law& mu) {
  double acc = 0.0;
  for (const auto& e : family.entries()) {
    const double d = w2(mu, e.measure);
    acc += e.weight * d * d;
  }
  return acc;
}

FamilyStats family_stats(const SignedFamily& family) {
  FamilyStats s{0.0, 0.0};
  for (const auto& e : family.entries()) {
    s.total_variation += std::abs(e.weight);
    s.moment2 += std::abs(e.weight) * second_moment(e.measure).value;
  }
  return s;
}

BoundCheck lower_bound(const SignedFamily& family, const Law& mu) {
  const FamilyStats s = family_stats(family);
  return {energy(family, mu), 0.5 * second_moment(mu).value - (1.0 + 2.0 * s.total_variation) * s.moment2};
}

BoundCheck stability_gap(std::span<const DiscreteMeasure1D> a, std::span<const DiscreteMeasure1D> b,
                         std::span<const double> weights) {
  if (a.size() != b.size() || a.size() != weights.size()) {
    throw Error(ErrorCode::InvalidMeasure, "stability_gap needs sequences of equal length");
  }
  std::vector<FamilyEntry> fa;
  std::vector<FamilyEntry> fb;
  double rhs = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    fa.push_back({weights[i], a[i]});
    fb.push_back({weights[i], b[i]});
    rhs += std::abs(weights[i]) * w2_1d(a[i], b[i]);
  }
  return {w2(barycenter(SignedFamily(std::move(fa))), barycenter(SignedFamily(std::move(fb)))), rhs};
}

GaussDirac gauss_dirac_params(GaussianParams g1, GaussianParams g2) {
  require_positive_std(g1);
  require_positive_std(g2);
  if (!(g1.std > g2.std)) {
    throw Error(ErrorCode::StdOrder, "the first Gaussian must have the strictly larger std");
  }
  return {(g1.std - g2.std) / g1.std, (g1.std * g2.mean - g2.std * g1.mean) / (g1.std - g2.std)};
}

SignedFamily gauss_dirac_family(GaussianParams g1, GaussianParams g2, std::size_t m) {
  const GaussDirac p = gauss_dirac_params(g1, g2);
  return SignedFamily({{1.0 / p.lambda_bar, gaussian_grid(g2, m)},
                       {(p.lambda_bar - 1.0) / p.lambda_bar, gaussian_grid(g1, m)}});
}

GridQuantile gaussian_grid(GaussianParams g, std::size_t m) {
  require_positive_std(g);
  return grid_sample([g](double t) { return g.mean + g.std * normal_quantile(t); }, m);
}

GridQuantile uniform_grid(double a, double b, std::size_t m) {
  if (!(b >= a)) throw Error(ErrorCode::InvalidMeasure, "uniform law needs a <= b");
  return grid_sample([a, b](double t) { return a + (b - a) * t; }, m);
}

bool argmin_certificate(const SignedFamily& family, const Law& candidate, int trials, double radius,
                        std::uint64_t seed) {
  std::vector<const Law*> laws{&candidate};
  for (const auto& e : family.entries()) laws.push_back(&e.measure);
  const CommonPartition part = common_partition(laws);
  const auto& r = part.refinement;

  auto energy_of = [&](const std::vector<double>& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i) {
      acc += family.entries()[i].weight * weighted_sq_distance(f, r.values[i + 1], r.lengths);
    }
    return acc;
  };

  const std::vector<double>& base = r.values[0];
  const double base_energy = energy_of(base);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> half(-0.5 * radius, 0.5 * radius);
  isotonic::WeightedSteps trial{std::vector<double>(base.size()), r.lengths};
  for (int k = 0; k < trials; ++k) {
    const double shift = half(rng);
    for (std::size_t j = 0; j < base.size(); ++j) trial.values[j] = base[j] + shift + half(rng);
    const auto projected = isotonic::project_pava(trial);
    if (base_energy > energy_of(projected.values) + 1e-9) return false;
  }
  return true;
}

}  // namespace gwb
