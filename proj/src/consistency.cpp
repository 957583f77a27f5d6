#include "gwb/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "gwb/error.hpp"
#include "gwb/parallel.hpp"

namespace gwb::consistency {
namespace {

std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  return std::mt19937_64(seq);
}

// Identical draws of the same sign become one entry with their summed weight.
struct Collector {
  std::map<std::tuple<bool, std::vector<double>, std::vector<double>>, std::size_t> index;
  std::vector<FamilyEntry> entries;
  std::vector<bool> positive;

  void add(bool is_positive, double weight, const DiscreteMeasure1D& m) {
    auto key = std::make_tuple(is_positive, m.atoms(), m.masses());
    auto it = index.find(key);
    if (it != index.end()) {
      entries[it->second].weight += weight;
      return;
    }
    index.emplace(std::move(key), entries.size());
    entries.push_back({weight, m});
    positive.push_back(is_positive);
  }

  // Closes the weight sum on the last positive entry so the family sums to 1
  // up to a single rounding.
  SignedFamily finish() {
    std::size_t last = entries.size();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (positive[i]) last = i;
    }
    if (last < entries.size()) {
      double others = 0.0;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i != last) others += entries[i].weight;
      }
      entries[last].weight = 1.0 - others;
    }
    return SignedFamily(std::move(entries));
  }
};

std::pair<int, int> split_count(int k, double positive_mass, double negative_mass) {
  if (negative_mass <= 0.0 || k < 2) return {k, 0};
  const auto kp = static_cast<int>(std::lround(k * positive_mass / (positive_mass + negative_mass)));
  const int clamped = std::clamp(kp, 1, k - 1);
  return {clamped, k - clamped};
}

// Positive and negative draws come from separate per-seed streams, so the
// family for a larger k extends the one for a smaller k.
SignedFamily sample_population(const Population& pop, int k, std::uint64_t seed) {
  const auto [kp, kn] = split_count(k, pop.positive_mass, pop.negative_mass());
  auto pos_rng = stream_for(seed, 1);
  auto neg_rng = stream_for(seed, 2);
  Collector c;
  for (int i = 0; i < kp; ++i) c.add(true, pop.positive_mass / kp, pop.positive.sample(pos_rng));
  for (int i = 0; i < kn; ++i) c.add(false, -pop.negative_mass() / kn, pop.negative.sample(neg_rng));
  return c.finish();
}

SignedFamily sample_finite(const SignedFamily& target, int k, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  std::vector<double> pos_w, neg_w;
  double plus = 0.0, minus = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double w = target.entries()[i].weight;
    if (w >= 0.0) {
      pos.push_back(i);
      pos_w.push_back(w);
      plus += w;
    } else {
      neg.push_back(i);
      neg_w.push_back(-w);
      minus -= w;
    }
  }
  const auto [kp, kn] = split_count(k, plus, minus);
  std::discrete_distribution<std::size_t> pick_pos(pos_w.begin(), pos_w.end());
  std::discrete_distribution<std::size_t> pick_neg(neg_w.begin(), neg_w.end());

  // Entries may be grid-based, so identical draws are counted by index.
  std::map<std::size_t, int> counts;
  auto pos_rng = stream_for(seed, 1);
  auto neg_rng = stream_for(seed, 2);
  for (int i = 0; i < kp; ++i) ++counts[pos[pick_pos(pos_rng)]];
  for (int i = 0; i < kn; ++i) ++counts[neg[pick_neg(neg_rng)]];

  std::vector<FamilyEntry> entries;
  std::size_t last_positive = 0;
  double others = 0.0;
  for (const auto& [idx, n] : counts) {
    const bool positive = target.entries()[idx].weight >= 0.0;
    const double w = positive ? plus * n / kp : -minus * n / kn;
    if (positive) last_positive = entries.size();
    entries.push_back({w, target.entries()[idx].measure});
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i != last_positive) others += entries[i].weight;
  }
  entries[last_positive].weight = 1.0 - others;
  return SignedFamily(std::move(entries));
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

DiscreteMeasure1D LawPopulation::sample(std::mt19937_64& rng) const {
  std::normal_distribution<double> center(center_mean, center_std);
  const double c = center_std > 0.0 ? center(rng) : center_mean;
  if (kind == Kind::Dirac) return DiscreteMeasure1D::dirac(c);

  std::uniform_real_distribution<double> width(width_min, width_max);
  const double w = width_max > width_min ? width(rng) : width_min;
  const auto n = static_cast<std::size_t>(atoms);
  std::vector<double> points(n);
  for (std::size_t i = 0; i < n; ++i) points[i] = c + w * ((static_cast<double>(i) + 0.5) / atoms - 0.5);
  return {std::move(points), std::vector<double>(n, 1.0 / atoms)};
}

double LawPopulation::expected_moment2() const {
  const double center2 = center_mean * center_mean + center_std * center_std;
  if (kind == Kind::Dirac) return center2;
  const double n = atoms;
  const double shape_var = (n * n - 1.0) / (12.0 * n * n);
  const double width2 = width_max > width_min
                            ? (std::pow(width_max, 3) - std::pow(width_min, 3)) / (3.0 * (width_max - width_min))
                            : width_min * width_min;
  return center2 + width2 * shape_var;
}

double Population::moment_bound() const {
  return positive_mass * positive.expected_moment2() + negative_mass() * negative.expected_moment2();
}

void ApproximationSchedule::validate() const {
  if (k_values.empty() || seeds.empty()) throw Error(ErrorCode::InvalidMeasure, "schedule needs k values and seeds");
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    if (k_values[i] < 1 || (i > 0 && k_values[i] <= k_values[i - 1])) {
      throw Error(ErrorCode::InvalidMeasure, "k values must be positive and strictly increasing");
    }
  }
  if (const auto* pop = std::get_if<Population>(&target)) {
    if (!(pop->positive_mass >= 1.0)) throw Error(ErrorCode::WeightSumInvalid, "positive mass must be at least 1");
    for (const LawPopulation* lp : {&pop->positive, &pop->negative}) {
      if (lp->center_std < 0.0 || lp->width_min < 0.0 || lp->width_max < lp->width_min || lp->atoms < 1) {
        throw Error(ErrorCode::InvalidMeasure, "invalid population parameters");
      }
    }
  }
  if (reference_k < 0) throw Error(ErrorCode::InvalidMeasure, "reference_k must be nonnegative");
}

int ApproximationSchedule::effective_reference_k() const {
  return reference_k > 0 ? reference_k : 4 * k_values.back();
}

SignedFamily build_family(const ApproximationSchedule& schedule, int k, std::uint64_t seed) {
  if (const auto* family = std::get_if<SignedFamily>(&schedule.target)) {
    if (static_cast<std::size_t>(k) >= family->size()) return *family;
    return sample_finite(*family, k, seed);
  }
  return sample_population(std::get<Population>(schedule.target), k, seed);
}

Report run_consistency(const ApproximationSchedule& schedule) {
  schedule.validate();
  Report report;
  const auto* finite = std::get_if<SignedFamily>(&schedule.target);
  report.reference_is_proxy = finite == nullptr;
  report.reference_k = finite ? static_cast<int>(finite->size()) : schedule.effective_reference_k();
  if (!finite) report.population_moment_bound = std::get<Population>(schedule.target).moment_bound();

  const std::size_t n_seeds = schedule.seeds.size();
  const std::size_t n_k = schedule.k_values.size();

  // References first: one per seed for sampled populations, shared otherwise.
  std::vector<std::optional<Reference>> refs(finite ? 1 : n_seeds);
  parallel_for(refs.size(), [&](std::size_t s) {
    const std::uint64_t seed = schedule.seeds[s];
    const SignedFamily family = finite ? *finite : build_family(schedule, report.reference_k, seed);
    Law bary = barycenter(family);
    const double e = energy(family, bary);
    refs[s] = Reference{seed, e, std::move(bary)};
  });
  for (auto& r : refs) report.references.push_back(std::move(*r));

  std::vector<std::optional<Run>> runs(n_seeds * n_k);
  parallel_for(runs.size(), [&](std::size_t idx) {
    const std::size_t s = idx / n_k;
    const int k = schedule.k_values[idx % n_k];
    const std::uint64_t seed = schedule.seeds[s];
    const SignedFamily family = build_family(schedule, k, seed);
    const Law bary = barycenter(family);
    const Reference& ref = report.references[finite ? 0 : s];
    runs[idx] = Run{seed, k, energy(family, bary), w2(bary, ref.barycenter), family_stats(family).moment2};
  });
  for (auto& r : runs) report.runs.push_back(*r);
  return report;
}

std::vector<TrendRow> median_trend(const Report& report) {
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_k;
  std::vector<int> order;
  for (const Run& r : report.runs) {
    double ref_energy = report.references.front().energy;
    for (const Reference& ref : report.references) {
      if (ref.seed == r.seed) ref_energy = ref.energy;
    }
    if (!by_k.count(r.k)) order.push_back(r.k);
    by_k[r.k].first.push_back(std::abs(r.energy - ref_energy));
    by_k[r.k].second.push_back(r.w2_gap);
  }
  std::vector<TrendRow> out;
  for (int k : order) out.push_back({k, median(by_k[k].first), median(by_k[k].second)});
  return out;
}

}  // namespace gwb::consistency
