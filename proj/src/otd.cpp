#include "gwb/otd.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

#include "gwb/error.hpp"

namespace gwb::otd {
namespace {

constexpr double kMassTolerance = 1e-12;
constexpr double kMergeTolerance = 1e-12;
constexpr double kCertificateTolerance = 1e-9;

double sq_dist(const Point& p, const Point& q) {
  double acc = 0.0;
  for (int k = 0; k < 3; ++k) acc += (p[k] - q[k]) * (p[k] - q[k]);
  return acc;
}

struct Cell {
  std::size_t i;
  std::size_t j;
  double flow;
};

// Basis of the transportation problem: a spanning tree on rows 0..n-1 and
// columns n..n+m-1 with one edge per basic cell.
class TransportationSimplex {
 public:
  enum class Rule { Dantzig, Bland };

  TransportationSimplex(const std::vector<double>& cost, std::size_t n, std::size_t m)
      : cost_(cost), n_(n), m_(m) {
    double max_cost = 0.0;
    for (double c : cost_) max_cost = std::max(max_cost, c);
    pricing_tol_ = 1e-13 * std::max(1.0, max_cost);
  }

  void north_west_corner(std::vector<double> supply, std::vector<double> demand) {
    basis_.clear();
    std::size_t i = 0, j = 0;
    while (j < m_) {
      if (i + 1 < n_ && (j + 1 == m_ || supply[i] <= demand[j])) {
        const double x = std::max(0.0, supply[i]);
        basis_.push_back({i, j, x});
        demand[j] -= x;
        ++i;
      } else {
        const double x = std::max(0.0, demand[j]);
        basis_.push_back({i, j, x});
        supply[i] -= x;
        ++j;
      }
    }
  }

  // Runs pivots to optimality. Returns false if the iteration cap was hit.
  bool optimize(Rule rule) {
    const std::size_t cap = 50 * (n_ + m_) * (n_ + m_) + 1000;
    std::size_t degenerate_streak = 0;
    for (std::size_t iter = 0; iter < cap; ++iter) {
      compute_potentials();
      const Rule active = degenerate_streak > n_ + m_ ? Rule::Bland : rule;
      const auto entering = price(active);
      if (!entering) return true;
      const double theta = pivot(entering->first, entering->second);
      degenerate_streak = theta > 0.0 ? 0 : degenerate_streak + 1;
    }
    return false;
  }

  // Flows of the current basis for the given marginals, by leaf elimination.
  std::vector<Cell> flows_for(const std::vector<double>& supply, const std::vector<double>& demand) const {
    const std::size_t nodes = n_ + m_;
    std::vector<double> remaining(nodes);
    for (std::size_t i = 0; i < n_; ++i) remaining[i] = supply[i];
    for (std::size_t j = 0; j < m_; ++j) remaining[n_ + j] = demand[j];

    build_adjacency();
    std::vector<std::size_t> degree(nodes);
    for (std::size_t v = 0; v < nodes; ++v) degree[v] = adjacency_[v].size();
    std::vector<bool> used(basis_.size(), false);
    std::vector<Cell> out = basis_;

    std::deque<std::size_t> leaves;
    for (std::size_t v = 0; v < nodes; ++v) {
      if (degree[v] == 1) leaves.push_back(v);
    }
    while (!leaves.empty()) {
      const std::size_t v = leaves.front();
      leaves.pop_front();
      if (degree[v] != 1) continue;
      for (const auto& [w, e] : adjacency_[v]) {
        if (used[e]) continue;
        used[e] = true;
        out[e].flow = remaining[v];
        remaining[w] -= remaining[v];
        remaining[v] = 0.0;
        --degree[v];
        if (--degree[w] == 1) leaves.push_back(w);
        break;
      }
    }
    return out;
  }

  const std::vector<Cell>& basis() const { return basis_; }
  const std::vector<double>& u() const { return u_; }
  const std::vector<double>& v() const { return v_; }

  void compute_potentials() {
    build_adjacency();
    const std::size_t nodes = n_ + m_;
    std::vector<double> pot(nodes, 0.0);
    std::vector<bool> seen(nodes, false);
    std::deque<std::size_t> queue{0};
    seen[0] = true;
    while (!queue.empty()) {
      const std::size_t x = queue.front();
      queue.pop_front();
      for (const auto& [y, e] : adjacency_[x]) {
        if (seen[y]) continue;
        seen[y] = true;
        const Cell& c = basis_[e];
        // cost(i,j) = u_i + v_j on basic cells.
        pot[y] = cost_[c.i * m_ + c.j] - pot[x];
        queue.push_back(y);
      }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw std::logic_error("transportation basis is not a spanning tree");
    }
    u_.assign(pot.begin(), pot.begin() + static_cast<std::ptrdiff_t>(n_));
    v_.assign(pot.begin() + static_cast<std::ptrdiff_t>(n_), pot.end());
  }

 private:
  std::optional<std::pair<std::size_t, std::size_t>> price(Rule rule) const {
    std::optional<std::pair<std::size_t, std::size_t>> best;
    double best_r = -pricing_tol_;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        const double r = cost_[i * m_ + j] - u_[i] - v_[j];
        if (r < best_r) {
          if (rule == Rule::Bland) return std::make_pair(i, j);
          best_r = r;
          best = std::make_pair(i, j);
        }
      }
    }
    return best;
  }

  // Brings (i, j) into the basis; returns the step length theta.
  double pivot(std::size_t i, std::size_t j) {
    const std::size_t nodes = n_ + m_;
    const std::size_t target = n_ + j;
    std::vector<std::ptrdiff_t> parent_edge(nodes, -1);
    std::vector<std::size_t> parent(nodes, nodes);
    std::deque<std::size_t> queue{i};
    parent[i] = i;
    while (!queue.empty() && parent[target] == nodes) {
      const std::size_t x = queue.front();
      queue.pop_front();
      for (const auto& [y, e] : adjacency_[x]) {
        if (parent[y] != nodes) continue;
        parent[y] = x;
        parent_edge[y] = static_cast<std::ptrdiff_t>(e);
        queue.push_back(y);
      }
    }

    // Walking from column j back to row i, cells alternate -, +, -, ...
    std::vector<std::size_t> minus, plus;
    bool is_minus = true;
    for (std::size_t x = target; x != i; x = parent[x]) {
      (is_minus ? minus : plus).push_back(static_cast<std::size_t>(parent_edge[x]));
      is_minus = !is_minus;
    }

    std::size_t leaving = minus.front();
    for (std::size_t e : minus) {
      const Cell& c = basis_[e];
      const Cell& l = basis_[leaving];
      if (c.flow < l.flow || (c.flow == l.flow && c.i * m_ + c.j < l.i * m_ + l.j)) leaving = e;
    }
    const double theta = basis_[leaving].flow;
    for (std::size_t e : minus) basis_[e].flow -= theta;
    for (std::size_t e : plus) basis_[e].flow += theta;
    basis_[leaving] = {i, j, theta};
    return theta;
  }

  void build_adjacency() const {
    adjacency_.assign(n_ + m_, {});
    for (std::size_t e = 0; e < basis_.size(); ++e) {
      adjacency_[basis_[e].i].emplace_back(n_ + basis_[e].j, e);
      adjacency_[n_ + basis_[e].j].emplace_back(basis_[e].i, e);
    }
  }

  const std::vector<double>& cost_;
  std::size_t n_;
  std::size_t m_;
  double pricing_tol_;
  std::vector<Cell> basis_;
  std::vector<double> u_;
  std::vector<double> v_;
  mutable std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency_;
};

bool feasible(const std::vector<Cell>& cells) {
  return std::all_of(cells.begin(), cells.end(), [](const Cell& c) { return c.flow >= -1e-12; });
}

void merge_duplicates(std::vector<Point>& atoms, std::vector<double>& masses) {
  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });

  std::vector<Point> out_atoms;
  std::vector<double> out_masses;
  std::vector<bool> taken(atoms.size(), false);
  for (std::size_t a = 0; a < order.size(); ++a) {
    if (taken[order[a]]) continue;
    const Point& p = atoms[order[a]];
    double mass = masses[order[a]];
    Point moment{};
    for (int k = 0; k < 3; ++k) moment[k] = mass * p[k];
    bool merged = false;
    // Sorted by first coordinate, so candidates are contiguous in x.
    for (std::size_t b = a + 1; b < order.size() && atoms[order[b]][0] - p[0] < kMergeTolerance; ++b) {
      const Point& q = atoms[order[b]];
      if (taken[order[b]]) continue;
      if (std::abs(q[1] - p[1]) < kMergeTolerance && std::abs(q[2] - p[2]) < kMergeTolerance) {
        taken[order[b]] = true;
        merged = true;
        mass += masses[order[b]];
        for (int k = 0; k < 3; ++k) moment[k] += masses[order[b]] * q[k];
      }
    }
    if (merged) {
      out_atoms.push_back({moment[0] / mass, moment[1] / mass, moment[2] / mass});
    } else {
      out_atoms.push_back(p);
    }
    out_masses.push_back(mass);
  }
  atoms = std::move(out_atoms);
  masses = std::move(out_masses);
}

}  // namespace

DiscreteMeasureRd::DiscreteMeasureRd(int dim, const std::vector<std::vector<double>>& atoms,
                                     std::vector<double> masses)
    : DiscreteMeasureRd(dim,
                        [&] {
                          std::vector<Point> pts;
                          pts.reserve(atoms.size());
                          for (const auto& a : atoms) {
                            if (a.size() != static_cast<std::size_t>(dim)) {
                              throw Error(ErrorCode::DimensionMismatch, "atom has wrong number of coordinates");
                            }
                            Point p{};
                            std::copy(a.begin(), a.end(), p.begin());
                            pts.push_back(p);
                          }
                          return pts;
                        }(),
                        std::move(masses)) {}

DiscreteMeasureRd::DiscreteMeasureRd(int dim, std::vector<Point> atoms, std::vector<double> masses)
    : dim_(dim), atoms_(std::move(atoms)), masses_(std::move(masses)) {
  if (dim_ < 1 || dim_ > 3) throw Error(ErrorCode::InvalidMeasure, "dimension must be 1, 2 or 3");
  if (atoms_.empty() || atoms_.size() != masses_.size()) {
    throw Error(ErrorCode::InvalidMeasure, "atoms and masses must be nonempty and of equal length");
  }
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      if (!std::isfinite(atoms_[i][k])) throw Error(ErrorCode::InvalidMeasure, "non-finite atom");
      if (k >= dim_ && atoms_[i][k] != 0.0) {
        throw Error(ErrorCode::DimensionMismatch, "unused coordinate must be zero");
      }
    }
    if (!(masses_[i] > 0.0)) throw Error(ErrorCode::InvalidMeasure, "masses must be strictly positive");
  }
  const double total = std::accumulate(masses_.begin(), masses_.end(), 0.0);
  if (std::abs(total - 1.0) > kMassTolerance) throw Error(ErrorCode::InvalidMeasure, "total mass is not 1");
  merge_duplicates(atoms_, masses_);
  const double merged_total = std::accumulate(masses_.begin(), masses_.end(), 0.0);
  if (std::abs(merged_total - 1.0) > 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(size())) {
    for (double& m : masses_) m /= merged_total;
  }
}

double DiscreteMeasureRd::second_moment() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) acc += masses_[i] * sq_dist(atoms_[i], Point{});
  return acc;
}

double TransportPlan::row_sum(std::size_t i) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < cols; ++j) acc += (*this)(i, j);
  return acc;
}

double TransportPlan::col_sum(std::size_t j) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < rows; ++i) acc += (*this)(i, j);
  return acc;
}

W2Solution solve_w2(const DiscreteMeasureRd& a, const DiscreteMeasureRd& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "measures live in different dimensions");
  if (a.size() + b.size() > kMaxAtoms) {
    throw Error(ErrorCode::TooLarge, "combined support exceeds " + std::to_string(kMaxAtoms) + " atoms");
  }
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<double> cost(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) cost[i * m + j] = sq_dist(a.atoms()[i], b.atoms()[j]);
  }

  // Perturbed marginals make every basis nondegenerate; the optimal basis of
  // the perturbed problem is then re-solved for the true marginals.
  const double eps = 1e-9 / static_cast<double>(n + 1);
  std::vector<double> supply = a.masses();
  std::vector<double> demand = b.masses();
  for (double& s : supply) s += eps;
  demand.back() += eps * static_cast<double>(n);

  TransportationSimplex simplex(cost, n, m);
  simplex.north_west_corner(supply, demand);
  bool ok = simplex.optimize(TransportationSimplex::Rule::Dantzig);
  std::vector<Cell> cells = simplex.flows_for(a.masses(), b.masses());
  if (!ok || !feasible(cells)) {
    simplex.north_west_corner(a.masses(), b.masses());
    if (!simplex.optimize(TransportationSimplex::Rule::Bland)) {
      throw std::logic_error("transportation simplex failed to converge");
    }
    cells = simplex.flows_for(a.masses(), b.masses());
  }
  simplex.compute_potentials();

  W2Solution out{0.0, {n, m, std::vector<double>(n * m, 0.0)}, simplex.u(), simplex.v()};
  for (const Cell& c : cells) {
    const double x = std::max(0.0, c.flow);
    out.plan.entries[c.i * m + c.j] = x;
    out.cost += x * cost[c.i * m + c.j];
  }

  const PlanCheck check = check_solution(a, b, out);
  if (check.min_reduced_cost < -kCertificateTolerance || check.max_marginal_error > 1e-10) {
    throw std::logic_error("transportation simplex returned an uncertified plan");
  }
  return out;
}

PlanCheck check_solution(const DiscreteMeasureRd& a, const DiscreteMeasureRd& b, const W2Solution& s) {
  PlanCheck check{0.0, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0.0};
  const auto& plan = s.plan;
  for (std::size_t i = 0; i < plan.rows; ++i) {
    check.max_marginal_error = std::max(check.max_marginal_error, std::abs(plan.row_sum(i) - a.masses()[i]));
  }
  for (std::size_t j = 0; j < plan.cols; ++j) {
    check.max_marginal_error = std::max(check.max_marginal_error, std::abs(plan.col_sum(j) - b.masses()[j]));
  }
  for (std::size_t i = 0; i < plan.rows; ++i) {
    for (std::size_t j = 0; j < plan.cols; ++j) {
      const double r = sq_dist(a.atoms()[i], b.atoms()[j]) - s.u[i] - s.v[j];
      check.min_entry = std::min(check.min_entry, plan(i, j));
      check.min_reduced_cost = std::min(check.min_reduced_cost, r);
      if (plan(i, j) > 0.0) check.complementary_slackness = std::max(check.complementary_slackness, std::abs(r));
    }
  }
  return check;
}

SignedFamilyRd::SignedFamilyRd(std::vector<FamilyEntryRd> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorCode::WeightSumInvalid, "family must have at least one entry");
  double total = 0.0;
  for (const auto& e : entries_) {
    if (e.measure.dim() != entries_.front().measure.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "family members live in different dimensions");
    }
    total += e.weight;
  }
  if (!(std::abs(total - 1.0) <= 1e-10)) {
    throw Error(ErrorCode::WeightSumInvalid, "weights sum to " + std::to_string(total) + ", expected 1");
  }
}

double energy_rd(const SignedFamilyRd& family, const DiscreteMeasureRd& mu) {
  double acc = 0.0;
  for (const auto& e : family.entries()) acc += e.weight * solve_w2(mu, e.measure).cost;
  return acc;
}

double coupling_remainder(const DiscreteMeasureRd& a, const DiscreteMeasureRd& b) {
  return solve_w2(a, b).cost - a.second_moment() - b.second_moment();
}

SignedFamilyRd counterexample_family() {
  const DiscreteMeasureRd nu0 = DiscreteMeasureRd::dirac(2, {0.0, 0.0, 0.0});
  const DiscreteMeasureRd nu1(2, std::vector<Point>{{-1.0, -1.0, 0.0}, {1.0, 1.0, 0.0}}, {0.5, 0.5});
  const DiscreteMeasureRd nu2(2, std::vector<Point>{{1.0, -1.0, 0.0}, {-1.0, 1.0, 0.0}}, {0.5, 0.5});
  return SignedFamilyRd({{-1.0, nu0}, {1.0, nu1}, {1.0, nu2}});
}

DiscreteMeasureRd counterexample_eta() {
  return {2, std::vector<Point>{{0.0, 1.0, 0.0}, {0.0, -1.0, 0.0}}, {0.5, 0.5}};
}

Point swap_on_horizontal(const Point& p) {
  if (std::abs(p[0]) > std::abs(p[1])) return {p[1], p[0], p[2]};
  return p;
}

Point negswap_on_vertical(const Point& p) {
  if (std::abs(p[1]) > std::abs(p[0])) return {0.0 - p[1], 0.0 - p[0], p[2]};
  return p;
}

DiscreteMeasureRd push_forward(const DiscreteMeasureRd& mu, const std::function<Point(const Point&)>& map) {
  std::vector<Point> atoms;
  atoms.reserve(mu.size());
  for (const Point& p : mu.atoms()) atoms.push_back(map(p));
  return {mu.dim(), std::move(atoms), mu.masses()};
}

DiscreteMeasureRd random_diagonal_measure(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::bernoulli_distribution anti(0.5);
  std::exponential_distribution<double> gamma1(1.0);

  const int k = count(rng);
  std::vector<Point> atoms;
  std::vector<double> masses;
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    const double s = coord(rng);
    atoms.push_back({s, anti(rng) ? -s : s, 0.0});
    masses.push_back(gamma1(rng) + 1e-12);
    total += masses.back();
  }
  for (double& w : masses) w /= total;
  return {2, std::move(atoms), std::move(masses)};
}

double diagonal_energy_bound(int samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorCode::InvalidMeasure, "need at least one sample");
  const SignedFamilyRd family = counterexample_family();
  std::mt19937_64 rng(seed);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) best = std::min(best, energy_rd(family, random_diagonal_measure(rng)));
  return best;
}

SymmetryEnergies symmetry_energy_check(const DiscreteMeasureRd& mu) {
  if (mu.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "symmetry check is planar");
  const SignedFamilyRd family = counterexample_family();
  return {energy_rd(family, mu), energy_rd(family, push_forward(mu, swap_on_horizontal)),
          energy_rd(family, push_forward(mu, negswap_on_vertical))};
}

}  // namespace gwb::otd
