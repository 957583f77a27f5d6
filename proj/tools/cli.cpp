#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gwb/bary1d.hpp"
#include "gwb/consistency.hpp"
#include "gwb/error.hpp"
#include "gwb/io.hpp"
#include "gwb/otd.hpp"
#include "gwb/sticky.hpp"

namespace gwb::cli {
namespace {

using io::json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path + " for writing");
  body(file);
  file.flush();
  if (!file) throw IoError("failed writing " + path);
}

void emit(std::ostream& out, const std::optional<std::string>& path, const json& j) {
  if (path) {
    write_file(*path, [&](std::ostream& f) { f << j.dump(2) << '\n'; });
  } else {
    out << j.dump(2) << '\n';
  }
}

void error_record(std::ostream& err, std::string_view code, const std::string& detail) {
  err << json{{"error", code}, {"detail", detail}}.dump() << '\n';
}

// Uniform random measure; region 0 is the whole plane, 1 is {|x| > |y|},
// 2 is {|y| > |x|}.
otd::DiscreteMeasureRd random_planar_measure(std::mt19937_64& rng, int region) {
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  const int k = count(rng);
  std::vector<otd::Point> atoms;
  for (int i = 0; i < k; ++i) {
    double x = coord(rng), y = coord(rng);
    if ((region == 1 && std::abs(y) >= std::abs(x)) || (region == 2 && std::abs(x) >= std::abs(y))) std::swap(x, y);
    atoms.push_back({x, y, 0.0});
  }
  return {2, std::move(atoms), std::vector<double>(static_cast<std::size_t>(k), 1.0 / k)};
}

struct Options {
  std::string family, measure, a, b, state, schedule;
  std::optional<std::string> out, plan, report;
  std::size_t grid = 1000;
  std::vector<double> times;
  double m1 = 0, s1 = 0, m2 = 0, s2 = 0;
  int samples = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> gauss_grid;
  std::optional<std::uint64_t> seed_override;
};

int cmd_barycenter(const Options& o, std::ostream& out) {
  const SignedFamily family = io::parse_family(io::read_json_file(o.family), o.grid);
  const Law bary = barycenter(family);
  auto csv = [&](std::ostream& f) { io::write_quantile_csv(f, bary); };
  json summary{{"kind", std::holds_alternative<GridQuantile>(bary) ? "grid" : "discrete"},
               {"energy", energy(family, bary)}};
  if (const auto* d = std::get_if<DiscreteMeasure1D>(&bary)) summary["measure"] = io::to_json(*d);
  if (o.out) {
    write_file(*o.out, csv);
    out << summary.dump(2) << '\n';
  } else {
    csv(out);
  }
  return 0;
}

int cmd_energy(const Options& o, std::ostream& out) {
  const SignedFamily family = io::parse_family(io::read_json_file(o.family), o.grid);
  const Law mu = io::parse_law(io::read_json_file(o.measure), o.grid);
  const BoundCheck bound = lower_bound(family, mu);
  emit(out, o.out, {{"energy", bound.lhs}, {"lower_bound", bound.rhs}});
  return 0;
}

int cmd_w2(const Options& o, std::ostream& out) {
  const auto a = io::parse_measure_rd(io::read_json_file(o.a));
  const auto b = io::parse_measure_rd(io::read_json_file(o.b));
  const otd::W2Solution sol = otd::solve_w2(a, b);
  if (o.plan) write_file(*o.plan, [&](std::ostream& f) { io::write_plan_csv(f, sol.plan); });
  emit(out, o.out, {{"cost", sol.cost}, {"w2", std::sqrt(sol.cost)}});
  return 0;
}

int cmd_sticky(const Options& o, std::ostream& out) {
  const auto state = io::parse_state(io::read_json_file(o.state));
  std::vector<DiscreteMeasure1D> states;
  for (double t : o.times) states.push_back(sticky::evolve(state, t));
  auto csv = [&](std::ostream& f) { io::write_trajectories_csv(f, o.times, states); };
  if (o.out) {
    write_file(*o.out, csv);
  } else {
    csv(out);
  }
  return 0;
}

int cmd_gauss_dirac(const Options& o, std::ostream& out) {
  const GaussianParams g1{o.m1, o.s1};
  const GaussianParams g2{o.m2, o.s2};
  const GaussDirac p = gauss_dirac_params(g1, g2);
  json j{{"lambda_bar", p.lambda_bar},
         {"z_bar", p.z_bar},
         {"weight_narrow", 1.0 / p.lambda_bar},
         {"weight_wide", (p.lambda_bar - 1.0) / p.lambda_bar}};
  if (o.gauss_grid) {
    const Law bary = barycenter(gauss_dirac_family(g1, g2, *o.gauss_grid));
    j["grid"] = *o.gauss_grid;
    j["w2_to_dirac"] = w2(bary, DiscreteMeasure1D::dirac(p.z_bar));
  }
  emit(out, o.out, j);
  return 0;
}

int cmd_counterexample(const Options& o, std::ostream& out) {
  const otd::SignedFamilyRd family = otd::counterexample_family();
  const otd::DiscreteMeasureRd eta = otd::counterexample_eta();
  const otd::DiscreteMeasureRd eta_image = otd::push_forward(eta, otd::negswap_on_vertical);
  const double eta_energy = otd::energy_rd(family, eta);
  const double image_energy = otd::energy_rd(family, eta_image);
  const double diagonal_min = otd::diagonal_energy_bound(o.samples, o.seed);

  std::vector<otd::DiscreteMeasureRd> probes{eta, otd::DiscreteMeasureRd::dirac(2, {0.0, 0.0, 0.0}),
                                             otd::DiscreteMeasureRd::dirac(2, {2.0, 1.0, 0.0})};
  std::mt19937_64 rng(o.seed ^ 0x9e3779b97f4a7c15ULL);
  for (int region : {1, 2, 0}) probes.push_back(random_planar_measure(rng, region));
  json symmetry = json::array();
  for (const auto& mu : probes) {
    const auto s = otd::symmetry_energy_check(mu);
    const bool equal = std::abs(s.e_swap - s.e) <= 1e-9 && std::abs(s.e_negswap - s.e) <= 1e-9;
    symmetry.push_back({{"measure", io::to_json(mu)},
                        {"e", s.e},
                        {"e_swap", s.e_swap},
                        {"e_negswap", s.e_negswap},
                        {"equal", equal}});
  }

  json report{{"samples", o.samples},
              {"seed", o.seed},
              {"eta", io::to_json(eta)},
              {"eta_energy", eta_energy},
              {"eta_image", io::to_json(eta_image)},
              {"eta_image_energy", image_energy},
              {"diagonal_min_energy", diagonal_min},
              {"non_uniqueness", eta_energy < diagonal_min && !(eta == eta_image)},
              {"symmetry", symmetry}};
  emit(out, o.report, report);
  return 0;
}

int cmd_consistency(const Options& o, std::ostream& out) {
  auto schedule = io::parse_schedule(io::read_json_file(o.schedule), o.grid);
  if (o.seed_override) schedule.seeds = {*o.seed_override};
  emit(out, o.out, io::to_json(consistency::run_consistency(schedule)));
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized Wasserstein barycenters with signed weights"};
  app.require_subcommand(1);
  Options o;

  auto* bary = app.add_subcommand("barycenter", "Barycenter of a 1D signed family; writes its quantile as CSV");
  bary->add_option("--family", o.family, "family JSON")->required()->check(CLI::ExistingFile);
  bary->add_option("--grid", o.grid, "grid size for parametric laws")->check(CLI::Range(2, 10000000));
  bary->add_option("--out", o.out, "quantile CSV path (stdout if omitted)");

  auto* en = app.add_subcommand("energy", "Signed energy of a 1D measure against a family");
  en->add_option("--family", o.family)->required()->check(CLI::ExistingFile);
  en->add_option("--measure", o.measure)->required()->check(CLI::ExistingFile);
  en->add_option("--grid", o.grid)->check(CLI::Range(2, 10000000));
  en->add_option("--out", o.out);

  auto* w2c = app.add_subcommand("w2", "Exact squared W2 between discrete measures in R^d, d <= 3");
  w2c->add_option("--a", o.a)->required()->check(CLI::ExistingFile);
  w2c->add_option("--b", o.b)->required()->check(CLI::ExistingFile);
  w2c->add_option("--plan", o.plan, "optimal plan CSV");
  w2c->add_option("--out", o.out);

  auto* st = app.add_subcommand("sticky", "Sticky particle densities at the given times");
  st->add_option("--state", o.state)->required()->check(CLI::ExistingFile);
  st->add_option("--times", o.times)->required()->delimiter(',')->check(CLI::NonNegativeNumber);
  st->add_option("--out", o.out);

  auto* gd = app.add_subcommand("gauss-dirac", "Weights and location making two Gaussians' barycenter a Dirac");
  gd->add_option("--m1", o.m1)->required();
  gd->add_option("--s1", o.s1)->required();
  gd->add_option("--m2", o.m2)->required();
  gd->add_option("--s2", o.s2)->required();
  gd->add_option("--grid", o.gauss_grid, "also compute the grid barycenter and its distance to the Dirac")
      ->check(CLI::Range(2, 10000000));
  gd->add_option("--out", o.out);

  auto* ce = app.add_subcommand("counterexample", "Energies of the planar non-uniqueness example");
  ce->add_option("--samples", o.samples)->required()->check(CLI::PositiveNumber);
  ce->add_option("--seed", o.seed)->required();
  ce->add_option("--report", o.report);

  auto* co = app.add_subcommand("consistency", "Empirical consistency run over a schedule");
  co->add_option("--schedule", o.schedule)->required()->check(CLI::ExistingFile);
  co->add_option("--grid", o.grid)->check(CLI::Range(2, 10000000));
  co->add_option("--seed", o.seed_override, "run this single seed instead of the schedule's");
  co->add_option("--out", o.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_record(err, "UsageError", e.what());
    return 2;
  }

  try {
    if (*bary) return cmd_barycenter(o, out);
    if (*en) return cmd_energy(o, out);
    if (*w2c) return cmd_w2(o, out);
    if (*st) return cmd_sticky(o, out);
    if (*gd) return cmd_gauss_dirac(o, out);
    if (*ce) return cmd_counterexample(o, out);
    if (*co) return cmd_consistency(o, out);
  } catch (const Error& e) {
    error_record(err, to_string(e.code()), e.what());
    return 1;
  } catch (const io::ParseError& e) {
    error_record(err, "ParseError", e.what());
    return 2;
  } catch (const IoError& e) {
    error_record(err, "IOError", e.what());
    return 1;
  }
  return 2;
}

}  // namespace gwb::cli
