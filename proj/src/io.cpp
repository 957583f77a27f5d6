#include "gwb/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gwb/error.hpp"

namespace gwb::io {
namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing key \"") + key + "\"");
  return j.at(key);
}

double number(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw ParseError(std::string("\"") + key + "\" must be a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_array()) throw ParseError(std::string("\"") + key + "\" must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) throw ParseError(std::string("\"") + key + "\" must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

consistency::LawPopulation parse_law_population(const json& j) {
  consistency::LawPopulation p;
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "dirac") {
    p.kind = consistency::LawPopulation::Kind::Dirac;
  } else if (kind == "uniform") {
    p.kind = consistency::LawPopulation::Kind::Uniform;
  } else {
    throw ParseError("population kind must be \"dirac\" or \"uniform\"");
  }
  p.center_mean = number(j, "center_mean");
  p.center_std = number(j, "center_std");
  if (p.kind == consistency::LawPopulation::Kind::Uniform) {
    p.width_min = number(j, "width_min");
    p.width_max = number(j, "width_max");
    p.atoms = field(j, "atoms").get<int>();
  }
  return p;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

DiscreteMeasure1D parse_discrete(const json& j) {
  return guarded([&] { return DiscreteMeasure1D(numbers(j, "atoms"), numbers(j, "masses")); });
}

Law parse_law(const json& j, std::size_t grid) {
  return guarded([&]() -> Law {
    if (j.is_object() && j.contains("gaussian")) {
      const json& g = j.at("gaussian");
      return gaussian_grid({number(g, "mean"), number(g, "std")}, grid);
    }
    if (j.is_object() && j.contains("uniform")) {
      const json& u = j.at("uniform");
      return uniform_grid(number(u, "a"), number(u, "b"), grid);
    }
    return parse_discrete(j);
  });
}

SignedFamily parse_family(const json& j, std::size_t grid) {
  return guarded([&] {
    const json& entries = field(j, "entries");
    if (!entries.is_array()) throw ParseError("\"entries\" must be an array");
    std::vector<FamilyEntry> out;
    for (const auto& e : entries) out.push_back({number(e, "weight"), parse_law(field(e, "measure"), grid)});
    return SignedFamily(std::move(out));
  });
}

otd::DiscreteMeasureRd parse_measure_rd(const json& j) {
  return guarded([&] {
    const json& atoms = field(j, "atoms");
    if (!atoms.is_array() || atoms.empty()) throw ParseError("\"atoms\" must be a nonempty array");
    const std::vector<double> masses = numbers(j, "masses");
    if (atoms.front().is_number()) {
      std::vector<std::vector<double>> pts;
      for (const auto& a : atoms) pts.push_back({a.get<double>()});
      return otd::DiscreteMeasureRd(1, pts, masses);
    }
    const int dim = static_cast<int>(atoms.front().size());
    return otd::DiscreteMeasureRd(dim, atoms.get<std::vector<std::vector<double>>>(), masses);
  });
}

sticky::ParticleState parse_state(const json& j) {
  return guarded([&] {
    return sticky::ParticleState(numbers(j, "positions"), numbers(j, "velocities"), numbers(j, "masses"));
  });
}

consistency::ApproximationSchedule parse_schedule(const json& j, std::size_t grid) {
  return guarded([&] {
    consistency::ApproximationSchedule s{{}, {}, consistency::Population{}, 0};
    s.k_values = field(j, "k_values").get<std::vector<int>>();
    if (j.contains("seeds")) {
      s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    } else {
      s.seeds = {field(j, "seed").get<std::uint64_t>()};
    }
    if (j.contains("reference_k")) s.reference_k = j.at("reference_k").get<int>();
    const json& target = field(j, "target");
    if (target.contains("family")) {
      s.target = parse_family(target.at("family"), grid);
    } else {
      const json& p = field(target, "population");
      consistency::Population pop;
      pop.positive_mass = number(p, "positive_mass");
      pop.positive = parse_law_population(field(p, "positive"));
      pop.negative = p.contains("negative") ? parse_law_population(p.at("negative")) : pop.positive;
      s.target = pop;
    }
    s.validate();
    return s;
  });
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_quantile_csv(std::ostream& out, const StepQuantile& q) {
  out << "t,value\n";
  const auto b = q.breakpoints();
  double left = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double right = i < b.size() ? b[i] : 1.0;
    const std::string v = format_double(q.values()[i]);
    out << format_double(left) << ',' << v << '\n' << format_double(right) << ',' << v << '\n';
    left = right;
  }
}

void write_quantile_csv(std::ostream& out, const GridQuantile& q) {
  out << "t,value\n";
  for (std::size_t i = 0; i < q.size(); ++i) {
    out << format_double(GridQuantile::midpoint(i, q.size())) << ',' << format_double(q.values()[i]) << '\n';
  }
}

void write_quantile_csv(std::ostream& out, const Law& law) {
  std::visit(
      [&](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, DiscreteMeasure1D>) {
          write_quantile_csv(out, quantile_of(l));
        } else {
          write_quantile_csv(out, l);
        }
      },
      law);
}

StepQuantile read_quantile_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "t,value") throw ParseError("expected header t,value");
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("malformed row: " + line);
    double t = 0.0, v = 0.0;
    const char* end = line.data() + line.size();
    if (std::from_chars(line.data(), line.data() + comma, t).ec != std::errc{} ||
        std::from_chars(line.data() + comma + 1, end, v).ec != std::errc{}) {
      throw ParseError("malformed row: " + line);
    }
    rows.emplace_back(t, v);
  }
  if (rows.empty() || rows.size() % 2 != 0) throw ParseError("staircase needs pairs of rows");
  std::vector<double> breakpoints;
  std::vector<double> values;
  for (std::size_t i = 0; i < rows.size(); i += 2) {
    if (rows[i].second != rows[i + 1].second) throw ParseError("staircase step has two values");
    values.push_back(rows[i].second);
    if (i + 2 < rows.size()) breakpoints.push_back(rows[i + 1].first);
  }
  return StepQuantile::from_breakpoints(breakpoints, std::move(values));
}

void write_plan_csv(std::ostream& out, const otd::TransportPlan& plan) {
  out << "i,j,mass\n";
  for (std::size_t i = 0; i < plan.rows; ++i) {
    for (std::size_t j = 0; j < plan.cols; ++j) {
      if (plan(i, j) > 0.0) out << i << ',' << j << ',' << format_double(plan(i, j)) << '\n';
    }
  }
}

void write_trajectories_csv(std::ostream& out, const std::vector<double>& times,
                            const std::vector<DiscreteMeasure1D>& states) {
  out << "t,atom,mass\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t i = 0; i < states[k].size(); ++i) {
      out << format_double(times[k]) << ',' << format_double(states[k].atoms()[i]) << ','
          << format_double(states[k].masses()[i]) << '\n';
    }
  }
}

json to_json(const DiscreteMeasure1D& m) { return {{"atoms", m.atoms()}, {"masses", m.masses()}}; }

json to_json(const otd::DiscreteMeasureRd& m) {
  json atoms = json::array();
  for (const auto& p : m.atoms()) atoms.push_back(std::vector<double>(p.begin(), p.begin() + m.dim()));
  return {{"atoms", atoms}, {"masses", m.masses()}};
}

json to_json(const consistency::Report& report) {
  json runs = json::array();
  for (const auto& r : report.runs) {
    runs.push_back({{"seed", r.seed}, {"k", r.k}, {"energy", r.energy}, {"w2_gap", r.w2_gap}, {"m2_bound", r.m2_bound}});
  }
  json energies = json::array();
  for (const auto& ref : report.references) energies.push_back({{"seed", ref.seed}, {"energy", ref.energy}});
  json reference{{"proxy", report.reference_is_proxy}, {"k", report.reference_k}, {"energy_by_seed", energies}};
  if (report.population_moment_bound) reference["population_m2_bound"] = *report.population_moment_bound;

  json trend = json::array();
  for (const auto& row : consistency::median_trend(report)) {
    trend.push_back({{"k", row.k}, {"median_energy_gap", row.median_energy_gap}, {"median_w2_gap", row.median_w2_gap}});
  }
  return {{"runs", runs}, {"reference", reference}, {"trend", trend}};
}

}  // namespace gwb::io
