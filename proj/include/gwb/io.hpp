#pragma once

// JSON inputs and CSV/JSON outputs. Formats are documented in FORMATS.md.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwb/bary1d.hpp"
#include "gwb/consistency.hpp"
#include "gwb/otd.hpp"
#include "gwb/sticky.hpp"

namespace gwb::io {

using nlohmann::json;

/// Malformed input: wrong JSON shape, missing keys, unreadable CSV.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

DiscreteMeasure1D parse_discrete(const json& j);
/// Discrete {"atoms","masses"}, or {"gaussian":{"mean","std"}} /
/// {"uniform":{"a","b"}} sampled on a grid of size `grid`.
Law parse_law(const json& j, std::size_t grid);
/// {"entries":[{"weight":w,"measure":...}, ...]}
SignedFamily parse_family(const json& j, std::size_t grid);
/// {"atoms":[...], "masses":[...]} with scalar atoms (d = 1) or coordinate
/// arrays of length d <= 3.
otd::DiscreteMeasureRd parse_measure_rd(const json& j);
/// {"positions":[...], "velocities":[...], "masses":[...]}
sticky::ParticleState parse_state(const json& j);
consistency::ApproximationSchedule parse_schedule(const json& j, std::size_t grid);

json read_json_file(const std::string& path);

/// Header `t,value`. Step quantiles: left and right endpoint of every
/// subinterval. Grid quantiles: one row per midpoint.
void write_quantile_csv(std::ostream& out, const StepQuantile& q);
void write_quantile_csv(std::ostream& out, const GridQuantile& q);
void write_quantile_csv(std::ostream& out, const Law& law);
/// Inverse of the step-quantile writer.
StepQuantile read_quantile_csv(std::istream& in);

/// Header `i,j,mass`, nonzero entries only, row-major.
void write_plan_csv(std::ostream& out, const otd::TransportPlan& plan);
/// Header `t,atom,mass`, one row per atom per time.
void write_trajectories_csv(std::ostream& out, const std::vector<double>& times,
                            const std::vector<DiscreteMeasure1D>& states);

json to_json(const DiscreteMeasure1D& m);
json to_json(const otd::DiscreteMeasureRd& m);
json to_json(const consistency::Report& report);

}  // namespace gwb::io
