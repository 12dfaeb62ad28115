#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rssforge/program/program.hpp"
#include "rssforge/scenarios/scenarios.hpp"
#include "rssforge/smt/solver.hpp"

namespace rssforge::sim {

using scenarios::IntersectionParams;
using symbolic::Assertion;

// Distances to the crossing point (positive before it) and speeds.
struct Instance {
  double x_sv = 0.0;
  double v_sv = 0.0;
  double x_pov = 0.0;
  double v_pov = 0.0;

  // Lane coordinates: a car d metres before the crossing sits at -d.
  symbolic::ExactStore lane_store() const;
};

struct Behavior {
  double a_pov = 0.0;  // POV acceleration until it reacts
};

struct SimSample {
  double t;
  double x_sv, v_sv, x_pov, v_pov;  // lane coordinates
};

struct SimOutcome {
  bool collision = false;
  std::optional<double> t_collision;
  bool horizon_exceeded = false;
  std::optional<double> t_sv_enter;  // SV first inside its zone
  double t_end = 0.0;
  std::vector<SimSample> trace;
};

// SV keeps its speed for rho and then brakes at b to a stop. POV accelerates
// at a_pov (its speed never drops below zero) and brakes at b from rho after
// SV first enters its zone. Fixed-step RK4 with events located by bisection.
// Stops at the first collision or once no collision can follow.
SimOutcome simulate(const Instance& inst, const Behavior& beh, const IntersectionParams& p,
                    const program::SimCfg& cfg);

enum class Compliance { kComplying, kNonComplying, kIndeterminate };
std::string to_string(Compliance c);

// Checks the instance against a condition over x_SV, v_SV, x_POV, v_POV.
// Exact partial evaluation first, then certified interval evaluation, then the
// solver for whatever remains. Throws std::invalid_argument if the condition
// mentions other free variables.
class ConditionEvaluator {
 public:
  ConditionEvaluator(Assertion condition, smt::SolverPool* pool, double timeout_seconds = 60.0);
  Compliance evaluate(const Instance& inst) const;

 private:
  Assertion condition_;
  smt::SolverPool* pool_;
  double timeout_;
};

Compliance evaluate_condition(const Instance& inst, const Assertion& a, smt::SolverPool* pool);

struct GridSpec {
  std::vector<double> x_sv, v_sv, x_pov, v_pov;
  std::vector<double> behaviors;

  // x in {5, 10, ..., 45}, v in {3, 6, ..., 18}, a_pov in {-5, ..., 2}.
  static GridSpec full();
  // Two values per axis and the same behaviors.
  static GridSpec small();
  std::vector<Instance> instances() const;
};

struct InstanceRecord {
  Instance inst;
  Compliance compliance = Compliance::kIndeterminate;
  std::vector<SimOutcome> outcomes;  // one per behavior, traces dropped
  std::size_t unsafe_runs = 0;
  bool safe() const { return unsafe_runs == 0; }
};

struct ConfusionMatrix {
  std::size_t complying_safe = 0;
  std::size_t complying_unsafe = 0;
  std::size_t noncomplying_safe = 0;
  std::size_t noncomplying_unsafe = 0;
  std::size_t indeterminate_safe = 0;
  std::size_t indeterminate_unsafe = 0;

  std::size_t total() const;
  // Positives are non-complying flags.
  double precision() const;
  double recall() const;
};

struct GridResult {
  std::vector<double> behaviors;
  std::vector<InstanceRecord> records;  // grid order
  ConfusionMatrix matrix;
  // histogram[k]: non-complying unsafe instances with k unsafe runs, k = 0..8.
  std::vector<std::size_t> histogram;
  std::size_t simulations = 0;
  std::size_t horizon_exceeded = 0;
};

// Deterministic for any job count: each instance is computed independently
// and stored at its grid index.
GridResult run_grid(const Assertion& condition, const GridSpec& grid, const IntersectionParams& p,
                    const program::SimCfg& cfg, smt::SolverPool* pool, unsigned jobs = 1);

// Same as run_grid but with the compliance of each instance given.
GridResult run_grid(const std::vector<Compliance>& compliance, const GridSpec& grid, const IntersectionParams& p,
                    const program::SimCfg& cfg, unsigned jobs = 1);

ConfusionMatrix tabulate(const std::vector<InstanceRecord>& records);

// CSV `x_sv,v_sv,x_pov,v_pov,a_pov,collision,t_collision`, one row per run.
void write_csv(std::ostream& os, const GridResult& r);
struct CsvRow {
  double x_sv, v_sv, x_pov, v_pov, a_pov;
  bool collision;
  std::optional<double> t_collision;
};
std::vector<CsvRow> read_csv(std::istream& is);

// Matrix, precision, recall, histogram and counts.
std::string summary_json(const GridResult& r, const IntersectionParams& p, const program::SimCfg& cfg);

}  // namespace rssforge::sim
