#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rssforge/symbolic/assertion.hpp"
#include "rssforge/symbolic/compiled.hpp"

namespace rssforge::program {

using symbolic::Assertion;
using symbolic::Store;
using symbolic::Term;
using symbolic::Var;

enum class ProgramKind { kSkip, kSeq, kAssign, kIf, kWhile, kDWhile };

using Ode = std::vector<std::pair<Var, Term>>;

// Immutable hybrid-program AST.
class HybridProgram {
 public:
  static HybridProgram skip();
  static HybridProgram seq(HybridProgram first, HybridProgram second);
  // Right-nested sequence of all parts; skip for an empty list.
  static HybridProgram seq(const std::vector<HybridProgram>& parts);
  static HybridProgram assign(const Var& x, const Term& e);
  static HybridProgram if_then_else(const Assertion& guard, HybridProgram then_branch, HybridProgram else_branch);
  static HybridProgram while_loop(const Assertion& guard, HybridProgram body);
  // Throws std::invalid_argument if the guard is not open or the ODE repeats a variable.
  static HybridProgram dwhile(const Assertion& guard, Ode ode);

  ProgramKind kind() const;
  const Assertion& guard() const;       // if, while, dwhile
  const Var& target() const;            // assign
  const Term& value() const;            // assign
  const Ode& ode() const;               // dwhile
  const HybridProgram& first() const;   // seq; then-branch of if; body of while
  const HybridProgram& second() const;  // seq; else-branch of if

  std::set<Var> variables() const;
  std::string to_string(int indent = 0) const;

 private:
  struct Node;
  explicit HybridProgram(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// JSON form: {"kind": ..., ...} with assertions and terms in canonical text.
std::string program_to_json(const HybridProgram& p);
// Throws std::invalid_argument on malformed input.
HybridProgram program_from_json(std::string_view text);
// Structural equality.
bool same_program(const HybridProgram& a, const HybridProgram& b);

struct SimCfg {
  double dt = 0.001;
  double horizon = 100.0;
  double event_tol = 1e-9;
  std::uint64_t max_steps = 50'000'000;
  bool record_trace = true;

  void validate() const;
};

// Integration clock shared by everything that advances one run. Time is
// rebuilt from a step count since the last event so it does not drift.
struct FlowClock {
  double t = 0.0;
  double t0 = 0.0;
  std::uint64_t substeps = 0;
  std::uint64_t steps = 0;
};

// A dwhile lowered onto a fixed variable layout. Owns scratch buffers, so
// one instance must not be used by two threads at once.
class CompiledFlow {
 public:
  CompiledFlow(const Assertion& stay, const Ode& ode, const std::vector<Var>& layout);

  bool stays(std::span<const double> y) const { return stay_(y); }

  // Runs fixed-step RK4 while the stay guard holds, bisecting the exit to
  // within cfg.event_tol. Returns false when the horizon or step budget runs
  // out. `on_step` runs after every full step that keeps the guard true.
  bool advance(std::vector<double>& y, FlowClock& clock, const SimCfg& cfg,
               const std::function<void()>& on_step = {});
  // One RK4 step of length h, ignoring the stay guard.
  std::vector<double> step(const std::vector<double>& y, double h);

 private:
  void derivative(const std::vector<double>& y, std::vector<double>& out) const;
  void rk4(const std::vector<double>& y, double h, std::vector<double>& out);

  symbolic::CompiledAssertion stay_;
  std::vector<std::pair<std::size_t, symbolic::CompiledTerm>> rhs_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_, next_, mid_;
};

struct TracePoint {
  double t;
  Store store;
};

enum class Outcome { kConverged, kTimeout, kStuck };

std::string to_string(Outcome o);

struct RunResult {
  Outcome outcome = Outcome::kStuck;
  Store final_store;  // last store reached (the converged store when converged)
  double time = 0.0;
  std::vector<TracePoint> trace;
  // Exit times of every dwhile, in execution order.
  std::vector<double> event_times;
};

// Executes p from ρ0. Discrete constructs run exactly; each dwhile is
// integrated by fixed-step RK4 and its exit pinpointed by bisection.
// `observer` (if set) sees every trace point, even with record_trace off.
// Throws MissingVariable if ρ0 does not cover the program's variables.
RunResult run_program(const HybridProgram& p, const Store& rho0, const SimCfg& cfg,
                      const std::function<void(const TracePoint&)>& observer = {});

struct HoareQuadruple {
  Assertion pre;
  HybridProgram prog;
  Assertion post;
  Assertion safety;
};

enum class ViolationKind { kNotConverged, kPostViolated, kSafetyViolated };

std::string to_string(ViolationKind k);

struct FalsifyVerdict {
  bool counterexample_found = false;
  std::optional<Store> counterexample;
  std::optional<ViolationKind> violation;
  double violation_time = 0.0;
  std::size_t samples_run = 0;
  std::size_t samples_rejected = 0;  // sampler output not satisfying pre
};

using Sampler = std::function<Store(std::size_t index)>;

FalsifyVerdict falsify_quadruple(const HoareQuadruple& q, const Sampler& sampler, std::size_t n,
                                 const SimCfg& cfg);

// Deterministic uniform sampler over a box: sample i depends only on (seed, i).
Sampler box_sampler(std::vector<std::pair<Var, std::pair<double, double>>> box, std::uint64_t seed);

// CSV with header `t,<var>,...`, variables in store order.
void write_trace_csv(std::ostream& os, const std::vector<TracePoint>& trace);

}  // namespace rssforge::program
