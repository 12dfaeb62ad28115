#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rssforge/hcfg/hcfg.hpp"
#include "rssforge/hcfg/model_io.hpp"
#include "rssforge/smt/solver.hpp"

namespace rssforge::synthesis {

using hcfg::LocId;
using symbolic::Assertion;
using symbolic::Store;
using symbolic::Term;
using symbolic::Var;

class UnsolvableFlow : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Closed-form flow: each variable as a polynomial in `time` whose other
// symbols are the variables' values at time 0.
struct FlowSolution {
  Var time{"T"};
  std::map<Var, Term> at;

  // x ↦ solution with `time` replaced by tau.
  std::map<Var, Term> state_at(const Term& tau) const;
};

// Iterated integration along the dependency order. Variables in `frame`
// but not in the ODE stay constant. Throws UnsolvableFlow when a right-hand
// side depends, directly or through other variables, on its own variable.
FlowSolution solve_flow(const program::Ode& ode, const std::set<Var>& frame, const Var& time = Var("T"));

// Exact check that each solution's time derivative equals its right-hand side
// along the solution, and that time 0 gives the identity.
bool verify_flow_solution(const FlowSolution& sol, const program::Ode& ode);

// Bound variable names for one edge precondition.
struct EdgeNames {
  Var exit_time;
  Var probe;
};

// The precondition for the edge with guard `guard` being the one taken after
// the flow, with `target` holding on arrival and `safety` plus the negated
// sibling guards holding throughout:
//   ∃T ≥ 0. A(T) ∧ target(T) ∧ ∀u. 0 ≤ u ≤ T ⇒ S(u) ∧ ⋀ ¬A_j(u) ∧ (T ≤ u ∨ ¬A(u))
// Exit times of single-atom guards that move at a constant rate are solved
// exactly, and interval quantifiers over convex atoms reduce to endpoint checks.
Assertion edge_precondition(const Assertion& guard, const std::vector<Assertion>& siblings, const Assertion& target,
                            const Assertion& safety, const FlowSolution& sol, const EdgeNames& names);

// Same condition without any simplification, for audits and tests.
Assertion edge_precondition_raw(const Assertion& guard, const std::vector<Assertion>& siblings,
                                const Assertion& target, const Assertion& safety, const FlowSolution& sol,
                                const EdgeNames& names);

// ∀u. 0 ≤ u ≤ hi ⇒ body for hi ≥ 0. Conjuncts whose atoms are at most
// quadratic in u reduce to endpoint and vertex checks; the rest stay quantified.
Assertion forall_interval(const Var& u, const Term& hi, const Assertion& body);

// Rewrites ∃T. ... ∧ aT + c = 0 ∧ ... with constant a ≠ 0 by T := -c/a,
// bottom up. Exact; used after concrete values have been substituted.
Assertion eliminate_linear_witnesses(const Assertion& a);

// Exact partial evaluation under concrete values. Connectives short-circuit,
// and an existential whose body fixes the witness by a linear equation with
// known coefficients is resolved to that value. Equivalent to substituting
// the values and then calling eliminate_linear_witnesses.
Assertion instantiate(const Assertion& a, const symbolic::ExactStore& values);

// Decides a closed sentence by outward-rounded interval arithmetic. Each
// existential must have a conjunct q(T) = 0 of degree one or two in T; the
// body is evaluated at every real root of q. Returns nullopt whenever a sign
// cannot be certified, so a returned value is exact.
std::optional<bool> decide_by_intervals(const Assertion& sentence);

// Replaces every existential in positive position (under ∧, ∨ and outer ∃
// only) by a fresh free variable, one per occurrence. The result is
// satisfiable exactly when the input is.
Assertion skolemize_existentials(const Assertion& a);

// A hint either replaces γ(l) once the solver proves it implies the computed
// disjunction, or is conjoined with it, which needs no proof.
struct Hint {
  Assertion assertion;
  bool strengthen = false;
};

struct LocationStats {
  std::size_t size = 0;  // assertion nodes in γ(l)
  bool quantified = false;
  double seconds = 0.0;  // solver time spent on this location
  std::string source;    // "unsafe", "final", "edges", "hint", "behind-unsafe", "dead-end"
};

struct HintOutcome {
  LocId location;
  bool accepted = false;
  smt::VerdictKind verdict = smt::VerdictKind::kUnknown;
  std::optional<Store> counterexample;
  double seconds = 0.0;
};

enum class ObligationKind { kFinal, kUnsafe, kStep };
std::string to_string(ObligationKind k);

struct Obligation {
  LocId location;
  ObligationKind kind;
  smt::VerdictKind verdict = smt::VerdictKind::kUnknown;
  std::optional<Store> counterexample;
  double seconds = 0.0;
  bool syntactic = false;  // discharged by structural identity, no solver call
};

struct ObligationReport {
  std::vector<Obligation> obligations;
  std::size_t discharged = 0;
  std::size_t refuted = 0;
  std::size_t unknown = 0;
};

struct SynthesisOptions {
  double hint_timeout_seconds = 60.0;
  // Try solver quantifier elimination on each γ(l); keep only proved results.
  bool eliminate_quantifiers = false;
  double qe_timeout_seconds = 10.0;
};

struct SynthesisReport {
  std::map<LocId, Assertion> gamma;
  Assertion rss_condition = Assertion::top();
  std::vector<LocId> order;  // reverse topological, the order γ was built in
  std::map<LocId, LocationStats> stats;
  std::vector<HintOutcome> hints;
  std::vector<std::string> warnings;
  std::set<LocId> vacuous;
  ObligationReport obligations;
  double seconds = 0.0;
  std::size_t solver_queries = 0;
};

class CyclicGraph : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Flow solutions and bound-variable names by location, so the synthesis and
// the independent audit build identical edge preconditions.
class Context {
 public:
  Context(const hcfg::Hcfg& g, Assertion safety, std::set<LocId> unsafe);

  const hcfg::Hcfg& graph() const { return g_; }
  const Assertion& safety() const { return safety_; }
  const std::set<LocId>& unsafe() const { return unsafe_; }
  const FlowSolution& solution(LocId l) const;
  EdgeNames names(LocId l, std::size_t position) const;

  // C_{l,i} for the i-th outgoing edge (by position), given γ of its target.
  Assertion edge_condition(LocId l, std::size_t position, const Assertion& gamma_target) const;
  // ⋁_i C_{l,i} from a γ covering the successors.
  Assertion step_condition(LocId l, const std::map<LocId, Assertion>& gamma) const;

 private:
  const hcfg::Hcfg& g_;
  Assertion safety_;
  std::set<LocId> unsafe_;
  std::vector<std::vector<std::size_t>> outs_;
  mutable std::map<LocId, FlowSolution> solutions_;
};

// Backward synthesis over the reachable subgraph. The pool may be null, in
// which case no hint is accepted. Throws CyclicGraph on a cycle.
SynthesisReport annotate(const hcfg::Hcfg& g, const Assertion& safety, const std::set<LocId>& unsafe,
                         const std::map<LocId, Hint>& hints, smt::SolverPool* pool,
                         const SynthesisOptions& options = {});

// Expands hint rules over a product; the first matching rule wins.
std::map<LocId, Hint> expand_hints(const hcfg::ProductHcfg& p, const std::vector<hcfg::HintRule>& rules);

// Re-verifies every annotation clause by solver validity queries. Clauses
// that hold by structural identity skip the solver unless `always_solve` is
// set. Throws std::out_of_range naming the first reachable location without
// an annotation.
ObligationReport check_annotation(const hcfg::Hcfg& g, const std::map<LocId, Assertion>& gamma,
                                  const Assertion& safety, const std::set<LocId>& unsafe, smt::SolverPool& pool,
                                  double timeout_seconds = 60.0, bool always_solve = false);

// States seen in concrete runs, by location.
using Witnesses = std::map<LocId, std::vector<Store>>;

struct VacuityOptions {
  // A witnessed location skips the reachability query, and a witness state
  // satisfying γ skips the satisfiability query.
  Witnesses witnesses;
  // Locations to examine; empty means all.
  std::set<LocId> only;
  double timeout_seconds = 60.0;
};

struct VacuityReport {
  std::set<LocId> vacuous;
  std::map<LocId, std::string> reason;
  std::set<LocId> undetermined;  // solver answered unknown
};

// Locations whose γ is unsatisfiable, or that no initial store reaches.
VacuityReport detect_vacuous(const hcfg::Hcfg& g, const std::map<LocId, Assertion>& gamma, smt::SolverPool& pool,
                             const VacuityOptions& options = {});

// Component locations whose product tuples are all vacuous, as
// (component, location) names. Locations in no tuple count as vacuous.
std::vector<std::pair<std::string, std::string>> vacuous_component_locations(const hcfg::ProductHcfg& p,
                                                                             const VacuityReport& r);

// Backward condition, at Init after the Init assignments, for a run to visit l.
Assertion reach_condition(const hcfg::Hcfg& g, LocId l);

// States visited by simulating from each store, at most `per_location` kept
// for each location (the earliest ones).
Witnesses visited_locations(const hcfg::Hcfg& g, const std::vector<Store>& starts, const program::SimCfg& cfg,
                            std::size_t per_location = 8);

// A concrete exit where guards of several edges first hold at the same
// instant. The edge-wise preconditions then forbid the store although the
// first edge is taken, so such stores are excluded conservatively.
struct SimultaneousExit {
  LocId location;
  std::vector<std::size_t> edges;  // fired edge first
  double time;
  Store start;  // initial store of the run
};

// Simultaneous exits met when simulating from each store, at most
// `per_location` recorded for each location.
std::vector<SimultaneousExit> simultaneous_exits(const hcfg::Hcfg& g, const std::vector<Store>& starts,
                                                 const program::SimCfg& cfg, std::size_t per_location = 1);

// Report serialization: γ by location name in text form, the RSS condition in
// text and SMT-LIB form, statistics and obligation timing.
std::string report_to_json(const SynthesisReport& r, const hcfg::Hcfg& g);
// Reads the γ map of a report (or any {"gamma": {name: text}} object).
std::map<LocId, Assertion> gamma_from_json(std::string_view text, const hcfg::Hcfg& g);

}  // namespace rssforge::synthesis
