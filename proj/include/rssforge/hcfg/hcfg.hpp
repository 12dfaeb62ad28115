#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rssforge/program/program.hpp"
#include "rssforge/symbolic/assertion.hpp"

namespace rssforge::hcfg {

using program::Ode;
using symbolic::Assertion;
using symbolic::Store;
using symbolic::Term;
using symbolic::Var;

using LocId = std::size_t;
using AssignList = std::vector<std::pair<Var, Term>>;

struct Location {
  std::string name;
  Ode flow;
};

struct Edge {
  LocId from = 0;
  LocId to = 0;
  std::string event;
  Assertion guard = Assertion::top();
  AssignList assign;
};

// Hybrid control flow graph. Edges leaving one location are ordered by their
// position in `edges`. An open graph may leave variables without a flow and
// has no final locations; it only makes sense as a network component.
class Hcfg {
 public:
  std::string name;
  std::vector<Location> locations;
  std::vector<Edge> edges;
  std::set<std::string> events;
  std::set<Var> variables;
  LocId init = 0;
  AssignList init_assign;
  std::set<LocId> final;
  bool open = false;

  LocId add_location(std::string loc_name, Ode flow);
  // Adds the event to `events` as a side effect.
  std::size_t add_edge(LocId from, LocId to, std::string event, Assertion guard, AssignList assign = {});

  std::optional<LocId> find(const std::string& loc_name) const;
  // Throws std::out_of_range for an unknown name.
  LocId at(const std::string& loc_name) const;
  // Indices into `edges` leaving l, in edge order.
  std::vector<std::size_t> out_edges(LocId l) const;
  bool is_final(LocId l) const { return final.contains(l); }
};

struct Report {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;

  bool ok() const { return violations.empty(); }
  bool mentions(const std::string& needle) const;
};

Report validate(const Hcfg& g);

// Components share one variable universe (the union of their variable sets)
// and synchronize on shared event names.
struct Network {
  std::vector<Hcfg> components;

  std::set<Var> variables() const;
  std::set<std::string> events() const;
  // Components whose event set contains `event`, in component order.
  std::vector<std::size_t> owners(const std::string& event) const;
  std::optional<std::size_t> component(const std::string& component_name) const;
};

Report check_compatibility(const Network& n);

// A set of location tuples in set-builder form: a tuple matches when, for
// some clause, every named component sits at the named location.
struct TuplePattern {
  std::vector<std::map<std::string, std::string>> any_of;

  // Throws std::invalid_argument for an unknown component or location name.
  void check(const Network& n) const;
};

class IncompatibleNetwork : public std::runtime_error {
 public:
  explicit IncompatibleNetwork(Report r);
  const Report& report() const noexcept { return report_; }

 private:
  Report report_;
};

struct EdgeSource {
  std::size_t component;
  std::size_t edge;  // index into that component's edges
};

// Product graph plus the component locations behind each tuple and the
// component edges behind each product edge.
struct ProductHcfg {
  Hcfg graph;
  std::vector<Hcfg> components;
  std::vector<std::string> component_names;
  std::vector<std::vector<LocId>> tuples;  // per product location, one entry per component
  std::vector<std::vector<EdgeSource>> provenance;  // per product edge, in component order

  bool matches(LocId l, const TuplePattern& p) const;
  std::set<LocId> select(const TuplePattern& p) const;
  // Component location name at product location l.
  const std::string& component_location(LocId l, std::size_t component) const;
};

// Full product over every location tuple. Throws IncompatibleNetwork when
// check_compatibility reports a violation.
ProductHcfg synchronized_product(const Network& n, const TuplePattern& final);

// Keeps locations reachable from Init without passing through a final
// location, and drops edges that leave final locations.
ProductHcfg prune_unreachable(const ProductHcfg& p);

struct GraphFacts {
  std::set<LocId> reachable;
  bool acyclic = true;
};

GraphFacts reachable_and_acyclic(const Hcfg& g);

// Reachable locations ordered so every edge goes from earlier to later.
// Throws std::logic_error when the reachable subgraph has a cycle.
std::vector<LocId> topological_order(const Hcfg& g);

// Program-counter translation. `order[i]` is the location with index i + 1;
// the non-final locations take indices 1..k with Init first when it is not
// final, and finals take the rest.
struct Translation {
  program::HybridProgram program;
  Var pc;
  std::vector<LocId> order;
  std::vector<std::size_t> index;  // per LocId, its 1-based index
  std::size_t k = 0;

  // ρ0 extended with the counter, which the program assigns before reading.
  Store initial_store(Store rho0) const;
  // Location encoded by the counter in a final store.
  LocId location_of(const Store& final_store) const;
};

// Exit guard of a location as a dwhile guard: no outgoing guard holds.
Assertion stay_guard(const Hcfg& g, LocId l);

Translation translate_to_program(const Hcfg& g);

std::string export_dot(const Hcfg& g);

// Location-walking simulation with the same integrator as run_program.
struct Firing {
  double t;
  std::size_t edge;
  std::vector<std::size_t> also_enabled;  // sibling edges whose guards first hold at the same instant
};

struct HcfgRun {
  program::Outcome outcome = program::Outcome::kStuck;
  LocId location = 0;
  Store final_store;
  double time = 0.0;
  std::vector<Firing> fired;
  std::vector<program::TracePoint> trace;
};

class Simulator {
 public:
  // The layout fixes the variable order of the value vectors handed to run.
  Simulator(const Hcfg& g, std::vector<Var> layout);

  const std::vector<Var>& layout() const { return layout_; }

  // `observer` sees (location, time, values) after every step and transition.
  using Observer = std::function<void(LocId, double, const std::vector<double>&)>;
  HcfgRun run(std::vector<double> values, const program::SimCfg& cfg, const Observer& observer = {});
  HcfgRun run(const Store& rho0, const program::SimCfg& cfg, const Observer& observer = {});

 private:
  struct CompiledEdge {
    std::size_t edge;
    LocId to;
    symbolic::CompiledAssertion guard;
    std::vector<std::pair<std::size_t, symbolic::CompiledTerm>> assign;
  };

  std::set<LocId> final_;
  LocId init_ = 0;
  std::vector<Var> layout_;
  std::vector<program::CompiledFlow> flows_;
  std::vector<std::vector<CompiledEdge>> out_;
  std::vector<std::pair<std::size_t, symbolic::CompiledTerm>> init_assign_;
};

}  // namespace rssforge::hcfg
