#include <algorithm>
#include <chrono>
#include <deque>

#include "rssforge/synthesis/synthesis.hpp"

namespace rssforge::synthesis {

using symbolic::AssertionKind;
using Clock = std::chrono::steady_clock;

namespace {

double since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

void collect_names(const Assertion& a, std::set<std::string>& out) {
  if (a.kind() == AssertionKind::kAtom) {
    for (const auto& v : a.term().variables()) out.insert(v.name());
    return;
  }
  if (a.kind() == AssertionKind::kExists || a.kind() == AssertionKind::kForall) out.insert(a.bound().name());
  for (const auto& c : a.children()) collect_names(c, out);
}

Assertion skolemize(const Assertion& a, symbolic::FreshNames& fresh) {
  switch (a.kind()) {
    case AssertionKind::kAnd:
    case AssertionKind::kOr: {
      std::vector<Assertion> parts;
      for (const auto& c : a.children()) parts.push_back(skolemize(c, fresh));
      return a.kind() == AssertionKind::kAnd ? Assertion::conj(parts) : Assertion::disj(parts);
    }
    case AssertionKind::kExists: {
      Var k = fresh.next("sk");
      Assertion body = symbolic::substitute(a.children().front(), std::map<Var, Term>{{a.bound(), Term(k)}});
      return skolemize(body, fresh);
    }
    default: return a;
  }
}

std::vector<LocId> reverse_topological(const hcfg::Hcfg& g) {
  if (!hcfg::reachable_and_acyclic(g).acyclic) throw CyclicGraph("reachable subgraph of " + g.name + " has a cycle");
  auto order = hcfg::topological_order(g);
  return {order.rbegin(), order.rend()};
}

}  // namespace

Assertion skolemize_existentials(const Assertion& a) {
  std::set<std::string> names;
  collect_names(a, names);
  symbolic::FreshNames fresh(std::move(names));
  return skolemize(a, fresh);
}

Context::Context(const hcfg::Hcfg& g, Assertion safety, std::set<LocId> unsafe)
    : g_(g), safety_(std::move(safety)), unsafe_(std::move(unsafe)) {
  for (const auto& v : g.variables) {
    const auto& n = v.name();
    if (n == "_tau" || n.starts_with("_T") || n.starts_with("_u")) {
      throw std::invalid_argument("variable name " + n + " is reserved for bound variables");
    }
  }
  outs_.resize(g.locations.size());
  for (LocId l = 0; l < g.locations.size(); ++l) outs_[l] = g.out_edges(l);
}

const FlowSolution& Context::solution(LocId l) const {
  auto it = solutions_.find(l);
  if (it != solutions_.end()) return it->second;
  return solutions_.emplace(l, solve_flow(g_.locations.at(l).flow, g_.variables, Var("_tau"))).first->second;
}

EdgeNames Context::names(LocId l, std::size_t position) const {
  std::string tag = std::to_string(l) + "_" + std::to_string(position);
  return {Var("_T" + tag), Var("_u" + tag)};
}

Assertion Context::edge_condition(LocId l, std::size_t position, const Assertion& gamma_target) const {
  const auto& outs = outs_.at(l);
  const hcfg::Edge& e = g_.edges[outs.at(position)];
  std::vector<Assertion> siblings;
  for (std::size_t j = 0; j < outs.size(); ++j) {
    if (j != position) siblings.push_back(g_.edges[outs[j]].guard);
  }
  Assertion target = symbolic::substitute(gamma_target, symbolic::Substitution(e.assign));
  return edge_precondition(e.guard, siblings, target, safety_, solution(l), names(l, position));
}

Assertion Context::step_condition(LocId l, const std::map<LocId, Assertion>& gamma) const {
  std::vector<Assertion> parts;
  const auto& outs = outs_.at(l);
  for (std::size_t i = 0; i < outs.size(); ++i) {
    LocId to = g_.edges[outs[i]].to;
    auto it = gamma.find(to);
    if (it == gamma.end()) throw std::out_of_range("no annotation for location " + g_.locations[to].name);
    parts.push_back(edge_condition(l, i, it->second));
  }
  return Assertion::disj(parts);
}

std::map<LocId, Hint> expand_hints(const hcfg::ProductHcfg& p, const std::vector<hcfg::HintRule>& rules) {
  std::map<LocId, Hint> out;
  for (LocId l = 0; l < p.graph.locations.size(); ++l) {
    for (const auto& r : rules) {
      if (p.matches(l, r.where)) {
        out.emplace(l, Hint{r.hint, r.strengthen});
        break;
      }
    }
  }
  return out;
}

SynthesisReport annotate(const hcfg::Hcfg& g, const Assertion& safety, const std::set<LocId>& unsafe,
                         const std::map<LocId, Hint>& hints, smt::SolverPool* pool, const SynthesisOptions& options) {
  auto start = Clock::now();
  std::size_t queries_before = pool ? pool->queries() : 0;
  SynthesisReport r;
  r.order = reverse_topological(g);
  Context ctx(g, safety, unsafe);

  for (LocId l : r.order) {
    auto loc_start = Clock::now();
    double solver_seconds = 0.0;
    LocationStats st;
    Assertion gamma;
    if (unsafe.contains(l)) {
      gamma = Assertion::bottom();
      st.source = "unsafe";
    } else if (g.is_final(l)) {
      gamma = safety;
      st.source = "final";
    } else if (g.out_edges(l).empty()) {
      gamma = Assertion::bottom();
      st.source = "dead-end";
    } else {
      gamma = ctx.step_condition(l, r.gamma);
      st.source = "edges";
      if (options.eliminate_quantifiers && pool && !gamma.is_quantifier_free()) {
        auto qe = pool->eliminate_quantifiers(gamma, options.qe_timeout_seconds);
        if (qe.eliminated) gamma = qe.result;
      }
      auto h = hints.find(l);
      if (h != hints.end()) {
        HintOutcome outcome;
        outcome.location = l;
        if (h->second.strengthen) {
          outcome.accepted = true;
          outcome.verdict = smt::VerdictKind::kValid;
          gamma = Assertion::conj({h->second.assertion, gamma});
          st.source = "hint";
        } else if (pool) {
          auto v = pool->check_validity(Assertion::implies(h->second.assertion, gamma), options.hint_timeout_seconds);
          outcome.verdict = v.kind;
          outcome.seconds = v.seconds;
          outcome.counterexample = v.model;
          solver_seconds += v.seconds;
          // Unknown counts as a rejection.
          outcome.accepted = v.is(smt::VerdictKind::kValid);
          if (outcome.accepted) {
            gamma = h->second.assertion;
            st.source = "hint";
          }
        }
        if (!outcome.accepted) {
          r.warnings.push_back("hint for " + g.locations[l].name + " rejected (" + smt::to_string(outcome.verdict) +
                               "); using the computed condition");
        }
        r.hints.push_back(std::move(outcome));
      }
    }
    st.size = gamma.size();
    st.quantified = !gamma.is_quantifier_free();
    st.seconds = solver_seconds > 0 ? solver_seconds : since(loc_start);
    r.stats[l] = st;
    r.gamma[l] = gamma;
  }

  r.rss_condition = symbolic::substitute(r.gamma.at(g.init), symbolic::Substitution(g.init_assign));
  r.seconds = since(start);
  r.solver_queries = pool ? pool->queries() - queries_before : 0;
  return r;
}

std::string to_string(ObligationKind k) {
  switch (k) {
    case ObligationKind::kFinal: return "final";
    case ObligationKind::kUnsafe: return "unsafe";
    case ObligationKind::kStep: return "step";
  }
  return "?";
}

ObligationReport check_annotation(const hcfg::Hcfg& g, const std::map<LocId, Assertion>& gamma,
                                  const Assertion& safety, const std::set<LocId>& unsafe, smt::SolverPool& pool,
                                  double timeout_seconds, bool always_solve) {
  auto order = reverse_topological(g);
  for (LocId l : order) {
    if (!gamma.contains(l)) throw std::out_of_range("no annotation for location " + g.locations[l].name);
  }
  Context ctx(g, safety, unsafe);
  ObligationReport rep;
  for (LocId l : order) {
    const Assertion& a = gamma.at(l);
    Obligation ob;
    ob.location = l;
    ob.kind = ObligationKind::kStep;
    Assertion claim;
    if (unsafe.contains(l)) {
      ob.kind = ObligationKind::kUnsafe;
      ob.syntactic = a.is_false();
      claim = Assertion::negate(a);
    } else if (g.is_final(l)) {
      ob.kind = ObligationKind::kFinal;
      ob.syntactic = safety.is_true() || a == safety;
      claim = Assertion::implies(a, safety);
    } else {
      Assertion rebuilt = ctx.step_condition(l, gamma);
      // A strengthening hint leaves the rebuilt condition as one conjunct.
      bool conjunct = a.kind() == AssertionKind::kAnd &&
                      std::any_of(a.children().begin(), a.children().end(), [&](const Assertion& c) { return c == rebuilt; });
      ob.syntactic = a == rebuilt || a.is_false() || conjunct;
      claim = Assertion::implies(a, rebuilt);
    }
    if (always_solve) ob.syntactic = false;
    if (ob.syntactic) {
      ob.verdict = smt::VerdictKind::kValid;
    } else {
      auto v = pool.check_validity(claim, timeout_seconds);
      ob.verdict = v.kind;
      ob.seconds = v.seconds;
      ob.counterexample = v.model;
    }
    if (ob.verdict == smt::VerdictKind::kValid) {
      ++rep.discharged;
    } else if (ob.verdict == smt::VerdictKind::kInvalid) {
      ++rep.refuted;
    } else {
      ++rep.unknown;
    }
    rep.obligations.push_back(std::move(ob));
  }
  return rep;
}

Assertion reach_condition(const hcfg::Hcfg& g, LocId target) {
  auto order = reverse_topological(g);
  // Locations with a path to the target that does not stop at another final.
  std::set<LocId> ancestors{target};
  std::deque<LocId> queue{target};
  while (!queue.empty()) {
    LocId m = queue.front();
    queue.pop_front();
    for (const auto& e : g.edges) {
      if (e.to == m && !g.is_final(e.from) && ancestors.insert(e.from).second) queue.push_back(e.from);
    }
  }
  Context ctx(g, Assertion::top(), {});
  std::map<LocId, Assertion> gamma;
  for (LocId l : order) {
    if (l == target) {
      gamma[l] = Assertion::top();
    } else if (!ancestors.contains(l)) {
      gamma[l] = Assertion::bottom();
    } else {
      gamma[l] = ctx.step_condition(l, gamma);
    }
  }
  if (!gamma.contains(g.init)) return Assertion::bottom();
  return symbolic::substitute(gamma.at(g.init), symbolic::Substitution(g.init_assign));
}

Witnesses visited_locations(const hcfg::Hcfg& g, const std::vector<Store>& starts, const program::SimCfg& cfg,
                            std::size_t per_location) {
  std::vector<Var> layout(g.variables.begin(), g.variables.end());
  hcfg::Simulator sim(g, layout);
  program::SimCfg quiet = cfg;
  quiet.record_trace = false;
  Witnesses seen;
  for (const auto& s : starts) {
    LocId last = g.locations.size();
    sim.run(s, quiet, [&](LocId l, double t, const std::vector<double>& y) {
      // Init assignments are still being applied at time 0 in the Init location.
      if (l == g.init && t == 0.0) return;
      auto& list = seen[l];
      if (l == last && !list.empty()) return;
      last = l;
      if (list.size() >= per_location) return;
      Store st;
      for (std::size_t i = 0; i < layout.size(); ++i) st[layout[i]] = y[i];
      list.push_back(std::move(st));
    });
  }
  return seen;
}

std::vector<SimultaneousExit> simultaneous_exits(const hcfg::Hcfg& g, const std::vector<Store>& starts,
                                                 const program::SimCfg& cfg, std::size_t per_location) {
  std::vector<Var> layout(g.variables.begin(), g.variables.end());
  hcfg::Simulator sim(g, layout);
  program::SimCfg quiet = cfg;
  quiet.record_trace = false;
  std::vector<SimultaneousExit> out;
  std::map<LocId, std::size_t> count;
  for (const auto& s : starts) {
    auto run = sim.run(s, quiet);
    for (const auto& f : run.fired) {
      if (f.also_enabled.empty()) continue;
      LocId l = g.edges[f.edge].from;
      if (count[l]++ >= per_location) continue;
      SimultaneousExit x{l, {f.edge}, f.t, s};
      x.edges.insert(x.edges.end(), f.also_enabled.begin(), f.also_enabled.end());
      out.push_back(std::move(x));
    }
  }
  return out;
}

namespace {

bool satisfied_by_some(const Assertion& a, const std::vector<Store>& states) {
  for (const auto& s : states) {
    symbolic::ExactStore exact;
    for (const auto& [v, x] : s) exact[v] = symbolic::from_double(x);
    Assertion c = instantiate(a, exact);
    if (c.is_true()) return true;
    if (!c.is_false() && decide_by_intervals(c).value_or(false)) return true;
  }
  return false;
}

}  // namespace

VacuityReport detect_vacuous(const hcfg::Hcfg& g, const std::map<LocId, Assertion>& gamma, smt::SolverPool& pool,
                             const VacuityOptions& options) {
  VacuityReport rep;
  auto facts = hcfg::reachable_and_acyclic(g);
  for (LocId l = 0; l < g.locations.size(); ++l) {
    if (!options.only.empty() && !options.only.contains(l)) continue;
    if (!facts.reachable.contains(l)) {
      rep.vacuous.insert(l);
      rep.reason[l] = "unreachable in the graph";
      continue;
    }
    auto w = options.witnesses.find(l);
    bool witnessed = w != options.witnesses.end() && !w->second.empty();
    auto it = gamma.find(l);
    if (it != gamma.end()) {
      if (it->second.is_false()) {
        rep.vacuous.insert(l);
        rep.reason[l] = "annotation is false";
        continue;
      }
      if (!witnessed || !satisfied_by_some(it->second, w->second)) {
        auto v = pool.check_sat(skolemize_existentials(it->second), options.timeout_seconds);
        if (v.is(smt::VerdictKind::kUnsat)) {
          rep.vacuous.insert(l);
          rep.reason[l] = "annotation is unsatisfiable";
          continue;
        }
        if (v.is(smt::VerdictKind::kUnknown)) rep.undetermined.insert(l);
      }
    }
    if (witnessed) continue;
    auto v = pool.check_sat(skolemize_existentials(reach_condition(g, l)), options.timeout_seconds);
    if (v.is(smt::VerdictKind::kUnsat)) {
      rep.vacuous.insert(l);
      rep.reason[l] = "no initial store reaches it";
      rep.undetermined.erase(l);
    } else if (v.is(smt::VerdictKind::kUnknown)) {
      rep.undetermined.insert(l);
    }
  }
  return rep;
}

std::vector<std::pair<std::string, std::string>> vacuous_component_locations(const hcfg::ProductHcfg& p,
                                                                             const VacuityReport& r) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t c = 0; c < p.components.size(); ++c) {
    for (LocId cl = 0; cl < p.components[c].locations.size(); ++cl) {
      bool all = true;
      for (LocId l = 0; l < p.tuples.size() && all; ++l) {
        if (p.tuples[l][c] == cl && !r.vacuous.contains(l)) all = false;
      }
      if (all) out.emplace_back(p.component_names[c], p.components[c].locations[cl].name);
    }
  }
  return out;
}

}  // namespace rssforge::synthesis
