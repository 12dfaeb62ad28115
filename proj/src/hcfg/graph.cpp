#include <algorithm>
#include <cmath>
#include <deque>
#include <iterator>
#include <sstream>

#include "rssforge/hcfg/hcfg.hpp"
#include "rssforge/symbolic/text.hpp"

namespace rssforge::hcfg {

using program::HybridProgram;
using symbolic::to_infix;

namespace {

std::vector<std::vector<LocId>> successors(const Hcfg& g) {
  std::vector<std::vector<LocId>> succ(g.locations.size());
  for (const auto& e : g.edges) succ[e.from].push_back(e.to);
  return succ;
}

std::set<LocId> reachable_from_init(const Hcfg& g, const std::vector<std::vector<LocId>>& succ) {
  std::set<LocId> seen;
  if (g.locations.empty()) return seen;
  std::deque<LocId> queue{g.init};
  seen.insert(g.init);
  while (!queue.empty()) {
    LocId l = queue.front();
    queue.pop_front();
    for (LocId m : succ[l]) {
      if (seen.insert(m).second) queue.push_back(m);
    }
  }
  return seen;
}

}  // namespace

GraphFacts reachable_and_acyclic(const Hcfg& g) {
  auto succ = successors(g);
  GraphFacts facts;
  facts.reachable = reachable_from_init(g, succ);
  // Iterative three-colour DFS so deep graphs cannot overflow the stack.
  enum Colour { kWhite, kGrey, kBlack };
  std::vector<Colour> colour(g.locations.size(), kWhite);
  for (LocId root : facts.reachable) {
    if (colour[root] != kWhite) continue;
    std::vector<std::pair<LocId, std::size_t>> stack{{root, 0}};
    colour[root] = kGrey;
    while (!stack.empty()) {
      auto& [l, next] = stack.back();
      if (next < succ[l].size()) {
        LocId m = succ[l][next++];
        if (colour[m] == kGrey) {
          facts.acyclic = false;
        } else if (colour[m] == kWhite) {
          colour[m] = kGrey;
          stack.emplace_back(m, 0);
        }
      } else {
        colour[l] = kBlack;
        stack.pop_back();
      }
    }
  }
  return facts;
}

std::vector<LocId> topological_order(const Hcfg& g) {
  auto succ = successors(g);
  std::set<LocId> reach = reachable_from_init(g, succ);
  std::vector<std::size_t> indegree(g.locations.size(), 0);
  for (LocId l : reach) {
    for (LocId m : succ[l]) ++indegree[m];
  }
  // Kahn's algorithm, smallest id first so the order is deterministic.
  std::set<LocId> ready;
  for (LocId l : reach) {
    if (indegree[l] == 0) ready.insert(l);
  }
  std::vector<LocId> order;
  while (!ready.empty()) {
    LocId l = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(l);
    for (LocId m : succ[l]) {
      if (--indegree[m] == 0) ready.insert(m);
    }
  }
  if (order.size() != reach.size()) throw std::logic_error("reachable subgraph of " + g.name + " has a cycle");
  return order;
}

Assertion stay_guard(const Hcfg& g, LocId l) {
  std::vector<Assertion> parts;
  for (std::size_t e : g.out_edges(l)) parts.push_back(Assertion::negate(g.edges[e].guard));
  return Assertion::conj(parts);
}

Store Translation::initial_store(Store rho0) const {
  rho0[pc] = 0.0;
  return rho0;
}

LocId Translation::location_of(const Store& final_store) const {
  double v = final_store.at(pc);
  auto i = static_cast<std::size_t>(std::llround(v));
  if (i < 1 || i > order.size() || static_cast<double>(i) != v) {
    throw std::out_of_range("program counter value does not encode a location");
  }
  return order[i - 1];
}

Translation translate_to_program(const Hcfg& g) {
  std::set<std::string> reserved;
  for (const auto& v : g.variables) reserved.insert(v.name());
  symbolic::FreshNames fresh(reserved);
  Translation tr{HybridProgram::skip(), fresh.next("pc"), {}, std::vector<std::size_t>(g.locations.size(), 0), 0};

  if (!g.is_final(g.init)) tr.order.push_back(g.init);
  for (LocId l = 0; l < g.locations.size(); ++l) {
    if (l != g.init && !g.is_final(l)) tr.order.push_back(l);
  }
  tr.k = tr.order.size();
  if (g.is_final(g.init)) tr.order.push_back(g.init);
  for (LocId l = 0; l < g.locations.size(); ++l) {
    if (l != g.init && g.is_final(l)) tr.order.push_back(l);
  }
  for (std::size_t i = 0; i < tr.order.size(); ++i) tr.index[tr.order[i]] = i + 1;

  const Term pc(tr.pc);
  auto set_pc = [&](LocId l) { return HybridProgram::assign(tr.pc, Term(static_cast<long>(tr.index[l]))); };

  // Body of the dispatch loop: an if/else-if chain over the non-final indices.
  HybridProgram dispatch = HybridProgram::skip();
  for (std::size_t i = tr.k; i-- > 0;) {
    LocId l = tr.order[i];
    auto outs = g.out_edges(l);
    HybridProgram chain = HybridProgram::skip();
    for (std::size_t j = outs.size(); j-- > 0;) {
      const Edge& e = g.edges[outs[j]];
      std::vector<HybridProgram> take;
      for (const auto& [v, rhs] : e.assign) take.push_back(HybridProgram::assign(v, rhs));
      take.push_back(set_pc(e.to));
      chain = HybridProgram::if_then_else(e.guard, HybridProgram::seq(take), chain);
    }
    HybridProgram block = HybridProgram::seq(HybridProgram::dwhile(stay_guard(g, l), g.locations[l].flow), chain);
    dispatch = HybridProgram::if_then_else(Assertion::eq(pc, Term(static_cast<long>(i + 1))), block, dispatch);
  }

  std::vector<HybridProgram> parts{set_pc(g.init)};
  for (const auto& [v, rhs] : g.init_assign) parts.push_back(HybridProgram::assign(v, rhs));
  parts.push_back(HybridProgram::while_loop(Assertion::le(pc, Term(static_cast<long>(tr.k))), dispatch));
  tr.program = HybridProgram::seq(parts);
  return tr;
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string export_dot(const Hcfg& g) {
  std::ostringstream os;
  os << "digraph \"" << escape(g.name) << "\" {\n  rankdir=LR;\n  node [shape=box];\n";
  for (LocId l = 0; l < g.locations.size(); ++l) {
    std::string label = escape(g.locations[l].name);
    if (l == g.init) {
      label += "\\nInit";
      for (const auto& [v, rhs] : g.init_assign) label += "\\n" + escape(v.name() + " := " + to_infix(rhs));
    }
    for (const auto& [v, rhs] : g.locations[l].flow) label += "\\n" + escape(v.name() + "' = " + to_infix(rhs));
    os << "  n" << l << " [label=\"" << label << "\"";
    if (l == g.init) os << ", style=bold";
    if (g.is_final(l)) os << ", peripheries=2";
    os << "];\n";
  }
  for (const auto& e : g.edges) {
    std::string label = escape(e.event);
    if (!e.guard.is_true()) label += "\\n" + escape(to_infix(e.guard));
    for (const auto& [v, rhs] : e.assign) label += "\\n" + escape(v.name() + " := " + to_infix(rhs));
    os << "  n" << e.from << " -> n" << e.to << " [label=\"" << label << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

Simulator::Simulator(const Hcfg& g, std::vector<Var> layout)
    : final_(g.final), init_(g.init), layout_(std::move(layout)) {
  for (LocId l = 0; l < g.locations.size(); ++l) flows_.emplace_back(stay_guard(g, l), g.locations[l].flow, layout_);
  out_.resize(g.locations.size());
  for (LocId l = 0; l < g.locations.size(); ++l) {
    for (std::size_t e : g.out_edges(l)) {
      CompiledEdge ce{e, g.edges[e].to, symbolic::CompiledAssertion(g.edges[e].guard, layout_), {}};
      for (const auto& [v, rhs] : g.edges[e].assign) {
        ce.assign.emplace_back(symbolic::layout_index(layout_, v), symbolic::CompiledTerm(rhs, layout_));
      }
      out_[l].push_back(std::move(ce));
    }
  }
  for (const auto& [v, rhs] : g.init_assign) {
    init_assign_.emplace_back(symbolic::layout_index(layout_, v), symbolic::CompiledTerm(rhs, layout_));
  }
}

HcfgRun Simulator::run(const Store& rho0, const program::SimCfg& cfg, const Observer& observer) {
  std::vector<double> y;
  for (const auto& v : layout_) {
    auto it = rho0.find(v);
    if (it == rho0.end()) throw symbolic::MissingVariable(v);
    y.push_back(it->second);
  }
  return run(std::move(y), cfg, observer);
}

HcfgRun Simulator::run(std::vector<double> y, const program::SimCfg& cfg, const Observer& observer) {
  cfg.validate();
  if (y.size() != layout_.size()) throw std::invalid_argument("value vector does not match the simulator layout");
  HcfgRun r;
  program::FlowClock clock;
  LocId at = init_;
  auto emit = [&] {
    if (observer) observer(at, clock.t, y);
    if (cfg.record_trace) {
      Store s;
      for (std::size_t i = 0; i < layout_.size(); ++i) s.emplace(layout_[i], y[i]);
      r.trace.push_back(program::TracePoint{clock.t, std::move(s)});
    }
  };
  emit();
  for (const auto& [i, f] : init_assign_) {
    y[i] = f(y);
    emit();
  }
  r.outcome = program::Outcome::kConverged;
  while (!final_.contains(at)) {
    if (!flows_[at].advance(y, clock, cfg, emit)) {
      r.outcome = program::Outcome::kTimeout;
      break;
    }
    emit();
    for (auto it = out_[at].begin(); it != out_[at].end(); ++it) {
      const auto& ce = *it;
      if (!ce.guard(y)) continue;
      // Exits are located to within event_tol, so a sibling guard that holds
      // just past the located point first holds at the same instant.
      Firing firing{clock.t, ce.edge, {}};
      std::vector<double> ahead;
      for (auto jt = out_[at].begin(); jt != out_[at].end(); ++jt) {
        if (jt == it) continue;
        bool on = jt->guard(y);
        if (!on) {
          if (ahead.empty()) ahead = flows_[at].step(y, 2 * cfg.event_tol);
          on = jt->guard(ahead);
        }
        if (on) firing.also_enabled.push_back(jt->edge);
      }
      for (const auto& [i, f] : ce.assign) {
        y[i] = f(y);
        emit();
      }
      r.fired.push_back(std::move(firing));
      at = ce.to;
      break;
    }
  }
  r.location = at;
  r.time = clock.t;
  for (std::size_t i = 0; i < layout_.size(); ++i) r.final_store[layout_[i]] = y[i];
  return r;
}

}  // namespace rssforge::hcfg
