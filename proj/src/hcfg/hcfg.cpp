#include "rssforge/hcfg/hcfg.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "rssforge/symbolic/text.hpp"

namespace rssforge::hcfg {

using symbolic::to_infix;

LocId Hcfg::add_location(std::string loc_name, Ode flow) {
  locations.push_back(Location{std::move(loc_name), std::move(flow)});
  return locations.size() - 1;
}

std::size_t Hcfg::add_edge(LocId from, LocId to, std::string event, Assertion guard, AssignList assign) {
  events.insert(event);
  edges.push_back(Edge{from, to, std::move(event), std::move(guard), std::move(assign)});
  return edges.size() - 1;
}

std::optional<LocId> Hcfg::find(const std::string& loc_name) const {
  for (LocId l = 0; l < locations.size(); ++l) {
    if (locations[l].name == loc_name) return l;
  }
  return std::nullopt;
}

LocId Hcfg::at(const std::string& loc_name) const {
  auto l = find(loc_name);
  if (!l) throw std::out_of_range("no location named " + loc_name + " in " + name);
  return *l;
}

std::vector<std::size_t> Hcfg::out_edges(LocId l) const {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].from == l) out.push_back(e);
  }
  return out;
}

bool Report::mentions(const std::string& needle) const {
  auto has = [&](const std::vector<std::string>& xs) {
    return std::any_of(xs.begin(), xs.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
  };
  return has(violations) || has(warnings);
}

namespace {

std::string loc_label(const Hcfg& g, LocId l) {
  return l < g.locations.size() ? g.locations[l].name : "#" + std::to_string(l);
}

std::string edge_label(const Hcfg& g, const Edge& e) {
  return e.event + " (" + loc_label(g, e.from) + " -> " + loc_label(g, e.to) + ")";
}

void check_vars(const Hcfg& g, const std::set<Var>& used, const std::string& where, Report& r) {
  for (const auto& v : used) {
    if (!g.variables.contains(v)) r.violations.push_back("unknown variable " + v.name() + " in " + where);
  }
}

void check_assign(const Hcfg& g, const AssignList& assign, const std::string& where, Report& r) {
  for (const auto& [v, rhs] : assign) {
    if (!g.variables.contains(v)) r.violations.push_back("unknown variable " + v.name() + " assigned in " + where);
    check_vars(g, rhs.variables(), where, r);
  }
}

}  // namespace

Report validate(const Hcfg& g) {
  Report r;
  const std::string who = g.name.empty() ? std::string("hcfg") : g.name;
  if (g.locations.empty()) r.violations.push_back(who + ": no locations");
  std::set<std::string> names;
  for (const auto& loc : g.locations) {
    if (!names.insert(loc.name).second) r.violations.push_back("duplicate location name " + loc.name);
  }
  for (LocId l = 0; l < g.locations.size(); ++l) {
    const Location& loc = g.locations[l];
    std::set<Var> defined;
    for (const auto& [v, rhs] : loc.flow) {
      if (!defined.insert(v).second) r.violations.push_back("duplicate flow for " + v.name() + " at " + loc.name);
      if (!g.variables.contains(v)) r.violations.push_back("unknown variable " + v.name() + " in flow of " + loc.name);
      check_vars(g, rhs.variables(), "flow of " + loc.name, r);
    }
    if (!g.open) {
      for (const auto& v : g.variables) {
        if (!defined.contains(v)) r.violations.push_back("incomplete flow: " + loc.name + " lacks " + v.name());
      }
    }
  }
  for (const auto& e : g.edges) {
    if (e.from >= g.locations.size() || e.to >= g.locations.size()) {
      r.violations.push_back("edge " + e.event + " has an endpoint outside the location set");
      continue;
    }
    const std::string where = "edge " + edge_label(g, e);
    if (!g.events.contains(e.event)) r.violations.push_back("unknown event in " + where);
    if (!e.guard.is_quantifier_free()) {
      r.violations.push_back("quantified guard on " + where);
    } else if (!symbolic::is_closed(e.guard)) {
      r.violations.push_back("guard not closed on " + where + ": " + to_infix(e.guard));
    }
    check_vars(g, e.guard.free_variables(), where, r);
    check_assign(g, e.assign, where, r);
  }
  if (g.init >= g.locations.size() && !g.locations.empty()) r.violations.push_back("initial location out of range");
  check_assign(g, g.init_assign, "Init", r);
  for (LocId f : g.final) {
    if (f >= g.locations.size()) r.violations.push_back("final location out of range");
  }
  if (g.open && !g.final.empty()) r.violations.push_back(who + ": an open hcfg has no final locations");
  if (!g.open) {
    for (LocId l = 0; l < g.locations.size(); ++l) {
      if (!g.is_final(l) && g.out_edges(l).empty()) {
        r.warnings.push_back("non-final location " + g.locations[l].name + " has no outgoing edge");
      }
    }
  }
  return r;
}

std::set<Var> Network::variables() const {
  std::set<Var> vs;
  for (const auto& c : components) vs.insert(c.variables.begin(), c.variables.end());
  return vs;
}

std::set<std::string> Network::events() const {
  std::set<std::string> es;
  for (const auto& c : components) es.insert(c.events.begin(), c.events.end());
  return es;
}

std::vector<std::size_t> Network::owners(const std::string& event) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (components[i].events.contains(event)) out.push_back(i);
  }
  return out;
}

std::optional<std::size_t> Network::component(const std::string& component_name) const {
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (components[i].name == component_name) return i;
  }
  return std::nullopt;
}

namespace {

const Term* rhs_of(const AssignList& a, const Var& v) {
  const Term* found = nullptr;
  for (const auto& [w, rhs] : a) {
    if (w == v) found = &rhs;
  }
  return found;
}

const Term* flow_rhs(const Ode& ode, const Var& v) {
  for (const auto& [w, rhs] : ode) {
    if (w == v) return &rhs;
  }
  return nullptr;
}

void assignment_conflicts(const AssignList& a, const AssignList& b, const std::string& where, Report& r) {
  for (const auto& [v, rhs] : a) {
    const Term* other = rhs_of(b, v);
    if (other && !(*other == rhs)) {
      r.violations.push_back("assignment conflict on " + v.name() + " in " + where + ": " + to_infix(rhs) +
                             " vs " + to_infix(*other));
    }
  }
}

}  // namespace

Report check_compatibility(const Network& n) {
  Report r;
  const std::set<Var> universe = n.variables();
  std::map<std::string, std::string> location_owner;
  for (const auto& c : n.components) {
    Hcfg as_open = c;
    as_open.open = true;
    as_open.final.clear();
    Report own = validate(as_open);
    for (auto& v : own.violations) r.violations.push_back(c.name + ": " + v);
    for (const auto& loc : c.locations) {
      auto [it, fresh] = location_owner.emplace(loc.name, c.name);
      if (!fresh) r.violations.push_back("location " + loc.name + " appears in both " + it->second + " and " + c.name);
    }
  }
  {
    std::set<std::string> names;
    for (const auto& c : n.components) {
      if (!names.insert(c.name).second) r.violations.push_back("duplicate component name " + c.name);
    }
  }

  // Flow conflicts only involve two components, so pairwise checks cover every tuple.
  for (std::size_t i = 0; i < n.components.size(); ++i) {
    for (std::size_t j = i + 1; j < n.components.size(); ++j) {
      const Hcfg& a = n.components[i];
      const Hcfg& b = n.components[j];
      for (const auto& la : a.locations) {
        for (const auto& lb : b.locations) {
          for (const auto& [v, rhs] : la.flow) {
            const Term* other = flow_rhs(lb.flow, v);
            if (other && !(*other == rhs)) {
              r.violations.push_back("flow conflict on " + v.name() + " at (" + la.name + ", " + lb.name +
                                     "): " + to_infix(rhs) + " vs " + to_infix(*other));
            }
          }
        }
      }
    }
  }

  // A variable is uncovered at some tuple iff every component has a location without it.
  for (const auto& v : universe) {
    bool always_covered = false;
    for (const auto& c : n.components) {
      bool everywhere =
          !c.locations.empty() && std::all_of(c.locations.begin(), c.locations.end(),
                                              [&](const Location& l) { return flow_rhs(l.flow, v) != nullptr; });
      if (everywhere) always_covered = true;
    }
    if (!always_covered) r.violations.push_back("incomplete flow: some location tuple leaves " + v.name() + " undefined");
  }

  for (const auto& event : n.events()) {
    auto owners = n.owners(event);
    for (std::size_t x = 0; x < owners.size(); ++x) {
      for (std::size_t y = x + 1; y < owners.size(); ++y) {
        const Hcfg& a = n.components[owners[x]];
        const Hcfg& b = n.components[owners[y]];
        for (const auto& ea : a.edges) {
          if (ea.event != event) continue;
          for (const auto& eb : b.edges) {
            if (eb.event != event) continue;
            assignment_conflicts(ea.assign, eb.assign, "event " + event, r);
          }
        }
      }
    }
  }
  for (std::size_t i = 0; i < n.components.size(); ++i) {
    for (std::size_t j = i + 1; j < n.components.size(); ++j) {
      assignment_conflicts(n.components[i].init_assign, n.components[j].init_assign, "Init", r);
    }
  }
  return r;
}

void TuplePattern::check(const Network& n) const {
  for (const auto& clause : any_of) {
    for (const auto& [comp, loc] : clause) {
      auto c = n.component(comp);
      if (!c) throw std::invalid_argument("pattern names unknown component " + comp);
      if (!n.components[*c].find(loc)) throw std::invalid_argument("pattern names unknown location " + loc + " of " + comp);
    }
  }
}

namespace {

std::string join_report(const Report& r) {
  std::ostringstream os;
  os << "incompatible network:";
  for (const auto& v : r.violations) os << "\n  " << v;
  return os.str();
}

}  // namespace

IncompatibleNetwork::IncompatibleNetwork(Report r) : std::runtime_error(join_report(r)), report_(std::move(r)) {}

bool ProductHcfg::matches(LocId l, const TuplePattern& p) const {
  for (const auto& clause : p.any_of) {
    bool all = true;
    for (const auto& [comp, loc] : clause) {
      auto it = std::find(component_names.begin(), component_names.end(), comp);
      if (it == component_names.end()) {
        all = false;
        break;
      }
      std::size_t c = static_cast<std::size_t>(it - component_names.begin());
      if (components[c].locations[tuples[l][c]].name != loc) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

std::set<LocId> ProductHcfg::select(const TuplePattern& p) const {
  std::set<LocId> out;
  for (LocId l = 0; l < graph.locations.size(); ++l) {
    if (matches(l, p)) out.insert(l);
  }
  return out;
}

const std::string& ProductHcfg::component_location(LocId l, std::size_t component) const {
  return components.at(component).locations.at(tuples.at(l).at(component)).name;
}

namespace {

void append_unique(AssignList& into, const AssignList& from) {
  for (const auto& a : from) {
    bool dup = std::any_of(into.begin(), into.end(),
                           [&](const auto& b) { return b.first == a.first && b.second == a.second; });
    if (!dup) into.push_back(a);
  }
}

struct PendingEdge {
  std::vector<std::pair<std::size_t, std::size_t>> key;  // (component, position among its out edges)
  std::string event;
  std::vector<EdgeSource> sources;
};

}  // namespace

ProductHcfg synchronized_product(const Network& n, const TuplePattern& final) {
  Report compat = check_compatibility(n);
  if (!compat.ok()) throw IncompatibleNetwork(compat);
  final.check(n);

  ProductHcfg p;
  p.components = n.components;
  for (const auto& c : n.components) p.component_names.push_back(c.name);
  Hcfg& g = p.graph;
  g.name = "product";
  g.variables = n.variables();
  g.events = n.events();
  const std::size_t m = n.components.size();

  // Enumerate tuples in lexicographic order, component 0 slowest.
  std::vector<std::size_t> radix(m);
  std::size_t total = 1;
  for (std::size_t i = 0; i < m; ++i) {
    radix[i] = n.components[i].locations.size();
    total *= radix[i];
  }
  if (m == 0) total = 0;
  std::vector<LocId> tuple(m, 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = m; i-- > 0;) {
      tuple[i] = rest % radix[i];
      rest /= radix[i];
    }
    std::string name;
    Ode flow;
    for (std::size_t i = 0; i < m; ++i) {
      const Location& loc = n.components[i].locations[tuple[i]];
      if (i) name += "|";
      name += loc.name;
      for (const auto& [v, rhs] : loc.flow) {
        if (!flow_rhs(flow, v)) flow.emplace_back(v, rhs);
      }
    }
    g.add_location(name, std::move(flow));
    p.tuples.push_back(tuple);
  }

  auto id_of = [&](const std::vector<LocId>& t) {
    std::size_t id = 0;
    for (std::size_t i = 0; i < m; ++i) id = id * radix[i] + t[i];
    return id;
  };

  std::vector<std::vector<std::vector<std::size_t>>> outs(m);
  for (std::size_t i = 0; i < m; ++i) {
    outs[i].resize(radix[i]);
    for (LocId l = 0; l < radix[i]; ++l) outs[i][l] = n.components[i].out_edges(l);
  }
  std::map<std::string, std::vector<std::size_t>> owners;
  for (const auto& e : g.events) owners[e] = n.owners(e);

  for (LocId src = 0; src < total; ++src) {
    const auto& t = p.tuples[src];
    std::vector<PendingEdge> pending;
    for (const auto& [event, own] : owners) {
      if (own.empty()) continue;
      // Matching edges per owner; an owner without one blocks the event.
      std::vector<std::vector<std::pair<std::size_t, std::size_t>>> choices;
      bool blocked = false;
      for (std::size_t c : own) {
        std::vector<std::pair<std::size_t, std::size_t>> here;
        const auto& out = outs[c][t[c]];
        for (std::size_t pos = 0; pos < out.size(); ++pos) {
          if (n.components[c].edges[out[pos]].event == event) here.emplace_back(pos, out[pos]);
        }
        if (here.empty()) blocked = true;
        choices.push_back(std::move(here));
      }
      if (blocked) continue;
      std::vector<std::size_t> pick(own.size(), 0);
      for (;;) {
        PendingEdge pe;
        pe.event = event;
        for (std::size_t k = 0; k < own.size(); ++k) {
          pe.key.emplace_back(own[k], choices[k][pick[k]].first);
          pe.sources.push_back(EdgeSource{own[k], choices[k][pick[k]].second});
        }
        pending.push_back(std::move(pe));
        bool done = true;
        for (std::size_t k = own.size(); k-- > 0;) {
          if (++pick[k] < choices[k].size()) {
            done = false;
            break;
          }
          pick[k] = 0;
        }
        if (done) break;
      }
    }
    std::sort(pending.begin(), pending.end(), [](const PendingEdge& a, const PendingEdge& b) {
      if (a.key != b.key) return a.key < b.key;
      return a.event < b.event;
    });
    for (auto& pe : pending) {
      std::vector<LocId> dst = t;
      std::vector<Assertion> guards;
      AssignList assign;
      for (const auto& s : pe.sources) {
        const Edge& ce = n.components[s.component].edges[s.edge];
        dst[s.component] = ce.to;
        guards.push_back(ce.guard);
        append_unique(assign, ce.assign);
      }
      g.add_edge(src, id_of(dst), pe.event, Assertion::conj(guards), std::move(assign));
      p.provenance.push_back(std::move(pe.sources));
    }
  }

  std::vector<LocId> init(m);
  for (std::size_t i = 0; i < m; ++i) {
    init[i] = n.components[i].init;
    append_unique(g.init_assign, n.components[i].init_assign);
  }
  g.init = total ? id_of(init) : 0;
  g.final = p.select(final);
  g.open = false;
  return p;
}

ProductHcfg prune_unreachable(const ProductHcfg& p) {
  const Hcfg& g = p.graph;
  std::vector<bool> seen(g.locations.size(), false);
  std::vector<std::vector<std::size_t>> outs(g.locations.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) outs[g.edges[e].from].push_back(e);
  std::deque<LocId> queue;
  if (!g.locations.empty()) {
    seen[g.init] = true;
    queue.push_back(g.init);
  }
  while (!queue.empty()) {
    LocId l = queue.front();
    queue.pop_front();
    if (g.is_final(l)) continue;
    for (std::size_t e : outs[l]) {
      LocId to = g.edges[e].to;
      if (!seen[to]) {
        seen[to] = true;
        queue.push_back(to);
      }
    }
  }

  ProductHcfg out;
  out.components = p.components;
  out.component_names = p.component_names;
  Hcfg& h = out.graph;
  h.name = g.name;
  h.variables = g.variables;
  h.events = g.events;
  h.init_assign = g.init_assign;
  std::vector<LocId> remap(g.locations.size(), 0);
  for (LocId l = 0; l < g.locations.size(); ++l) {
    if (!seen[l]) continue;
    remap[l] = h.add_location(g.locations[l].name, g.locations[l].flow);
    out.tuples.push_back(p.tuples[l]);
    if (g.is_final(l)) h.final.insert(remap[l]);
  }
  h.init = g.locations.empty() ? 0 : remap[g.init];
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const Edge& ed = g.edges[e];
    if (!seen[ed.from] || g.is_final(ed.from)) continue;
    h.add_edge(remap[ed.from], remap[ed.to], ed.event, ed.guard, ed.assign);
    out.provenance.push_back(p.provenance[e]);
  }
  return out;
}

}  // namespace rssforge::hcfg
