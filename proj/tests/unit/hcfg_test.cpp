#include <gtest/gtest.h>

#include <cmath>
#include <regex>

#include "rssforge/hcfg/hcfg.hpp"
#include "rssforge/hcfg/model_io.hpp"

using namespace rssforge::hcfg;
using rssforge::program::Outcome;
using rssforge::program::run_program;
using rssforge::program::SimCfg;

namespace {

Term v(const char* n) { return Term::var(n); }

// l0 --(x >= 1)--> l1 with x' = 1, l1 final.
Hcfg chain() {
  Hcfg g;
  g.name = "chain";
  g.variables = {Var("x")};
  LocId a = g.add_location("Run", {{Var("x"), Term(1)}});
  LocId b = g.add_location("Done", {{Var("x"), Term(0)}});
  g.add_edge(a, b, "Reach", Assertion::ge(v("x"), 1));
  g.init = a;
  g.final = {b};
  return g;
}

Hcfg component(const std::string& name, const std::vector<std::string>& locs) {
  Hcfg g;
  g.name = name;
  g.open = true;
  for (const auto& l : locs) g.add_location(l, {});
  return g;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Validate, ChainIsValid) {
  Report r = validate(chain());
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Validate, OpenGuardIsRejected) {
  Hcfg g = chain();
  g.edges[0].guard = Assertion::lt(v("x"), 1);
  Report r = validate(g);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(r.mentions("guard not closed"));
}

TEST(Validate, IncompleteAndDuplicateFlow) {
  Hcfg g = chain();
  g.locations[1].flow.clear();
  EXPECT_TRUE(validate(g).mentions("incomplete flow"));
  g.open = true;
  g.final.clear();
  EXPECT_TRUE(validate(g).ok());
  g.locations[0].flow.emplace_back(Var("x"), Term(2));
  EXPECT_TRUE(validate(g).mentions("duplicate flow"));
}

TEST(Validate, UnknownNamesAndRanges) {
  Hcfg g = chain();
  g.edges[0].assign = {{Var("y"), Term(0)}};
  EXPECT_TRUE(validate(g).mentions("unknown variable y"));
  g = chain();
  g.edges[0].event = "Nope";
  EXPECT_TRUE(validate(g).mentions("unknown event"));
  g = chain();
  g.final = {7};
  EXPECT_TRUE(validate(g).mentions("final location out of range"));
  g = chain();
  g.final.clear();
  EXPECT_TRUE(validate(g).ok());
  EXPECT_TRUE(validate(g).mentions("has no outgoing edge"));
}

TEST(Compatibility, FlowConflict) {
  Network n;
  Hcfg a = component("A", {"A0"});
  a.variables = {Var("x")};
  a.locations[0].flow = {{Var("x"), Term(1)}};
  Hcfg b = component("B", {"B0"});
  b.variables = {Var("x")};
  b.locations[0].flow = {{Var("x"), Term(2)}};
  n.components = {a, b};
  Report r = check_compatibility(n);
  EXPECT_TRUE(r.mentions("flow conflict on x"));
  n.components[1].locations[0].flow = {{Var("x"), Term(1)}};
  EXPECT_TRUE(check_compatibility(n).ok());
}

TEST(Compatibility, AssignmentConflictOnSharedEvent) {
  Network n;
  Hcfg a = component("A", {"A0", "A1"});
  a.variables = {Var("t")};
  a.locations[0].flow = a.locations[1].flow = {{Var("t"), Term(1)}};
  a.add_edge(0, 1, "Go", Assertion::top(), {{Var("t"), Term(0)}});
  Hcfg b = component("B", {"B0", "B1"});
  b.variables = {Var("t")};
  b.add_edge(0, 1, "Go", Assertion::top(), {{Var("t"), Term(1)}});
  n.components = {a, b};
  EXPECT_TRUE(check_compatibility(n).mentions("assignment conflict on t"));
  n.components[1].edges[0].event = "Other";
  n.components[1].events = {"Other"};
  EXPECT_TRUE(check_compatibility(n).ok());
}

TEST(Compatibility, CoverageAndDisjointness) {
  Network n;
  Hcfg a = component("A", {"A0", "A1"});
  a.variables = {Var("x")};
  a.locations[0].flow = {{Var("x"), Term(1)}};
  Hcfg b = component("B", {"B0"});
  b.variables = {Var("x")};
  n.components = {a, b};
  // The tuple (A1, B0) leaves x without a flow.
  EXPECT_TRUE(check_compatibility(n).mentions("leaves x undefined"));
  n.components[1].locations[0].flow = {{Var("x"), Term(1)}};
  EXPECT_TRUE(check_compatibility(n).ok());
  n.components[1].locations[0].name = "A0";
  EXPECT_TRUE(check_compatibility(n).mentions("appears in both"));
}

TEST(Product, OneComponentIsIsomorphic) {
  Hcfg g = chain();
  g.open = true;
  g.final.clear();
  Network n{{g}};
  ProductHcfg p = synchronized_product(n, TuplePattern{{{{"chain", "Done"}}}});
  ASSERT_EQ(p.graph.locations.size(), 2u);
  ASSERT_EQ(p.graph.edges.size(), 1u);
  EXPECT_EQ(p.graph.locations[0].name, "Run");
  EXPECT_EQ(p.graph.edges[0].guard, g.edges[0].guard);
  EXPECT_EQ(p.graph.final, (std::set<LocId>{1}));
  EXPECT_TRUE(validate(p.graph).ok());
}

TEST(Product, SynchronizesSharedEventsAndInterleavesOthers) {
  // A: a0 -Sync-> a1, B: b0 -Sync-> b1 -Solo-> b2.
  Hcfg a = component("A", {"a0", "a1"});
  a.variables = {Var("x")};
  for (auto& l : a.locations) l.flow = {{Var("x"), Term(1)}};
  a.add_edge(0, 1, "Sync", Assertion::ge(v("x"), 1));
  Hcfg b = component("B", {"b0", "b1", "b2"});
  b.variables = {Var("x"), Var("t")};
  for (auto& l : b.locations) l.flow = {{Var("t"), Term(1)}};
  b.add_edge(0, 1, "Sync", Assertion::ge(v("t"), 2), {{Var("t"), Term(0)}});
  b.add_edge(1, 2, "Solo", Assertion::ge(v("t"), 1));
  Network n{{a, b}};
  ProductHcfg p = synchronized_product(n, TuplePattern{{{{"B", "b2"}}}});
  EXPECT_EQ(p.graph.locations.size(), 6u);
  // Sync only from (a0,b0); Solo from (a0,b1) and (a1,b1).
  EXPECT_EQ(p.graph.edges.size(), 3u);
  const Edge& sync = p.graph.edges[p.graph.out_edges(p.graph.at("a0|b0")).at(0)];
  EXPECT_EQ(sync.event, "Sync");
  EXPECT_EQ(p.graph.locations[sync.to].name, "a1|b1");
  EXPECT_EQ(sync.guard, Assertion::conj({Assertion::ge(v("x"), 1), Assertion::ge(v("t"), 2)}));
  ASSERT_EQ(sync.assign.size(), 1u);
  EXPECT_EQ(sync.assign[0].first, Var("t"));
  ASSERT_EQ(p.provenance[0].size(), 2u);
  EXPECT_TRUE(validate(p.graph).ok());

  // Edge bound: at most Σ over events of the product of per-component matching counts.
  std::size_t bound = 0;
  for (const auto& ev : p.graph.events) {
    std::size_t prod = 1;
    for (std::size_t c : n.owners(ev)) {
      std::size_t k = 0;
      for (const auto& e : n.components[c].edges) k += e.event == ev;
      prod *= k;
    }
    bound += prod;
  }
  EXPECT_LE(p.graph.edges.size(), bound * p.graph.locations.size());

  ProductHcfg pruned = prune_unreachable(p);
  std::set<std::string> names;
  for (const auto& l : pruned.graph.locations) names.insert(l.name);
  EXPECT_EQ(names, (std::set<std::string>{"a0|b0", "a1|b1", "a1|b2"}));
  EXPECT_EQ(pruned.graph.edges.size(), 2u);
  EXPECT_EQ(pruned.provenance.size(), 2u);
  EXPECT_TRUE(pruned.matches(pruned.graph.at("a1|b2"), TuplePattern{{{{"B", "b2"}}}}));
}

TEST(Product, EdgeOrderFollowsComponentOrder) {
  Hcfg a = component("A", {"a0", "a1", "a2"});
  a.variables = {Var("x")};
  for (auto& l : a.locations) l.flow = {{Var("x"), Term(1)}};
  a.add_edge(0, 2, "Second", Assertion::ge(v("x"), 2));
  a.add_edge(0, 1, "First", Assertion::ge(v("x"), 1));
  Hcfg b = component("B", {"b0", "b1"});
  b.add_edge(0, 1, "Alpha", Assertion::top());
  Network n{{a, b}};
  ProductHcfg p = synchronized_product(n, TuplePattern{});
  auto outs = p.graph.out_edges(p.graph.at("a0|b0"));
  ASSERT_EQ(outs.size(), 3u);
  EXPECT_EQ(p.graph.edges[outs[0]].event, "Second");
  EXPECT_EQ(p.graph.edges[outs[1]].event, "First");
  EXPECT_EQ(p.graph.edges[outs[2]].event, "Alpha");
}

TEST(Product, IncompatibleNetworkThrows) {
  Hcfg a = component("A", {"A0"});
  a.variables = {Var("x")};
  a.locations[0].flow = {{Var("x"), Term(1)}};
  Hcfg b = a;
  b.name = "B";
  b.locations[0].name = "B0";
  b.locations[0].flow = {{Var("x"), Term(3)}};
  EXPECT_THROW(synchronized_product(Network{{a, b}}, TuplePattern{}), IncompatibleNetwork);
}

TEST(Graph, ReachabilityAndCycles) {
  GraphFacts f = reachable_and_acyclic(chain());
  EXPECT_EQ(f.reachable, (std::set<LocId>{0, 1}));
  EXPECT_TRUE(f.acyclic);
  EXPECT_EQ(topological_order(chain()), (std::vector<LocId>{0, 1}));

  Hcfg loop = chain();
  loop.add_edge(0, 0, "Again", Assertion::ge(v("x"), 5));
  EXPECT_FALSE(reachable_and_acyclic(loop).acyclic);
  EXPECT_THROW(topological_order(loop), std::logic_error);

  // A cycle outside the reachable part does not count.
  Hcfg island = chain();
  LocId i = island.add_location("Island", {{Var("x"), Term(0)}});
  island.add_edge(i, i, "Spin", Assertion::top());
  GraphFacts g = reachable_and_acyclic(island);
  EXPECT_TRUE(g.acyclic);
  EXPECT_FALSE(g.reachable.contains(i));
}

TEST(Translate, ChainRunsToFinal) {
  Hcfg g = chain();
  Translation tr = translate_to_program(g);
  EXPECT_EQ(tr.k, 1u);
  EXPECT_EQ(tr.order, (std::vector<LocId>{0, 1}));
  auto r = run_program(tr.program, tr.initial_store({{Var("x"), 0.0}}), SimCfg{});
  ASSERT_EQ(r.outcome, Outcome::kConverged);
  EXPECT_NEAR(r.final_store.at(Var("x")), 1.0, 1e-9);
  EXPECT_EQ(tr.location_of(r.final_store), 1u);
  EXPECT_EQ(r.final_store.at(tr.pc), 2.0);
  EXPECT_EQ(tr.pc.name().front(), '_');
}

TEST(Translate, InitFinalSkipsLoop) {
  Hcfg g;
  g.variables = {Var("x")};
  g.add_location("Only", {{Var("x"), Term(1)}});
  g.init_assign = {{Var("x"), Term(7)}};
  g.final = {0};
  Translation tr = translate_to_program(g);
  EXPECT_EQ(tr.k, 0u);
  auto r = run_program(tr.program, tr.initial_store({{Var("x"), 0.0}}), SimCfg{});
  ASSERT_EQ(r.outcome, Outcome::kConverged);
  EXPECT_EQ(r.final_store.at(Var("x")), 7.0);
  EXPECT_EQ(r.time, 0.0);
  EXPECT_TRUE(r.event_times.empty());
}

TEST(Translate, FirstSatisfiedEdgeWins) {
  // Both guards fire at x = 1; the lower-ordered edge is taken.
  Hcfg g;
  g.variables = {Var("x")};
  LocId a = g.add_location("A", {{Var("x"), Term(1)}});
  LocId b = g.add_location("B", {{Var("x"), Term(0)}});
  LocId c = g.add_location("C", {{Var("x"), Term(0)}});
  g.add_edge(a, b, "ToB", Assertion::ge(v("x"), 1));
  g.add_edge(a, c, "ToC", Assertion::ge(2 * v("x"), 2));
  g.final = {b, c};
  Translation tr = translate_to_program(g);
  auto r = run_program(tr.program, tr.initial_store({{Var("x"), 0.0}}), SimCfg{});
  EXPECT_EQ(tr.location_of(r.final_store), b);
  Simulator sim(g, {Var("x")});
  HcfgRun d = sim.run(Store{{Var("x"), 0.0}}, SimCfg{});
  EXPECT_EQ(d.location, b);
  ASSERT_EQ(d.fired.size(), 1u);
  EXPECT_EQ(d.fired[0].edge, 0u);

  // Swapping the order swaps the winner.
  std::swap(g.edges[0], g.edges[1]);
  EXPECT_EQ(Simulator(g, {Var("x")}).run(Store{{Var("x"), 0.0}}, SimCfg{}).location, c);
}

TEST(Simulate, MatchesTranslatedProgram) {
  // Ball with a timer: three locations, a reset on the way.
  Hcfg g;
  g.variables = {Var("x"), Var("v"), Var("t")};
  Ode fall{{Var("x"), v("v")}, {Var("v"), Term(-2)}, {Var("t"), Term(1)}};
  Ode rest{{Var("x"), Term(0)}, {Var("v"), Term(0)}, {Var("t"), Term(1)}};
  LocId up = g.add_location("Up", fall);
  LocId down = g.add_location("Down", fall);
  LocId done = g.add_location("Done", rest);
  g.add_edge(up, down, "Apex", Assertion::le(v("v"), 0), {{Var("t"), Term(0)}});
  g.add_edge(down, done, "Ground", Assertion::le(v("x"), 0));
  g.add_edge(down, done, "Late", Assertion::ge(v("t"), 50));
  g.final = {done};
  ASSERT_TRUE(validate(g).ok());
  Translation tr = translate_to_program(g);
  Simulator sim(g, {Var("t"), Var("v"), Var("x")});
  for (double v0 : {0.5, 1.0, 3.7, 9.0}) {
    Store rho{{Var("x"), 0.25}, {Var("v"), v0}, {Var("t"), 0.0}};
    auto pr = run_program(tr.program, tr.initial_store(rho), SimCfg{.record_trace = false});
    auto dr = sim.run(rho, SimCfg{.record_trace = false});
    ASSERT_EQ(pr.outcome, Outcome::kConverged);
    ASSERT_EQ(dr.outcome, Outcome::kConverged);
    EXPECT_EQ(tr.location_of(pr.final_store), dr.location);
    for (const auto& [var, val] : dr.final_store) EXPECT_NEAR(pr.final_store.at(var), val, 1e-12);
    EXPECT_NEAR(pr.time, dr.time, 1e-12);
    // Apex at v0/2, ground when 0.25 + v0^2/4 - (t)^2 = 0 after the apex.
    EXPECT_NEAR(dr.final_store.at(Var("t")), std::sqrt(0.25 + v0 * v0 / 4.0), 1e-8);
  }
}

TEST(Simulate, NoExitTimesOut) {
  Hcfg g = chain();
  g.edges.clear();
  SimCfg cfg;
  cfg.horizon = 0.5;
  HcfgRun r = Simulator(g, {Var("x")}).run(Store{{Var("x"), 0.0}}, cfg);
  EXPECT_EQ(r.outcome, Outcome::kTimeout);
  Translation tr = translate_to_program(g);
  EXPECT_EQ(run_program(tr.program, tr.initial_store({{Var("x"), 0.0}}), cfg).outcome, Outcome::kTimeout);
}

TEST(Dot, NodesAndEdges) {
  Hcfg empty;
  empty.name = "iso";
  empty.add_location("P", {});
  empty.add_location("Q", {});
  std::string d = export_dot(empty);
  EXPECT_EQ(d.rfind("digraph \"iso\" {", 0), 0u);
  EXPECT_EQ(count(d, "->"), 0u);
  EXPECT_EQ(count(d, "[label="), 2u);

  std::string c = export_dot(chain());
  EXPECT_EQ(count(c, " -> "), 1u);
  EXPECT_NE(c.find("Reach\\n-x + 1 <= 0"), std::string::npos) << c;
  EXPECT_NE(c.find("peripheries=2"), std::string::npos);
}

TEST(ModelIo, RoundTripAndErrors) {
  Hcfg a = chain();
  a.open = true;
  a.final.clear();
  a.init_assign = {{Var("x"), Term(0)}};
  ModelDocument doc;
  doc.name = "toy";
  doc.network.components = {a};
  doc.final = TuplePattern{{{{"chain", "Done"}}}};
  doc.safety = Assertion::le(v("x"), 10);
  doc.hints = {HintRule{TuplePattern{{{{"chain", "Run"}}}}, Assertion::ge(v("x"), 0)}};
  std::string text = to_json(doc);
  ModelDocument back = model_from_json(text);
  EXPECT_EQ(to_json(back), text);
  ASSERT_EQ(back.network.components.size(), 1u);
  EXPECT_EQ(back.network.components[0].edges[0].guard, a.edges[0].guard);
  EXPECT_EQ(back.safety, doc.safety);
  EXPECT_EQ(hints_from_json(hints_to_json(doc.hints))[0].hint, doc.hints[0].hint);

  try {
    model_from_json("{\"name\": \"x\",\n \"components\": [}");
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("malformed JSON at byte"), std::string::npos);
  }
  ModelDocument wrong = doc;
  wrong.final = TuplePattern{{{{"chain", "Nowhere"}}}};
  EXPECT_THROW(model_from_json(to_json(wrong)), ModelError);
  std::string bad_guard = std::regex_replace(text, std::regex("\\(<= \\(poly"), "(<== (poly");
  try {
    model_from_json(bad_guard);
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("guard"), std::string::npos) << e.what();
  }
}
