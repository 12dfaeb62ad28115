#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rssforge/program/program.hpp"

using namespace rssforge::program;
using rssforge::symbolic::Rational;

namespace {

Term v(const char* n) { return Term::var(n); }

// dwhile (x > 0) { x' = -1 }; x := x - 1
HybridProgram example_alpha() {
  Var x("x");
  return HybridProgram::seq(HybridProgram::dwhile(Assertion::gt(v("x"), 0), {{x, Term(-1)}}),
                            HybridProgram::assign(x, v("x") - 1));
}

}  // namespace

TEST(RunProgram, ExampleOneConverges) {
  RunResult r = run_program(example_alpha(), {{Var("x"), 2.0}}, SimCfg{});
  ASSERT_EQ(r.outcome, Outcome::kConverged);
  EXPECT_NEAR(r.final_store.at(Var("x")), -1.0, 1e-8);
  ASSERT_EQ(r.event_times.size(), 1u);
  EXPECT_NEAR(r.event_times[0], 2.0, 2e-9);
}

TEST(RunProgram, TrivialPrograms) {
  Store rho{{Var("x"), 4.5}, {Var("y"), -1.0}};
  RunResult s = run_program(HybridProgram::skip(), rho, SimCfg{});
  EXPECT_EQ(s.outcome, Outcome::kConverged);
  EXPECT_EQ(s.final_store, rho);
  RunResult w = run_program(HybridProgram::while_loop(Assertion::bottom(), HybridProgram::assign(Var("x"), 0)), rho,
                            SimCfg{});
  EXPECT_EQ(w.outcome, Outcome::kConverged);
  EXPECT_EQ(w.final_store, rho);
}

TEST(RunProgram, DiscreteControl) {
  Var x("x");
  Var n("n");
  // n := 0; while (x < 10) { x := 2x; n := n + 1 }; if (n = 4) x := 0 else skip
  HybridProgram p = HybridProgram::seq(
      {HybridProgram::assign(n, Term(0)),
       HybridProgram::while_loop(Assertion::lt(v("x"), 10),
                                 HybridProgram::seq(HybridProgram::assign(x, 2 * v("x")),
                                                    HybridProgram::assign(n, v("n") + 1))),
       HybridProgram::if_then_else(Assertion::eq(v("n"), 4), HybridProgram::assign(x, Term(0)),
                                   HybridProgram::skip())});
  RunResult r = run_program(p, {{x, 1.0}, {n, 99.0}}, SimCfg{});
  ASSERT_EQ(r.outcome, Outcome::kConverged);
  EXPECT_EQ(r.final_store.at(n), 4.0);
  EXPECT_EQ(r.final_store.at(x), 0.0);
}

TEST(RunProgram, TimeoutInsideDWhile) {
  SimCfg cfg;
  cfg.horizon = 1.0;
  RunResult r = run_program(example_alpha(), {{Var("x"), 5.0}}, cfg);
  EXPECT_EQ(r.outcome, Outcome::kTimeout);
  EXPECT_LE(r.time, 1.0 + cfg.dt + 1e-12);
}

TEST(RunProgram, RejectsClosedGuardAndDuplicateOde) {
  Var x("x");
  EXPECT_THROW(HybridProgram::dwhile(Assertion::ge(v("x"), 0), {{x, Term(-1)}}), std::invalid_argument);
  EXPECT_THROW(HybridProgram::dwhile(Assertion::gt(v("x"), 0), {{x, Term(-1)}, {x, Term(1)}}),
               std::invalid_argument);
  EXPECT_NO_THROW(HybridProgram::dwhile(Assertion::top(), {{x, Term(-1)}}));
}

TEST(RunProgram, MissingVariable) {
  EXPECT_THROW(run_program(example_alpha(), {{Var("y"), 1.0}}, SimCfg{}), rssforge::symbolic::MissingVariable);
}

TEST(RunProgram, EventBracketing) {
  Var x("x");
  Var w("w");
  // dwhile (x^2 + w < 4) { x' = 1, w' = x }: exit when x^2 + w reaches 4.
  HybridProgram p = HybridProgram::dwhile(Assertion::lt(v("x") * v("x") + v("w"), 4), {{x, Term(1)}, {w, v("x")}});
  SimCfg cfg;
  RunResult r = run_program(p, {{x, 0.0}, {w, 0.0}}, cfg);
  ASSERT_EQ(r.outcome, Outcome::kConverged);
  double T = r.event_times.at(0);
  // x(t) = t, w(t) = t^2/2, so 1.5 T^2 = 4.
  EXPECT_NEAR(T, std::sqrt(8.0 / 3.0), 4e-9);
  auto g = [](double t) { return t * t + t * t / 2.0 < 4.0; };
  EXPECT_TRUE(g(T - cfg.event_tol));
  EXPECT_FALSE(1.5 * r.final_store.at(x) * r.final_store.at(x) < 4.0 - 1e-12 &&
               r.final_store.at(x) * r.final_store.at(x) + r.final_store.at(w) < 4.0);
}

TEST(RunProgram, RefinementUnderDt) {
  SimCfg a;
  SimCfg b = a;
  b.dt = a.dt / 2;
  Store rho{{Var("x"), 1.2345}};
  double ta = run_program(example_alpha(), rho, a).event_times.at(0);
  double tb = run_program(example_alpha(), rho, b).event_times.at(0);
  EXPECT_LT(std::fabs(ta - tb), 2 * a.event_tol);
}

TEST(RunProgram, ConservationForConstantAcceleration) {
  Var t("t");
  Var x("x");
  Var vv("v");
  HybridProgram p = HybridProgram::dwhile(Assertion::lt(v("t"), 10), {{t, Term(1)}, {x, v("v")}, {vv, Term(Rational(-3, 10))}});
  Store rho{{t, 0.0}, {x, 1.5}, {vv, 4.0}};
  RunResult r = run_program(p, rho, SimCfg{});
  ASSERT_EQ(r.outcome, Outcome::kConverged);
  double T = r.final_store.at(t);
  EXPECT_NEAR(T, 10.0, 1e-8);
  EXPECT_NEAR(r.final_store.at(x), 1.5 + 4.0 * T - 0.5 * 0.3 * T * T, 1e-9);
}

TEST(RunProgram, Deterministic) {
  Store rho{{Var("x"), 3.3}};
  RunResult a = run_program(example_alpha(), rho, SimCfg{});
  RunResult b = run_program(example_alpha(), rho, SimCfg{});
  EXPECT_EQ(a.final_store, b.final_store);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(a.trace[i].t, b.trace[i].t);
}

TEST(Falsify, ExampleOnePostHolds) {
  HoareQuadruple q{Assertion::gt(v("x"), 1), example_alpha(), Assertion::lt(v("x"), 0), Assertion::top()};
  auto verdict = falsify_quadruple(q, box_sampler({{Var("x"), {1.0, 10.0}}}, 42), 100, SimCfg{});
  EXPECT_FALSE(verdict.counterexample_found);
  EXPECT_GE(verdict.samples_run, 99u);
}

TEST(Falsify, OracleGrid) {
  // Independent check: for x0 > 0 the exit store is x = 0 then x := -1.
  for (int i = 1; i <= 1000; ++i) {
    double x0 = 1.0 + 9.0 * i / 1000.0;
    RunResult r = run_program(example_alpha(), {{Var("x"), x0}}, SimCfg{.record_trace = false});
    ASSERT_EQ(r.outcome, Outcome::kConverged);
    EXPECT_LT(r.final_store.at(Var("x")), 0.0);
    EXPECT_NEAR(r.final_store.at(Var("x")), -1.0, 1e-8);
  }
}

TEST(Falsify, PostViolated) {
  HoareQuadruple q{Assertion::top(), example_alpha(), Assertion::gt(v("x"), 0), Assertion::top()};
  auto verdict = falsify_quadruple(q, [](std::size_t) { return Store{{Var("x"), 2.0}}; }, 1, SimCfg{});
  ASSERT_TRUE(verdict.counterexample_found);
  EXPECT_EQ(verdict.violation, ViolationKind::kPostViolated);
}

TEST(Falsify, SafetyViolatedAtStart) {
  HoareQuadruple q{Assertion::eq(v("x"), 3), example_alpha(), Assertion::top(), Assertion::le(v("x"), 2)};
  auto verdict = falsify_quadruple(q, [](std::size_t) { return Store{{Var("x"), 3.0}}; }, 1, SimCfg{});
  ASSERT_TRUE(verdict.counterexample_found);
  EXPECT_EQ(verdict.violation, ViolationKind::kSafetyViolated);
  EXPECT_EQ(verdict.violation_time, 0.0);
}

TEST(Trace, CsvExport) {
  RunResult r = run_program(example_alpha(), {{Var("x"), 0.002}}, SimCfg{});
  std::ostringstream os;
  write_trace_csv(os, r.trace);
  std::string s = os.str();
  EXPECT_EQ(s.substr(0, 4), "t,x\n");
  // initial row, two RK4 steps, the event row and the assignment row
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 1 + 1 + 1 + 1);
}

TEST(ProgramJson, RoundTrip) {
  auto prog = HybridProgram::seq({HybridProgram::assign(Var("x"), Term(2)),
                                  HybridProgram::while_loop(Assertion::le(Term::var("x"), Term(5)),
                                                            HybridProgram::assign(Var("x"), Term::var("x") + Term(1))),
                                  HybridProgram::if_then_else(Assertion::eq(Term::var("x"), Term(6)), HybridProgram::skip(),
                                                              HybridProgram::assign(Var("y"), Term(0))),
                                  HybridProgram::dwhile(Assertion::lt(Term::var("x"), Term(9)), {{Var("x"), Term(1)}})});
  auto back = program_from_json(program_to_json(prog));
  EXPECT_TRUE(same_program(prog, back));
  EXPECT_EQ(program_to_json(back), program_to_json(prog));
  EXPECT_FALSE(same_program(prog, HybridProgram::skip()));
  EXPECT_THROW(program_from_json(R"({"kind": "jump"})"), std::invalid_argument);
  EXPECT_THROW(program_from_json("{"), std::invalid_argument);
}
