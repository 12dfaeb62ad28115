// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "rssforge/hcfg/hcfg.hpp"
#include "rssforge/program/program.hpp"
#include "rssforge/scenarios/scenarios.hpp"
#include "rssforge/sim/sim.hpp"
#include "rssforge/symbolic/text.hpp"
#include "rssforge/synthesis/synthesis.hpp"

using namespace rssforge;
using symbolic::Assertion;
using symbolic::Rational;
using symbolic::Store;
using symbolic::Term;
using symbolic::Var;
namespace vars = scenarios::vars;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << n << ": " << detail << std::endl;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

smt::SolverPool& pool() {
  static smt::SolverPool p(smt::SolverConfig::from_environment(), workers());
  return p;
}

struct Intersection {
  scenarios::IntersectionParams params;
  hcfg::ModelDocument doc;
  hcfg::ProductHcfg product;
  synthesis::SynthesisReport report;
};

Intersection derive_intersection(const scenarios::IntersectionParams& ip, bool with_hints) {
  Intersection x{ip, scenarios::build_intersection(ip), {}, {}};
  x.product = hcfg::prune_unreachable(hcfg::synchronized_product(x.doc.network, x.doc.final));
  auto hints = with_hints ? synthesis::expand_hints(x.product, x.doc.hints) : std::map<hcfg::LocId, synthesis::Hint>{};
  x.report = synthesis::annotate(x.product.graph, x.doc.safety, x.product.select(x.doc.unsafe), hints, &pool());
  return x;
}

std::string matrix_text(const sim::ConfusionMatrix& m) {
  std::ostringstream os;
  os << "complying " << m.complying_safe << "/" << m.complying_unsafe << ", non-complying " << m.noncomplying_safe
     << "/" << m.noncomplying_unsafe << " (safe/unsafe)";
  if (m.indeterminate_safe + m.indeterminate_unsafe > 0) {
    os << ", indeterminate " << m.indeterminate_safe << "/" << m.indeterminate_unsafe;
  }
  return os.str();
}

std::vector<sim::Compliance> compliance_of(const sim::GridResult& r) {
  std::vector<sim::Compliance> out;
  for (const auto& rec : r.records) out.push_back(rec.compliance);
  return out;
}

program::SimCfg grid_cfg(double dt = 0.001) { return program::SimCfg{.dt = dt, .horizon = 60.0, .record_trace = false}; }

void criterion1() {
  auto t0 = Clock::now();
  auto doc = scenarios::build_oneway();
  auto p = hcfg::prune_unreachable(hcfg::synchronized_product(doc.network, doc.final));
  auto r = synthesis::annotate(p.graph, doc.safety, p.select(doc.unsafe), {}, nullptr);
  scenarios::RssParams rp;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pos(0, 100);
  std::uniform_real_distribution<double> vel(0, 25);
  int agree = 0;
  int total = 0;
  for (int i = 0; i < 10000; ++i) {
    double yf = pos(rng);
    double yr = pos(rng);
    double vf = vel(rng);
    double vr = vel(rng);
    symbolic::ExactStore s{{vars::y_f, symbolic::from_double(yf)},
                           {vars::y_r, symbolic::from_double(yr)},
                           {vars::v_f, symbolic::from_double(vf)},
                           {vars::v_r, symbolic::from_double(vr)}};
    // Membership in y_f - y_r > max(0, raw distance), decided exactly.
    Rational gap = s[vars::y_f] - s[vars::y_r];
    Rational raw = scenarios::drss_raw_term(rp).evaluate(s);
    bool truth = gap > 0 && gap > raw;
    Assertion c = synthesis::instantiate(r.rss_condition, s);
    ++total;
    agree += (c.is_true() && truth) || (c.is_false() && !truth);
  }
  Term gap = Term(vars::y_f) - Term(vars::y_r);
  Assertion eq1 = Assertion::conj({Assertion::gt(gap, Term(0)), Assertion::gt(gap, scenarios::drss_raw_term(rp))});
  Assertion domain = Assertion::conj({Assertion::ge(Term(vars::v_f), Term(0)), Assertion::ge(Term(vars::v_r), Term(0))});
  auto fwd = pool().check_validity(Assertion::implies(Assertion::conj({domain, r.rss_condition}), eq1), 60.0);
  auto bwd = pool().check_validity(Assertion::implies(Assertion::conj({domain, eq1}), r.rss_condition), 60.0);
  bool smt_ok = !fwd.is(smt::VerdictKind::kInvalid) && !bwd.is(smt::VerdictKind::kInvalid);
  std::ostringstream os;
  os << "oneway condition agrees with the safety distance on " << agree << "/" << total
     << " samples; implications: " << smt::to_string(fwd.kind) << " / " << smt::to_string(bwd.kind);
  for (const auto* v : {&fwd, &bwd}) {
    if (!v->is(smt::VerdictKind::kInvalid) || !v->model) continue;
    Store start;
    for (const Var& x : p.graph.variables) start[x] = v->model->contains(x) ? v->model->at(x) : 0.0;
    os << "; counterexample";
    for (const auto& [x, val] : *v->model) os << " " << x.name() << "=" << val;
    auto ties = synthesis::simultaneous_exits(p.graph, {start}, program::SimCfg{});
    if (!ties.empty()) {
      os << " has guards";
      for (auto e : ties.front().edges) os << " " << p.graph.edges[e].event;
      os << " first holding together at t=" << ties.front().time;
    }
  }
  os << " (" << since(t0) << " s)";
  report(1, agree == total && smt_ok, os.str());
}

struct GridRun {
  sim::GridResult result;
  double seconds = 0.0;
};

GridRun run_full_grid(const Intersection& x, double dt = 0.001) {
  auto t0 = Clock::now();
  GridRun g{sim::run_grid(x.report.rss_condition, sim::GridSpec::full(), x.params, grid_cfg(dt), &pool(), workers()),
            0.0};
  g.seconds = since(t0);
  return g;
}

void criterion2(const GridRun& g) {
  const auto& m = g.result.matrix;
  std::ostringstream os;
  os << g.result.simulations << " simulations over " << g.result.records.size() << " instances, " << matrix_text(m)
     << ", recall " << m.recall() << " (" << g.seconds << " s, " << workers() << " workers)";
  bool ok = g.result.simulations == 23328 && m.complying_unsafe == 0 && m.indeterminate_unsafe == 0 &&
            m.indeterminate_safe == 0;
  report(2, ok, os.str());
}

// Largest relative deviation from the reference matrix over its nonzero cells.
double table_deviation(const sim::ConfusionMatrix& m) {
  auto rel = [](double got, double want) { return std::abs(got - want) / want; };
  return std::max({rel(m.complying_safe, 2296), rel(m.noncomplying_safe, 62), rel(m.noncomplying_unsafe, 558)});
}

// Grid instances whose braking SV stops exactly on an end of its zone.
std::size_t stop_ties(double length) {
  auto ip = scenarios::IntersectionParams::with_cz_length(symbolic::from_double(length));
  std::size_t n = 0;
  for (const auto& inst : sim::GridSpec::full().instances()) {
    Rational x = symbolic::from_double(-inst.x_sv);
    Rational v = symbolic::from_double(inst.v_sv);
    Rational stop = x + v * ip.rho + v * v / (Rational(2) * ip.b);
    n += stop == ip.cz_sv.start || stop == ip.cz_sv.end;
  }
  return n;
}

void criterion3(const Intersection& x0, const GridRun& at_default) {
  auto t0 = Clock::now();
  double default_l = symbolic::to_double(x0.params.cz_sv.end - x0.params.cz_sv.start);
  double best_l = default_l;
  sim::ConfusionMatrix best = at_default.result.matrix;
  std::ostringstream tried;
  tried << " tried:";
  for (int l : {4, 5, 6, 7}) {
    sim::ConfusionMatrix m;
    if (l == default_l && x0.params.cz_pov.end - x0.params.cz_pov.start == Rational(l)) {
      m = at_default.result.matrix;
    } else {
      auto x = derive_intersection(scenarios::IntersectionParams::with_cz_length(Rational(l)), false);
      m = run_full_grid(x).result.matrix;
    }
    tried << " L=" << l << " [" << m.complying_safe << "/" << m.noncomplying_safe << "/" << m.noncomplying_unsafe << "/"
          << m.complying_unsafe << ", " << stop_ties(l) << " stop ties]";
    if (table_deviation(m) < table_deviation(best)) {
      best = m;
      best_l = l;
    }
  }
  bool cells = table_deviation(best) <= 0.05 && best.complying_unsafe == 0;
  bool precision = best.precision() >= 0.85 && best.precision() <= 0.95;
  std::ostringstream os;
  os << "default L = " << default_l << " m, best fit L = " << best_l << " m: " << matrix_text(best) << ", precision " << best.precision()
     << ", worst cell deviation " << 100 * table_deviation(best) << "% (target 2296/62/558/0 within 5%, precision in "
     << "[0.85, 0.95]);" << tried.str() << " (" << since(t0) << " s)";
  report(3, cells && precision, os.str());
}

void criterion4(const Intersection& x) {
  auto t0 = Clock::now();
  sim::ConditionEvaluator eval(x.report.rss_condition, &pool());
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> dist(5, 45);
  std::uniform_real_distribution<double> speed(3, 18);
  std::vector<sim::Instance> complying;
  std::size_t drawn = 0;
  std::size_t indeterminate = 0;
  while (complying.size() < 10000 && drawn < 200000) {
    sim::Instance inst{dist(rng), speed(rng), dist(rng), speed(rng)};
    ++drawn;
    auto c = eval.evaluate(inst);
    if (c == sim::Compliance::kComplying) complying.push_back(inst);
    indeterminate += c == sim::Compliance::kIndeterminate;
  }
  std::size_t collisions = 0;
  std::size_t runs = 0;
  for (const auto& inst : complying) {
    for (double a : sim::GridSpec::full().behaviors) {
      ++runs;
      collisions += sim::simulate(inst, sim::Behavior{a}, x.params, grid_cfg()).collision;
    }
  }
  std::ostringstream os;
  os << complying.size() << " complying instances (of " << drawn << " drawn, " << indeterminate << " indeterminate), "
     << runs << " runs, " << collisions << " collisions (" << since(t0) << " s)";
  report(4, complying.size() == 10000 && collisions == 0, os.str());
}

void criterion5(const Intersection& x) {
  auto t0 = Clock::now();
  auto bearing = x.product.select(hcfg::TuplePattern{{{{"POVVel", "POVMaxStMinBr"}}}});
  synthesis::VacuityOptions opt{.only = bearing, .timeout_seconds = 120.0};
  auto vac = synthesis::detect_vacuous(x.product.graph, x.report.gamma, pool(), opt);
  auto lifted = synthesis::vacuous_component_locations(x.product, vac);
  bool listed = std::find(lifted.begin(), lifted.end(),
                          std::pair<std::string, std::string>{"POVVel", "POVMaxStMinBr"}) != lifted.end();
  std::ostringstream os;
  os << "POVVel location POVMaxStMinBr " << (listed ? "is" : "is not") << " vacuous: " << vac.vacuous.size() << "/"
     << bearing.size() << " product tuples proved vacuous, " << vac.undetermined.size() << " undetermined ("
     << since(t0) << " s)";
  report(5, listed, os.str());
}

void criterion6() {
  using program::HybridProgram;
  Var x("x");
  auto alpha = HybridProgram::seq(HybridProgram::dwhile(Assertion::gt(Term(x), Term(0)), {{x, Term(-1)}}),
                                  HybridProgram::assign(x, Term(x) - Term(1)));
  auto r = program::run_program(alpha, {{x, 2.0}}, program::SimCfg{});
  bool ok = r.outcome == program::Outcome::kConverged && std::abs(r.final_store.at(x) + 1.0) <= 1e-6 &&
            r.event_times.size() == 1 && std::abs(r.event_times[0] - 2.0) <= 1e-6;
  std::ostringstream os;
  os << "outcome " << program::to_string(r.outcome) << ", final x = " << r.final_store.at(x) << ", exit time "
     << (r.event_times.empty() ? -1.0 : r.event_times[0]);
  report(6, ok, os.str());
}

void criterion7(const Intersection& x) {
  const auto& g = x.product.graph;
  std::vector<Var> layout(g.variables.begin(), g.variables.end());
  auto tr = hcfg::translate_to_program(g);
  hcfg::Simulator sim(g, layout);
  program::SimCfg cfg{.dt = 0.001, .horizon = 60.0, .record_trace = false};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-60.0, -3.0);
  std::uniform_real_distribution<double> vel(0.0, 20.0);
  int same_location = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Store s;
    for (const Var& v : layout) s[v] = 0.0;
    s[vars::x_sv] = pos(rng);
    s[vars::v_sv] = vel(rng);
    s[vars::x_pov] = pos(rng);
    s[vars::v_pov] = vel(rng);
    auto direct = sim.run(s, cfg);
    auto lowered = program::run_program(tr.program, tr.initial_store(s), cfg);
    if (direct.outcome != lowered.outcome || direct.outcome != program::Outcome::kConverged) continue;
    if (tr.location_of(lowered.final_store) != direct.location) continue;
    ++same_location;
    for (const auto& [v, val] : direct.final_store) worst = std::max(worst, std::abs(lowered.final_store.at(v) - val));
  }
  std::ostringstream os;
  os << same_location << "/100 stores end in the same location, max deviation " << worst;
  report(7, same_location == 100 && worst <= 1e-6, os.str());
}

void criterion8(const Intersection& x) {
  double worst = 0.0;
  std::size_t flows = 0;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> val(-20.0, 20.0);
  const auto& g = x.product.graph;
  for (const auto& loc : g.locations) {
    Var clock("_clock");
    auto ode = loc.flow;
    ode.emplace_back(clock, Term(1));
    auto sol = synthesis::solve_flow(loc.flow, g.variables);
    Store s0;
    for (const Var& v : g.variables) s0[v] = val(rng);
    s0[clock] = 0.0;
    auto prog = program::HybridProgram::dwhile(Assertion::lt(Term(clock), Term(10)), ode);
    program::run_program(prog, s0, program::SimCfg{.dt = 0.001, .horizon = 20.0, .record_trace = false},
                         [&](const program::TracePoint& tp) {
                           Store at = s0;
                           at[sol.time] = tp.store.at(clock);
                           for (const auto& [v, term] : sol.at) {
                             worst = std::max(worst, std::abs(term.evaluate(at) - tp.store.at(v)));
                           }
                         });
    ++flows;
  }
  std::ostringstream os;
  os << flows << " location flows over 10 s at dt = 1 ms, max deviation " << worst;
  report(8, worst <= 1e-9, os.str());
}

void criterion9(const Intersection& hinted, double derive_seconds) {
  const auto& x = hinted;
  const auto& g = x.product.graph;
  auto unsafe = x.product.select(x.doc.unsafe);
  auto t0 = Clock::now();
  auto ob = synthesis::check_annotation(g, x.report.gamma, x.doc.safety, unsafe, pool(), 60.0);
  double check_seconds = since(t0);
  // The same audit with every clause sent to the solver, for timing.
  auto t1 = Clock::now();
  auto solved = synthesis::check_annotation(g, x.report.gamma, x.doc.safety, unsafe, pool(), 10.0, true);
  double solve_seconds = since(t1);
  std::ofstream log("acceptance_obligations.log");
  log << "location\tkind\tverdict\tsyntactic\tsolver_verdict\tsolver_seconds\n";
  double slowest = 0.0;
  for (std::size_t i = 0; i < ob.obligations.size(); ++i) {
    const auto& o = ob.obligations[i];
    const auto& s = solved.obligations[i];
    log << g.locations[o.location].name << '\t' << synthesis::to_string(o.kind) << '\t' << smt::to_string(o.verdict)
        << '\t' << o.syntactic << '\t' << smt::to_string(s.verdict) << '\t' << s.seconds << '\n';
    slowest = std::max(slowest, s.seconds);
  }
  std::ostringstream os;
  os << "synthesis with default hints " << derive_seconds << " s (" << x.report.gamma.size() << " locations, "
     << x.report.hints.size() << " hinted), audit " << check_seconds << " s: " << ob.discharged << " discharged, "
     << ob.refuted << " refuted, " << ob.unknown << " unknown; solver-only audit at 10 s per query " << solve_seconds
     << " s: " << solved.discharged << " valid, " << solved.refuted << " refuted, " << solved.unknown
     << " unknown, slowest " << slowest << " s (per-obligation log in acceptance_obligations.log)";
  report(9, derive_seconds + check_seconds < 600.0 && ob.refuted == 0 && solved.refuted == 0, os.str());
}

// Random polynomial assertions over x, y for the symbolic properties.
Term random_term(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> c(-4, 4);
  Term x = Term::var("x");
  Term y = Term::var("y");
  return Term(c(rng)) + Term(c(rng)) * x + Term(c(rng)) * y + Term(c(rng)) * x * y + Term(c(rng)) * x * x;
}

Assertion random_assertion(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 5);
  int k = depth == 0 ? pick(rng) % 4 : pick(rng);
  switch (k) {
    case 0: return Assertion::lt(random_term(rng), Term(0));
    case 1: return Assertion::le(random_term(rng), Term(0));
    case 2: return Assertion::ne(random_term(rng), Term(0));
    case 3: return Assertion::eq(random_term(rng), Term(0));
    case 4: return Assertion::conj({random_assertion(rng, depth - 1), random_assertion(rng, depth - 1)});
    default: return Assertion::disj({random_assertion(rng, depth - 1), random_assertion(rng, depth - 1)});
  }
}

bool symbolic_properties(std::string& detail) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> val(-5, 5);
  int checked = 0;
  int bad = 0;
  for (int i = 0; i < 2000; ++i) {
    Assertion a = random_assertion(rng, 3);
    symbolic::Substitution sigma({{Var("x"), random_term(rng)}, {Var("y"), random_term(rng)}});
    symbolic::ExactStore s{{Var("x"), Rational(val(rng), 2)}, {Var("y"), Rational(val(rng), 3)}};
    // ρ ⊨ A[σ] iff execute(σ, ρ) ⊨ A, with the assignments run in order.
    symbolic::ExactStore after = s;
    for (const auto& [v, e] : sigma.assignments()) after[v] = e.evaluate(after);
    bad += symbolic::satisfies(s, symbolic::substitute(a, sigma)) != symbolic::satisfies(after, a);
    // De Morgan duality of the topology classes.
    auto t = symbolic::classify_topology(a);
    auto n = symbolic::classify_topology(Assertion::negate(a));
    bool dual = (t == symbolic::Topology::kOpen && n == symbolic::Topology::kClosed) ||
                (t == symbolic::Topology::kClosed && n == symbolic::Topology::kOpen) || t == n;
    bad += !dual;
    ++checked;
  }
  detail = "symbolic " + std::to_string(checked - bad) + "/" + std::to_string(checked);
  return bad == 0;
}

bool envelope_properties(const Intersection& x, std::string& detail) {
  const auto& g = x.product.graph;
  std::vector<Var> layout(g.variables.begin(), g.variables.end());
  auto idx = [&](const Var& v) { return static_cast<std::size_t>(std::find(layout.begin(), layout.end(), v) - layout.begin()); };
  hcfg::Simulator abstract(g, layout);
  auto cfg = grid_cfg(0.01);
  cfg.record_trace = true;
  std::mt19937_64 rng(17);
  auto all = sim::GridSpec::full().instances();
  std::shuffle(all.begin(), all.end(), rng);
  std::size_t compared = 0;
  std::size_t violations = 0;
  for (std::size_t i = 0; i < 300; ++i) {
    Store s;
    for (const Var& v : layout) s[v] = 0.0;
    for (const auto& [v, q] : all[i].lane_store()) s[v] = symbolic::to_double(q);
    std::vector<std::array<double, 3>> env;
    abstract.run(s, cfg, [&](hcfg::LocId, double t, const std::vector<double>& y) {
      if (t <= 0.0) return;
      // Exits are located to event_tol, so the bounds carry rate * event_tol error.
      if (y[idx(vars::x_pov_min)] > y[idx(vars::x_pov_max)] + 1e-7) ++violations;
      if (y[idx(vars::v_pov_min)] > y[idx(vars::v_pov_max)] + 1e-7) ++violations;
      env.push_back({t, y[idx(vars::x_pov_min)], y[idx(vars::x_pov_max)]});
    });
    if (env.size() < 2) continue;
    for (double a : sim::GridSpec::full().behaviors) {
      auto o = sim::simulate(all[i], sim::Behavior{a}, x.params, cfg);
      for (const auto& smp : o.trace) {
        if (smp.t <= env.front()[0] || smp.t >= env.back()[0]) continue;
        auto hi = std::lower_bound(env.begin(), env.end(), smp.t,
                                   [](const std::array<double, 3>& e, double t) { return e[0] < t; });
        auto lo = hi - 1;
        double w = (*hi)[0] > (*lo)[0] ? (smp.t - (*lo)[0]) / ((*hi)[0] - (*lo)[0]) : 0.0;
        double x_min = (*lo)[1] + w * ((*hi)[1] - (*lo)[1]);
        double x_max = (*lo)[2] + w * ((*hi)[2] - (*lo)[2]);
        // Linear interpolation of a quadratic over one step errs by at most a h^2 / 8.
        violations += smp.x_pov < x_min - 1e-3 || smp.x_pov > x_max + 1e-3;
        ++compared;
      }
    }
  }
  detail = "envelope " + std::to_string(compared) + " samples, " + std::to_string(violations) + " violations";
  return violations == 0 && compared > 0;
}

void criterion10(const Intersection& x, const GridRun& at1ms) {
  auto t0 = Clock::now();
  std::string sym;
  bool ok_sym = symbolic_properties(sym);
  std::string env;
  bool ok_env = envelope_properties(x, env);
  auto compliance = compliance_of(at1ms.result);
  auto half = sim::run_grid(compliance, sim::GridSpec::full(), x.params, grid_cfg(0.0005), workers());
  auto same = [](const sim::ConfusionMatrix& a, const sim::ConfusionMatrix& b) {
    return a.complying_safe == b.complying_safe && a.complying_unsafe == b.complying_unsafe &&
           a.noncomplying_safe == b.noncomplying_safe && a.noncomplying_unsafe == b.noncomplying_unsafe &&
           a.indeterminate_safe == b.indeterminate_safe && a.indeterminate_unsafe == b.indeterminate_unsafe;
  };
  bool ok_dt = same(half.matrix, at1ms.result.matrix);
  auto serial = sim::run_grid(compliance, sim::GridSpec::full(), x.params, grid_cfg(), 1);
  auto parallel = sim::run_grid(compliance, sim::GridSpec::full(), x.params, grid_cfg(), 4);
  std::ostringstream a;
  std::ostringstream b;
  sim::write_csv(a, serial);
  sim::write_csv(b, parallel);
  bool ok_det = a.str() == b.str() && same(serial.matrix, at1ms.result.matrix);
  std::ostringstream os;
  os << sym << ", " << env << ", dt 1 ms vs 0.5 ms matrix " << (ok_dt ? "unchanged" : "changed: " + matrix_text(half.matrix))
     << ", 1 vs 4 workers " << (ok_det ? "identical" : "differ") << " (" << since(t0) << " s)";
  report(10, ok_sym && ok_env && ok_dt && ok_det, os.str());
}

}  // namespace

int main() {
  std::cout << std::boolalpha;
  auto t0 = Clock::now();
  criterion1();

  auto td = Clock::now();
  auto hinted = derive_intersection(scenarios::IntersectionParams{}, true);
  double derive_seconds = since(td);
  auto grid = run_full_grid(hinted);
  criterion2(grid);
  criterion3(hinted, grid);
  criterion4(hinted);
  criterion5(hinted);
  criterion6();
  criterion7(hinted);
  criterion8(hinted);
  criterion9(hinted, derive_seconds);
  criterion10(hinted, grid);
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << " ("
            << since(t0) << " s)" << std::endl;
  return failures == 0 ? 0 : 1;
}
