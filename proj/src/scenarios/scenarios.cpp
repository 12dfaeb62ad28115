#include "rssforge/scenarios/scenarios.hpp"

#include <algorithm>
#include <cmath>

namespace rssforge::scenarios {

using hcfg::Hcfg;
using hcfg::TuplePattern;
using symbolic::Assertion;
using symbolic::Term;
using symbolic::Var;

IntersectionParams IntersectionParams::with_cz_length(const Rational& length) {
  IntersectionParams p;
  Rational half = length / 2;
  p.cz_sv = {-half, half};
  p.cz_pov = {-half, half};
  return p;
}

void IntersectionParams::validate() const {
  if (b <= 0) throw std::invalid_argument("braking rate b must be positive");
  if (a_max < 0) throw std::invalid_argument("a_max must be non-negative");
  if (rho < 0) throw std::invalid_argument("response time must be non-negative");
  if (!(cz_sv.start < cz_sv.end) || !(cz_pov.start < cz_pov.end)) {
    throw std::invalid_argument("collision zone intervals must have start < end");
  }
}

void RssParams::validate() const {
  if (rho < 0) throw std::invalid_argument("response time must be non-negative");
  if (a_max <= 0 || b_min <= 0 || b_max <= 0) throw std::invalid_argument("rates must be positive");
  if (b_min > b_max) throw std::invalid_argument("b_min must not exceed b_max");
}

double drss(double v_f, double v_r, const RssParams& p) {
  if (v_f < 0 || v_r < 0) throw NegativeSpeed("drss needs non-negative speeds");
  const double rho = symbolic::to_double(p.rho);
  const double a = symbolic::to_double(p.a_max);
  const double bmin = symbolic::to_double(p.b_min);
  const double bmax = symbolic::to_double(p.b_max);
  double reach = v_r + a * rho;
  return std::max(0.0, v_r * rho + 0.5 * a * rho * rho + reach * reach / (2 * bmin) - v_f * v_f / (2 * bmax));
}

Term drss_raw_term(const RssParams& p) {
  Term vr(vars::v_r);
  Term vf(vars::v_f);
  Term reach = vr + Term(p.a_max * p.rho);
  return vr * Term(p.rho) + Term(p.a_max * p.rho * p.rho / 2) + reach * reach * Term(1 / (2 * p.b_min)) -
         vf * vf * Term(1 / (2 * p.b_max));
}

namespace {

Term t(const Var& v) { return Term(v); }

Hcfg open_component(const std::string& name, std::set<Var> variables) {
  Hcfg g;
  g.name = name;
  g.open = true;
  g.variables = std::move(variables);
  return g;
}

}  // namespace

ModelDocument build_intersection(const IntersectionParams& p) {
  p.validate();
  using namespace vars;
  const Term b(p.b);
  const Term a(p.a_max);
  const Term rho(p.rho);

  Hcfg sv_pos = open_component("SVPos", {x_sv, v_sv});
  {
    hcfg::Ode f{{x_sv, t(v_sv)}};
    auto before = sv_pos.add_location("SVBeforeCZ", f);
    auto in = sv_pos.add_location("SVInCZ", f);
    auto after = sv_pos.add_location("SVAfterCZ", f);
    sv_pos.add_edge(before, in, "SVEnterCZ", Assertion::ge(t(x_sv), Term(p.cz_sv.start)));
    sv_pos.add_edge(in, after, "SVExitCZ", Assertion::ge(t(x_sv), Term(p.cz_sv.end)));
    sv_pos.init = before;
  }

  Hcfg sv_vel = open_component("SVVel", {v_sv});
  {
    auto cruising = sv_vel.add_location("SVCruising", {{v_sv, Term(0)}});
    auto braking = sv_vel.add_location("SVBraking", {{v_sv, -b}});
    auto stopped = sv_vel.add_location("SVStopped", {{v_sv, Term(0)}});
    sv_vel.add_edge(cruising, braking, "SVStartBraking", Assertion::top());
    sv_vel.add_edge(braking, stopped, "SVStop", Assertion::le(t(v_sv), 0));
    sv_vel.init = cruising;
  }

  Hcfg sv_timer = open_component("SVTimer", {t_sv});
  {
    hcfg::Ode f{{t_sv, Term(1)}};
    auto running = sv_timer.add_location("SVTimerRunning", f);
    auto rang = sv_timer.add_location("SVTimerRang", f);
    sv_timer.add_edge(running, rang, "SVStartBraking", Assertion::ge(t(t_sv), rho));
    sv_timer.init = running;
    sv_timer.init_assign = {{t_sv, Term(0)}};
  }

  // x_POV only feeds the envelope at Init; its flow keeps it constant.
  Hcfg pov_pos = open_component("POVPos", {x_pov, x_pov_max, x_pov_min, v_pov_max, v_pov_min});
  {
    hcfg::Ode f{{x_pov, Term(0)}, {x_pov_max, t(v_pov_max)}, {x_pov_min, t(v_pov_min)}};
    auto before = pov_pos.add_location("POVBeforeCZ", f);
    auto in = pov_pos.add_location("POVInCZ", f);
    auto after = pov_pos.add_location("POVAfterCZ", f);
    pov_pos.add_edge(before, in, "POVEnterCZ", Assertion::ge(t(x_pov_max), Term(p.cz_pov.start)));
    pov_pos.add_edge(in, after, "POVExitCZ", Assertion::ge(t(x_pov_min), Term(p.cz_pov.end)));
    pov_pos.init = before;
    pov_pos.init_assign = {{x_pov_max, t(x_pov)}, {x_pov_min, t(x_pov)}};
  }

  Hcfg pov_vel = open_component("POVVel", {v_pov, v_pov_max, v_pov_min});
  {
    auto flow = [&](const Term& dmax, const Term& dmin) {
      return hcfg::Ode{{v_pov, Term(0)}, {v_pov_max, dmax}, {v_pov_min, dmin}};
    };
    auto accel = pov_vel.add_location("POVAccelerating", flow(a, -b));
    auto braking = pov_vel.add_location("POVBraking", flow(-b, -b));
    auto min_st_max_br = pov_vel.add_location("POVMinStMaxBr", flow(-b, Term(0)));
    auto both = pov_vel.add_location("POVBothSt", flow(Term(0), Term(0)));
    // Two locations share one label in the source drawing; these names follow their dynamics.
    auto max_acc_min_st = pov_vel.add_location("POVMaxAccMinSt", flow(a, Term(0)));
    auto max_st_min_br = pov_vel.add_location("POVMaxStMinBr", flow(Term(0), -b));
    Assertion min_stop = Assertion::le(t(v_pov_min), 0);
    Assertion max_stop = Assertion::le(t(v_pov_max), 0);
    pov_vel.add_edge(accel, braking, "POVStartBraking", Assertion::top());
    pov_vel.add_edge(accel, max_acc_min_st, "POVMinStop", min_stop);
    pov_vel.add_edge(braking, min_st_max_br, "POVMinStop", min_stop);
    pov_vel.add_edge(braking, max_st_min_br, "POVMaxStop", max_stop);
    pov_vel.add_edge(min_st_max_br, both, "POVMaxStop", max_stop);
    pov_vel.add_edge(max_acc_min_st, min_st_max_br, "POVStartBraking", Assertion::top());
    pov_vel.add_edge(max_st_min_br, both, "POVMinStop", min_stop);
    pov_vel.init = accel;
    pov_vel.init_assign = {{v_pov_max, t(v_pov)}, {v_pov_min, t(v_pov)}};
  }

  Hcfg pov_timer = open_component("POVTimer", {t_pov});
  {
    hcfg::Ode f{{t_pov, Term(1)}};
    auto idle = pov_timer.add_location("POVNotResponding", f);
    auto running = pov_timer.add_location("POVTimerRunning", f);
    auto rang = pov_timer.add_location("POVTimerRang", f);
    pov_timer.add_edge(idle, running, "SVEnterCZ", Assertion::top(), {{t_pov, Term(0)}});
    pov_timer.add_edge(running, rang, "POVStartBraking", Assertion::ge(t(t_pov), rho));
    pov_timer.init = idle;
  }

  ModelDocument doc;
  doc.name = "intersection";
  doc.network.components = {sv_pos, sv_vel, sv_timer, pov_pos, pov_vel, pov_timer};
  doc.final.any_of = {{{"SVPos", "SVAfterCZ"}},
                      {{"POVPos", "POVAfterCZ"}},
                      {{"SVVel", "SVStopped"}, {"POVVel", "POVBothSt"}}};
  if (p.stopped_before_cz_final) doc.final.any_of.push_back({{"SVPos", "SVBeforeCZ"}, {"SVVel", "SVStopped"}});
  doc.unsafe.any_of = {{{"SVPos", "SVInCZ"}, {"POVPos", "POVInCZ"}}};
  doc.safety = Assertion::top();
  // Reconstructed hint: SV inside its zone has entered it and does not reverse.
  hcfg::HintRule in_cz;
  in_cz.where.any_of = {{{"SVPos", "SVInCZ"}}};
  in_cz.hint = Assertion::conj({Assertion::ge(t(v_sv), Term(0)), Assertion::le(Term(p.cz_sv.start), t(x_sv))});
  in_cz.strengthen = true;
  doc.hints = {in_cz};
  return doc;
}

ModelDocument build_oneway(const RssParams& p) {
  p.validate();
  using namespace vars;

  Hcfg rear = open_component("Rear", {y_r, v_r, t_r});
  {
    auto flow = [&](const Term& dv) { return hcfg::Ode{{y_r, t(v_r)}, {v_r, dv}, {t_r, Term(1)}}; };
    auto accel = rear.add_location("RearAccelerating", flow(Term(p.a_max)));
    auto braking = rear.add_location("RearBraking", flow(Term(-p.b_min)));
    auto stopped = rear.add_location("RearStopped", flow(Term(0)));
    rear.add_edge(accel, braking, "RearStartBraking", Assertion::ge(t(t_r), Term(p.rho)));
    rear.add_edge(braking, stopped, "RearStop", Assertion::le(t(v_r), 0));
    rear.init = accel;
    rear.init_assign = {{t_r, Term(0)}};
  }

  Hcfg front = open_component("Front", {y_f, v_f});
  {
    auto braking = front.add_location("FrontBraking", {{y_f, t(v_f)}, {v_f, Term(-p.b_max)}});
    auto stopped = front.add_location("FrontStopped", {{y_f, t(v_f)}, {v_f, Term(0)}});
    front.add_edge(braking, stopped, "FrontStop", Assertion::le(t(v_f), 0));
    front.init = braking;
  }

  Hcfg gap = open_component("Gap", {y_f, y_r});
  {
    auto open = gap.add_location("GapOpen", {});
    auto closed = gap.add_location("GapClosed", {});
    gap.add_edge(open, closed, "Contact", Assertion::ge(t(y_r), t(y_f)));
    gap.init = open;
  }

  ModelDocument doc;
  doc.name = "oneway";
  doc.network.components = {gap, rear, front};
  doc.final.any_of = {{{"Rear", "RearStopped"}, {"Front", "FrontStopped"}}, {{"Rear", "RearStopped"}}};
  doc.unsafe.any_of = {{{"Gap", "GapClosed"}}};
  doc.safety = Assertion::top();
  return doc;
}

}  // namespace rssforge::scenarios
