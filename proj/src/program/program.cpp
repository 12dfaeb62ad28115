#include "rssforge/program/program.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "rssforge/symbolic/compiled.hpp"
#include "rssforge/symbolic/text.hpp"

namespace rssforge::program {

using symbolic::CompiledAssertion;
using symbolic::CompiledTerm;

struct HybridProgram::Node {
  ProgramKind kind = ProgramKind::kSkip;
  Assertion guard;
  std::optional<Var> target;
  Term value;
  Ode ode;
  std::optional<HybridProgram> first;
  std::optional<HybridProgram> second;
};

HybridProgram HybridProgram::skip() {
  static const auto node = std::make_shared<Node>();
  return HybridProgram(node);
}

HybridProgram HybridProgram::seq(HybridProgram first, HybridProgram second) {
  if (first.kind() == ProgramKind::kSkip) return second;
  if (second.kind() == ProgramKind::kSkip) return first;
  auto n = std::make_shared<Node>();
  n->kind = ProgramKind::kSeq;
  n->first = std::move(first);
  n->second = std::move(second);
  return HybridProgram(n);
}

HybridProgram HybridProgram::seq(const std::vector<HybridProgram>& parts) {
  HybridProgram out = skip();
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) out = seq(*it, out);
  return out;
}

HybridProgram HybridProgram::assign(const Var& x, const Term& e) {
  auto n = std::make_shared<Node>();
  n->kind = ProgramKind::kAssign;
  n->target = x;
  n->value = e;
  return HybridProgram(n);
}

HybridProgram HybridProgram::if_then_else(const Assertion& guard, HybridProgram then_branch,
                                          HybridProgram else_branch) {
  auto n = std::make_shared<Node>();
  n->kind = ProgramKind::kIf;
  n->guard = guard;
  n->first = std::move(then_branch);
  n->second = std::move(else_branch);
  return HybridProgram(n);
}

HybridProgram HybridProgram::while_loop(const Assertion& guard, HybridProgram body) {
  auto n = std::make_shared<Node>();
  n->kind = ProgramKind::kWhile;
  n->guard = guard;
  n->first = std::move(body);
  return HybridProgram(n);
}

HybridProgram HybridProgram::dwhile(const Assertion& guard, Ode ode) {
  if (!symbolic::is_open(guard)) {
    throw std::invalid_argument("dwhile guard must be open: " + symbolic::to_infix(guard));
  }
  std::set<Var> seen;
  for (const auto& [v, rhs] : ode) {
    if (!seen.insert(v).second) throw std::invalid_argument("dwhile repeats ODE variable '" + v.name() + "'");
  }
  auto n = std::make_shared<Node>();
  n->kind = ProgramKind::kDWhile;
  n->guard = guard;
  n->ode = std::move(ode);
  return HybridProgram(n);
}

ProgramKind HybridProgram::kind() const { return node_->kind; }
const Assertion& HybridProgram::guard() const { return node_->guard; }

const Var& HybridProgram::target() const {
  if (!node_->target) throw std::logic_error("target() on non-assignment");
  return *node_->target;
}

const Term& HybridProgram::value() const { return node_->value; }
const Ode& HybridProgram::ode() const { return node_->ode; }

const HybridProgram& HybridProgram::first() const {
  if (!node_->first) throw std::logic_error("program node has no first child");
  return *node_->first;
}

const HybridProgram& HybridProgram::second() const {
  if (!node_->second) throw std::logic_error("program node has no second child");
  return *node_->second;
}

std::set<Var> HybridProgram::variables() const {
  std::set<Var> out;
  auto add = [&](const std::set<Var>& vs) { out.insert(vs.begin(), vs.end()); };
  switch (kind()) {
    case ProgramKind::kSkip: break;
    case ProgramKind::kAssign:
      out.insert(target());
      add(value().variables());
      break;
    case ProgramKind::kDWhile:
      add(guard().free_variables());
      for (const auto& [v, rhs] : ode()) {
        out.insert(v);
        add(rhs.variables());
      }
      break;
    case ProgramKind::kSeq:
    case ProgramKind::kIf:
      if (kind() == ProgramKind::kIf) add(guard().free_variables());
      add(first().variables());
      add(second().variables());
      break;
    case ProgramKind::kWhile:
      add(guard().free_variables());
      add(first().variables());
      break;
  }
  return out;
}

std::string HybridProgram::to_string(int indent) const {
  std::string pad(static_cast<std::size_t>(indent), ' ');
  switch (kind()) {
    case ProgramKind::kSkip: return pad + "skip";
    case ProgramKind::kAssign: return pad + target().name() + " := " + symbolic::to_infix(value());
    case ProgramKind::kSeq: return first().to_string(indent) + ";\n" + second().to_string(indent);
    case ProgramKind::kIf:
      return pad + "if (" + symbolic::to_infix(guard()) + ") {\n" + first().to_string(indent + 2) + "\n" + pad +
             "} else {\n" + second().to_string(indent + 2) + "\n" + pad + "}";
    case ProgramKind::kWhile:
      return pad + "while (" + symbolic::to_infix(guard()) + ") {\n" + first().to_string(indent + 2) + "\n" + pad +
             "}";
    case ProgramKind::kDWhile: {
      std::string s = pad + "dwhile (" + symbolic::to_infix(guard()) + ") {";
      bool firstvar = true;
      for (const auto& [v, rhs] : ode()) {
        s += (firstvar ? " " : ", ") + v.name() + "' = " + symbolic::to_infix(rhs);
        firstvar = false;
      }
      return s + " }";
    }
  }
  return pad + "?";
}

void SimCfg::validate() const {
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  if (!(event_tol > 0) || !(event_tol < dt)) throw std::invalid_argument("event_tol must lie in (0, dt)");
  if (!(horizon >= 0)) throw std::invalid_argument("horizon must be nonnegative");
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::kConverged: return "converged";
    case Outcome::kTimeout: return "timeout";
    case Outcome::kStuck: return "stuck";
  }
  return "?";
}

std::string to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::kNotConverged: return "not-converged";
    case ViolationKind::kPostViolated: return "post-violated";
    case ViolationKind::kSafetyViolated: return "safety-violated";
  }
  return "?";
}

CompiledFlow::CompiledFlow(const Assertion& stay, const Ode& ode, const std::vector<Var>& layout)
    : stay_(stay, layout) {
  for (const auto& [v, rhs] : ode) rhs_.emplace_back(symbolic::layout_index(layout, v), CompiledTerm(rhs, layout));
}

void CompiledFlow::derivative(const std::vector<double>& y, std::vector<double>& out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& [i, f] : rhs_) out[i] = f(y);
}

std::vector<double> CompiledFlow::step(const std::vector<double>& y, double h) {
  std::vector<double> out;
  rk4(y, h, out);
  return out;
}

void CompiledFlow::rk4(const std::vector<double>& y, double h, std::vector<double>& out) {
  const std::size_t n = y.size();
  k1_.resize(n);
  k2_.resize(n);
  k3_.resize(n);
  k4_.resize(n);
  tmp_.resize(n);
  derivative(y, k1_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k1_[i];
  derivative(tmp_, k2_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k2_[i];
  derivative(tmp_, k3_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * k3_[i];
  derivative(tmp_, k4_);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = y[i] + h / 6.0 * (k1_[i] + 2 * k2_[i] + 2 * k3_[i] + k4_[i]);
}

bool CompiledFlow::advance(std::vector<double>& y, FlowClock& clock, const SimCfg& cfg,
                           const std::function<void()>& on_step) {
  for (;;) {
    if (!stay_(y)) return true;
    if (++clock.steps > cfg.max_steps) return false;
    if (clock.t > cfg.horizon) return false;
    rk4(y, cfg.dt, next_);
    if (stay_(next_)) {
      y.swap(next_);
      clock.t = clock.t0 + static_cast<double>(++clock.substeps) * cfg.dt;
      if (on_step) on_step();
      continue;
    }
    double lo = 0.0;
    double hi = cfg.dt;
    while (hi - lo > cfg.event_tol) {
      double mid = 0.5 * (lo + hi);
      rk4(y, mid, mid_);
      if (stay_(mid_)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    rk4(y, hi, next_);
    y.swap(next_);
    clock.t += hi;
    clock.t0 = clock.t;
    clock.substeps = 0;
    return true;
  }
}

namespace {

class TimeoutSignal {};

class Interpreter {
 public:
  Interpreter(const SimCfg& cfg, std::vector<Var> layout, std::vector<double> values,
              const std::function<void(const TracePoint&)>& observer, RunResult& result)
      : cfg_(cfg), layout_(std::move(layout)), y_(std::move(values)), observer_(observer), result_(result) {}

  void run(const HybridProgram& p) {
    emit();
    exec(p);
  }

  const std::vector<double>& values() const { return y_; }
  double time() const { return clock_.t; }

 private:
  void tick() {
    if (++clock_.steps > cfg_.max_steps) throw TimeoutSignal{};
  }

  Store store() const {
    Store s;
    for (std::size_t i = 0; i < layout_.size(); ++i) s.emplace(layout_[i], y_[i]);
    return s;
  }

  void emit() {
    if (!cfg_.record_trace && !observer_) return;
    TracePoint tp{clock_.t, store()};
    if (observer_) observer_(tp);
    if (cfg_.record_trace) result_.trace.push_back(std::move(tp));
  }

  const CompiledAssertion& guard_of(const HybridProgram& p) {
    auto key = static_cast<const void*>(&p.guard());
    auto it = guards_.find(key);
    if (it == guards_.end()) it = guards_.emplace(key, CompiledAssertion(p.guard(), layout_)).first;
    return it->second;
  }

  void exec(const HybridProgram& p) {
    tick();
    switch (p.kind()) {
      case ProgramKind::kSkip: return;
      case ProgramKind::kSeq:
        exec(p.first());
        exec(p.second());
        return;
      case ProgramKind::kAssign: {
        auto key = static_cast<const void*>(&p.value());
        auto it = terms_.find(key);
        if (it == terms_.end()) it = terms_.emplace(key, CompiledTerm(p.value(), layout_)).first;
        y_[symbolic::layout_index(layout_, p.target())] = it->second(y_);
        emit();
        return;
      }
      case ProgramKind::kIf:
        if (guard_of(p)(y_)) {
          exec(p.first());
        } else {
          exec(p.second());
        }
        return;
      case ProgramKind::kWhile:
        while (guard_of(p)(y_)) {
          exec(p.first());
          tick();
        }
        return;
      case ProgramKind::kDWhile: integrate(p); return;
    }
  }

  CompiledFlow& flow_of(const HybridProgram& p) {
    auto key = static_cast<const void*>(&p.ode());
    auto it = flows_.find(key);
    if (it == flows_.end()) it = flows_.emplace(key, CompiledFlow(p.guard(), p.ode(), layout_)).first;
    return it->second;
  }

  void integrate(const HybridProgram& p) {
    if (!flow_of(p).advance(y_, clock_, cfg_, [this] { emit(); })) throw TimeoutSignal{};
    result_.event_times.push_back(clock_.t);
    emit();
  }

  const SimCfg& cfg_;
  std::vector<Var> layout_;
  std::vector<double> y_;
  const std::function<void(const TracePoint&)>& observer_;
  RunResult& result_;
  FlowClock clock_;
  std::unordered_map<const void*, CompiledAssertion> guards_;
  std::unordered_map<const void*, CompiledTerm> terms_;
  std::unordered_map<const void*, CompiledFlow> flows_;
};

}  // namespace

RunResult run_program(const HybridProgram& p, const Store& rho0, const SimCfg& cfg,
                      const std::function<void(const TracePoint&)>& observer) {
  cfg.validate();
  std::vector<Var> layout;
  std::vector<double> values;
  for (const auto& [v, x] : rho0) {
    layout.push_back(v);
    values.push_back(x);
  }
  for (const auto& v : p.variables()) {
    if (!rho0.contains(v)) throw symbolic::MissingVariable(v);
  }

  RunResult result;
  Interpreter interp(cfg, layout, values, observer, result);
  try {
    interp.run(p);
    result.outcome = Outcome::kConverged;
  } catch (const TimeoutSignal&) {
    result.outcome = Outcome::kTimeout;
  }
  for (std::size_t i = 0; i < layout.size(); ++i) result.final_store[layout[i]] = interp.values()[i];
  result.time = interp.time();
  return result;
}

FalsifyVerdict falsify_quadruple(const HoareQuadruple& q, const Sampler& sampler, std::size_t n,
                                 const SimCfg& cfg) {
  FalsifyVerdict verdict;
  SimCfg run_cfg = cfg;
  run_cfg.record_trace = false;
  for (std::size_t i = 0; i < n; ++i) {
    Store rho = sampler(i);
    if (!symbolic::satisfies(rho, q.pre)) {
      ++verdict.samples_rejected;
      continue;
    }
    ++verdict.samples_run;
    std::optional<double> unsafe_at;
    auto observe = [&](const TracePoint& tp) {
      if (!unsafe_at && !symbolic::satisfies(tp.store, q.safety)) unsafe_at = tp.t;
    };
    RunResult r = run_program(q.prog, rho, run_cfg, observe);
    auto report = [&](ViolationKind k, double t) {
      verdict.counterexample_found = true;
      verdict.counterexample = rho;
      verdict.violation = k;
      verdict.violation_time = t;
    };
    if (unsafe_at) {
      report(ViolationKind::kSafetyViolated, *unsafe_at);
      return verdict;
    }
    if (r.outcome != Outcome::kConverged) {
      report(ViolationKind::kNotConverged, r.time);
      return verdict;
    }
    if (!symbolic::satisfies(r.final_store, q.post)) {
      report(ViolationKind::kPostViolated, r.time);
      return verdict;
    }
  }
  return verdict;
}

Sampler box_sampler(std::vector<std::pair<Var, std::pair<double, double>>> box, std::uint64_t seed) {
  return [box = std::move(box), seed](std::size_t index) {
    std::seed_seq seq{seed, static_cast<std::uint64_t>(index)};
    std::mt19937_64 rng(seq);
    Store s;
    for (const auto& [v, range] : box) {
      std::uniform_real_distribution<double> d(range.first, range.second);
      s[v] = d(rng);
    }
    return s;
  };
}

void write_trace_csv(std::ostream& os, const std::vector<TracePoint>& trace) {
  os << "t";
  if (!trace.empty()) {
    for (const auto& [v, x] : trace.front().store) os << ',' << v.name();
  }
  os << '\n';
  os.precision(17);
  for (const auto& tp : trace) {
    os << tp.t;
    for (const auto& [v, x] : tp.store) os << ',' << x;
    os << '\n';
  }
}

}  // namespace rssforge::program
