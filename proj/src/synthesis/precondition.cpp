#include <deque>

#include "rssforge/synthesis/synthesis.hpp"

namespace rssforge::synthesis {

using symbolic::AssertionKind;
using symbolic::Rational;
using symbolic::Relation;

std::map<Var, Term> FlowSolution::state_at(const Term& tau) const {
  std::map<Var, Term> out;
  for (const auto& [v, s] : at) {
    Term value = s.substitute(time, tau);
    if (value != Term(v)) out.emplace(v, std::move(value));
  }
  return out;
}

FlowSolution solve_flow(const program::Ode& ode, const std::set<Var>& frame, const Var& time) {
  FlowSolution sol;
  sol.time = time;
  std::map<Var, Term> rhs;
  for (const auto& [v, f] : ode) {
    if (!rhs.emplace(v, f).second) throw UnsolvableFlow("flow defines " + v.name() + " twice");
    if (f.contains(time)) throw UnsolvableFlow("flow mentions the time symbol " + time.name());
  }
  for (const auto& v : frame) {
    if (v == time) throw UnsolvableFlow("time symbol " + time.name() + " is a model variable");
    if (!rhs.contains(v)) sol.at.emplace(v, Term(v));
  }
  // Kahn over "v depends on w": solve w before v.
  std::map<Var, std::size_t> pending;
  std::map<Var, std::vector<Var>> users;
  for (const auto& [v, f] : rhs) {
    std::size_t n = 0;
    for (const auto& w : f.variables()) {
      if (w == v) throw UnsolvableFlow("flow of " + v.name() + " depends on itself");
      if (rhs.contains(w)) {
        ++n;
        users[w].push_back(v);
      } else if (!sol.at.contains(w)) {
        sol.at.emplace(w, Term(w));
      }
    }
    pending[v] = n;
  }
  std::deque<Var> ready;
  for (const auto& [v, n] : pending) {
    if (n == 0) ready.push_back(v);
  }
  std::size_t solved = 0;
  while (!ready.empty()) {
    Var v = ready.front();
    ready.pop_front();
    Term along = rhs.at(v).substitute(sol.at);
    sol.at.insert_or_assign(v, Term(v) + along.antiderivative(time));
    ++solved;
    for (const auto& u : users[v]) {
      if (--pending[u] == 0) ready.push_back(u);
    }
  }
  if (solved != rhs.size()) throw UnsolvableFlow("flow has a cyclic dependency and no polynomial closed form");
  return sol;
}

bool verify_flow_solution(const FlowSolution& sol, const program::Ode& ode) {
  for (const auto& [v, s] : sol.at) {
    if (s.substitute(sol.time, Term(0)) != Term(v)) return false;
  }
  std::map<Var, Term> rhs(ode.begin(), ode.end());
  for (const auto& [v, s] : sol.at) {
    auto it = rhs.find(v);
    Term expected = it == rhs.end() ? Term(0) : it->second.substitute(sol.at);
    if (s.derivative(sol.time) != expected) return false;
  }
  return true;
}

namespace {

std::vector<Assertion> conjuncts(const Assertion& a) {
  if (a.kind() == AssertionKind::kAnd) return a.children();
  return {a};
}

// ∀u ∈ [0, hi]. q(u) < 0 (strict) or ≤ 0 for q = a2 u² + a1 u + a0.
Assertion below_on_interval(const Term& q, const Var& u, const Term& hi, bool strict) {
  Relation rel = strict ? Relation::kLt : Relation::kLe;
  Term a0 = q.coefficient(u, 0);
  Term a1 = q.coefficient(u, 1);
  Term a2 = q.coefficient(u, 2);
  Assertion at_zero = Assertion::atom(a0, rel);
  Assertion at_hi = Assertion::atom(q.substitute(u, hi), rel);
  // A concave q peaks inside the interval when the vertex -a1/(2 a2) lies in it.
  Assertion interior_peak = Assertion::conj({
      Assertion::lt(a2, 0),
      Assertion::ge(a1, 0),
      Assertion::le(a1 + Term(2) * a2 * hi, 0),
      Assertion::atom(Term(4) * a2 * a0 - a1 * a1, strict ? Relation::kLe : Relation::kLt),
  });
  return Assertion::conj({at_zero, at_hi, Assertion::negate(interior_peak)});
}

std::optional<Assertion> reduce_atom(const Assertion& atom, const Var& u, const Term& hi) {
  const Term& q = atom.term();
  unsigned d = q.degree_in(u);
  if (d == 0) return atom;
  if (d > 2) return std::nullopt;
  switch (atom.relation()) {
    case Relation::kLt: return below_on_interval(q, u, hi, true);
    case Relation::kLe: return below_on_interval(q, u, hi, false);
    case Relation::kNe:
      // A continuous function without roots on the interval keeps its sign.
      return Assertion::disj({below_on_interval(q, u, hi, true), below_on_interval(-q, u, hi, true)});
    case Relation::kEq:
      return Assertion::conj({Assertion::eq(q.coefficient(u, 0), 0),
                              Assertion::disj({Assertion::eq(hi, 0), Assertion::conj({Assertion::eq(q.coefficient(u, 1), 0),
                                                                                      Assertion::eq(q.coefficient(u, 2), 0)})})});
  }
  return std::nullopt;
}

}  // namespace

Assertion forall_interval(const Var& u, const Term& hi, const Assertion& body) {
  if (!body.free_variables().contains(u)) return body;
  if (hi.is_zero()) return symbolic::substitute(body, std::map<Var, Term>{{u, Term(0)}});
  std::vector<Assertion> reduced;
  std::vector<Assertion> residual;
  for (const auto& c : conjuncts(body)) {
    std::optional<Assertion> r;
    if (c.kind() == AssertionKind::kAtom) r = reduce_atom(c, u, hi);
    if (!c.free_variables().contains(u)) r = c;
    if (r) {
      reduced.push_back(*r);
    } else {
      residual.push_back(c);
    }
  }
  if (!residual.empty()) {
    Assertion range = Assertion::conj({Assertion::ge(Term(u), 0), Assertion::le(Term(u), hi)});
    reduced.push_back(Assertion::forall(u, Assertion::implies(range, Assertion::conj(residual))));
  }
  return Assertion::conj(reduced);
}

namespace {

struct Pieces {
  Assertion guard(const Term& tau) const { return symbolic::substitute(guard_, sol.state_at(tau)); }
  // target(sol(tau)) ∧ ∀u ∈ [0, tau]. S(sol(u)) ∧ ⋀ ¬A_j(sol(u))
  Assertion rest(const Term& tau) const {
    return Assertion::conj({symbolic::substitute(target, sol.state_at(tau)), forall_interval(probe, tau, throughout)});
  }

  const Assertion& guard_;
  const Assertion& target;
  const FlowSolution& sol;
  Var probe;
  Assertion throughout;
};

Pieces make_pieces(const Assertion& guard, const std::vector<Assertion>& siblings, const Assertion& target,
                   const Assertion& safety, const FlowSolution& sol, const EdgeNames& names) {
  std::vector<Assertion> parts{safety};
  for (const auto& s : siblings) parts.push_back(Assertion::negate(s));
  Assertion throughout = symbolic::substitute(Assertion::conj(parts), sol.state_at(Term(names.probe)));
  return Pieces{guard, target, sol, names.probe, throughout};
}

}  // namespace

Assertion edge_precondition_raw(const Assertion& guard, const std::vector<Assertion>& siblings,
                                const Assertion& target, const Assertion& safety, const FlowSolution& sol,
                                const EdgeNames& names) {
  const Var& T = names.exit_time;
  const Var& u = names.probe;
  std::vector<Assertion> parts{safety};
  for (const auto& s : siblings) parts.push_back(Assertion::negate(s));
  auto at_u = sol.state_at(Term(u));
  auto at_T = sol.state_at(Term(T));
  Assertion before_exit = Assertion::conj({Assertion::ge(Term(u), 0), Assertion::lt(Term(u), Term(T))});
  Assertion up_to_exit = Assertion::conj({Assertion::ge(Term(u), 0), Assertion::le(Term(u), Term(T))});
  return Assertion::exists(
      T, Assertion::conj({
             Assertion::ge(Term(T), 0),
             symbolic::substitute(guard, at_T),
             Assertion::forall(u, Assertion::implies(before_exit, Assertion::negate(symbolic::substitute(guard, at_u)))),
             symbolic::substitute(target, at_T),
             Assertion::forall(u, Assertion::implies(up_to_exit, symbolic::substitute(Assertion::conj(parts), at_u))),
         }));
}

Assertion edge_precondition(const Assertion& guard, const std::vector<Assertion>& siblings, const Assertion& target,
                            const Assertion& safety, const FlowSolution& sol, const EdgeNames& names) {
  if (guard.is_false()) return Assertion::bottom();
  Pieces pc = make_pieces(guard, siblings, target, safety, sol, names);
  if (guard.is_true()) return pc.rest(Term(0));

  const Var& T = names.exit_time;
  if (guard.kind() == AssertionKind::kAtom && guard.relation() == Relation::kLe) {
    const Term& p = guard.term();
    Term q = p.substitute(sol.state_at(Term(T)));
    unsigned d = q.degree_in(T);
    Assertion now = Assertion::conj({guard, pc.rest(Term(0))});
    if (d == 0) return now;
    if (d <= 2) {
      Assertion later = Assertion::bottom();
      std::optional<Rational> rate = d == 1 ? q.coefficient(T, 1).constant_value() : std::nullopt;
      if (rate) {
        // Constant rate: the exit time is p / -rate once p > 0.
        if (*rate < 0) later = Assertion::conj({Assertion::gt(p, 0), pc.rest(p * Term(Rational(-1) / *rate))});
      } else {
        // T is the first root of q after 0: q(0) > 0, q(T) = 0 and q'(T) ≤ 0
        // characterise it for polynomials of degree at most two.
        later = Assertion::conj({
            Assertion::gt(p, 0),
            Assertion::exists(T, Assertion::conj({Assertion::gt(Term(T), 0), Assertion::eq(q, 0),
                                                  Assertion::le(q.derivative(T), 0), pc.rest(Term(T))})),
        });
      }
      return Assertion::disj({now, later});
    }
  }

  const Var& u = names.probe;
  Assertion before_exit = Assertion::conj({Assertion::ge(Term(u), 0), Assertion::lt(Term(u), Term(T))});
  return Assertion::exists(
      T, Assertion::conj({Assertion::ge(Term(T), 0), pc.guard(Term(T)),
                          Assertion::forall(u, Assertion::implies(before_exit, Assertion::negate(pc.guard(Term(u))))),
                          pc.rest(Term(T))}));
}

Assertion eliminate_linear_witnesses(const Assertion& a) {
  switch (a.kind()) {
    case AssertionKind::kTrue:
    case AssertionKind::kFalse:
    case AssertionKind::kAtom: return a;
    case AssertionKind::kAnd:
    case AssertionKind::kOr: {
      std::vector<Assertion> parts;
      bool changed = false;
      for (const auto& c : a.children()) {
        parts.push_back(eliminate_linear_witnesses(c));
        changed = changed || parts.back().id() != c.id();
      }
      if (!changed) return a;
      return a.kind() == AssertionKind::kAnd ? Assertion::conj(parts) : Assertion::disj(parts);
    }
    case AssertionKind::kNot: return Assertion::negate(eliminate_linear_witnesses(a.children().front()));
    case AssertionKind::kImplies:
      return Assertion::implies(eliminate_linear_witnesses(a.children()[0]),
                                eliminate_linear_witnesses(a.children()[1]));
    case AssertionKind::kForall: return Assertion::forall(a.bound(), eliminate_linear_witnesses(a.children().front()));
    case AssertionKind::kExists: {
      const Var& T = a.bound();
      Assertion body = eliminate_linear_witnesses(a.children().front());
      for (const auto& c : conjuncts(body)) {
        if (c.kind() != AssertionKind::kAtom || c.relation() != Relation::kEq) continue;
        if (c.term().degree_in(T) != 1) continue;
        auto k = c.term().coefficient(T, 1).constant_value();
        if (!k) continue;
        Term value = c.term().coefficient(T, 0) * Term(Rational(-1) / *k);
        return eliminate_linear_witnesses(symbolic::substitute(body, std::map<Var, Term>{{T, value}}));
      }
      return Assertion::exists(T, body);
    }
  }
  return a;
}

}  // namespace rssforge::synthesis
