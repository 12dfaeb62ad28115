#include "rssforge/synthesis/synthesis.hpp"

namespace rssforge::synthesis {

using symbolic::AssertionKind;
using symbolic::ExactStore;
using symbolic::Monomial;
using symbolic::Rational;
using symbolic::Relation;

namespace {

Term partial_value(const Term& t, const ExactStore& env) {
  Term out;
  for (const auto& [m, c] : t.monomials()) {
    Rational coeff = c;
    Monomial rest;
    for (const auto& [v, e] : m.factors()) {
      auto it = env.find(v);
      if (it == env.end()) {
        rest = rest * Monomial(v, e);
      } else {
        Rational p = 1;
        for (unsigned i = 0; i < e; ++i) p *= it->second;
        coeff *= p;
      }
    }
    out += Term(rest, coeff);
  }
  return out;
}

Assertion instantiate_in(const Assertion& a, ExactStore& env);

// Atoms first: they are cheap and usually decide the connective.
Assertion connective(const Assertion& a, ExactStore& env) {
  bool is_and = a.kind() == AssertionKind::kAnd;
  std::vector<Assertion> parts;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& c : a.children()) {
      if ((c.kind() == AssertionKind::kAtom) != (pass == 0)) continue;
      Assertion r = instantiate_in(c, env);
      if (is_and && r.is_false()) return r;
      if (!is_and && r.is_true()) return r;
      parts.push_back(std::move(r));
    }
  }
  return is_and ? Assertion::conj(parts) : Assertion::disj(parts);
}

Assertion instantiate_in(const Assertion& a, ExactStore& env) {
  switch (a.kind()) {
    case AssertionKind::kTrue:
    case AssertionKind::kFalse: return a;
    case AssertionKind::kAtom: return Assertion::atom(partial_value(a.term(), env), a.relation());
    case AssertionKind::kAnd:
    case AssertionKind::kOr: return connective(a, env);
    case AssertionKind::kNot: return Assertion::negate(instantiate_in(a.children().front(), env));
    case AssertionKind::kImplies: {
      Assertion lhs = instantiate_in(a.children()[0], env);
      if (lhs.is_false()) return Assertion::top();
      return Assertion::implies(lhs, instantiate_in(a.children()[1], env));
    }
    case AssertionKind::kForall:
    case AssertionKind::kExists: {
      const Var& T = a.bound();
      const Assertion& body = a.children().front();
      auto saved = env.find(T);
      std::optional<Rational> shadowed;
      if (saved != env.end()) {
        shadowed = saved->second;
        env.erase(saved);
      }
      auto restore = [&] {
        env.erase(T);
        if (shadowed) env[T] = *shadowed;
      };
      if (a.kind() == AssertionKind::kExists) {
        // A conjunct aT + c = 0 with a, c known fixes the witness.
        std::vector<Assertion> parts = body.kind() == AssertionKind::kAnd ? body.children() : std::vector<Assertion>{body};
        for (const auto& c : parts) {
          if (c.kind() != AssertionKind::kAtom || c.relation() != Relation::kEq || !c.term().contains(T)) continue;
          Term q = partial_value(c.term(), env);
          if (q.degree_in(T) != 1) continue;
          auto k = q.coefficient(T, 1).constant_value();
          auto c0 = q.coefficient(T, 0).constant_value();
          if (!k || !c0) continue;
          env[T] = -*c0 / *k;
          Assertion r = instantiate_in(body, env);
          restore();
          return r;
        }
      }
      Assertion r = instantiate_in(body, env);
      restore();
      return a.kind() == AssertionKind::kExists ? Assertion::exists(T, r) : Assertion::forall(T, r);
    }
  }
  return a;
}

}  // namespace

Assertion instantiate(const Assertion& a, const ExactStore& values) {
  ExactStore env = values;
  return instantiate_in(a, env);
}

}  // namespace rssforge::synthesis
