#include <cfenv>
#include <cmath>
#include <limits>

#include "rssforge/synthesis/synthesis.hpp"

namespace rssforge::synthesis {

using symbolic::AssertionKind;
using symbolic::Rational;
using symbolic::Relation;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double down(double x) { return std::nextafter(x, -kInf); }
double up(double x) { return std::nextafter(x, kInf); }

// Closed interval of reals. Every operation rounds to nearest and then widens
// by one ulp each way, which encloses the exact result.
struct Interval {
  double lo;
  double hi;

  static Interval of(const Rational& r) {
    double d = symbolic::to_double(r);
    if (Rational(d) == r) return {d, d};
    return {down(d), up(d)};
  }
  bool contains_zero() const { return lo <= 0.0 && hi >= 0.0; }
};

Interval operator+(Interval a, Interval b) {
  if (a.lo == a.hi && b.lo == b.hi && Rational(a.lo) + Rational(b.lo) == Rational(a.lo + b.lo)) {
    return {a.lo + b.lo, a.lo + b.lo};
  }
  return {down(a.lo + b.lo), up(a.hi + b.hi)};
}
Interval operator-(Interval a) { return {-a.hi, -a.lo}; }
Interval operator*(Interval a, Interval b) {
  double c[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  double lo = c[0];
  double hi = c[0];
  for (double x : c) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (a.lo == a.hi && b.lo == b.hi && Rational(a.lo) * Rational(b.lo) == Rational(lo)) return {lo, lo};
  return {down(lo), up(hi)};
}
Interval operator/(Interval a, Interval b) {
  // Caller guarantees 0 is not in b.
  double c[] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
  double lo = c[0];
  double hi = c[0];
  for (double x : c) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return {down(lo), up(hi)};
}
Interval power(Interval a, unsigned e) {
  Interval r{1.0, 1.0};
  for (unsigned i = 0; i < e; ++i) r = r * a;
  if (e % 2 == 0 && r.lo < 0) r.lo = 0;  // even powers are non-negative
  return r;
}
Interval root(Interval a) { return {a.lo <= 0 ? 0.0 : down(std::sqrt(a.lo)), up(std::sqrt(a.hi))}; }

enum class Tri { kFalse, kTrue, kUnknown };

Tri tri_not(Tri t) {
  if (t == Tri::kUnknown) return t;
  return t == Tri::kTrue ? Tri::kFalse : Tri::kTrue;
}

using Env = std::map<Var, Interval>;

std::optional<Interval> eval_term(const Term& t, const Env& env) {
  Interval sum{0.0, 0.0};
  for (const auto& [m, c] : t.monomials()) {
    Interval prod = Interval::of(c);
    for (const auto& [v, e] : m.factors()) {
      auto it = env.find(v);
      if (it == env.end()) return std::nullopt;
      prod = prod * power(it->second, e);
    }
    sum = sum + prod;
  }
  return sum;
}

Tri eval_atom(const Assertion& a, const Env& env) {
  auto iv = eval_term(a.term(), env);
  if (!iv) return Tri::kUnknown;
  switch (a.relation()) {
    case Relation::kLt:
      if (iv->hi < 0) return Tri::kTrue;
      if (iv->lo >= 0) return Tri::kFalse;
      return Tri::kUnknown;
    case Relation::kLe:
      if (iv->hi <= 0) return Tri::kTrue;
      if (iv->lo > 0) return Tri::kFalse;
      return Tri::kUnknown;
    case Relation::kEq:
      if (!iv->contains_zero()) return Tri::kFalse;
      if (iv->lo == 0 && iv->hi == 0) return Tri::kTrue;
      return Tri::kUnknown;
    case Relation::kNe:
      if (!iv->contains_zero()) return Tri::kTrue;
      if (iv->lo == 0 && iv->hi == 0) return Tri::kFalse;
      return Tri::kUnknown;
  }
  return Tri::kUnknown;
}

// `zero` is a term known to vanish, the equation being solved for a bound variable.
Tri eval(const Assertion& a, Env& env, const Term* zero);

Tri eval_exists(const Assertion& a, Env& env) {
  const Var& T = a.bound();
  const Assertion& body = a.children().front();
  std::vector<Assertion> parts = body.kind() == AssertionKind::kAnd ? body.children() : std::vector<Assertion>{body};
  for (const auto& c : parts) {
    if (c.kind() != AssertionKind::kAtom || c.relation() != Relation::kEq) continue;
    const Term& q = c.term();
    unsigned d = q.degree_in(T);
    if (d == 0 || d > 2) continue;
    auto a0 = eval_term(q.coefficient(T, 0), env);
    auto a1 = eval_term(q.coefficient(T, 1), env);
    auto a2 = eval_term(q.coefficient(T, 2), env);
    if (!a0 || !a1 || !a2) return Tri::kUnknown;
    // The equation holds at each real root; the body decides among them.
    std::vector<Interval> roots;
    if (d == 1) {
      if (a1->contains_zero()) return Tri::kUnknown;
      roots.push_back(-*a0 / *a1);
    } else {
      if (a2->contains_zero()) return Tri::kUnknown;
      Interval disc = *a1 * *a1 + -(Interval{4.0, 4.0} * *a2 * *a0);
      if (disc.hi < 0) return Tri::kFalse;
      if (disc.lo < 0) return Tri::kUnknown;
      Interval s = root(disc);
      Interval two_a2 = Interval{2.0, 2.0} * *a2;
      roots.push_back((-*a1 + -s) / two_a2);
      roots.push_back((-*a1 + s) / two_a2);
    }
    auto saved = env.find(T);
    std::optional<Interval> shadowed;
    if (saved != env.end()) shadowed = saved->second;
    Tri result = Tri::kFalse;
    for (const auto& r : roots) {
      env.insert_or_assign(T, r);
      Tri t = eval(body, env, &q);
      if (t == Tri::kTrue) {
        result = t;
        break;
      }
      if (t == Tri::kUnknown) result = t;
    }
    env.erase(T);
    if (shadowed) env.emplace(T, *shadowed);
    return result;
  }
  return Tri::kUnknown;
}

Tri sign_atom(Relation r, int sign) {
  switch (r) {
    case Relation::kLt: return sign < 0 ? Tri::kTrue : Tri::kFalse;
    case Relation::kLe: return sign <= 0 ? Tri::kTrue : Tri::kFalse;
    case Relation::kEq: return sign == 0 ? Tri::kTrue : Tri::kFalse;
    case Relation::kNe: return sign != 0 ? Tri::kTrue : Tri::kFalse;
  }
  return Tri::kUnknown;
}

Tri eval(const Assertion& a, Env& env, const Term* zero) {
  switch (a.kind()) {
    case AssertionKind::kTrue: return Tri::kTrue;
    case AssertionKind::kFalse: return Tri::kFalse;
    case AssertionKind::kAtom:
      if (zero && (a.term() == *zero || a.term() == -*zero)) return sign_atom(a.relation(), 0);
      return eval_atom(a, env);
    case AssertionKind::kAnd: {
      Tri r = Tri::kTrue;
      for (const auto& c : a.children()) {
        Tri t = eval(c, env, zero);
        if (t == Tri::kFalse) return t;
        if (t == Tri::kUnknown) r = t;
      }
      return r;
    }
    case AssertionKind::kOr: {
      Tri r = Tri::kFalse;
      for (const auto& c : a.children()) {
        Tri t = eval(c, env, zero);
        if (t == Tri::kTrue) return t;
        if (t == Tri::kUnknown) r = t;
      }
      return r;
    }
    case AssertionKind::kNot: return tri_not(eval(a.children().front(), env, zero));
    case AssertionKind::kImplies: {
      Tri lhs = eval(a.children()[0], env, zero);
      if (lhs == Tri::kFalse) return Tri::kTrue;
      Tri rhs = eval(a.children()[1], env, zero);
      if (rhs == Tri::kTrue) return rhs;
      return lhs == Tri::kTrue ? rhs : Tri::kUnknown;
    }
    case AssertionKind::kExists: return eval_exists(a, env);
    case AssertionKind::kForall: return Tri::kUnknown;
  }
  return Tri::kUnknown;
}

}  // namespace

std::optional<bool> decide_by_intervals(const Assertion& sentence) {
  if (std::fegetround() != FE_TONEAREST) return std::nullopt;
  Env env;
  Tri t = eval(sentence, env, nullptr);
  if (t == Tri::kUnknown) return std::nullopt;
  return t == Tri::kTrue;
}

}  // namespace rssforge::synthesis
