#include "rssforge/symbolic/assertion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace rssforge::symbolic {

struct Assertion::Node {
  AssertionKind kind = AssertionKind::kTrue;
  Term term;
  Relation rel = Relation::kEq;
  std::vector<Assertion> children;
  std::optional<Var> bound;
  std::size_t hash = 0;
};

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t hash_term(const Term& t) {
  std::size_t h = 0x12345;
  for (const auto& [m, c] : t.monomials()) {
    for (const auto& [v, e] : m.factors()) {
      h = mix(h, std::hash<std::string>{}(v.name()));
      h = mix(h, e);
    }
    h = mix(h, std::hash<std::string>{}(c.get_str()));
  }
  return h;
}

// Scales p by a positive rational so that its coefficients are coprime
// integers. For symmetric relations the sign is fixed too.
Term normalize(const Term& p, bool fix_sign) {
  mpz_class g = 0;
  mpz_class l = 1;
  for (const auto& [m, c] : p.monomials()) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num_mpz_t());
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
  }
  Rational scale(l, g);
  scale.canonicalize();
  if (fix_sign && p.monomials().rbegin()->second < 0) scale = -scale;
  Term out = p;
  out *= scale;
  return out;
}

bool holds(const Rational& c, Relation rel) {
  switch (rel) {
    case Relation::kEq: return c == 0;
    case Relation::kLe: return c <= 0;
    case Relation::kLt: return c < 0;
    case Relation::kNe: return c != 0;
  }
  return false;
}

template <typename Value>
bool holds_value(Value c, Relation rel) {
  switch (rel) {
    case Relation::kEq: return c == 0;
    case Relation::kLe: return c <= 0;
    case Relation::kLt: return c < 0;
    case Relation::kNe: return c != 0;
  }
  return false;
}

}  // namespace

std::string to_string(Relation r) {
  switch (r) {
    case Relation::kEq: return "=";
    case Relation::kLe: return "<=";
    case Relation::kLt: return "<";
    case Relation::kNe: return "!=";
  }
  return "?";
}

std::string to_string(Topology t) {
  switch (t) {
    case Topology::kOpen: return "open";
    case Topology::kClosed: return "closed";
    case Topology::kBoth: return "both";
    case Topology::kNeither: return "neither";
  }
  return "?";
}

Assertion::Assertion() : Assertion(top()) {}

Assertion Assertion::top() {
  static const auto node = [] {
    auto n = std::make_shared<Node>();
    n->kind = AssertionKind::kTrue;
    n->hash = 1;
    return n;
  }();
  return Assertion(node);
}

Assertion Assertion::bottom() {
  static const auto node = [] {
    auto n = std::make_shared<Node>();
    n->kind = AssertionKind::kFalse;
    n->hash = 2;
    return n;
  }();
  return Assertion(node);
}

Assertion Assertion::atom(const Term& p, Relation rel) {
  if (auto c = p.constant_value()) return holds(*c, rel) ? top() : bottom();
  auto n = std::make_shared<Node>();
  n->kind = AssertionKind::kAtom;
  n->rel = rel;
  n->term = normalize(p, rel == Relation::kEq || rel == Relation::kNe);
  n->hash = mix(mix(3, static_cast<std::size_t>(rel)), hash_term(n->term));
  return Assertion(n);
}

Assertion Assertion::make(AssertionKind k, std::vector<Assertion> children) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  std::size_t h = mix(17, static_cast<std::size_t>(k));
  for (const auto& c : children) h = mix(h, c.node_->hash);
  n->hash = h;
  n->children = std::move(children);
  return Assertion(n);
}

Assertion Assertion::conj(std::vector<Assertion> parts) {
  std::vector<Assertion> flat;
  for (auto& p : parts) {
    if (p.is_false()) return bottom();
    if (p.is_true()) continue;
    if (p.kind() == AssertionKind::kAnd) {
      for (const auto& c : p.children()) {
        if (std::find(flat.begin(), flat.end(), c) == flat.end()) flat.push_back(c);
      }
    } else if (std::find(flat.begin(), flat.end(), p) == flat.end()) {
      flat.push_back(std::move(p));
    }
  }
  if (flat.empty()) return top();
  if (flat.size() == 1) return flat.front();
  return make(AssertionKind::kAnd, std::move(flat));
}

Assertion Assertion::disj(std::vector<Assertion> parts) {
  std::vector<Assertion> flat;
  for (auto& p : parts) {
    if (p.is_true()) return top();
    if (p.is_false()) continue;
    if (p.kind() == AssertionKind::kOr) {
      for (const auto& c : p.children()) {
        if (std::find(flat.begin(), flat.end(), c) == flat.end()) flat.push_back(c);
      }
    } else if (std::find(flat.begin(), flat.end(), p) == flat.end()) {
      flat.push_back(std::move(p));
    }
  }
  if (flat.empty()) return bottom();
  if (flat.size() == 1) return flat.front();
  return make(AssertionKind::kOr, std::move(flat));
}

Assertion Assertion::negate(const Assertion& a) {
  switch (a.kind()) {
    case AssertionKind::kTrue: return bottom();
    case AssertionKind::kFalse: return top();
    case AssertionKind::kAtom:
      switch (a.relation()) {
        case Relation::kEq: return atom(a.term(), Relation::kNe);
        case Relation::kNe: return atom(a.term(), Relation::kEq);
        case Relation::kLe: return atom(-a.term(), Relation::kLt);
        case Relation::kLt: return atom(-a.term(), Relation::kLe);
      }
      break;
    case AssertionKind::kAnd:
    case AssertionKind::kOr: {
      std::vector<Assertion> parts;
      parts.reserve(a.children().size());
      for (const auto& c : a.children()) parts.push_back(negate(c));
      return a.kind() == AssertionKind::kAnd ? disj(std::move(parts)) : conj(std::move(parts));
    }
    case AssertionKind::kNot: return a.children().front();
    case AssertionKind::kImplies: return conj({a.children()[0], negate(a.children()[1])});
    case AssertionKind::kExists: return forall(a.bound(), negate(a.children().front()));
    case AssertionKind::kForall: return exists(a.bound(), negate(a.children().front()));
  }
  throw std::logic_error("unreachable assertion kind");
}

Assertion Assertion::implies(const Assertion& a, const Assertion& b) {
  if (a.is_false() || b.is_true()) return top();
  if (a.is_true()) return b;
  if (b.is_false()) return negate(a);
  return make(AssertionKind::kImplies, {a, b});
}

Assertion Assertion::exists(const Var& v, const Assertion& body) {
  if (body.is_true() || body.is_false()) return body;
  if (!body.free_variables().contains(v)) return body;
  Assertion q = make(AssertionKind::kExists, {body});
  auto n = std::const_pointer_cast<Node>(q.node_);
  n->bound = v;
  n->hash = mix(n->hash, std::hash<std::string>{}(v.name()));
  return q;
}

Assertion Assertion::forall(const Var& v, const Assertion& body) {
  if (body.is_true() || body.is_false()) return body;
  if (!body.free_variables().contains(v)) return body;
  Assertion q = make(AssertionKind::kForall, {body});
  auto n = std::const_pointer_cast<Node>(q.node_);
  n->bound = v;
  n->hash = mix(n->hash, std::hash<std::string>{}(v.name()));
  return q;
}

AssertionKind Assertion::kind() const { return node_->kind; }

const Term& Assertion::term() const {
  if (node_->kind != AssertionKind::kAtom) throw std::logic_error("term() on non-atom assertion");
  return node_->term;
}

Relation Assertion::relation() const {
  if (node_->kind != AssertionKind::kAtom) throw std::logic_error("relation() on non-atom assertion");
  return node_->rel;
}

const std::vector<Assertion>& Assertion::children() const { return node_->children; }

const Var& Assertion::bound() const {
  if (!node_->bound) throw std::logic_error("bound() on non-quantifier assertion");
  return *node_->bound;
}

bool Assertion::is_quantifier_free() const {
  if (kind() == AssertionKind::kExists || kind() == AssertionKind::kForall) return false;
  return std::all_of(children().begin(), children().end(),
                     [](const Assertion& c) { return c.is_quantifier_free(); });
}

std::set<Var> Assertion::free_variables() const {
  std::set<Var> out;
  switch (kind()) {
    case AssertionKind::kTrue:
    case AssertionKind::kFalse: break;
    case AssertionKind::kAtom: out = term().variables(); break;
    case AssertionKind::kExists:
    case AssertionKind::kForall:
      out = children().front().free_variables();
      out.erase(bound());
      break;
    default:
      for (const auto& c : children()) {
        auto vs = c.free_variables();
        out.insert(vs.begin(), vs.end());
      }
  }
  return out;
}

std::size_t Assertion::size() const {
  std::size_t n = 1;
  for (const auto& c : children()) n += c.size();
  return n;
}

bool operator==(const Assertion& a, const Assertion& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.hash != y.hash || x.kind != y.kind) return false;
  if (x.kind == AssertionKind::kAtom) return x.rel == y.rel && x.term == y.term;
  if (x.bound != y.bound) return false;
  return x.children == y.children;
}

Store Substitution::execute(Store store) const {
  for (const auto& [v, t] : assignments_) store[v] = t.evaluate(store);
  return store;
}

double eval_term(const Term& t, const Store& store) { return t.evaluate(store); }

namespace {

template <typename S>
bool satisfies_impl(const S& store, const Assertion& a) {
  switch (a.kind()) {
    case AssertionKind::kTrue: return true;
    case AssertionKind::kFalse: return false;
    case AssertionKind::kAtom: return holds_value(a.term().evaluate(store), a.relation());
    case AssertionKind::kAnd:
      return std::all_of(a.children().begin(), a.children().end(),
                         [&](const Assertion& c) { return satisfies_impl(store, c); });
    case AssertionKind::kOr:
      return std::any_of(a.children().begin(), a.children().end(),
                         [&](const Assertion& c) { return satisfies_impl(store, c); });
    case AssertionKind::kNot: return !satisfies_impl(store, a.children().front());
    case AssertionKind::kImplies:
      return !satisfies_impl(store, a.children()[0]) || satisfies_impl(store, a.children()[1]);
    case AssertionKind::kExists:
    case AssertionKind::kForall:
      throw QuantifiedAssertion("concrete satisfaction is undefined for quantified assertions");
  }
  return false;
}

double magnitude(const Term& t, const Store& store) {
  double m = 0.0;
  for (const auto& [mono, c] : t.monomials()) m += std::fabs(Term(mono, c).evaluate(store));
  return m;
}

}  // namespace

bool satisfies(const Store& store, const Assertion& a) { return satisfies_impl(store, a); }
bool satisfies(const ExactStore& store, const Assertion& a) { return satisfies_impl(store, a); }

bool satisfies_within(const Store& store, const Assertion& a, double tol) {
  switch (a.kind()) {
    case AssertionKind::kAtom: {
      double p = a.term().evaluate(store);
      double slack = tol * std::max(1.0, magnitude(a.term(), store));
      switch (a.relation()) {
        case Relation::kEq: return std::fabs(p) <= slack;
        case Relation::kLe:
        case Relation::kLt: return p <= slack;
        case Relation::kNe: return p != 0.0;
      }
      return false;
    }
    case AssertionKind::kAnd:
      return std::all_of(a.children().begin(), a.children().end(),
                         [&](const Assertion& c) { return satisfies_within(store, c, tol); });
    case AssertionKind::kOr:
      return std::any_of(a.children().begin(), a.children().end(),
                         [&](const Assertion& c) { return satisfies_within(store, c, tol); });
    case AssertionKind::kNot:
      return satisfies_within(store, Assertion::negate(a.children().front()), tol);
    case AssertionKind::kImplies:
      return satisfies_within(store, Assertion::negate(a.children()[0]), tol) ||
             satisfies_within(store, a.children()[1], tol);
    default: return satisfies(store, a);
  }
}

Topology classify_topology(const Assertion& a) {
  auto pack = [](bool open, bool closed) {
    if (open && closed) return Topology::kBoth;
    if (open) return Topology::kOpen;
    if (closed) return Topology::kClosed;
    return Topology::kNeither;
  };
  auto is_o = [](Topology t) { return t == Topology::kOpen || t == Topology::kBoth; };
  auto is_c = [](Topology t) { return t == Topology::kClosed || t == Topology::kBoth; };

  switch (a.kind()) {
    case AssertionKind::kTrue:
    case AssertionKind::kFalse: return Topology::kBoth;
    case AssertionKind::kAtom:
      return a.relation() == Relation::kLt || a.relation() == Relation::kNe ? Topology::kOpen
                                                                            : Topology::kClosed;
    case AssertionKind::kAnd:
    case AssertionKind::kOr: {
      bool open = true;
      bool closed = true;
      for (const auto& c : a.children()) {
        Topology t = classify_topology(c);
        open = open && is_o(t);
        closed = closed && is_c(t);
      }
      return pack(open, closed);
    }
    case AssertionKind::kNot: {
      Topology t = classify_topology(a.children().front());
      return pack(is_c(t), is_o(t));
    }
    case AssertionKind::kImplies: {
      Topology l = classify_topology(a.children()[0]);
      Topology r = classify_topology(a.children()[1]);
      return pack(is_c(l) && is_o(r), is_o(l) && is_c(r));
    }
    case AssertionKind::kExists:
    case AssertionKind::kForall:
      throw QuantifiedAssertion("topology classification requires a quantifier-free assertion");
  }
  return Topology::kNeither;
}

bool is_open(const Assertion& a) {
  Topology t = classify_topology(a);
  return t == Topology::kOpen || t == Topology::kBoth;
}

bool is_closed(const Assertion& a) {
  Topology t = classify_topology(a);
  return t == Topology::kClosed || t == Topology::kBoth;
}

namespace {

// Composes the assignment list into one simultaneous map: after processing
// x_i := a_i, each entry holds the value of its variable in terms of the
// initial store.
std::map<Var, Term> compose(const Substitution& sigma) {
  std::map<Var, Term> m;
  for (const auto& [v, t] : sigma.assignments()) {
    Term value = m.empty() ? t : t.substitute(m);
    m.insert_or_assign(v, std::move(value));
  }
  for (auto it = m.begin(); it != m.end();) {
    if (it->second == Term(it->first)) {
      it = m.erase(it);
    } else {
      ++it;
    }
  }
  return m;
}

Assertion subst_impl(const Assertion& a, const std::map<Var, Term>& r,
                     const std::set<Var>& replacement_vars) {
  switch (a.kind()) {
    case AssertionKind::kTrue:
    case AssertionKind::kFalse: return a;
    case AssertionKind::kAtom: {
      bool touched = std::any_of(r.begin(), r.end(), [&](const auto& kv) { return a.term().contains(kv.first); });
      if (!touched) return a;
      return Assertion::atom(a.term().substitute(r), a.relation());
    }
    case AssertionKind::kAnd:
    case AssertionKind::kOr: {
      std::vector<Assertion> parts;
      parts.reserve(a.children().size());
      bool changed = false;
      for (const auto& c : a.children()) {
        parts.push_back(subst_impl(c, r, replacement_vars));
        changed = changed || parts.back().id() != c.id();
      }
      if (!changed) return a;
      return a.kind() == AssertionKind::kAnd ? Assertion::conj(std::move(parts))
                                             : Assertion::disj(std::move(parts));
    }
    case AssertionKind::kNot: return Assertion::negate(subst_impl(a.children().front(), r, replacement_vars));
    case AssertionKind::kImplies:
      return Assertion::implies(subst_impl(a.children()[0], r, replacement_vars),
                                subst_impl(a.children()[1], r, replacement_vars));
    case AssertionKind::kExists:
    case AssertionKind::kForall: {
      const Var& b = a.bound();
      if (replacement_vars.contains(b)) {
        throw std::logic_error("substitution would capture bound variable '" + b.name() + "'");
      }
      Assertion body = a.children().front();
      Assertion nb;
      if (r.contains(b)) {
        auto inner = r;
        inner.erase(b);
        nb = subst_impl(body, inner, replacement_vars);
      } else {
        nb = subst_impl(body, r, replacement_vars);
      }
      if (nb.id() == body.id()) return a;
      return a.kind() == AssertionKind::kExists ? Assertion::exists(b, nb) : Assertion::forall(b, nb);
    }
  }
  return a;
}

}  // namespace

Assertion substitute(const Assertion& a, const std::map<Var, Term>& replacements) {
  if (replacements.empty()) return a;
  std::set<Var> rv;
  for (const auto& [v, t] : replacements) {
    auto vs = t.variables();
    rv.insert(vs.begin(), vs.end());
  }
  return subst_impl(a, replacements, rv);
}

Assertion substitute(const Assertion& a, const Substitution& sigma) {
  return substitute(a, compose(sigma));
}

Term substitute(const Term& t, const Substitution& sigma) {
  auto m = compose(sigma);
  return m.empty() ? t : t.substitute(m);
}

Assertion desugar_implications(const Assertion& a) {
  switch (a.kind()) {
    case AssertionKind::kTrue:
    case AssertionKind::kFalse:
    case AssertionKind::kAtom: return a;
    case AssertionKind::kAnd:
    case AssertionKind::kOr: {
      std::vector<Assertion> parts;
      for (const auto& c : a.children()) parts.push_back(desugar_implications(c));
      return a.kind() == AssertionKind::kAnd ? Assertion::conj(std::move(parts))
                                             : Assertion::disj(std::move(parts));
    }
    case AssertionKind::kNot: return Assertion::negate(desugar_implications(a.children().front()));
    case AssertionKind::kImplies:
      return Assertion::disj({Assertion::negate(desugar_implications(a.children()[0])),
                              desugar_implications(a.children()[1])});
    case AssertionKind::kExists:
      return Assertion::exists(a.bound(), desugar_implications(a.children().front()));
    case AssertionKind::kForall:
      return Assertion::forall(a.bound(), desugar_implications(a.children().front()));
  }
  return a;
}

Var FreshNames::next(const std::string& stem) {
  for (;;) {
    unsigned k = ++counters_[stem];
    std::string name = "_" + stem + std::to_string(k);
    if (reserved_.insert(name).second) return Var(name);
  }
}

}  // namespace rssforge::symbolic
