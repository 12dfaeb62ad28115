#pragma once

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rssforge/symbolic/term.hpp"

namespace rssforge::symbolic {

// Atom relation against zero: `p ~ 0`.
enum class Relation { kEq, kLe, kLt, kNe };

enum class AssertionKind { kTrue, kFalse, kAtom, kAnd, kOr, kNot, kImplies, kExists, kForall };

enum class Topology { kOpen, kClosed, kBoth, kNeither };

std::string to_string(Relation r);
std::string to_string(Topology t);

class QuantifiedAssertion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Immutable assertion tree over polynomial atoms. Atoms are stored as `p ~ 0`
// with p scaled to a primitive integer polynomial (and, for = / !=, a positive
// leading coefficient), so equivalent atoms compare equal structurally.
//
// The constructors below simplify locally (constant atoms fold, true/false
// absorb, conjunctions and disjunctions flatten, negation is pushed into
// atoms). Implication is kept as its own node.
class Assertion {
 public:
  Assertion();  // true

  static Assertion top();
  static Assertion bottom();
  static Assertion atom(const Term& p, Relation rel);

  // e ~ f, rewritten as (e - f) ~ 0 or (f - e) ~ 0.
  static Assertion eq(const Term& e, const Term& f) { return atom(e - f, Relation::kEq); }
  static Assertion ne(const Term& e, const Term& f) { return atom(e - f, Relation::kNe); }
  static Assertion le(const Term& e, const Term& f) { return atom(e - f, Relation::kLe); }
  static Assertion lt(const Term& e, const Term& f) { return atom(e - f, Relation::kLt); }
  static Assertion ge(const Term& e, const Term& f) { return atom(f - e, Relation::kLe); }
  static Assertion gt(const Term& e, const Term& f) { return atom(f - e, Relation::kLt); }

  static Assertion conj(std::vector<Assertion> parts);
  static Assertion disj(std::vector<Assertion> parts);
  static Assertion negate(const Assertion& a);
  static Assertion implies(const Assertion& a, const Assertion& b);
  static Assertion exists(const Var& v, const Assertion& body);
  static Assertion forall(const Var& v, const Assertion& body);

  AssertionKind kind() const;
  // Atom accessors; only valid for kAtom.
  const Term& term() const;
  Relation relation() const;
  // Children: And/Or (n-ary), Not (1), Implies (2), quantifiers (1).
  const std::vector<Assertion>& children() const;
  // Bound variable; only valid for quantifiers.
  const Var& bound() const;

  bool is_true() const { return kind() == AssertionKind::kTrue; }
  bool is_false() const { return kind() == AssertionKind::kFalse; }
  bool is_quantifier_free() const;

  std::set<Var> free_variables() const;
  // Number of nodes in the (shared) tree, counting shared subtrees once per use.
  std::size_t size() const;

  // Identity of the underlying node, for memoization.
  const void* id() const noexcept { return node_.get(); }

  friend bool operator==(const Assertion& a, const Assertion& b);

  friend Assertion operator&&(const Assertion& a, const Assertion& b) { return conj({a, b}); }
  friend Assertion operator||(const Assertion& a, const Assertion& b) { return disj({a, b}); }
  friend Assertion operator!(const Assertion& a) { return negate(a); }

 private:
  struct Node;
  explicit Assertion(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Assertion make(AssertionKind k, std::vector<Assertion> children);

  std::shared_ptr<const Node> node_;
};

// Ordered assignment list x1 := a1; ...; xk := ak.
class Substitution {
 public:
  Substitution() = default;
  explicit Substitution(std::vector<std::pair<Var, Term>> assignments)
      : assignments_(std::move(assignments)) {}

  const std::vector<std::pair<Var, Term>>& assignments() const noexcept { return assignments_; }
  bool empty() const noexcept { return assignments_.empty(); }

  // Updates ρ by executing the assignments in list order.
  Store execute(Store store) const;

 private:
  std::vector<std::pair<Var, Term>> assignments_;
};

double eval_term(const Term& t, const Store& store);

// Concrete satisfaction. Throws QuantifiedAssertion for quantified input and
// MissingVariable if the store does not cover a free variable.
bool satisfies(const Store& store, const Assertion& a);
bool satisfies(const ExactStore& store, const Assertion& a);

// Satisfaction with every atom relaxed by `tol` scaled to the magnitude of
// its monomials: p <= 0 and p < 0 accept p <= tol', p = 0 accepts |p| <= tol'.
// Disequalities stay exact. Used to re-check solver models printed in decimal.
bool satisfies_within(const Store& store, const Assertion& a, double tol);

Topology classify_topology(const Assertion& a);
bool is_open(const Assertion& a);
bool is_closed(const Assertion& a);

// A[σ]: replaces x_k by a_k first and x_1 by a_1 last, so that
// ρ ⊨ A[σ] iff execute(σ, ρ) ⊨ A.
Assertion substitute(const Assertion& a, const Substitution& sigma);
// Simultaneous substitution of free occurrences.
Assertion substitute(const Assertion& a, const std::map<Var, Term>& replacements);
Term substitute(const Term& t, const Substitution& sigma);

// Replaces every A => B by (not A) or B.
Assertion desugar_implications(const Assertion& a);

// Mints variable names that do not collide with anything already in use.
class FreshNames {
 public:
  explicit FreshNames(std::set<std::string> reserved = {}) : reserved_(std::move(reserved)) {}
  Var next(const std::string& stem);

 private:
  std::set<std::string> reserved_;
  std::map<std::string, unsigned> counters_;
};

}  // namespace rssforge::symbolic
