#pragma once

#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rssforge/symbolic/rational.hpp"

namespace rssforge::symbolic {

class Var {
 public:
  explicit Var(std::string name);

  const std::string& name() const noexcept { return name_; }

  friend bool operator==(const Var&, const Var&) = default;
  friend std::strong_ordering operator<=>(const Var& a, const Var& b) { return a.name_ <=> b.name_; }

 private:
  std::string name_;
};

// Double-precision stores drive simulation; exact stores come out of substitution
// chains and model re-checking.
using Store = std::map<Var, double>;
using ExactStore = std::map<Var, Rational>;

class MissingVariable : public std::runtime_error {
 public:
  explicit MissingVariable(const Var& v)
      : std::runtime_error("store has no value for variable '" + v.name() + "'"), var_(v) {}
  const Var& var() const noexcept { return var_; }

 private:
  Var var_;
};

// Power product x1^e1 * ... * xn^en with factors sorted by variable and all
// exponents positive. The empty monomial is 1.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(const Var& v, unsigned exponent = 1);

  unsigned degree() const noexcept { return degree_; }
  unsigned exponent(const Var& v) const;
  bool is_one() const noexcept { return factors_.empty(); }
  const std::vector<std::pair<Var, unsigned>>& factors() const noexcept { return factors_; }

  // Same monomial with v removed.
  Monomial without(const Var& v) const;

  friend Monomial operator*(const Monomial& a, const Monomial& b);
  friend bool operator==(const Monomial&, const Monomial&) = default;

 private:
  std::vector<std::pair<Var, unsigned>> factors_;
  unsigned degree_ = 0;
};

// Graded lexicographic order: total degree first, then factor lists compared
// lexicographically.
struct GrlexLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

// Multivariate polynomial with exact rational coefficients. Always canonical:
// monomials kept in grlex order and no zero coefficients stored, so structural
// equality is polynomial equality.
class Term {
 public:
  using Map = std::map<Monomial, Rational, GrlexLess>;

  Term() = default;
  Term(const Rational& c);  // NOLINT(google-explicit-constructor)
  Term(long c) : Term(Rational(c)) {}  // NOLINT(google-explicit-constructor)
  Term(int c) : Term(Rational(c)) {}  // NOLINT(google-explicit-constructor)
  Term(const Var& v);  // NOLINT(google-explicit-constructor)
  Term(const Monomial& m, const Rational& c);

  static Term var(const std::string& name) { return Term(Var(name)); }

  const Map& monomials() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_constant() const noexcept;
  // Constant value if the term has no variables.
  std::optional<Rational> constant_value() const;
  // Coefficient of the constant monomial.
  Rational constant_part() const;
  unsigned degree() const noexcept;
  unsigned degree_in(const Var& v) const;
  bool contains(const Var& v) const;
  std::set<Var> variables() const;

  // Polynomial coefficient of v^k, as a term in the remaining variables.
  Term coefficient(const Var& v, unsigned k) const;

  Term derivative(const Var& v) const;
  // Antiderivative in v that vanishes at v = 0.
  Term antiderivative(const Var& v) const;

  Term substitute(const Var& v, const Term& replacement) const;
  // Simultaneous substitution: every occurrence of a key is replaced by the
  // value computed on the original term, so replacements never see each other.
  Term substitute(const std::map<Var, Term>& replacements) const;

  double evaluate(const Store& store) const;
  Rational evaluate(const ExactStore& store) const;

  Term pow(unsigned n) const;

  Term& operator+=(const Term& o);
  Term& operator-=(const Term& o);
  Term& operator*=(const Term& o);
  Term& operator*=(const Rational& c);

  friend Term operator+(Term a, const Term& b) { return a += b; }
  friend Term operator-(Term a, const Term& b) { return a -= b; }
  friend Term operator*(const Term& a, const Term& b);
  friend Term operator-(const Term& a);

  friend bool operator==(const Term& a, const Term& b) { return a.terms_ == b.terms_; }

 private:
  void add_monomial(const Monomial& m, const Rational& c);

  Map terms_;
};

// Term lowered to doubles over a fixed variable layout for fast numeric
// evaluation (simulation inner loops).
class CompiledTerm {
 public:
  CompiledTerm() = default;
  CompiledTerm(const Term& t, const std::vector<Var>& layout);

  double operator()(std::span<const double> values) const;

 private:
  struct Factor {
    std::size_t index;
    unsigned exponent;
  };
  struct Mono {
    double coeff;
    std::vector<Factor> factors;
  };
  std::vector<Mono> monos_;
};

}  // namespace rssforge::symbolic
