#include "rssforge/symbolic/term.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rssforge::symbolic {

Var::Var(std::string name) : name_(std::move(name)) {
  if (name_.empty()) throw std::invalid_argument("variable name must be nonempty");
}

Monomial::Monomial(const Var& v, unsigned exponent) {
  if (exponent > 0) {
    factors_.emplace_back(v, exponent);
    degree_ = exponent;
  }
}

unsigned Monomial::exponent(const Var& v) const {
  for (const auto& [var, e] : factors_) {
    if (var == v) return e;
  }
  return 0;
}

Monomial Monomial::without(const Var& v) const {
  Monomial m;
  for (const auto& f : factors_) {
    if (f.first != v) {
      m.factors_.push_back(f);
      m.degree_ += f.second;
    }
  }
  return m;
}

Monomial operator*(const Monomial& a, const Monomial& b) {
  Monomial m;
  m.factors_.reserve(a.factors_.size() + b.factors_.size());
  auto i = a.factors_.begin();
  auto j = b.factors_.begin();
  while (i != a.factors_.end() || j != b.factors_.end()) {
    if (j == b.factors_.end() || (i != a.factors_.end() && i->first < j->first)) {
      m.factors_.push_back(*i++);
    } else if (i == a.factors_.end() || j->first < i->first) {
      m.factors_.push_back(*j++);
    } else {
      m.factors_.emplace_back(i->first, i->second + j->second);
      ++i;
      ++j;
    }
  }
  m.degree_ = a.degree_ + b.degree_;
  return m;
}

bool GrlexLess::operator()(const Monomial& a, const Monomial& b) const {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  const auto& fa = a.factors();
  const auto& fb = b.factors();
  return std::lexicographical_compare(fa.begin(), fa.end(), fb.begin(), fb.end(),
                                      [](const auto& x, const auto& y) {
                                        if (x.first != y.first) return x.first < y.first;
                                        return x.second > y.second;
                                      });
}

namespace {

// mpq_class(p, q) does not reduce by itself; callers may hand us such values.
Rational canonical(const Rational& c) {
  Rational r = c;
  r.canonicalize();
  return r;
}

}  // namespace

Term::Term(const Rational& c) {
  if (c != 0) terms_.emplace(Monomial(), canonical(c));
}

Term::Term(const Var& v) { terms_.emplace(Monomial(v), Rational(1)); }

Term::Term(const Monomial& m, const Rational& c) {
  if (c != 0) terms_.emplace(m, canonical(c));
}

void Term::add_monomial(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

bool Term::is_constant() const noexcept {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one());
}

std::optional<Rational> Term::constant_value() const {
  if (!is_constant()) return std::nullopt;
  return constant_part();
}

Rational Term::constant_part() const {
  auto it = terms_.find(Monomial());
  return it == terms_.end() ? Rational(0) : it->second;
}

unsigned Term::degree() const noexcept {
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

unsigned Term::degree_in(const Var& v) const {
  unsigned d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.exponent(v));
  return d;
}

bool Term::contains(const Var& v) const {
  return std::any_of(terms_.begin(), terms_.end(),
                     [&](const auto& mc) { return mc.first.exponent(v) > 0; });
}

std::set<Var> Term::variables() const {
  std::set<Var> vars;
  for (const auto& [m, c] : terms_) {
    for (const auto& f : m.factors()) vars.insert(f.first);
  }
  return vars;
}

Term Term::coefficient(const Var& v, unsigned k) const {
  Term out;
  for (const auto& [m, c] : terms_) {
    if (m.exponent(v) == k) out.add_monomial(m.without(v), c);
  }
  return out;
}

Term Term::derivative(const Var& v) const {
  Term out;
  for (const auto& [m, c] : terms_) {
    unsigned e = m.exponent(v);
    if (e == 0) continue;
    out.add_monomial(m.without(v) * Monomial(v, e - 1), c * e);
  }
  return out;
}

Term Term::antiderivative(const Var& v) const {
  Term out;
  for (const auto& [m, c] : terms_) {
    unsigned e = m.exponent(v);
    Rational q = c / (e + 1);
    out.add_monomial(m.without(v) * Monomial(v, e + 1), q);
  }
  return out;
}

Term Term::substitute(const Var& v, const Term& replacement) const {
  if (!contains(v)) return *this;
  return substitute(std::map<Var, Term>{{v, replacement}});
}

Term Term::substitute(const std::map<Var, Term>& replacements) const {
  // Powers of each replacement are cached per call.
  std::map<std::pair<Var, unsigned>, Term> powers;
  auto power_of = [&](const Var& v, const Term& base, unsigned e) -> const Term& {
    auto key = std::make_pair(v, e);
    auto it = powers.find(key);
    if (it != powers.end()) return it->second;
    return powers.emplace(key, base.pow(e)).first->second;
  };

  Term out;
  for (const auto& [m, c] : terms_) {
    Monomial kept;
    Term product(Rational(1));
    bool substituted = false;
    for (const auto& [var, e] : m.factors()) {
      auto r = replacements.find(var);
      if (r == replacements.end()) {
        kept = kept * Monomial(var, e);
      } else {
        product = product * power_of(var, r->second, e);
        substituted = true;
      }
    }
    if (!substituted) {
      out.add_monomial(m, c);
      continue;
    }
    for (const auto& [pm, pc] : product.terms_) out.add_monomial(pm * kept, pc * c);
  }
  return out;
}

double Term::evaluate(const Store& store) const {
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double prod = c.get_d();
    for (const auto& [var, e] : m.factors()) {
      auto it = store.find(var);
      if (it == store.end()) throw MissingVariable(var);
      prod *= e == 1 ? it->second : std::pow(it->second, static_cast<double>(e));
    }
    sum += prod;
  }
  return sum;
}

Rational Term::evaluate(const ExactStore& store) const {
  Rational sum = 0;
  for (const auto& [m, c] : terms_) {
    Rational prod = c;
    for (const auto& [var, e] : m.factors()) {
      auto it = store.find(var);
      if (it == store.end()) throw MissingVariable(var);
      for (unsigned k = 0; k < e; ++k) prod *= it->second;
    }
    sum += prod;
  }
  return sum;
}

Term Term::pow(unsigned n) const {
  Term result(Rational(1));
  Term base = *this;
  while (n > 0) {
    if (n & 1U) result = result * base;
    n >>= 1U;
    if (n > 0) base = base * base;
  }
  return result;
}

Term& Term::operator+=(const Term& o) {
  for (const auto& [m, c] : o.terms_) add_monomial(m, c);
  return *this;
}

Term& Term::operator-=(const Term& o) {
  for (const auto& [m, c] : o.terms_) add_monomial(m, -c);
  return *this;
}

Term& Term::operator*=(const Term& o) {
  *this = *this * o;
  return *this;
}

Term& Term::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  Rational k = canonical(c);
  for (auto& [m, coeff] : terms_) coeff *= k;
  return *this;
}

Term operator*(const Term& a, const Term& b) {
  Term out;
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) out.add_monomial(ma * mb, ca * cb);
  }
  return out;
}

Term operator-(const Term& a) {
  Term out = a;
  for (auto& [m, c] : out.terms_) c = -c;
  return out;
}

CompiledTerm::CompiledTerm(const Term& t, const std::vector<Var>& layout) {
  for (const auto& [m, c] : t.monomials()) {
    Mono mono{c.get_d(), {}};
    for (const auto& [var, e] : m.factors()) {
      auto it = std::find(layout.begin(), layout.end(), var);
      if (it == layout.end()) throw MissingVariable(var);
      mono.factors.push_back({static_cast<std::size_t>(it - layout.begin()), e});
    }
    monos_.push_back(std::move(mono));
  }
}

double CompiledTerm::operator()(std::span<const double> values) const {
  double sum = 0.0;
  for (const auto& mono : monos_) {
    double prod = mono.coeff;
    for (const auto& f : mono.factors) {
      double x = values[f.index];
      for (unsigned k = 0; k < f.exponent; ++k) prod *= x;
    }
    sum += prod;
  }
  return sum;
}

}  // namespace rssforge::symbolic
