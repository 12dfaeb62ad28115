#include "rssforge/symbolic/text.hpp"

#include <cctype>
#include <memory>
#include <sstream>
#include <vector>

namespace rssforge::symbolic {

namespace {

struct SExpr {
  std::string atom;  // empty for lists
  std::vector<SExpr> list;
  bool is_list = false;
  std::size_t offset = 0;
};

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}

  SExpr read_all() {
    SExpr e = read();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("trailing input", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == ';') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  SExpr read() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    SExpr e;
    e.offset = pos_;
    if (s_[pos_] == '(') {
      ++pos_;
      e.is_list = true;
      for (;;) {
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError("unbalanced parenthesis", e.offset);
        if (s_[pos_] == ')') {
          ++pos_;
          return e;
        }
        e.list.push_back(read());
      }
    }
    if (s_[pos_] == ')') throw ParseError("unexpected ')'", pos_);
    std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
           s_[pos_] != ')' && s_[pos_] != ';') {
      ++pos_;
    }
    e.atom = std::string(s_.substr(start, pos_ - start));
    return e;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

bool looks_numeric(const std::string& a) {
  if (a.empty()) return false;
  char c = a[0];
  if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return true;
  return (c == '-' || c == '+') && a.size() > 1 &&
         (std::isdigit(static_cast<unsigned char>(a[1])) || a[1] == '.');
}

bool is_identifier(const std::string& a) {
  if (a.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(a[0])) || a[0] == '_')) return false;
  for (char c : a) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '\'')) return false;
  }
  return true;
}

Term build_term(const SExpr& e);

Rational constant_of(const SExpr& e) {
  Term t = build_term(e);
  auto c = t.constant_value();
  if (!c) throw ParseError("expected a constant", e.offset);
  return *c;
}

Term build_term(const SExpr& e) {
  if (!e.is_list) {
    if (looks_numeric(e.atom)) {
      try {
        return Term(parse_rational(e.atom));
      } catch (const std::invalid_argument& ex) {
        throw ParseError(ex.what(), e.offset);
      }
    }
    if (is_identifier(e.atom)) return Term(Var(e.atom));
    throw ParseError("bad term token '" + e.atom + "'", e.offset);
  }
  if (e.list.empty() || e.list[0].is_list) throw ParseError("expected operator", e.offset);
  const std::string& op = e.list[0].atom;
  std::size_t n = e.list.size() - 1;
  if (op == "poly") {
    Term out;
    for (std::size_t i = 1; i < e.list.size(); ++i) {
      const SExpr& m = e.list[i];
      if (!m.is_list || m.list.empty() || m.list[0].is_list) throw ParseError("bad monomial", m.offset);
      Rational c;
      try {
        c = parse_rational(m.list[0].atom);
      } catch (const std::invalid_argument& ex) {
        throw ParseError(ex.what(), m.offset);
      }
      Monomial mono;
      for (std::size_t j = 1; j < m.list.size(); ++j) {
        const SExpr& f = m.list[j];
        if (!f.is_list || f.list.size() != 2 || f.list[0].is_list || f.list[1].is_list ||
            !is_identifier(f.list[0].atom)) {
          throw ParseError("bad factor", f.offset);
        }
        unsigned long exp = 0;
        try {
          exp = std::stoul(f.list[1].atom);
        } catch (const std::exception&) {
          throw ParseError("bad exponent", f.offset);
        }
        mono = mono * Monomial(Var(f.list[0].atom), static_cast<unsigned>(exp));
      }
      out += Term(mono, c);
    }
    return out;
  }
  if (op == "+") {
    Term out;
    for (std::size_t i = 1; i <= n; ++i) out += build_term(e.list[i]);
    return out;
  }
  if (op == "-") {
    if (n == 0) throw ParseError("'-' needs an argument", e.offset);
    if (n == 1) return -build_term(e.list[1]);
    Term out = build_term(e.list[1]);
    for (std::size_t i = 2; i <= n; ++i) out -= build_term(e.list[i]);
    return out;
  }
  if (op == "*") {
    Term out(Rational(1));
    for (std::size_t i = 1; i <= n; ++i) out = out * build_term(e.list[i]);
    return out;
  }
  if (op == "/") {
    if (n != 2) throw ParseError("'/' takes two arguments", e.offset);
    Rational d = constant_of(e.list[2]);
    if (d == 0) throw ParseError("division by zero", e.offset);
    Term out = build_term(e.list[1]);
    out *= Rational(1) / d;
    return out;
  }
  if (op == "^") {
    if (n != 2) throw ParseError("'^' takes two arguments", e.offset);
    Rational k = constant_of(e.list[2]);
    if (k.get_den() != 1 || k < 0 || k > 64) throw ParseError("exponent must be a small natural", e.offset);
    return build_term(e.list[1]).pow(static_cast<unsigned>(k.get_num().get_ui()));
  }
  throw ParseError("unknown term operator '" + op + "'", e.offset);
}

Assertion build_assertion(const SExpr& e) {
  if (!e.is_list) {
    if (e.atom == "true") return Assertion::top();
    if (e.atom == "false") return Assertion::bottom();
    throw ParseError("bad assertion token '" + e.atom + "'", e.offset);
  }
  if (e.list.empty() || e.list[0].is_list) throw ParseError("expected operator", e.offset);
  const std::string& op = e.list[0].atom;
  std::size_t n = e.list.size() - 1;
  auto binary = [&]() {
    if (n != 2) throw ParseError("'" + op + "' takes two arguments", e.offset);
    return std::make_pair(build_term(e.list[1]), build_term(e.list[2]));
  };
  if (op == "=") { auto [l, r] = binary(); return Assertion::eq(l, r); }
  if (op == "!=") { auto [l, r] = binary(); return Assertion::ne(l, r); }
  if (op == "<=") { auto [l, r] = binary(); return Assertion::le(l, r); }
  if (op == "<") { auto [l, r] = binary(); return Assertion::lt(l, r); }
  if (op == ">=") { auto [l, r] = binary(); return Assertion::ge(l, r); }
  if (op == ">") { auto [l, r] = binary(); return Assertion::gt(l, r); }
  if (op == "and" || op == "or") {
    std::vector<Assertion> parts;
    for (std::size_t i = 1; i <= n; ++i) parts.push_back(build_assertion(e.list[i]));
    return op == "and" ? Assertion::conj(std::move(parts)) : Assertion::disj(std::move(parts));
  }
  if (op == "not") {
    if (n != 1) throw ParseError("'not' takes one argument", e.offset);
    return Assertion::negate(build_assertion(e.list[1]));
  }
  if (op == "=>") {
    if (n != 2) throw ParseError("'=>' takes two arguments", e.offset);
    return Assertion::implies(build_assertion(e.list[1]), build_assertion(e.list[2]));
  }
  if (op == "exists" || op == "forall") {
    if (n != 2 || !e.list[1].is_list || e.list[1].list.empty()) {
      throw ParseError("quantifier needs a variable list and a body", e.offset);
    }
    Assertion body = build_assertion(e.list[2]);
    const auto& vars = e.list[1].list;
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
      if (it->is_list || !is_identifier(it->atom)) throw ParseError("bad bound variable", it->offset);
      Var v(it->atom);
      body = op == "exists" ? Assertion::exists(v, body) : Assertion::forall(v, body);
    }
    return body;
  }
  throw ParseError("unknown assertion operator '" + op + "'", e.offset);
}

void write_term(std::ostream& os, const Term& t) {
  os << "(poly";
  for (const auto& [m, c] : t.monomials()) {
    os << " (" << format_rational(c);
    for (const auto& [v, e] : m.factors()) os << " (" << v.name() << ' ' << e << ')';
    os << ')';
  }
  os << ')';
}

void write_assertion(std::ostream& os, const Assertion& a) {
  switch (a.kind()) {
    case AssertionKind::kTrue: os << "true"; return;
    case AssertionKind::kFalse: os << "false"; return;
    case AssertionKind::kAtom:
      os << '(' << to_string(a.relation()) << ' ';
      write_term(os, a.term());
      os << " 0)";
      return;
    case AssertionKind::kAnd:
    case AssertionKind::kOr:
      os << (a.kind() == AssertionKind::kAnd ? "(and" : "(or");
      for (const auto& c : a.children()) {
        os << ' ';
        write_assertion(os, c);
      }
      os << ')';
      return;
    case AssertionKind::kNot:
      os << "(not ";
      write_assertion(os, a.children().front());
      os << ')';
      return;
    case AssertionKind::kImplies:
      os << "(=> ";
      write_assertion(os, a.children()[0]);
      os << ' ';
      write_assertion(os, a.children()[1]);
      os << ')';
      return;
    case AssertionKind::kExists:
    case AssertionKind::kForall:
      os << (a.kind() == AssertionKind::kExists ? "(exists (" : "(forall (") << a.bound().name() << ") ";
      write_assertion(os, a.children().front());
      os << ')';
      return;
  }
}

std::string monomial_infix(const Monomial& m) {
  std::string s;
  for (const auto& [v, e] : m.factors()) {
    if (!s.empty()) s += "*";
    s += v.name();
    if (e > 1) s += "^" + std::to_string(e);
  }
  return s;
}

void write_infix(std::ostream& os, const Assertion& a, bool nested) {
  switch (a.kind()) {
    case AssertionKind::kTrue: os << "true"; return;
    case AssertionKind::kFalse: os << "false"; return;
    case AssertionKind::kAtom: os << to_infix(a.term()) << ' ' << to_string(a.relation()) << " 0"; return;
    case AssertionKind::kAnd:
    case AssertionKind::kOr: {
      if (nested) os << '(';
      bool first = true;
      for (const auto& c : a.children()) {
        if (!first) os << (a.kind() == AssertionKind::kAnd ? " && " : " || ");
        first = false;
        write_infix(os, c, true);
      }
      if (nested) os << ')';
      return;
    }
    case AssertionKind::kNot:
      os << '!';
      write_infix(os, a.children().front(), true);
      return;
    case AssertionKind::kImplies:
      if (nested) os << '(';
      write_infix(os, a.children()[0], true);
      os << " => ";
      write_infix(os, a.children()[1], true);
      if (nested) os << ')';
      return;
    case AssertionKind::kExists:
    case AssertionKind::kForall:
      os << (a.kind() == AssertionKind::kExists ? "(exists " : "(forall ") << a.bound().name() << ". ";
      write_infix(os, a.children().front(), false);
      os << ')';
      return;
  }
}

}  // namespace

std::string to_text(const Term& t) {
  std::ostringstream os;
  write_term(os, t);
  return os.str();
}

std::string to_text(const Assertion& a) {
  std::ostringstream os;
  write_assertion(os, a);
  return os.str();
}

Term parse_term(std::string_view text) { return build_term(Reader(text).read_all()); }

Assertion parse_assertion(std::string_view text) { return build_assertion(Reader(text).read_all()); }

std::string to_infix(const Term& t) {
  if (t.is_zero()) return "0";
  std::string s;
  // Highest degree first reads more naturally.
  const auto& ms = t.monomials();
  for (auto it = ms.rbegin(); it != ms.rend(); ++it) {
    const auto& [m, c] = *it;
    Rational a = abs(c);
    bool neg = c < 0;
    if (s.empty()) {
      if (neg) s += "-";
    } else {
      s += neg ? " - " : " + ";
    }
    if (m.is_one()) {
      s += format_rational(a);
    } else if (a == 1) {
      s += monomial_infix(m);
    } else {
      s += format_rational(a) + "*" + monomial_infix(m);
    }
  }
  return s;
}

std::string to_infix(const Assertion& a) {
  std::ostringstream os;
  write_infix(os, a, false);
  return os.str();
}

}  // namespace rssforge::symbolic
