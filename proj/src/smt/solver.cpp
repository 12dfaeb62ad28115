#include "rssforge/smt/solver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "process.hpp"

namespace rssforge::smt {

using symbolic::AssertionKind;
using symbolic::Monomial;
using symbolic::Rational;
using symbolic::Relation;
using symbolic::Term;
using symbolic::Var;

namespace {

constexpr const char* kMarker = "rssforge-sync-7f3a";
constexpr double kModelTolerance = 1e-9;

// ---------------------------------------------------------------- rendering

bool is_simple_symbol(const std::string& s) {
  static const std::string extra = "~!@$%^&*_-+=<>.?/";
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || extra.find(c) != std::string::npos;
  });
}

std::string symbol(const Var& v) {
  return is_simple_symbol(v.name()) ? v.name() : "|" + v.name() + "|";
}

std::string decimal_integer(const mpz_class& z) { return z.get_str() + ".0"; }

std::string rational_text(const Rational& q) {
  Rational a = abs(q);
  std::string body = a.get_den() == 1
                         ? decimal_integer(a.get_num())
                         : "(/ " + decimal_integer(a.get_num()) + " " + decimal_integer(a.get_den()) + ")";
  return q < 0 ? "(- " + body + ")" : body;
}

std::string monomial_text(const Monomial& m, const Rational& c) {
  std::vector<std::string> factors;
  for (const auto& [v, e] : m.factors()) {
    for (unsigned k = 0; k < e; ++k) factors.push_back(symbol(v));
  }
  if (factors.empty()) return rational_text(c);
  std::string prod;
  if (factors.size() == 1) {
    prod = factors.front();
  } else {
    prod = "(*";
    for (const auto& f : factors) prod += " " + f;
    prod += ")";
  }
  if (c == 1) return prod;
  if (c == -1) return "(- " + prod + ")";
  if (factors.size() == 1) return "(* " + rational_text(c) + " " + prod + ")";
  std::string out = "(* " + rational_text(c);
  for (const auto& f : factors) out += " " + f;
  return out + ")";
}

std::string sum_text(const Term& t) {
  if (t.is_zero()) return "0.0";
  std::vector<std::string> parts;
  const auto& ms = t.monomials();
  for (auto it = ms.rbegin(); it != ms.rend(); ++it) parts.push_back(monomial_text(it->first, it->second));
  if (parts.size() == 1) return parts.front();
  std::string out = "(+";
  for (const auto& p : parts) out += " " + p;
  return out + ")";
}

std::string atom_text(const Term& p, Relation rel) {
  Term lhs = p;
  bool flip = false;
  if ((rel == Relation::kLe || rel == Relation::kLt) && !p.is_zero() && p.monomials().rbegin()->second < 0) {
    lhs = -p;
    flip = true;
  }
  Rational c = lhs.constant_part();
  lhs -= Term(c);
  std::string l = sum_text(lhs);
  std::string r = rational_text(-c);
  switch (rel) {
    case Relation::kEq: return "(= " + l + " " + r + ")";
    case Relation::kNe: return "(not (= " + l + " " + r + "))";
    case Relation::kLe: return std::string(flip ? "(>= " : "(<= ") + l + " " + r + ")";
    case Relation::kLt: return std::string(flip ? "(> " : "(< ") + l + " " + r + ")";
  }
  return "";
}

void render(std::ostream& os, const Assertion& a) {
  switch (a.kind()) {
    case AssertionKind::kTrue: os << "true"; return;
    case AssertionKind::kFalse: os << "false"; return;
    case AssertionKind::kAtom: os << atom_text(a.term(), a.relation()); return;
    case AssertionKind::kAnd:
    case AssertionKind::kOr:
      os << (a.kind() == AssertionKind::kAnd ? "(and" : "(or");
      for (const auto& c : a.children()) {
        os << ' ';
        render(os, c);
      }
      os << ')';
      return;
    case AssertionKind::kNot:
      os << "(not ";
      render(os, a.children().front());
      os << ')';
      return;
    case AssertionKind::kImplies:
      os << "(=> ";
      render(os, a.children()[0]);
      os << ' ';
      render(os, a.children()[1]);
      os << ')';
      return;
    case AssertionKind::kExists:
    case AssertionKind::kForall:
      os << (a.kind() == AssertionKind::kExists ? "(exists ((" : "(forall ((") << symbol(a.bound())
         << " Real)) ";
      render(os, a.children().front());
      os << ')';
      return;
  }
}

std::string declarations(const Assertion& a) {
  std::string out;
  for (const auto& v : a.free_variables()) out += "(declare-fun " + symbol(v) + " () Real)\n";
  return out;
}

// ---------------------------------------------------------------- reading

struct SExpr {
  std::string atom;
  std::vector<SExpr> list;
  bool is_list = false;
};

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}

  bool at_end() {
    skip();
    return pos_ >= s_.size();
  }

  SExpr read() {
    skip();
    if (pos_ >= s_.size()) throw SolverError("unexpected end of solver output");
    SExpr e;
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      e.is_list = true;
      for (;;) {
        skip();
        if (pos_ >= s_.size()) throw SolverError("unbalanced solver output");
        if (s_[pos_] == ')') {
          ++pos_;
          return e;
        }
        e.list.push_back(read());
      }
    }
    if (c == ')') throw SolverError("unexpected ')' in solver output");
    if (c == '|') {
      std::size_t end = s_.find('|', pos_ + 1);
      if (end == std::string::npos) throw SolverError("unterminated quoted symbol");
      e.atom = s_.substr(pos_ + 1, end - pos_ - 1);
      pos_ = end + 1;
      return e;
    }
    if (c == '"') {
      std::size_t i = pos_ + 1;
      std::string str;
      while (i < s_.size()) {
        if (s_[i] == '"') {
          if (i + 1 < s_.size() && s_[i + 1] == '"') {
            str.push_back('"');
            i += 2;
            continue;
          }
          break;
        }
        str.push_back(s_[i++]);
      }
      pos_ = i + 1;
      e.atom = "\"" + str;
      return e;
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
           s_[pos_] != ')') {
      ++pos_;
    }
    e.atom = s_.substr(start, pos_ - start);
    return e;
  }

 private:
  void skip() {
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

  const std::string& s_;
  std::size_t pos_ = 0;
};

std::vector<SExpr> read_all(const std::string& text) {
  Reader r(text);
  std::vector<SExpr> out;
  while (!r.at_end()) out.push_back(r.read());
  return out;
}

bool is_error(const SExpr& e) { return e.is_list && !e.list.empty() && e.list[0].atom == "error"; }

std::string describe(const SExpr& e) {
  if (!e.is_list) return e.atom;
  std::string s = "(";
  for (std::size_t i = 0; i < e.list.size(); ++i) s += (i ? " " : "") + describe(e.list[i]);
  return s + ")";
}

class NotRecognized : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Rational numeral(const std::string& a) {
  std::string s = a;
  if (!s.empty() && s.back() == '?') s.pop_back();
  try {
    return symbolic::parse_rational(s);
  } catch (const std::invalid_argument&) {
    throw NotRecognized("not a numeral: " + a);
  }
}

bool looks_numeric(const std::string& a) {
  return !a.empty() && (std::isdigit(static_cast<unsigned char>(a[0])) || a[0] == '.');
}

using Env = std::map<std::string, SExpr>;

Assertion to_assertion(const SExpr& e, const Env& env);

Term to_term(const SExpr& e, const Env& env) {
  if (!e.is_list) {
    if (looks_numeric(e.atom)) return Term(numeral(e.atom));
    if (auto it = env.find(e.atom); it != env.end()) return to_term(it->second, env);
    return Term(Var(e.atom));
  }
  if (e.list.empty() || e.list[0].is_list) throw NotRecognized("bad term " + describe(e));
  const std::string& op = e.list[0].atom;
  std::size_t n = e.list.size() - 1;
  if (op == "+") {
    Term t;
    for (std::size_t i = 1; i <= n; ++i) t += to_term(e.list[i], env);
    return t;
  }
  if (op == "-") {
    if (n == 1) return -to_term(e.list[1], env);
    Term t = to_term(e.list[1], env);
    for (std::size_t i = 2; i <= n; ++i) t -= to_term(e.list[i], env);
    return t;
  }
  if (op == "*") {
    Term t(Rational(1));
    for (std::size_t i = 1; i <= n; ++i) t = t * to_term(e.list[i], env);
    return t;
  }
  if (op == "/" && n == 2) {
    Term d = to_term(e.list[2], env);
    auto c = d.constant_value();
    if (!c || *c == 0) throw NotRecognized("non-constant division");
    Term t = to_term(e.list[1], env);
    t *= Rational(1) / *c;
    return t;
  }
  if (op == "^" && n == 2) {
    auto k = to_term(e.list[2], env).constant_value();
    if (!k || k->get_den() != 1 || *k < 0) throw NotRecognized("bad power");
    return to_term(e.list[1], env).pow(static_cast<unsigned>(k->get_num().get_ui()));
  }
  if (op == "to_real" && n == 1) return to_term(e.list[1], env);
  if (op == "let" && n == 2) {
    Env inner = env;
    for (const auto& b : e.list[1].list) inner[b.list.at(0).atom] = b.list.at(1);
    return to_term(e.list[2], inner);
  }
  throw NotRecognized("unsupported term operator " + op);
}

Assertion to_assertion(const SExpr& e, const Env& env) {
  if (!e.is_list) {
    if (e.atom == "true") return Assertion::top();
    if (e.atom == "false") return Assertion::bottom();
    if (auto it = env.find(e.atom); it != env.end()) return to_assertion(it->second, env);
    throw NotRecognized("unexpected symbol " + e.atom);
  }
  if (e.list.empty() || e.list[0].is_list) throw NotRecognized("bad formula " + describe(e));
  const std::string& op = e.list[0].atom;
  std::size_t n = e.list.size() - 1;
  auto chain = [&](auto make) {
    std::vector<Assertion> parts;
    for (std::size_t i = 1; i < n; ++i) parts.push_back(make(to_term(e.list[i], env), to_term(e.list[i + 1], env)));
    return Assertion::conj(std::move(parts));
  };
  if (op == "and" || op == "or") {
    std::vector<Assertion> parts;
    for (std::size_t i = 1; i <= n; ++i) parts.push_back(to_assertion(e.list[i], env));
    return op == "and" ? Assertion::conj(std::move(parts)) : Assertion::disj(std::move(parts));
  }
  if (op == "not" && n == 1) return Assertion::negate(to_assertion(e.list[1], env));
  if (op == "=>" && n == 2) return Assertion::implies(to_assertion(e.list[1], env), to_assertion(e.list[2], env));
  if (op == "=") return chain([](const Term& a, const Term& b) { return Assertion::eq(a, b); });
  if (op == "<=") return chain([](const Term& a, const Term& b) { return Assertion::le(a, b); });
  if (op == "<") return chain([](const Term& a, const Term& b) { return Assertion::lt(a, b); });
  if (op == ">=") return chain([](const Term& a, const Term& b) { return Assertion::ge(a, b); });
  if (op == ">") return chain([](const Term& a, const Term& b) { return Assertion::gt(a, b); });
  if (op == "distinct" && n == 2) return Assertion::ne(to_term(e.list[1], env), to_term(e.list[2], env));
  if (op == "let" && n == 2) {
    Env inner = env;
    for (const auto& b : e.list[1].list) inner[b.list.at(0).atom] = b.list.at(1);
    return to_assertion(e.list[2], inner);
  }
  if ((op == "exists" || op == "forall") && n == 2) {
    Assertion body = to_assertion(e.list[2], env);
    const auto& vars = e.list[1].list;
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
      Var v(it->list.at(0).atom);
      body = op == "exists" ? Assertion::exists(v, body) : Assertion::forall(v, body);
    }
    return body;
  }
  throw NotRecognized("unsupported formula operator " + op);
}

double model_value(const SExpr& e) {
  if (!e.is_list) return symbolic::to_double(numeral(e.atom));
  return to_term(e, {}).constant_value().value_or(Rational(0)).get_d();
}

Store model_from(const SExpr& block) {
  Store store;
  for (const auto& d : block.list) {
    if (!d.is_list || d.list.size() != 5 || d.list[0].atom != "define-fun") continue;
    if (!d.list[2].is_list || !d.list[2].list.empty()) continue;  // functions, skolems
    if (d.list[3].atom != "Real" && d.list[3].atom != "Int") continue;
    try {
      store[Var(d.list[1].atom)] = model_value(d.list[4]);
    } catch (const NotRecognized& ex) {
      throw SolverError(std::string("unreadable model value: ") + ex.what());
    }
  }
  return store;
}

std::string options_script(double timeout_seconds) {
  long ms = std::max(1L, static_cast<long>(std::llround(timeout_seconds * 1000.0)));
  std::ostringstream os;
  os << "(reset)\n"
     << "(set-option :print-success false)\n"
     << "(set-option :pp.decimal true)\n"
     << "(set-option :pp.decimal_precision 40)\n"
     << "(set-option :timeout " << ms << ")\n";
  return os.str();
}

const char* logic_for(const Assertion& a) { return a.is_quantifier_free() ? "QF_NRA" : "NRA"; }

}  // namespace

// ---------------------------------------------------------------- public API

std::string to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::kValid: return "valid";
    case VerdictKind::kInvalid: return "invalid";
    case VerdictKind::kSat: return "sat";
    case VerdictKind::kUnsat: return "unsat";
    case VerdictKind::kUnknown: return "unknown";
  }
  return "?";
}

std::string to_smtlib(const Term& t) { return sum_text(t); }

std::string to_smtlib(const Assertion& a) {
  std::ostringstream os;
  render(os, a);
  return os.str();
}

std::string to_smtlib_script(const Assertion& a) {
  return std::string("(set-logic ") + logic_for(a) + ")\n" + declarations(a) + "(assert " + to_smtlib(a) +
         ")\n(check-sat)\n";
}

Assertion parse_smtlib_assertion(const std::string& text) {
  auto es = read_all(text);
  if (es.size() != 1) throw SolverError("expected exactly one formula");
  try {
    return to_assertion(es.front(), {});
  } catch (const NotRecognized& ex) {
    throw SolverError(ex.what());
  }
}

Store parse_smtlib_model(const std::string& text) {
  auto es = read_all(text);
  for (const auto& e : es) {
    if (!e.is_list) continue;
    if (!e.list.empty() && e.list[0].atom == "model") {
      SExpr rest = e;
      rest.list.erase(rest.list.begin());
      return model_from(rest);
    }
    return model_from(e);
  }
  throw SolverError("no model in solver output");
}

std::vector<std::string> SolverConfig::split_command(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

SolverConfig SolverConfig::from_environment() {
  SolverConfig c;
  if (const char* env = std::getenv("RSSFORGE_SMT_SOLVER"); env != nullptr && *env != '\0') {
    c.command = split_command(env);
  }
  return c;
}

SolverSession::SolverSession(SolverConfig config) : config_(std::move(config)) { restart(); }

SolverSession::~SolverSession() = default;

void SolverSession::restart() {
  process_.reset();
  process_ = std::make_unique<Process>(config_.command);
}

std::optional<std::string> SolverSession::exchange(const std::string& body, double wait_seconds) {
  if (!process_) restart();
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(static_cast<long>(wait_seconds * 1000.0));
  std::optional<std::string> out;
  try {
    out = process_->transact(body + "(echo \"" + kMarker + "\")\n", kMarker, deadline);
  } catch (const SolverError&) {
    process_.reset();
    throw;
  }
  if (!out) {
    process_.reset();
    return std::nullopt;
  }
  return out;
}

SolverVerdict SolverSession::check_sat(const Assertion& a, std::optional<double> timeout) {
  double t = timeout.value_or(config_.timeout_seconds);
  auto start = std::chrono::steady_clock::now();
  SolverVerdict v;
  ++queries_;
  auto finish = [&](SolverVerdict r) {
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    solver_seconds_ += r.seconds;
    return r;
  };

  if (a.is_true() || a.is_false()) {
    v.kind = a.is_true() ? VerdictKind::kSat : VerdictKind::kUnsat;
    if (a.is_true()) v.model = Store{};
    return finish(v);
  }

  if (!exchange(options_script(t), config_.kill_grace_seconds + 5.0)) {
    throw SolverError("solver did not acknowledge option setup");
  }
  auto out = exchange(to_smtlib_script(a), t + config_.kill_grace_seconds);
  if (!out) {
    v.kind = VerdictKind::kUnknown;
    v.reason = "timeout (solver killed)";
    return finish(v);
  }
  auto responses = read_all(*out);
  std::string answer;
  for (const auto& r : responses) {
    if (is_error(r)) throw SolverError("solver rejected query: " + describe(r));
    if (!r.is_list && (r.atom == "sat" || r.atom == "unsat" || r.atom == "unknown")) answer = r.atom;
  }
  if (answer.empty()) throw SolverError("no check-sat answer in solver output: " + *out);

  if (answer == "unsat") {
    v.kind = VerdictKind::kUnsat;
    return finish(v);
  }
  if (answer == "unknown") {
    v.kind = VerdictKind::kUnknown;
    auto why = exchange("(get-info :reason-unknown)\n", config_.kill_grace_seconds + 5.0);
    v.reason = why ? *why : "unknown";
    while (!v.reason.empty() && std::isspace(static_cast<unsigned char>(v.reason.back()))) v.reason.pop_back();
    return finish(v);
  }

  v.kind = VerdictKind::kSat;
  auto model_text = exchange("(get-model)\n", config_.kill_grace_seconds + 5.0);
  if (model_text) {
    Store model = parse_smtlib_model(*model_text);
    for (const auto& var : a.free_variables()) model.try_emplace(var, 0.0);
    if (a.is_quantifier_free() && !symbolic::satisfies_within(model, a, kModelTolerance)) {
      throw ModelCheckError("solver model does not satisfy the query: " + *model_text);
    }
    v.model = std::move(model);
  }
  return finish(v);
}

SolverVerdict SolverSession::check_validity(const Assertion& a, std::optional<double> timeout) {
  SolverVerdict v = check_sat(Assertion::negate(a), timeout);
  if (v.kind == VerdictKind::kUnsat) v.kind = VerdictKind::kValid;
  else if (v.kind == VerdictKind::kSat) v.kind = VerdictKind::kInvalid;
  return v;
}

QuantifierElimination SolverSession::eliminate_quantifiers(const Assertion& a, std::optional<double> timeout) {
  if (a.is_quantifier_free()) return {a, true, "already quantifier free"};
  double t = timeout.value_or(config_.timeout_seconds);
  long ms = std::max(1L, static_cast<long>(std::llround(t * 1000.0)));
  ++queries_;
  auto start = std::chrono::steady_clock::now();
  auto account = [&] {
    solver_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  if (!exchange(options_script(t), config_.kill_grace_seconds + 5.0)) {
    throw SolverError("solver did not acknowledge option setup");
  }
  std::string script = declarations(a) + "(assert " + to_smtlib(a) + ")\n(apply (try-for (then simplify qe simplify) " +
                       std::to_string(ms) + "))\n";
  auto out = exchange(script, t + config_.kill_grace_seconds);
  account();
  if (!out) return {a, false, "elimination timed out"};

  std::vector<Assertion> goals;
  try {
    for (const auto& r : read_all(*out)) {
      if (is_error(r)) return {a, false, "solver error: " + describe(r)};
      if (!r.is_list || r.list.empty() || r.list[0].atom != "goals") continue;
      for (std::size_t g = 1; g < r.list.size(); ++g) {
        const auto& goal = r.list[g];
        std::vector<Assertion> parts;
        for (std::size_t i = 1; i < goal.list.size(); ++i) {
          const auto& f = goal.list[i];
          if (!f.is_list && !f.atom.empty() && f.atom[0] == ':') {
            ++i;  // keyword and its value
            continue;
          }
          parts.push_back(to_assertion(f, {}));
        }
        goals.push_back(Assertion::conj(std::move(parts)));
      }
    }
  } catch (const std::exception& ex) {
    return {a, false, std::string("unreadable elimination result: ") + ex.what()};
  }
  if (goals.empty()) return {a, false, "solver produced no goals"};
  Assertion result = Assertion::disj(std::move(goals));
  if (!result.is_quantifier_free()) return {a, false, "quantifiers remain after elimination"};

  Assertion equiv = Assertion::conj({Assertion::implies(a, result), Assertion::implies(result, a)});
  SolverVerdict check = check_validity(equiv, t);
  if (check.kind != VerdictKind::kValid) {
    return {a, false, "equivalence check returned " + to_string(check.kind)};
  }
  return {result, true, "eliminated"};
}

SolverPool::Lease::~Lease() {
  if (session_ && pool_) pool_->release(std::move(session_));
}

SolverPool::SolverPool(SolverConfig config, std::size_t max_sessions)
    : config_(std::move(config)), max_sessions_(std::max<std::size_t>(1, max_sessions)) {}

SolverPool::Lease SolverPool::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return !idle_.empty() || live_ < max_sessions_; });
  if (!idle_.empty()) {
    auto s = std::move(idle_.back());
    idle_.pop_back();
    return Lease(this, std::move(s));
  }
  ++live_;
  lock.unlock();
  try {
    return Lease(this, std::make_unique<SolverSession>(config_));
  } catch (...) {
    std::lock_guard relock(mu_);
    --live_;
    cv_.notify_one();
    throw;
  }
}

void SolverPool::release(std::unique_ptr<SolverSession> s) {
  std::lock_guard lock(mu_);
  idle_.push_back(std::move(s));
  cv_.notify_one();
}

void SolverPool::record(const SolverVerdict& v) {
  std::lock_guard lock(mu_);
  ++queries_;
  seconds_ += v.seconds;
}

std::size_t SolverPool::queries() const {
  std::lock_guard lock(mu_);
  return queries_;
}

double SolverPool::solver_seconds() const {
  std::lock_guard lock(mu_);
  return seconds_;
}

SolverVerdict SolverPool::check_sat(const Assertion& a, std::optional<double> timeout) {
  auto lease = acquire();
  SolverVerdict v = lease->check_sat(a, timeout);
  record(v);
  return v;
}

SolverVerdict SolverPool::check_validity(const Assertion& a, std::optional<double> timeout) {
  auto lease = acquire();
  SolverVerdict v = lease->check_validity(a, timeout);
  record(v);
  return v;
}

QuantifierElimination SolverPool::eliminate_quantifiers(const Assertion& a, std::optional<double> timeout) {
  auto lease = acquire();
  auto start = std::chrono::steady_clock::now();
  auto r = lease->eliminate_quantifiers(a, timeout);
  SolverVerdict v;
  v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  record(v);
  return r;
}

bool solver_available(const SolverConfig& config) {
  try {
    SolverSession s(config);
    return s.check_sat(Assertion::lt(Term::var("x"), 0), 10.0).kind == VerdictKind::kSat;
  } catch (const SolverError&) {
    return false;
  }
}

}  // namespace rssforge::smt
