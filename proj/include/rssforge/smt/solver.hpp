#pragma once

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rssforge/symbolic/assertion.hpp"

namespace rssforge::smt {

using symbolic::Assertion;
using symbolic::Store;

// Spawn, pipe, or protocol failures. Distinct from an `unknown` verdict.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A sat/invalid model that does not re-check against the query.
class ModelCheckError : public SolverError {
 public:
  using SolverError::SolverError;
};

struct SolverConfig {
  // argv of the solver process; must read an SMT-LIB v2 script on stdin.
  std::vector<std::string> command{"z3", "-in"};
  double timeout_seconds = 60.0;
  // Added to the solver-side timeout before the watchdog kills the process.
  double kill_grace_seconds = 5.0;

  // `RSSFORGE_SMT_SOLVER` (whitespace-separated argv) overrides the command.
  static SolverConfig from_environment();
  // Parses a command line such as "z3 -in -smt2".
  static std::vector<std::string> split_command(const std::string& text);
};

enum class VerdictKind { kValid, kInvalid, kSat, kUnsat, kUnknown };

std::string to_string(VerdictKind k);

struct SolverVerdict {
  VerdictKind kind = VerdictKind::kUnknown;
  // Counterexample for kInvalid, model for kSat. Empty for quantified queries
  // when the solver prints nothing usable.
  std::optional<Store> model;
  std::string reason;  // for kUnknown
  double seconds = 0.0;

  bool is(VerdictKind k) const { return kind == k; }
};

struct QuantifierElimination {
  Assertion result;
  // True when `result` is quantifier free and was proved equivalent.
  bool eliminated = false;
  std::string note;
};

// Deterministic SMT-LIB rendering of an assertion. ⇒ becomes `=>`, ≠ becomes
// `(not (= ...))`, rationals print as decimals or `(/ p.0 q.0)`.
std::string to_smtlib(const Assertion& a);
std::string to_smtlib(const symbolic::Term& t);
// Full script: logic, declarations, (assert a), (check-sat).
std::string to_smtlib_script(const Assertion& a);

// Reads a solver term back into an assertion. Supports the connectives,
// comparisons, arithmetic, `let`, and decimal literals with a trailing `?`.
Assertion parse_smtlib_assertion(const std::string& text);
// Parses a `(model ...)` or `( (define-fun ...) ... )` block.
Store parse_smtlib_model(const std::string& text);

class Process;

// One solver child process. Each query starts from `(reset)`, so queries do
// not influence each other. Not thread safe: one owner at a time.
class SolverSession {
 public:
  explicit SolverSession(SolverConfig config);
  ~SolverSession();
  SolverSession(const SolverSession&) = delete;
  SolverSession& operator=(const SolverSession&) = delete;

  SolverVerdict check_sat(const Assertion& a, std::optional<double> timeout = std::nullopt);
  SolverVerdict check_validity(const Assertion& a, std::optional<double> timeout = std::nullopt);
  QuantifierElimination eliminate_quantifiers(const Assertion& a, std::optional<double> timeout = std::nullopt);

  const SolverConfig& config() const noexcept { return config_; }
  std::size_t queries() const noexcept { return queries_; }
  double solver_seconds() const noexcept { return solver_seconds_; }

 private:
  // Sends `body` after a reset and returns everything the solver printed up
  // to the sync marker. Returns nullopt if the watchdog fired.
  std::optional<std::string> exchange(const std::string& body, double wait_seconds);
  void restart();

  SolverConfig config_;
  std::unique_ptr<Process> process_;
  std::size_t queries_ = 0;
  double solver_seconds_ = 0.0;
};

// Hands out sessions to concurrent workers; a session is never shared.
class SolverPool {
 public:
  class Lease {
   public:
    Lease(SolverPool* pool, std::unique_ptr<SolverSession> s) : pool_(pool), session_(std::move(s)) {}
    Lease(Lease&&) noexcept = default;
    Lease& operator=(Lease&&) noexcept = default;
    ~Lease();
    SolverSession& operator*() const { return *session_; }
    SolverSession* operator->() const { return session_.get(); }

   private:
    SolverPool* pool_;
    std::unique_ptr<SolverSession> session_;
  };

  explicit SolverPool(SolverConfig config, std::size_t max_sessions = 4);

  Lease acquire();
  const SolverConfig& config() const noexcept { return config_; }

  std::size_t queries() const;
  double solver_seconds() const;

  SolverVerdict check_sat(const Assertion& a, std::optional<double> timeout = std::nullopt);
  SolverVerdict check_validity(const Assertion& a, std::optional<double> timeout = std::nullopt);
  QuantifierElimination eliminate_quantifiers(const Assertion& a, std::optional<double> timeout = std::nullopt);

 private:
  void release(std::unique_ptr<SolverSession> s);
  void record(const SolverVerdict& v);

  SolverConfig config_;
  std::size_t max_sessions_;
  std::size_t live_ = 0;
  std::vector<std::unique_ptr<SolverSession>> idle_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t queries_ = 0;
  double seconds_ = 0.0;
};

// True if the configured solver binary can be started and answers a trivial query.
bool solver_available(const SolverConfig& config);

}  // namespace rssforge::smt
