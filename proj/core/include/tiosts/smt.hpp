#pragma once

#include "tiosts/expr.hpp"
#include "tiosts/model.hpp"

#include <chrono>
#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace tiosts {

// Deterministic SMT-LIB v2 rendering. Time is Real; bound time variables
// get their non-negativity inside the quantifier body.
[[nodiscard]] std::string to_smtlib(const Expr& e);

// Symbol as written in SMT-LIB (quoted with |..| when needed).
[[nodiscard]] std::string smt_symbol(std::string_view name);

// Inverse of to_smtlib. Free and bound symbols are resolved through
// `symbols`; bound time variables must carry the emitted side constraint.
[[nodiscard]] Expr parse_smtlib(std::string_view text, const std::map<std::string, Variable>& symbols);

// TIOSTS_SOLVER if set, else "z3 -in".
[[nodiscard]] std::string default_solver_command();

struct SolverConfig {
  std::string command = default_solver_command();
  std::chrono::milliseconds timeout{10000};
  bool spawn_per_query = false;
  bool cache = true;
};

enum class SatStatus { Sat, Unsat, Unknown };

[[nodiscard]] std::string_view to_string(SatStatus s);

struct CheckResult {
  SatStatus status = SatStatus::Unknown;
  Valuation model;
  std::string reason;

  [[nodiscard]] bool sat() const { return status == SatStatus::Sat; }
  [[nodiscard]] bool unsat() const { return status == SatStatus::Unsat; }
  [[nodiscard]] bool unknown() const { return status == SatStatus::Unknown; }
};

enum class Closure { Existential, Universal };

// One external solver process driven over stdin/stdout with push/pop
// scoping. Single owner; not thread-safe.
class SolverSession {
 public:
  explicit SolverSession(SolverConfig config = {});
  ~SolverSession();
  SolverSession(const SolverSession&) = delete;
  SolverSession& operator=(const SolverSession&) = delete;

  // Satisfiability of f with its free variables existentially read.
  // With want_model, a Sat result carries values for every free variable
  // of f plus `extra`.
  CheckResult check(const Expr& f, bool want_model = false, const std::vector<Variable>& extra = {});

  // Substitutes nu's bindings, then closes the remaining free variables.
  CheckResult eval_under(const Expr& f, const Valuation& nu, Closure mode = Closure::Existential);

  // check() that throws SolverUnknown instead of returning Unknown.
  bool is_sat(const Expr& f);

  struct Stats {
    std::size_t queries = 0;
    std::size_t cache_hits = 0;
    std::size_t restarts = 0;
    std::chrono::duration<double> wall{0};
  };
  [[nodiscard]] const Stats& stats() const { return stats_; }
  [[nodiscard]] const SolverConfig& config() const { return config_; }

 private:
  void start();
  void stop();
  void send(const std::string& text);
  std::string read_response();
  CheckResult run_query(const std::string& script, const std::vector<Variable>& model_vars,
                        const std::string& check_cmd);
  CheckResult exchange(const std::string& script, const std::vector<Variable>& model_vars,
                       const std::string& check_cmd);

  SolverConfig config_;
  int pid_ = -1;
  int to_solver_ = -1;
  int from_solver_ = -1;
  std::string buffer_;
  Stats stats_;
  std::unordered_map<std::string, CheckResult> cache_;
  std::size_t hidden_counter_ = 0;
};

}  // namespace tiosts
