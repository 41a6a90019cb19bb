#pragma once

#include "tiosts/purpose.hpp"
#include "tiosts/smt.hpp"
#include "tiosts/symexec.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tiosts {

enum class Verdict { Pass, FailOut, FailDur, IncOut, IncDur, IncUcInSpec, IncUcInUspec };

inline constexpr Verdict kAllVerdicts[] = {Verdict::Pass,   Verdict::FailOut,     Verdict::FailDur,
                                           Verdict::IncOut, Verdict::IncDur,      Verdict::IncUcInSpec,
                                           Verdict::IncUcInUspec};

// "PASS", "FAIL_out", "INC_ucIn_spec", ...
[[nodiscard]] std::string_view to_string(Verdict v);
[[nodiscard]] std::optional<Verdict> parse_verdict(std::string_view s);
[[nodiscard]] inline bool is_fail(Verdict v) { return v == Verdict::FailOut || v == Verdict::FailDur; }

enum class Rule { R1 = 1, R2, R3, R4, R5, R6, R7, R8, R9, R10 };

[[nodiscard]] std::string to_string(Rule r);
[[nodiscard]] std::optional<Rule> parse_rule(std::string_view s);
// R1, R2, R3 and R6: the transitions that follow the purpose.
[[nodiscard]] inline bool is_skip_class(Rule r) {
  return r == Rule::R1 || r == Rule::R2 || r == Rule::R3 || r == Rule::R6;
}

using TcState = std::variant<EcId, Verdict>;

[[nodiscard]] std::string state_name(const TcState& s);

// Action in the test case's own direction: Output for stimulations and
// δ, Input for observations.
struct TcAction {
  std::string channel;
  EventKind kind = EventKind::Input;
  std::vector<Variable> vars;

  friend bool operator==(const TcAction&, const TcAction&) = default;
};

struct TcTransition {
  EcId source = 0;
  TcAction action;
  Expr guard;
  std::vector<Variable> resets;
  TcState target;
  Rule rule = Rule::R1;

  friend bool operator==(const TcTransition&, const TcTransition&) = default;
};

// The fresh-variable registry of a backbone EC, used to bind events.
struct BackboneState {
  EcId id = 0;
  Variable dur;
  std::map<std::string, std::vector<Variable>> inputs;
  std::map<std::string, std::vector<Variable>> outputs;

  friend bool operator==(const BackboneState&, const BackboneState&) = default;
};

struct TestCase {
  std::string model;
  std::vector<Channel> channels;
  std::vector<Constant> consts;
  Rational tm;
  std::vector<BackboneState> states;  // backbone order, tgt(tp) excluded
  std::vector<TcTransition> transitions;

  [[nodiscard]] EcId initial() const { return states.front().id; }
  [[nodiscard]] const BackboneState& state(EcId id) const;
  [[nodiscard]] std::vector<const TcTransition*> outgoing(EcId id) const;
  [[nodiscard]] std::map<Rule, std::size_t> census() const;

  // Signature of the test case: observed and emitted channels, clocks
  // f^dur(tp) and variables f^in(tp) ∪ f^out(tp).
  [[nodiscard]] std::vector<std::string> input_channels() const;
  [[nodiscard]] std::vector<std::string> output_channels() const;
  [[nodiscard]] std::vector<Variable> clocks() const;
  [[nodiscard]] std::vector<Variable> variables() const;

  friend bool operator==(const TestCase&, const TestCase&) = default;
};

struct GenOptions {
  Rational tm{5};
  bool delta_quantify_all = false;
};

// The guard templates of the rules, instantiated on the purpose's tree.
class GuardBuilder {
 public:
  GuardBuilder(SymbolicTree& tree, const TestPurpose& tp, GenOptions options, SolverSession& session);

  [[nodiscard]] Expr stim(EcId next) const;
  [[nodiscard]] Expr obs_spec(EcId ec, EcId child) const;
  Expr obs_uspec(EcId ec, const std::string& channel);
  Expr delta_spec(EcId ec);
  Expr delta_uspec(EcId ec);

 private:
  std::vector<EcId> observable_children(EcId ec);
  std::vector<Variable> delta_closure(EcId ec, const Expr& pc) const;
  [[nodiscard]] Expr timeout_before(EcId ec) const;
  [[nodiscard]] Expr timeout_reached(EcId ec) const;

  SymbolicTree& tree_;
  const TestPurpose& tp_;
  GenOptions options_;
  SolverSession& session_;
};

// Rules R1-R10 along the purpose. Transitions with an Unsat guard are
// dropped; an Unknown guard aborts with SolverUnknown.
TestCase generate(const TestPurpose& tp, SymbolicTree& tree, SolverSession& session, const GenOptions& options = {});

// "tiosts-tc/1" JSON with SMT-LIB guards; byte-deterministic.
[[nodiscard]] std::string export_json(const TestCase& tc);
[[nodiscard]] TestCase import_json(std::string_view text);

}  // namespace tiosts
