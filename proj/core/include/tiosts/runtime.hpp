#pragma once

#include "tiosts/model.hpp"
#include "tiosts/smt.hpp"
#include "tiosts/symexec.hpp"
#include "tiosts/testgen.hpp"

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tiosts {

struct Binding {
  std::string var;
  Value value;
  std::size_t step = 0;
};

// Partial interpretation of the revealed fresh variables. Bindings are
// never overwritten.
class Interpretation {
 public:
  void bind(const Variable& v, const Value& value, std::size_t step);
  [[nodiscard]] bool bound(const std::string& name) const { return values_.contains(name); }
  [[nodiscard]] const Valuation& values() const { return values_; }
  [[nodiscard]] const std::vector<Binding>& history() const { return history_; }

 private:
  Valuation values_;
  std::vector<Binding> history_;
};

struct GuardCheck {
  std::size_t transition = 0;  // index into TestCase::transitions
  SatStatus status = SatStatus::Unknown;
};

struct StepRecord {
  ConcreteEvent event;
  EcId source = 0;
  std::size_t transition = 0;
  Rule rule = Rule::R1;
  TcState target;
  std::vector<GuardCheck> checks;
};

struct RunState {
  TcState state;
  Interpretation nu;
  std::vector<StepRecord> log;

  [[nodiscard]] bool at_verdict() const { return std::holds_alternative<Verdict>(state); }
  [[nodiscard]] std::optional<Verdict> verdict() const;
};

[[nodiscard]] RunState start(const TestCase& tc);

// One application of the execution relation. Binds the event into the
// current backbone state's registry, then follows the unique enabled
// transition whose action mirrors the event.
void step(RunState& run, const ConcreteEvent& ev, const TestCase& tc, SolverSession& session);

struct RunOutcome {
  std::optional<Verdict> verdict;  // empty: the trace ended on the backbone
  RunState final;
  std::size_t consumed = 0;

  [[nodiscard]] bool incomplete() const { return !verdict.has_value(); }
};

RunOutcome run_trace(const ConcreteTrace& trace, const TestCase& tc, SolverSession& session);

// Verdicts reached by the traces; incomplete runs contribute nothing.
std::set<Verdict> vdt(const std::vector<ConcreteTrace>& traces, const TestCase& tc, SolverSession& session);

// The consumed part of a FAIL run split into σ and ev, each judged
// against the specification's tree.
struct FailEvidence {
  Membership prefix;
  Membership extension;

  [[nodiscard]] bool confirmed() const {
    return prefix.kind != MembershipKind::NotInSem && extension.kind == MembershipKind::NotInSem;
  }
};

FailEvidence check_fail_evidence(const ConcreteTrace& consumed, SymbolicTree& spec, SolverSession& session);

[[nodiscard]] std::string outcome_name(const RunOutcome& o);

}  // namespace tiosts
