#include "tiosts/runtime.hpp"

#include "tiosts/error.hpp"

#include <spdlog/spdlog.h>

namespace tiosts {

void Interpretation::bind(const Variable& v, const Value& value, std::size_t step) {
  if (value.sort != v.sort) {
    throw ExecutionError("value " + format_value(value) + " does not have the sort of " + v.name);
  }
  if (!values_.emplace(v.name, value).second) throw ExecutionError("variable " + v.name + " is already bound");
  history_.push_back({v.name, value, step});
}

std::optional<Verdict> RunState::verdict() const {
  if (const auto* v = std::get_if<Verdict>(&state)) return *v;
  return std::nullopt;
}

RunState start(const TestCase& tc) {
  if (tc.states.empty()) throw ExecutionError("test case without backbone states");
  return RunState{tc.initial(), {}, {}};
}

void step(RunState& run, const ConcreteEvent& ev, const TestCase& tc, SolverSession& session) {
  const auto* q = std::get_if<EcId>(&run.state);
  if (!q) throw ExecutionError("the run already reached " + state_name(run.state));
  validate_event(ev, tc.channels);
  const std::size_t index = run.log.size();
  const BackboneState& bs = tc.state(*q);
  const ConcreteAction mirrored = mirror(ev.action, tc.channels);

  Interpretation next = run.nu;
  next.bind(bs.dur, Value::time(ev.delay), index);
  if (!ev.action.is_delta()) {
    const auto& registry = ev.action.kind == EventKind::Output ? bs.outputs : bs.inputs;
    auto it = registry.find(ev.action.channel);
    const auto& vars = it == registry.end() ? std::vector<Variable>{} : it->second;
    if (vars.size() != ev.action.values.size()) {
      throw ExecutionError("arity mismatch for " + format_action(ev.action) + " at " + state_name(run.state));
    }
    for (std::size_t k = 0; k < vars.size(); ++k) next.bind(vars[k], ev.action.values[k], index);
  }

  StepRecord rec{ev, *q, 0, Rule::R1, run.state, {}};
  std::vector<std::size_t> skips;
  std::vector<std::size_t> verdicts;
  for (std::size_t i = 0; i < tc.transitions.size(); ++i) {
    const TcTransition& t = tc.transitions[i];
    if (t.source != *q || t.action.channel != mirrored.channel || t.action.kind != mirrored.kind) continue;
    CheckResult r = session.eval_under(t.guard, next.values());
    rec.checks.push_back({i, r.status});
    if (r.unknown()) {
      throw SolverUnknown("guard of " + to_string(t.rule) + " at " + state_name(t.source) + " undecided: " + r.reason);
    }
    if (!r.sat()) continue;
    (is_skip_class(t.rule) ? skips : verdicts).push_back(i);
  }

  const std::string where = format_event(ev) + " at " + state_name(run.state);
  std::size_t chosen = 0;
  if (skips.size() > 1) {
    throw ExecutionError("trace-determinism violated: " + std::to_string(skips.size()) +
                         " backbone transitions accept " + where);
  }
  if (skips.size() == 1) {
    if (!verdicts.empty()) {
      spdlog::warn("{} also enables {}; following the backbone", where,
                   to_string(tc.transitions[verdicts.front()].rule));
    }
    chosen = skips.front();
  } else {
    if (verdicts.empty()) throw ExecutionError("no test case transition accepts " + where);
    chosen = verdicts.front();
    for (std::size_t i : verdicts) {
      if (tc.transitions[i].target != tc.transitions[chosen].target) {
        throw ExecutionError("conflicting verdicts " + state_name(tc.transitions[chosen].target) + " and " +
                             state_name(tc.transitions[i].target) + " for " + where);
      }
    }
  }

  const TcTransition& t = tc.transitions[chosen];
  rec.transition = chosen;
  rec.rule = t.rule;
  rec.target = t.target;
  run.nu = std::move(next);
  run.state = t.target;
  run.log.push_back(std::move(rec));
}

RunOutcome run_trace(const ConcreteTrace& trace, const TestCase& tc, SolverSession& session) {
  RunOutcome out{std::nullopt, start(tc), 0};
  for (const auto& ev : trace) {
    if (out.final.at_verdict()) break;
    step(out.final, ev, tc, session);
    ++out.consumed;
  }
  out.verdict = out.final.verdict();
  return out;
}

std::set<Verdict> vdt(const std::vector<ConcreteTrace>& traces, const TestCase& tc, SolverSession& session) {
  std::set<Verdict> out;
  for (const auto& t : traces) {
    if (auto v = run_trace(t, tc, session).verdict) out.insert(*v);
  }
  return out;
}

FailEvidence check_fail_evidence(const ConcreteTrace& consumed, SymbolicTree& spec, SolverSession& session) {
  if (consumed.empty()) throw ExecutionError("a verdict needs at least one event");
  ConcreteTrace prefix(consumed.begin(), consumed.end() - 1);
  return {sem_member(prefix, spec, session), sem_member(consumed, spec, session)};
}

std::string outcome_name(const RunOutcome& o) {
  return o.verdict ? std::string(to_string(*o.verdict)) : "Incomplete";
}

}  // namespace tiosts
