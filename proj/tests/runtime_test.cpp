#include "support.hpp"

#include "tiosts/error.hpp"
#include "tiosts/runtime.hpp"

#include <gtest/gtest.h>

using namespace tiosts;
using namespace tiosts::testing;

namespace {

ConcreteTrace trace(const std::string& text) { return parse_trace(text, atm().channels, atm().consts); }

}  // namespace

TEST(Runtime, BundledTraces) {
  const AtmFixture& f = atm_fixture();
  SolverSession& s = shared_session();

  RunOutcome reach = run_trace(atm_trace("reach_ec2"), f.tc, s);
  EXPECT_TRUE(reach.incomplete());
  EXPECT_EQ(std::get<EcId>(reach.final.state), f.path[2]);
  EXPECT_EQ(outcome_name(reach), "Incomplete");

  EXPECT_EQ(run_trace(atm_trace("fail_value"), f.tc, s).verdict, Verdict::FailOut);
  EXPECT_EQ(run_trace(atm_trace("fail_late"), f.tc, s).verdict, Verdict::FailOut);
  RunOutcome dur = run_trace(atm_trace("fail_dur"), f.tc, s);
  EXPECT_EQ(dur.verdict, Verdict::FailDur);
  EXPECT_EQ(dur.consumed, 2u);
  EXPECT_EQ(outcome_name(dur), "FAIL_dur");
}

TEST(Runtime, FirstStepBindsTheStimulus) {
  const AtmFixture& f = atm_fixture();
  RunState run = start(f.tc);
  EXPECT_EQ(std::get<EcId>(run.state), f.path[0]);
  step(run, trace("0 Transc? [50,4]\n").front(), f.tc, shared_session());
  const Valuation& nu = run.nu.values();
  EXPECT_EQ(nu.at("z#0"), Value::time(0));
  EXPECT_EQ(nu.at("Transc$in#0.1"), Value::integer(50));
  EXPECT_EQ(nu.at("Transc$in#0.2"), Value::time(4));
  ASSERT_EQ(run.log.size(), 1u);
  EXPECT_EQ(run.log[0].rule, Rule::R1);
  EXPECT_EQ(std::get<EcId>(run.state), f.path[1]);

  step(run, trace("1/2 Debit! [1,51,42]\n").front(), f.tc, shared_session());
  EXPECT_EQ(run.log.back().rule, Rule::R2);
  EXPECT_EQ(std::get<EcId>(run.state), f.path[2]);
  EXPECT_EQ(run.nu.values().at("Debit$out#1.2"), Value::integer(51));
}

TEST(Runtime, EmptyTraceStaysAtTheInitialState) {
  const AtmFixture& f = atm_fixture();
  RunOutcome o = run_trace({}, f.tc, shared_session());
  EXPECT_TRUE(o.incomplete());
  EXPECT_EQ(std::get<EcId>(o.final.state), f.path[0]);
  EXPECT_EQ(o.consumed, 0u);
}

TEST(Runtime, VerdictSets) {
  const AtmFixture& f = atm_fixture();
  std::vector<ConcreteTrace> all;
  for (const char* n : {"reach_ec2", "fail_value", "fail_late", "fail_dur"}) all.push_back(atm_trace(n));
  EXPECT_EQ(vdt(all, f.tc, shared_session()), (std::set<Verdict>{Verdict::FailOut, Verdict::FailDur}));
  EXPECT_TRUE(vdt({}, f.tc, shared_session()).empty());
}

TEST(Runtime, InterpretationNeverRebinds) {
  Interpretation nu;
  const Variable v{"x#0", Sort::Int, VarKind::FreshOut};
  nu.bind(v, Value::integer(1), 0);
  EXPECT_TRUE(nu.bound("x#0"));
  EXPECT_THROW(nu.bind(v, Value::integer(2), 1), ExecutionError);
  EXPECT_THROW(nu.bind(Variable{"y#0", Sort::Int, VarKind::FreshOut}, Value::time(1), 1), ExecutionError);
  ASSERT_EQ(nu.history().size(), 1u);
  EXPECT_EQ(nu.history()[0].step, 0u);
}

TEST(Runtime, MalformedEventsAreErrors) {
  const AtmFixture& f = atm_fixture();
  RunState run = start(f.tc);
  ConcreteEvent bogus{Rational(0), ConcreteAction{"Nope", EventKind::Output, {}}};
  EXPECT_THROW(step(run, bogus, f.tc, shared_session()), Error);
  EXPECT_THROW((void)run_trace(trace("0 Transc? [50,4]\n5 Debit! [1,51,42]\n"), f.tc, shared_session()),
               ExecutionError);
}

TEST(Runtime, FailEvidenceIsConfirmed) {
  const AtmFixture& f = atm_fixture();
  SolverSession& s = shared_session();
  for (const char* n : {"fail_value", "fail_late", "fail_dur"}) {
    const ConcreteTrace t = atm_trace(n);
    RunOutcome o = run_trace(t, f.tc, s);
    ASSERT_TRUE(o.verdict && is_fail(*o.verdict)) << n;
    SymbolicTree spec(atm());
    const ConcreteTrace consumed(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(o.consumed));
    FailEvidence e = check_fail_evidence(consumed, spec, s);
    EXPECT_TRUE(e.confirmed()) << n;
    EXPECT_EQ(e.prefix.kind, MembershipKind::InTraces) << n;
  }
}
