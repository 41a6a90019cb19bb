#include "support.hpp"

#include "tiosts/error.hpp"
#include "tiosts/testgen.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace tiosts;
using namespace tiosts::testing;

namespace {

std::size_t count_rule(const TestCase& tc, EcId ec, Rule r) {
  std::size_t n = 0;
  for (const auto* t : tc.outgoing(ec)) n += t->rule == r;
  return n;
}

}  // namespace

TEST(Testgen, NamesRoundTrip) {
  for (Verdict v : kAllVerdicts) EXPECT_EQ(parse_verdict(to_string(v)), v);
  for (int i = 1; i <= 10; ++i) EXPECT_EQ(parse_rule(to_string(static_cast<Rule>(i))), static_cast<Rule>(i));
  EXPECT_FALSE(parse_verdict("FAIL").has_value());
  EXPECT_EQ(state_name(TcState{Verdict::IncUcInSpec}), "INC_ucIn_spec");
  EXPECT_EQ(state_name(TcState{EcId{7}}), "ec7");
}

TEST(Testgen, AtmCensus) {
  const TestCase& tc = atm_fixture().tc;
  const auto c = tc.census();
  EXPECT_EQ(c.at(Rule::R1), 1u);
  EXPECT_EQ(c.at(Rule::R2), 1u);
  EXPECT_EQ(c.at(Rule::R3), 1u);
  EXPECT_EQ(c.at(Rule::R4), 5u);
  EXPECT_EQ(c.at(Rule::R5), 16u);
  EXPECT_EQ(c.at(Rule::R6), 1u);
  EXPECT_EQ(c.at(Rule::R7), 1u);
  EXPECT_EQ(c.at(Rule::R8), 3u);
  EXPECT_EQ(c.at(Rule::R9), 2u);
  EXPECT_EQ(c.at(Rule::R10), 3u);
  EXPECT_EQ(tc.transitions.size(), 34u);
}

TEST(Testgen, EveryGuardIsSatisfiable) {
  for (const auto& t : atm_fixture().tc.transitions) {
    EXPECT_TRUE(shared_session().check(t.guard).sat()) << to_string(t.rule) << " at " << state_name(t.source);
  }
}

TEST(Testgen, StructuralShape) {
  const AtmFixture& f = atm_fixture();
  const TestCase& tc = f.tc;
  ASSERT_EQ(tc.states.size(), 4u);
  EXPECT_EQ(tc.initial(), f.path[0]);
  for (const auto& s : tc.states) {
    std::set<std::pair<std::string, std::string>> skips;
    std::set<std::string> r5;
    std::set<std::string> r8;
    for (const auto* t : tc.outgoing(s.id)) {
      if (is_skip_class(t->rule)) EXPECT_TRUE(skips.emplace(t->action.channel, state_name(t->target)).second);
      if (t->rule == Rule::R5) EXPECT_TRUE(r5.insert(t->action.channel).second);
      if (t->rule == Rule::R8) EXPECT_TRUE(r8.insert(t->action.channel).second);
      if (t->rule == Rule::R5) EXPECT_EQ(t->action.vars, s.outputs.at(t->action.channel));
      if (t->rule == Rule::R8) EXPECT_EQ(t->action.vars, s.inputs.at(t->action.channel));
      if (t->rule == Rule::R9 || t->rule == Rule::R10) EXPECT_EQ(t->action.kind, EventKind::Delta);
    }
    EXPECT_LE(count_rule(tc, s.id, Rule::R9), 1u);
    EXPECT_LE(count_rule(tc, s.id, Rule::R10), 1u);
  }
  const auto& r1 = *tc.outgoing(f.path[0]).front();
  EXPECT_EQ(r1.rule, Rule::R1);
  EXPECT_EQ(r1.action.kind, EventKind::Output);
  EXPECT_EQ(r1.resets, (std::vector<Variable>{f.tree.registry(f.path[1]).dur}));
  EXPECT_EQ(std::get<EcId>(r1.target), f.path[1]);
  for (const auto& t : tc.transitions) {
    if (t.rule == Rule::R3) EXPECT_TRUE(t.resets.empty());
  }
}

TEST(Testgen, StimulationRevealsOnlyTheFirstEvent) {
  const AtmFixture& f = atm_fixture();
  const TcTransition& r1 = *f.tc.outgoing(f.path[0]).front();
  ASSERT_EQ(r1.guard.op(), Op::Exists);
  const VarSet free = free_vars(r1.guard);
  for (const auto& v : free) {
    EXPECT_TRUE(v.name == "z#0" || v.name.rfind("Transc$in#0", 0) == 0) << v.name;
  }
  for (const auto& v : r1.guard.bound()) EXPECT_NE(v.name, "z#0");
}

TEST(Testgen, ObservationGuardsQuantifyInitialValues) {
  const AtmFixture& f = atm_fixture();
  for (const auto* t : f.tc.outgoing(f.path[1])) {
    if (t->rule != Rule::R2) continue;
    const std::string g = to_smtlib(t->guard);
    EXPECT_NE(g.find("(< |z#1| 5.0)"), std::string::npos) << g;
    EXPECT_NE(g.find("(exists ((rid$ini Int) (fee$ini Int))"), std::string::npos) << g;
  }
}

TEST(Testgen, JsonRoundTripAndDeterminism) {
  const TestCase& tc = atm_fixture().tc;
  const std::string js = export_json(tc);
  TestCase back = import_json(js);
  EXPECT_EQ(back, tc);
  EXPECT_EQ(export_json(back), js);

  SolverSession s;
  AtmFixture again(s);
  EXPECT_EQ(export_json(again.tc), js);

  EXPECT_NE(js.find("\"format\": \"tiosts-tc/1\""), std::string::npos);
  EXPECT_NE(js.find("\"rule\": \"R3\""), std::string::npos);
  std::size_t pass_states = 0;
  for (std::size_t p = js.find("\"id\": \"PASS\""); p != std::string::npos; p = js.find("\"id\": \"PASS\"", p + 1)) {
    ++pass_states;
  }
  EXPECT_EQ(pass_states, 1u);
  EXPECT_THROW((void)import_json("{}"), Error);
  EXPECT_THROW((void)import_json("not json"), Error);
}

namespace {

TestCase toy_case(SolverSession& s, GenOptions opts = {}) {
  SymbolicTree tree(load_model(model_path("toy.tiosts")));
  auto path = tree.path_of(parse_selector("tr1,tr2", tree.model()));
  TestPurpose tp = *validate_purpose(path, tree, s).purpose;
  return generate(tp, tree, s, opts);
}

}  // namespace

TEST(Testgen, ToyCase) {
  const auto c = toy_case(shared_session()).census();
  EXPECT_EQ(c.at(Rule::R1), 1u);
  EXPECT_EQ(c.at(Rule::R3), 1u);
  EXPECT_EQ(c.at(Rule::R4), 1u);
  EXPECT_EQ(c.at(Rule::R5), 2u);
  EXPECT_EQ(c.at(Rule::R9), 2u);
  // the unrevealed Debit value keeps the unspecified-quiescence guard satisfiable at ec1
  EXPECT_EQ(c.at(Rule::R10), 1u);
}

TEST(Testgen, DeltaQuantifyAllClosesEventVariables) {
  GenOptions opts;
  opts.delta_quantify_all = true;
  const auto c = toy_case(shared_session(), opts).census();
  EXPECT_EQ(c.at(Rule::R9), 2u);
  EXPECT_EQ(c.at(Rule::R10), 0u);
}
