#include "support.hpp"

#include "tiosts/error.hpp"
#include "tiosts/lutsim.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace tiosts;
using namespace tiosts::testing;

TEST(Mutation, ParseDescribeRoundTrip) {
  for (const char* text : {"offset:Debit:2:-1", "delay:tr2:5", "drop:tr5", "tighten:tr4:amt > 20", "loosen:tr10:tb = 3",
                           "delay:tr3:-1/2"}) {
    EXPECT_EQ(describe(parse_mutation(text)), text);
  }
  const Mutation m = parse_mutation(" offset:Debit:2:-1 ");
  EXPECT_EQ(m.kind, MutationKind::OutputOffset);
  EXPECT_EQ(m.component, 2u);
  EXPECT_EQ(m.delta, Rational(-1));
  for (const char* bad : {"bogus:tr1", "offset:Debit:0:1", "offset:Debit:2", "delay:tr2:x", "drop:", "tighten:tr2:"}) {
    EXPECT_THROW((void)parse_mutation(bad), Error) << bad;
  }
  EXPECT_EQ(parse_mutation_list("# faults\n\ndrop:tr5  # trailing\ndelay:tr2:5\n").size(), 2u);
}

TEST(Mutation, OffsetAppliesToEveryEmission) {
  Mutant m = mutate(atm(), parse_mutation("offset:Debit:2:-1"));
  ASSERT_EQ(m.edits.size(), 2u);
  EXPECT_EQ(to_string(m.model.find_transition("tr2")->action.sent[1]), "amt + fee - 1");
  EXPECT_EQ(to_string(m.model.find_transition("tr11")->action.sent[1]), "amt - 1");
  EXPECT_THROW((void)mutate(atm(), parse_mutation("offset:Transc:1:1")), ModelError);
  EXPECT_THROW((void)mutate(atm(), parse_mutation("offset:Debit:4:1")), ModelError);
}

TEST(Mutation, DelayDropTighten) {
  Mutant d = mutate(atm(), parse_mutation("delay:tr2:5"));
  EXPECT_NE(to_string(d.model.find_transition("tr2")->guard).find("wclock <= 6"), std::string::npos) << d.edits[0];
  EXPECT_THROW((void)mutate(atm(), parse_mutation("delay:tr1:1")), ModelError);

  Mutant r = mutate(atm(), parse_mutation("drop:tr5"));
  EXPECT_EQ(r.model.transitions.size(), atm().transitions.size() - 1);
  EXPECT_EQ(r.model.find_transition("tr5"), nullptr);
  EXPECT_THROW((void)mutate(atm(), parse_mutation("drop:tr42")), ModelError);

  Mutant t = mutate(atm(), parse_mutation("tighten:tr4:amt > 20"));
  EXPECT_EQ(conjuncts(t.model.find_transition("tr4")->guard).size(),
            conjuncts(atm().find_transition("tr4")->guard).size() + 1);
  EXPECT_THROW((void)mutate(atm(), parse_mutation("tighten:tr4:nope > 1")), ParseError);
}

TEST(Sampling, EmptyRequestYieldsNothing) {
  EXPECT_TRUE(sample_traces(atm(), 0, 4, 1, shared_session()).empty());
}

TEST(Sampling, SampledTracesBelongToTheSemantics) {
  SolverSession& s = shared_session();
  const TraceSet ts = sample_traces(atm(), 6, 4, 3, s);
  ASSERT_FALSE(ts.empty());
  for (const auto& t : ts) {
    SymbolicTree tree(atm());
    EXPECT_NE(sem_member(t, tree, s).kind, MembershipKind::NotInSem) << format_trace(t);
  }
}

TEST(Sampling, HCloseIsPrefixClosedAndIdempotent) {
  SolverSession& s = shared_session();
  const TraceSet base{atm_trace("reach_ec2"), parse_trace("0 Transc? [50,4]\n1/2 Debit! [1,51,42]\n", atm().channels)};
  const TraceSet once = h_close(base, atm(), s);
  for (const auto& t : base) EXPECT_TRUE(once.contains(t));
  EXPECT_TRUE(once.contains(ConcreteTrace{}));
  for (const auto& t : once) {
    for (std::size_t k = 0; k < t.size(); ++k) {
      EXPECT_TRUE(once.contains(ConcreteTrace(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(k))));
    }
  }
  // temporary quiescence right after Transc is admitted before the delayed events
  const auto with_delta = std::count_if(once.begin(), once.end(), [](const ConcreteTrace& t) {
    return t.size() == 2 && t[1].action.is_delta() && t[1].delay == Rational(0);
  });
  EXPECT_EQ(with_delta, 1);
  EXPECT_EQ(h_close(once, atm(), s), once);
}

TEST(Cosim, DeterministicForAFixedSeed) {
  const AtmFixture& f = atm_fixture();
  CosimConfig cfg;
  cfg.seed = 11;
  CosimResult a = cosim(atm(), f.tc, cfg, shared_session());
  CosimResult b = cosim(atm(), f.tc, cfg, shared_session());
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.outcome.verdict, b.outcome.verdict);
  EXPECT_FALSE(a.trace.empty());
}

TEST(Cosim, ConformantImplementationNeverFails) {
  const AtmFixture& f = atm_fixture();
  CosimConfig cfg;
  cfg.seed = 100;
  for (const auto& r : cosim_batch(atm(), f.tc, cfg, 10, SolverConfig{})) {
    EXPECT_FALSE(r.failed()) << r.seed << "\n" << format_trace(r.trace);
  }
}

TEST(Cosim, OutputOffsetIsCaught) {
  const AtmFixture& f = atm_fixture();
  const Tiosts lut = mutate(atm(), parse_mutation("offset:Debit:2:-1")).model;
  CosimConfig cfg;
  cfg.seed = 200;
  bool caught = false;
  for (const auto& r : cosim_batch(lut, f.tc, cfg, 10, SolverConfig{})) {
    if (!r.failed()) continue;
    caught = true;
    EXPECT_EQ(*r.outcome.verdict, Verdict::FailOut);
  }
  EXPECT_TRUE(caught);
}
