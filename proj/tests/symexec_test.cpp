#include "support.hpp"

#include "tiosts/error.hpp"
#include "tiosts/symexec.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace tiosts;
using namespace tiosts::testing;

namespace {

struct AtmTree : ::testing::Test {
  SolverSession& s = shared_session();
  SymbolicTree tree{atm()};
  std::vector<EcId> path = tree.path_of(parse_selector("tr1,tr2,tr3,tr4", atm()));

  std::string lambda_of(EcId id, const std::string& var) { return to_string(tree.at(id).lambda.at(var)); }
  ConcreteTrace trace(const std::string& text) { return parse_trace(text, atm().channels, atm().consts); }
};

}  // namespace

TEST_F(AtmTree, RootAndChildren) {
  EXPECT_TRUE(tree.root().is_root());
  EXPECT_TRUE(tree.root().pc.is_true());
  const auto& kids = tree.children(0);
  ASSERT_EQ(kids.size(), 2u);
  EXPECT_EQ(tree.at(kids[0]).via, "tr1");
  EXPECT_EQ(tree.at(kids[1]).via, "tr8");
  EXPECT_EQ(path.size(), 5u);
  EXPECT_EQ(tree.at(path[4]).state, "q0");
}

TEST_F(AtmTree, FreshRegistryNaming) {
  const FreshRegistry& r = tree.registry(0);
  EXPECT_EQ(r.dur.name, "z#0");
  EXPECT_EQ(r.dur.kind, VarKind::FreshDur);
  ASSERT_EQ(r.in.at("Transc").size(), 2u);
  EXPECT_EQ(r.in.at("Transc")[0].name, "Transc$in#0.1");
  EXPECT_EQ(r.in.at("Transc")[1].sort, Sort::Time);
  EXPECT_EQ(r.out.at("Cash")[0].name, "Cash$out#0");
  EXPECT_TRUE(r.out.at("Abort").empty());
  EXPECT_EQ(tree.at(path[1]).ev->action.vars, r.in.at("Transc"));
}

TEST_F(AtmTree, DebitContext) {
  const EcId ec = path[2];
  EXPECT_EQ(to_string(tree.at(ec).pc),
            "z#1 <= 1 && Transc$in#0.2 >= 4 && fee$ini > 0 && 10 <= Transc$in#0.1 && Transc$in#0.1 <= 1000 && "
            "Debit$out#1.1 = rid$ini + 1 && Debit$out#1.2 = Transc$in#0.1 + fee$ini && Debit$out#1.3 = 42");
  EXPECT_EQ(lambda_of(ec, "wclock"), "z#1");
  EXPECT_EQ(lambda_of(ec, "rclock"), "z#0 + z#1");
  EXPECT_EQ(lambda_of(ec, "rid"), "rid$ini + 1");
  EXPECT_EQ(lambda_of(ec, "amt"), "Transc$in#0.1");
  EXPECT_EQ(lambda_of(ec, "fee"), "fee$ini");
}

TEST_F(AtmTree, PathConditionsGrowByPrefix) {
  tree.explore(3);
  for (EcId id = 1; id < tree.size(); ++id) {
    const auto parent = conjuncts(tree.at(tree.at(id).pec).pc);
    const auto child = conjuncts(tree.at(id).pc);
    for (const auto& c : parent) EXPECT_NE(std::find(child.begin(), child.end(), c), child.end()) << "ec" << id;
  }
}

TEST_F(AtmTree, QuiescenceEnrichment) {
  EXPECT_TRUE(tree.quiescence_condition(path[0], s).is_true());
  auto d = tree.enrich_quiescence(path[0], s);
  ASSERT_TRUE(d.has_value());
  EXPECT_TRUE(tree.at(*d).delta);
  EXPECT_TRUE(tree.children(*d).empty());
  EXPECT_EQ(tree.enrich_quiescence(path[0], s), d);
  for (int i = 1; i <= 3; ++i) EXPECT_FALSE(tree.enrich_quiescence(path[i], s).has_value()) << i;
}

TEST_F(AtmTree, Satisfiability) {
  tree.explore(2);
  EXPECT_EQ(tree.satisfiable(path[2], s), SatFlag::Sat);
  const auto& q1 = tree.children(path[1]);
  ASSERT_EQ(q1.size(), 3u);
  for (EcId c : q1) EXPECT_EQ(tree.satisfiable(c, s), SatFlag::Sat);
}

TEST_F(AtmTree, PathOfRejectsUnexecutableTransitions) {
  PathSelector bad{{"tr1", "tr3"}};
  EXPECT_THROW((void)tree.path_of(bad), Error);
}

TEST_F(AtmTree, Membership) {
  Membership m = sem_member(atm_trace("reach_ec2"), tree, s);
  EXPECT_EQ(m.kind, MembershipKind::InTraces);
  EXPECT_EQ(m.witness, (std::vector<EcId>{path[0], path[1], path[2]}));
  for (const char* f : {"fail_value", "fail_late", "fail_dur"}) {
    EXPECT_EQ(sem_member(atm_trace(f), tree, s).kind, MembershipKind::NotInSem) << f;
  }
  EXPECT_EQ(sem_member({}, tree, s).kind, MembershipKind::InTraces);
  EXPECT_EQ(sem_member(trace("3 delta!\n"), tree, s).kind, MembershipKind::InTraces);
  EXPECT_EQ(sem_member(trace("0 Transc? [50,4]\n1/2 delta!\n"), tree, s).kind, MembershipKind::InSemViaQuiescence);
  EXPECT_EQ(sem_member(trace("0 Transc? [50,4]\n2 delta!\n"), tree, s).kind, MembershipKind::NotInSem);
  EXPECT_EQ(sem_member(trace("1 delta!\n0 Transc? [50,4]\n"), tree, s).kind, MembershipKind::NotInSem);
  EXPECT_EQ(sem_member(trace("0 Transc? [5,4]\n0 Abort!\n"), tree, s).kind, MembershipKind::InTraces);
  EXPECT_EQ(sem_member(trace("0 Transc? [50,4]\n0 Abort!\n"), tree, s).kind, MembershipKind::NotInSem);
}

TEST(Symexec, DepthCapIsInconclusive) {
  SymbolicTree tree(atm(), TreeOptions{2, false});
  const EcId c1 = tree.children(0).front();
  const EcId c2 = tree.children(c1).front();
  EXPECT_THROW((void)tree.children(c2), InconclusiveError);
  ConcreteTrace t = parse_trace("0 Transc? [50,4]\n0 Debit! [1,51,42]\n0 Auth? [1,1,42]\n", atm().channels);
  EXPECT_THROW((void)sem_member(t, tree, shared_session()), InconclusiveError);
}

TEST(SymexecProperty, ConcretizedPathsAreTraces) {
  SolverSession& s = shared_session();
  SymbolicTree tree(atm());
  tree.explore(4, &s);
  std::vector<EcId> sat;
  for (EcId id = 1; id < tree.size(); ++id) {
    if (tree.satisfiable(id, s) == SatFlag::Sat) sat.push_back(id);
  }
  ASSERT_GT(sat.size(), 10u);
  std::mt19937 rng(5);
  std::shuffle(sat.begin(), sat.end(), rng);
  sat.resize(25);
  for (EcId id : sat) {
    ConcreteTrace t = tree.concretize(tree.ancestry(id), s);
    SymbolicTree fresh(atm());
    Membership m = sem_member(t, fresh, s);
    EXPECT_EQ(m.kind, MembershipKind::InTraces) << "ec" << id << "\n" << format_trace(t);
    EXPECT_EQ(m.witness.size(), t.size() + 1);
  }
}

TEST(Symexec, DumpTreeIsDeterministic) {
  SolverSession& s = shared_session();
  SymbolicTree a(atm());
  SymbolicTree b(atm());
  a.explore(2, &s);
  b.explore(2, &s);
  EXPECT_EQ(dump_tree(a, s, true), dump_tree(b, s, true));
  EXPECT_NE(dump_tree(a, s, false).find("ec0 | q0"), std::string::npos);
}
