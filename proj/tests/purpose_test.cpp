#include "support.hpp"

#include "tiosts/purpose.hpp"

#include <gtest/gtest.h>

using namespace tiosts;
using namespace tiosts::testing;

namespace {

PurposeCheck check(SymbolicTree& tree, const std::string& sel) {
  return validate_purpose(tree.path_of(parse_selector(sel, tree.model())), tree, shared_session());
}

}  // namespace

TEST(Purpose, ToyPurposeIsTraceDeterministic) {
  SymbolicTree tree(load_model(model_path("toy.tiosts")));
  PurposeCheck c = check(tree, "tr1,tr2");
  ASSERT_TRUE(c.accepted());
  EXPECT_EQ(c.purpose->pc, tree.at(c.purpose->target()).pc);
  const auto& sibs = tree.children(c.purpose->path[1]);
  ASSERT_EQ(sibs.size(), 2u);
  EXPECT_TRUE(shared_session().check(determinism_formula(tree, sibs[0], sibs[1])).unsat());
  EXPECT_TRUE(check(tree, "tr1,tr3").accepted());
}

TEST(Purpose, DuplicatedOutputIsRejected) {
  SymbolicTree tree(load_model(model_path("toy_dup.tiosts")));
  PurposeCheck c = check(tree, "tr1,tr2");
  ASSERT_FALSE(c.accepted());
  ASSERT_EQ(c.rejection.violations.size(), 1u);
  const auto& v = c.rejection.violations.front();
  EXPECT_EQ(v.transition, "tr2");
  EXPECT_EQ(v.sibling_transition, "tr4");
  EXPECT_EQ(v.status, SatStatus::Sat);
  const std::string json = rejection_json(c.rejection, tree);
  EXPECT_NE(json.find("\"sibling_transition\": \"tr4\""), std::string::npos);
  EXPECT_NE(json.find("trace-determinism violated"), std::string::npos);
}

TEST(Purpose, MustEndOnAnOutput) {
  SymbolicTree tree(atm());
  PurposeCheck c = check(tree, "tr1");
  EXPECT_FALSE(c.accepted());
  EXPECT_TRUE(c.rejection.violations.empty());
  EXPECT_FALSE(validate_purpose({0}, tree, shared_session()).accepted());
}

TEST(Purpose, UnsatisfiableTargetIsRejected) {
  const std::string text =
      "model u\nvars:\n  a: int\nchannels:\n  in controllable I(int)\n  out O()\nstates:\n  s0, s1, s2\n"
      "transitions:\n  t1: s0 -> s1 on I?(a) [a > 0]\n  t2: s1 -> s2 on O! [a < 0]\n";
  SymbolicTree tree(parse_model(text));
  PurposeCheck c = check(tree, "t1,t2");
  ASSERT_FALSE(c.accepted());
  EXPECT_NE(c.rejection.reasons.front().find("unsatisfiable"), std::string::npos);
}

TEST(Purpose, AtmPurposeIsAccepted) {
  SymbolicTree tree(atm());
  PurposeCheck c = check(tree, "tr1,tr2,tr3,tr4");
  ASSERT_TRUE(c.accepted());
  EXPECT_TRUE(c.purpose->on_backbone(c.purpose->path[2]));
  EXPECT_TRUE(check(tree, "tr1,tr11").accepted());
}
