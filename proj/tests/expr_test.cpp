#include "random_expr.hpp"

#include "tiosts/error.hpp"
#include "tiosts/eval.hpp"
#include "tiosts/expr.hpp"
#include "tiosts/model.hpp"

#include <gtest/gtest.h>

using namespace tiosts;
using tiosts::testing::ExprGen;

namespace {

const Variable x{"x", Sort::Int, VarKind::Data};
const Variable y{"y", Sort::Int, VarKind::Data};
const Variable t{"t", Sort::Time, VarKind::Clock};
const Variable z{"z#0", Sort::Time, VarKind::FreshDur};

}  // namespace

TEST(Rational, ParseAndFormat) {
  EXPECT_EQ(parse_rational("5"), Rational(5));
  EXPECT_EQ(parse_rational("-3"), Rational(-3));
  EXPECT_EQ(parse_rational("1.25"), Rational(5, 4));
  EXPECT_EQ(parse_rational("1/2"), Rational(1, 2));
  EXPECT_EQ(format_rational(Rational(-7, 2)), "-7/2");
  EXPECT_EQ(format_decimal(Rational(5, 4)), "1.25");
  EXPECT_THROW((void)format_decimal(Rational(1, 3)), Error);
  EXPECT_THROW((void)parse_rational("abc"), Error);
}

TEST(Expr, AddDropsZeroAndFoldsLiterals) {
  EXPECT_EQ(mk_add(mk_time(0), mk_var(z)), mk_var(z));
  EXPECT_EQ(mk_add(mk_int(2), mk_int(3)), mk_int(5));
  EXPECT_EQ(mk_add(mk_var(t), mk_int(2)).sort(), Sort::Time);
}

TEST(Expr, ConnectivesFlattenAndSimplify) {
  Expr a = mk_lt(mk_var(x), mk_int(1));
  Expr b = mk_gt(mk_var(y), mk_int(2));
  Expr c = mk_eq(mk_var(x), mk_var(y));
  EXPECT_EQ(mk_and(mk_and(a, b), c).args().size(), 3u);
  EXPECT_EQ(mk_and(mk_true(), a), a);
  EXPECT_TRUE(mk_and(std::vector<Expr>{}).is_true());
  EXPECT_TRUE(mk_or(std::vector<Expr>{}).is_false());
  EXPECT_EQ(mk_or(mk_false(), b), b);
  EXPECT_EQ(mk_forall({}, a), a);
}

TEST(Expr, SortErrors) {
  EXPECT_THROW((void)mk_add(mk_var(x), mk_true()), SortError);
  EXPECT_THROW((void)mk_and(mk_var(x), mk_true()), SortError);
  EXPECT_THROW((void)mk_mul(mk_var(x), mk_var(y)), SortError);
  EXPECT_THROW((void)mk_time(Rational(-1)), SortError);
  EXPECT_THROW((void)mk_lt(mk_var(x), mk_var(t)), SortError);
}

TEST(Expr, FreeAndBoundVariables) {
  Expr f = mk_exists({x}, mk_and(mk_lt(mk_var(x), mk_var(y)), mk_le(mk_var(t), mk_time(1))));
  EXPECT_EQ(free_vars(f), (VarSet{y, t}));
  EXPECT_EQ(bound_vars(f), (VarSet{x}));
}

TEST(Expr, SubstitutionAvoidsCapture) {
  Expr f = mk_exists({x}, mk_lt(mk_var(x), mk_var(y)));
  Expr g = substitute(f, {{"y", mk_var(x)}});
  ASSERT_TRUE(is_quantifier(g.op()));
  EXPECT_NE(g.bound().front().name, "x");
  EXPECT_TRUE(free_vars(g).contains(x));
  EXPECT_THROW((void)substitute(mk_lt(mk_var(x), mk_int(0)), {{"x", mk_var(t)}}), SortError);
}

TEST(Expr, AlphaEquivalence) {
  const Variable w{"w", Sort::Int, VarKind::Data};
  Expr a = mk_forall({x}, mk_lt(mk_var(x), mk_var(y)));
  Expr b = mk_forall({w}, mk_lt(mk_var(w), mk_var(y)));
  EXPECT_TRUE(alpha_equivalent(a, b));
  EXPECT_FALSE(alpha_equivalent(a, mk_forall({w}, mk_lt(mk_var(y), mk_var(w)))));
}

TEST(Expr, ConjunctsOfTrueAreEmpty) {
  EXPECT_TRUE(conjuncts(mk_true()).empty());
  Expr a = mk_lt(mk_var(x), mk_int(1));
  EXPECT_EQ(conjuncts(a).size(), 1u);
}

TEST(ExprProperty, EmptySubstitutionIsIdentity) {
  ExprGen gen(11);
  for (int i = 0; i < 300; ++i) {
    Expr f = gen.formula(3);
    EXPECT_EQ(substitute(f, {}), f) << to_string(f);
  }
}

TEST(ExprProperty, ComposeMatchesSequentialSubstitution) {
  ExprGen gen(12);
  for (int i = 0; i < 300; ++i) {
    Expr f = gen.formula(3);
    Subst first{{"x", gen.term(Sort::Int, 1)}, {"t", gen.term(Sort::Time, 1)}};
    Subst second{{"y", gen.term(Sort::Int, 1)}, {"x", gen.term(Sort::Int, 1)}};
    Expr seq = substitute(substitute(f, first), second);
    Expr once = substitute(f, compose(second, first));
    EXPECT_TRUE(alpha_equivalent(seq, once)) << to_string(seq) << " vs " << to_string(once);
  }
}

TEST(ExprProperty, GeneratedFormulasAreWellSorted) {
  ExprGen gen(13);
  for (int i = 0; i < 300; ++i) EXPECT_NO_THROW(check_sorts(gen.formula(4)));
}

TEST(Eval, EvaluatesTermsAndFormulas) {
  Valuation nu{{"x", Value::integer(3)}, {"y", Value::integer(-2)}, {"t", Value::time(Rational(1, 2))}};
  EXPECT_EQ(evaluate(mk_add(mk_var(x), mk_mul(mk_int(2), mk_var(y))), nu), Value::integer(-1));
  EXPECT_TRUE(holds(mk_and(mk_gt(mk_var(x), mk_var(y)), mk_lt(mk_var(t), mk_time(1))), nu));
  EXPECT_FALSE(holds(mk_not(mk_eq(mk_var(x), mk_int(3))), nu));
  EXPECT_THROW((void)evaluate(mk_var(z), nu), EvalError);
  EXPECT_THROW((void)holds(mk_exists({x}, mk_true()), nu), EvalError);
}

TEST(Model, MirrorFlipsControllableAndOutputOnly) {
  std::vector<Channel> chans{{"In", ChannelKind::ControllableInput, {Sort::Int}},
                             {"Uc", ChannelKind::UncontrollableInput, {}},
                             {"Out", ChannelKind::Output, {}}};
  EXPECT_EQ(mirror({"In", EventKind::Input, {Value::integer(1)}}, chans).kind, EventKind::Output);
  EXPECT_EQ(mirror({"Uc", EventKind::Input, {}}, chans).kind, EventKind::Input);
  EXPECT_EQ(mirror({"Out", EventKind::Output, {}}, chans).kind, EventKind::Input);
  EXPECT_EQ(mirror(delta_event(0).action, chans), delta_event(0).action);
  EXPECT_THROW((void)mirror({"Nope", EventKind::Input, {}}, chans), ModelError);
}

TEST(Model, EventValidation) {
  std::vector<Channel> chans{{"In", ChannelKind::ControllableInput, {Sort::Int}}};
  EXPECT_NO_THROW(validate_event({Rational(1), {"In", EventKind::Input, {Value::integer(1)}}}, chans));
  EXPECT_THROW(validate_event({Rational(-1), {"In", EventKind::Input, {Value::integer(1)}}}, chans), Error);
  EXPECT_THROW(validate_event({Rational(0), {"In", EventKind::Input, {}}}, chans), Error);
  EXPECT_THROW(validate_event({Rational(0), {"Out", EventKind::Output, {}}}, chans), Error);
  EXPECT_EQ(format_event({Rational(0), {"In", EventKind::Input, {Value::integer(7)}}}), "0 In? [7]");
}
