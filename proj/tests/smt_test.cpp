#include "random_expr.hpp"
#include "support.hpp"

#include "tiosts/error.hpp"
#include "tiosts/eval.hpp"
#include "tiosts/smt.hpp"

#include <gtest/gtest.h>

using namespace tiosts;
using namespace tiosts::testing;

namespace {

const Variable x{"x", Sort::Int, VarKind::Data};
const Variable y{"y", Sort::Int, VarKind::Data};
const Variable z{"z#1", Sort::Time, VarKind::FreshDur};
const Variable out{"Debit$out#1.2", Sort::Int, VarKind::FreshOut};

std::map<std::string, Variable> symbols_of(const ExprGen& g) {
  std::map<std::string, Variable> m;
  for (const auto& v : g.ints) m[v.name] = v;
  for (const auto& v : g.times) m[v.name] = v;
  return m;
}

}  // namespace

TEST(SmtLib, RendersDeterministically) {
  Expr f = mk_and(mk_le(mk_var(z), mk_time(1)), mk_eq(mk_var(out), mk_add(mk_var(x), mk_int(-5))));
  EXPECT_EQ(to_smtlib(f), "(and (<= |z#1| 1.0) (= |Debit$out#1.2| (+ x (- 5))))");
  EXPECT_EQ(to_smtlib(mk_le(mk_var(z), mk_time(Rational(1, 2)))), "(<= |z#1| (/ 1.0 2.0))");
  EXPECT_EQ(to_smtlib(mk_forall({z}, mk_lt(mk_var(z), mk_time(1)))),
            "(forall ((|z#1| Real)) (=> (>= |z#1| 0.0) (< |z#1| 1.0)))");
  EXPECT_EQ(smt_symbol("fee$ini"), "fee$ini");
  EXPECT_EQ(smt_symbol("assert"), "|assert|");
}

TEST(SmtLib, ParseRoundTripProperty) {
  ExprGen gen(21);
  const auto symbols = symbols_of(gen);
  for (int i = 0; i < 400; ++i) {
    Expr f = gen.formula(4);
    Expr back = parse_smtlib(to_smtlib(f), symbols);
    EXPECT_EQ(back, f) << to_smtlib(f);
  }
}

TEST(SmtLib, ParseRejectsUnknownSymbols) {
  EXPECT_THROW((void)parse_smtlib("(< x 1)", {}), Error);
  EXPECT_THROW((void)parse_smtlib("(< x", {{"x", x}}), Error);
}

TEST(Solver, SatUnsatAndModels) {
  SolverSession& s = shared_session();
  Expr f = mk_and(
      std::vector<Expr>{mk_gt(mk_var(x), mk_int(3)), mk_lt(mk_var(x), mk_var(y)), mk_le(mk_var(z), mk_time(2))});
  CheckResult r = s.check(f, true);
  ASSERT_TRUE(r.sat());
  EXPECT_TRUE(holds(f, r.model));
  EXPECT_TRUE(s.check(mk_and(mk_gt(mk_var(x), mk_int(3)), mk_lt(mk_var(x), mk_int(2)))).unsat());
  EXPECT_TRUE(s.is_sat(mk_true()));
  EXPECT_FALSE(s.is_sat(mk_false()));
}

TEST(Solver, ModelSatisfiesRandomSatisfiableFormulas) {
  SolverSession& s = shared_session();
  ExprGen gen(22);
  int sat = 0;
  for (int i = 0; i < 60; ++i) {
    Expr f = gen.formula(3);
    if (!bound_vars(f).empty()) continue;
    CheckResult r = s.check(f, true);
    ASSERT_FALSE(r.unknown());
    if (!r.sat()) continue;
    ++sat;
    Valuation nu = r.model;
    for (const auto& v : gen.ints) nu.emplace(v.name, Value::integer(0));
    for (const auto& v : gen.times) nu.emplace(v.name, Value::time(0));
    EXPECT_TRUE(holds(f, nu)) << to_smtlib(f);
  }
  EXPECT_GT(sat, 0);
}

TEST(Solver, QuantifiersAndTimeNonNegativity) {
  SolverSession& s = shared_session();
  EXPECT_TRUE(s.check(mk_forall({z}, mk_ge(mk_var(z), mk_time(0)))).sat());
  EXPECT_TRUE(s.check(mk_lt(mk_var(z), mk_time(0))).unsat());
  EXPECT_TRUE(s.check(mk_exists({x}, mk_and(mk_gt(mk_var(x), mk_var(y)), mk_lt(mk_var(x), mk_var(y))))).unsat());
  CheckResult r = s.check(mk_exists({x}, mk_eq(mk_var(y), mk_add(mk_var(x), mk_int(1)))), true);
  ASSERT_TRUE(r.sat());
  EXPECT_TRUE(r.model.contains("y"));
  EXPECT_FALSE(r.model.contains("x"));
}

TEST(Solver, EvalUnder) {
  SolverSession& s = shared_session();
  Expr f = mk_eq(mk_var(y), mk_add(mk_var(x), mk_int(1)));
  EXPECT_TRUE(s.eval_under(f, {{"y", Value::integer(5)}}).sat());
  EXPECT_TRUE(s.eval_under(f, {{"y", Value::integer(5)}}, Closure::Universal).unsat());
  EXPECT_TRUE(s.eval_under(f, {{"y", Value::integer(5)}, {"x", Value::integer(4)}}, Closure::Universal).sat());
  EXPECT_THROW((void)s.eval_under(f, {{"y", Value::time(1)}}), SortError);
}

TEST(Solver, CachesDefiniteAnswers) {
  SolverSession s;
  Expr f = mk_gt(mk_var(x), mk_int(100));
  (void)s.check(f);
  (void)s.check(f);
  EXPECT_EQ(s.stats().queries, 2u);
  EXPECT_EQ(s.stats().cache_hits, 1u);
}

TEST(Solver, MissingExecutableIsASolverError) {
  SolverConfig c;
  c.command = "/nonexistent/solver -in";
  EXPECT_THROW(
      {
        SolverSession s(c);
        (void)s.check(mk_gt(mk_var(x), mk_int(0)));
      },
      SolverError);
}

TEST(Solver, SurvivesManySequentialQueries) {
  SolverConfig c;
  c.cache = false;
  SolverSession s(c);
  for (int i = 0; i < 200; ++i) {
    EXPECT_EQ(s.check(mk_eq(mk_var(x), mk_int(i))).status, SatStatus::Sat);
  }
}
