#pragma once

#include "tiosts/expr.hpp"

#include <random>
#include <vector>

namespace tiosts::testing {

// Random linear formulas over a few int and time variables.
class ExprGen {
 public:
  explicit ExprGen(std::uint64_t seed) : rng_(seed) {}

  std::vector<Variable> ints{{"x", Sort::Int, VarKind::Data}, {"y", Sort::Int, VarKind::Data},
                             {"n", Sort::Int, VarKind::FreshIni}};
  std::vector<Variable> times{{"t", Sort::Time, VarKind::Clock}, {"d", Sort::Time, VarKind::FreshDur}};

  Expr term(Sort s, int depth) {
    const auto& pool = s == Sort::Int ? ints : times;
    switch (depth <= 0 ? roll(2) : (s == Sort::Int ? roll(5) : roll(3))) {
      case 0:
        return mk_var(pool[roll(static_cast<int>(pool.size()))]);
      case 1:
        return s == Sort::Int ? mk_int(roll(11) - 5) : mk_time(Rational(roll(9), 1 + roll(2)));
      case 2:
        return mk_add(term(s, depth - 1), term(s, depth - 1));
      case 3:
        return mk_sub(term(s, depth - 1), term(s, depth - 1));
      default:
        return mk_mul(mk_int(roll(5) - 2), term(s, depth - 1));
    }
  }

  Expr formula(int depth) {
    switch (depth <= 0 ? 0 : roll(6)) {
      case 0:
      case 1: {
        const Sort s = roll(2) ? Sort::Int : Sort::Time;
        static constexpr Op ops[] = {Op::Lt, Op::Le, Op::Eq, Op::Ge, Op::Gt};
        return mk_cmp(ops[roll(5)], term(s, 2), term(s, 2));
      }
      case 2:
        return mk_not(formula(depth - 1));
      case 3:
        return mk_and(formula(depth - 1), formula(depth - 1));
      case 4:
        return mk_or(formula(depth - 1), formula(depth - 1));
      default: {
        std::vector<Variable> bound{roll(2) ? ints[roll(3)] : times[roll(2)]};
        return roll(2) ? mk_exists(bound, formula(depth - 1)) : mk_forall(bound, formula(depth - 1));
      }
    }
  }

  int roll(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace tiosts::testing
