#include "tiosts/eval.hpp"

#include "tiosts/error.hpp"

namespace tiosts {

namespace {

Value numeric(Sort s, const Rational& r) { return s == Sort::Time ? Value::time(r) : Value{Sort::Int, r, false}; }

bool compare(Op op, const Value& a, const Value& b) {
  if (a.sort == Sort::Bool) return a.flag == b.flag;
  switch (op) {
    case Op::Lt:
      return a.num < b.num;
    case Op::Le:
      return a.num <= b.num;
    case Op::Eq:
      return a.num == b.num;
    case Op::Ge:
      return a.num >= b.num;
    case Op::Gt:
      return a.num > b.num;
    default:
      throw EvalError("not a comparison");
  }
}

}  // namespace

Value evaluate(const Expr& e, const Valuation& nu) {
  const auto& args = e.args();
  switch (e.op()) {
    case Op::Var: {
      auto it = nu.find(e.var().name);
      if (it == nu.end()) throw EvalError("unbound variable '" + e.var().name + "'");
      if (it->second.sort != e.sort()) throw EvalError("valuation sort mismatch for '" + e.var().name + "'");
      return it->second;
    }
    case Op::Num:
      return numeric(e.sort(), e.num());
    case Op::BoolLit:
      return Value::boolean(e.boolean());
    case Op::Add:
      return numeric(e.sort(), evaluate(args[0], nu).num + evaluate(args[1], nu).num);
    case Op::Sub:
      return numeric(e.sort(), evaluate(args[0], nu).num - evaluate(args[1], nu).num);
    case Op::Mul:
      return numeric(e.sort(), evaluate(args[0], nu).num * evaluate(args[1], nu).num);
    case Op::Neg:
      return numeric(e.sort(), -evaluate(args[0], nu).num);
    case Op::Lt:
    case Op::Le:
    case Op::Eq:
    case Op::Ge:
    case Op::Gt:
      return Value::boolean(compare(e.op(), evaluate(args[0], nu), evaluate(args[1], nu)));
    case Op::Not:
      return Value::boolean(!evaluate(args[0], nu).flag);
    case Op::And:
      for (const auto& a : args) {
        if (!evaluate(a, nu).flag) return Value::boolean(false);
      }
      return Value::boolean(true);
    case Op::Or:
      for (const auto& a : args) {
        if (evaluate(a, nu).flag) return Value::boolean(true);
      }
      return Value::boolean(false);
    case Op::Forall:
    case Op::Exists:
      throw EvalError("the direct evaluator does not handle quantifiers");
  }
  throw EvalError("unreachable");
}

bool holds(const Expr& formula, const Valuation& nu) {
  if (!formula.is_formula()) throw EvalError("holds() expects a formula");
  return evaluate(formula, nu).flag;
}

}  // namespace tiosts
