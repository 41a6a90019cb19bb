#pragma once

#include "tiosts/rational.hpp"

#include <compare>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tiosts {

enum class Sort { Int, Bool, Time };

[[nodiscard]] std::string_view to_string(Sort s);

enum class VarKind { Data, Clock, FreshIni, FreshIn, FreshOut, FreshDur };

[[nodiscard]] std::string_view to_string(VarKind k);

struct Variable {
  std::string name;
  Sort sort = Sort::Int;
  VarKind kind = VarKind::Data;

  friend bool operator==(const Variable&, const Variable&) = default;
  friend auto operator<=>(const Variable&, const Variable&) = default;
};

enum class Op {
  Var,
  Num,
  BoolLit,
  Add,
  Sub,
  Mul,
  Neg,
  Lt,
  Le,
  Eq,
  Ge,
  Gt,
  Not,
  And,
  Or,
  Forall,
  Exists,
};

// Immutable, shareable term/formula tree. Formulas are the Bool-sorted
// expressions; a default-constructed Expr is the formula True.
class Expr {
 public:
  Expr();

  [[nodiscard]] Op op() const;
  [[nodiscard]] Sort sort() const;
  [[nodiscard]] const Variable& var() const;
  [[nodiscard]] const Rational& num() const;
  [[nodiscard]] bool boolean() const;
  [[nodiscard]] const std::vector<Expr>& args() const;
  [[nodiscard]] const std::vector<Variable>& bound() const;

  [[nodiscard]] bool is_true() const { return op() == Op::BoolLit && boolean(); }
  [[nodiscard]] bool is_false() const { return op() == Op::BoolLit && !boolean(); }
  [[nodiscard]] bool is_formula() const { return sort() == Sort::Bool; }

  // Same operator and sort, new children. No simplification, no sort
  // coercion: callers guarantee the children keep their sorts.
  [[nodiscard]] Expr with_args(std::vector<Expr> args) const;

  friend bool operator==(const Expr& a, const Expr& b);

  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<const Node> node_;
};

[[nodiscard]] Expr mk_var(const Variable& v);
[[nodiscard]] Expr mk_int(const Rational& value);
[[nodiscard]] Expr mk_time(const Rational& value);
[[nodiscard]] Expr mk_bool(bool value);
[[nodiscard]] inline Expr mk_true() { return mk_bool(true); }
[[nodiscard]] inline Expr mk_false() { return mk_bool(false); }

// Arithmetic. Integer literals coerce to time next to a time operand.
// mk_add folds literal+literal and drops a literal 0 operand.
[[nodiscard]] Expr mk_add(const Expr& a, const Expr& b);
[[nodiscard]] Expr mk_sub(const Expr& a, const Expr& b);
[[nodiscard]] Expr mk_mul(const Expr& a, const Expr& b);
[[nodiscard]] Expr mk_neg(const Expr& a);

[[nodiscard]] Expr mk_cmp(Op op, const Expr& a, const Expr& b);
[[nodiscard]] inline Expr mk_lt(const Expr& a, const Expr& b) { return mk_cmp(Op::Lt, a, b); }
[[nodiscard]] inline Expr mk_le(const Expr& a, const Expr& b) { return mk_cmp(Op::Le, a, b); }
[[nodiscard]] inline Expr mk_eq(const Expr& a, const Expr& b) { return mk_cmp(Op::Eq, a, b); }
[[nodiscard]] inline Expr mk_ge(const Expr& a, const Expr& b) { return mk_cmp(Op::Ge, a, b); }
[[nodiscard]] inline Expr mk_gt(const Expr& a, const Expr& b) { return mk_cmp(Op::Gt, a, b); }

// Boolean connectives. And/Or flatten nested occurrences, drop neutral
// literals and collapse to the single remaining argument.
[[nodiscard]] Expr mk_not(const Expr& a);
[[nodiscard]] Expr mk_and(const std::vector<Expr>& args);
[[nodiscard]] Expr mk_or(const std::vector<Expr>& args);
[[nodiscard]] inline Expr mk_and(const Expr& a, const Expr& b) { return mk_and(std::vector<Expr>{a, b}); }
[[nodiscard]] inline Expr mk_or(const Expr& a, const Expr& b) { return mk_or(std::vector<Expr>{a, b}); }

// Empty variable lists return the body unchanged.
[[nodiscard]] Expr mk_forall(const std::vector<Variable>& vars, const Expr& body);
[[nodiscard]] Expr mk_exists(const std::vector<Variable>& vars, const Expr& body);

// Builds an arithmetic, comparison or connective node exactly as given:
// no folding, flattening or literal coercion. Throws SortError.
[[nodiscard]] Expr mk_raw(Op op, std::vector<Expr> args);

[[nodiscard]] bool is_comparison(Op op);
[[nodiscard]] bool is_quantifier(Op op);

// Top-level conjuncts: args of an And, nothing for True, else {e}.
[[nodiscard]] std::vector<Expr> conjuncts(const Expr& e);

using VarSet = std::set<Variable>;

[[nodiscard]] VarSet free_vars(const Expr& e);
[[nodiscard]] VarSet bound_vars(const Expr& e);

// Keyed by variable name.
using Subst = std::map<std::string, Expr>;

// Capture-avoiding simultaneous substitution. Rebuilds nodes without
// simplification. Throws SortError when a replacement changes the sort.
[[nodiscard]] Expr substitute(const Expr& e, const Subst& s);

// (second ∘ first): apply first, then second.
[[nodiscard]] Subst compose(const Subst& second, const Subst& first);

// Structural equality up to consistent renaming of bound variables.
[[nodiscard]] bool alpha_equivalent(const Expr& a, const Expr& b);

// Throws SortError on any ill-sorted node.
void check_sorts(const Expr& e);

// Human-readable infix rendering (also the DSL surface syntax).
[[nodiscard]] std::string to_string(const Expr& e);

}  // namespace tiosts
