#pragma once

#include "tiosts/expr.hpp"
#include "tiosts/model.hpp"

namespace tiosts {

// Direct evaluation of quantifier-free terms and formulas under a total
// valuation of their free variables. No solver involved.
// Throws EvalError on unbound variables or quantifiers.
[[nodiscard]] Value evaluate(const Expr& e, const Valuation& nu);

[[nodiscard]] bool holds(const Expr& formula, const Valuation& nu);

}  // namespace tiosts
