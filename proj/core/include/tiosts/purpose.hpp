#pragma once

#include "tiosts/smt.hpp"
#include "tiosts/symexec.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tiosts {

struct TestPurpose {
  std::vector<EcId> path;  // ec0 .. tgt
  Expr pc;                 // π(tgt(tp))

  [[nodiscard]] EcId target() const { return path.back(); }
  [[nodiscard]] bool on_backbone(EcId id) const;
};

struct DeterminismViolation {
  EcId ec = 0;
  EcId sibling = 0;
  std::string transition;
  std::string sibling_transition;
  SatStatus status = SatStatus::Sat;  // Unknown counts as a violation
};

struct Rejection {
  std::vector<std::string> reasons;
  std::vector<DeterminismViolation> violations;
};

struct PurposeCheck {
  std::optional<TestPurpose> purpose;
  Rejection rejection;

  [[nodiscard]] bool accepted() const { return purpose.has_value(); }
};

// Satisfiability of tgt, output-ending, and trace-determinism against
// every satisfiable sibling on the same channel. δ-siblings are exempt.
PurposeCheck validate_purpose(const std::vector<EcId>& path, SymbolicTree& tree, SolverSession& session);

// The determinism query for one pair.
[[nodiscard]] Expr determinism_formula(const SymbolicTree& tree, EcId ec, EcId sibling);

// {"accepted":false,"reasons":[...],"violations":[{...}]}
[[nodiscard]] std::string rejection_json(const Rejection& r, const SymbolicTree& tree);

}  // namespace tiosts
