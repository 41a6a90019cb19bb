#include "tiosts/purpose.hpp"

#include "tiosts/error.hpp"

#include "json.hpp"

#include <algorithm>

namespace tiosts {

bool TestPurpose::on_backbone(EcId id) const { return std::find(path.begin(), path.end(), id) != path.end(); }

Expr determinism_formula(const SymbolicTree& tree, EcId ec, EcId sibling) {
  return mk_and(tree.exists_ini(tree.at(ec).pc), tree.exists_ini(tree.at(sibling).pc));
}

PurposeCheck validate_purpose(const std::vector<EcId>& path, SymbolicTree& tree, SolverSession& session) {
  PurposeCheck out;
  auto& reasons = out.rejection.reasons;
  if (path.size() < 2) {
    reasons.push_back("the path carries no event");
    return out;
  }
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (tree.at(path[i]).pec != path[i - 1]) {
      reasons.push_back("not a symbolic path at ec" + std::to_string(path[i]));
      return out;
    }
  }
  const EcId tgt = path.back();
  switch (tree.satisfiable(tgt, session)) {
    case SatFlag::Unsat:
      reasons.push_back("path condition of ec" + std::to_string(tgt) + " is unsatisfiable");
      break;
    case SatFlag::Unknown:
    case SatFlag::Unchecked:
      reasons.push_back("satisfiability of ec" + std::to_string(tgt) + " is unknown");
      break;
    case SatFlag::Sat:
      break;
  }
  const auto& last = tree.at(tgt);
  if (last.delta || last.ev->action.kind != EventKind::Output) {
    reasons.push_back("the path must end on an output event, ec" + std::to_string(tgt) + " carries " +
                      format_symbolic_event(last));
  }

  for (std::size_t i = 1; i < path.size(); ++i) {
    const EcId ec = path[i];
    const auto& e = tree.at(ec);
    if (e.delta) {
      reasons.push_back("δ-context ec" + std::to_string(ec) + " can only end a path");
      continue;
    }
    for (EcId s : std::vector<EcId>(tree.children(e.pec))) {
      const auto& sib = tree.at(s);
      if (s == ec || sib.delta || sib.via == e.via || sib.channel() != e.channel()) continue;
      if (tree.satisfiable(s, session) == SatFlag::Unsat) continue;
      CheckResult r = session.check(determinism_formula(tree, ec, s));
      if (!r.unsat()) out.rejection.violations.push_back({ec, s, e.via, sib.via, r.status});
    }
  }
  if (!out.rejection.violations.empty()) reasons.push_back("trace-determinism violated");
  if (reasons.empty()) out.purpose = TestPurpose{path, last.pc};
  return out;
}

std::string rejection_json(const Rejection& r, const SymbolicTree& tree) {
  nlohmann::ordered_json j;
  j["accepted"] = false;
  j["reasons"] = r.reasons;
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : r.violations) {
    j["violations"].push_back({{"ec", "ec" + std::to_string(v.ec)},
                               {"sibling", "ec" + std::to_string(v.sibling)},
                               {"transition", v.transition},
                               {"sibling_transition", v.sibling_transition},
                               {"channel", tree.at(v.ec).channel()},
                               {"status", std::string(to_string(v.status))}});
  }
  return j.dump(2);
}

}  // namespace tiosts
