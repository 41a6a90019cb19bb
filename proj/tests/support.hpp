#pragma once

#include "tiosts/dsl.hpp"
#include "tiosts/purpose.hpp"
#include "tiosts/smt.hpp"
#include "tiosts/symexec.hpp"
#include "tiosts/testgen.hpp"

#include <memory>
#include <string>

namespace tiosts::testing {

inline std::string model_path(const std::string& name) { return std::string(TIOSTS_MODELS_DIR) + "/" + name; }

inline const Tiosts& atm() {
  static const Tiosts m = load_model(model_path("atm.tiosts"));
  return m;
}

inline SolverSession& shared_session() {
  static SolverSession s;
  return s;
}

inline ConcreteTrace atm_trace(const std::string& name) {
  return load_trace(model_path("traces/" + name + ".trace"), atm().channels, atm().consts);
}

// The ATM tree, purpose tr1..tr4 and its test case with TM = 5.
struct AtmFixture {
  SymbolicTree tree{atm()};
  std::vector<EcId> path;
  TestPurpose tp;
  TestCase tc;

  explicit AtmFixture(SolverSession& s, GenOptions opts = {}) {
    path = tree.path_of(parse_selector("tr1,tr2,tr3,tr4", atm()));
    tp = *validate_purpose(path, tree, s).purpose;
    tc = generate(tp, tree, s, opts);
  }
};

inline AtmFixture& atm_fixture() {
  static AtmFixture f(shared_session());
  return f;
}

}  // namespace tiosts::testing
