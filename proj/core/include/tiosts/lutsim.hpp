#pragma once

#include "tiosts/model.hpp"
#include "tiosts/runtime.hpp"
#include "tiosts/smt.hpp"
#include "tiosts/testgen.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tiosts {

enum class MutationKind { OutputOffset, GuardTighten, GuardLoosen, DelayShift, Drop };

// Textual forms:
//   offset:<channel>:<component>:<delta>   every emission on the channel
//   delay:<transition>:<delta>             clock bounds of the guard
//   drop:<transition>
//   tighten:<transition>:<formula>         guard && formula
//   loosen:<transition>:<formula>          guard || formula
struct Mutation {
  MutationKind kind = MutationKind::Drop;
  std::string target;          // channel or transition name
  std::size_t component = 0;   // 1-based, offset only
  Rational delta;              // offset and delay
  std::string formula;         // tighten and loosen

  friend bool operator==(const Mutation&, const Mutation&) = default;
};

[[nodiscard]] Mutation parse_mutation(std::string_view text);
[[nodiscard]] std::string describe(const Mutation& m);
// One mutation per line; blank lines and `#` comments are skipped.
[[nodiscard]] std::vector<Mutation> parse_mutation_list(std::string_view text);

struct Mutant {
  Tiosts model;
  std::vector<std::string> edits;  // "tr2: Debit!(rid, amt + fee - 1, ATM_ID)"
};

// Throws ModelError when the target does not exist or the edit has no
// effect.
[[nodiscard]] Mutant mutate(const Tiosts& model, const Mutation& m);

using TraceSet = std::set<ConcreteTrace>;

// Prefix closure plus, wherever the next event is delayed, the
// delay-0 quiescence and controllable-input insertions that the model
// specifies. δ-ending traces are not extended.
[[nodiscard]] TraceSet h_close(const TraceSet& traces, const Tiosts& model, SolverSession& session);

// n random walks of at most `depth` events over satisfiable contexts,
// concretized with random soft bounds, then H-closed.
[[nodiscard]] TraceSet sample_traces(const Tiosts& model, std::size_t n, std::size_t depth, std::uint64_t seed,
                                     SolverSession& session);

struct CosimConfig {
  std::uint64_t seed = 0;
  std::size_t max_steps = 16;
  Rational tm{5};
  bool diversify = false;
};

struct CosimResult {
  std::uint64_t seed = 0;
  RunOutcome outcome;
  ConcreteTrace trace;

  [[nodiscard]] bool failed() const { return outcome.verdict && is_fail(*outcome.verdict); }
};

// Drives the test case against a simulated implementation of `lut`
// until a verdict or max_steps events.
CosimResult cosim(const Tiosts& lut, const TestCase& tc, const CosimConfig& cfg, SolverSession& session);

// Runs seeds cfg.seed .. cfg.seed + runs - 1 on up to `jobs` workers,
// each with its own solver session. Results are in seed order.
std::vector<CosimResult> cosim_batch(const Tiosts& lut, const TestCase& tc, const CosimConfig& cfg, std::size_t runs,
                                     const SolverConfig& solver, std::size_t jobs = 0);

}  // namespace tiosts
