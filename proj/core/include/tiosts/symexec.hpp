#pragma once

#include "tiosts/dsl.hpp"
#include "tiosts/expr.hpp"
#include "tiosts/model.hpp"
#include "tiosts/smt.hpp"

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tiosts {

using EcId = std::size_t;

struct SymbolicAction {
  std::string channel;
  EventKind kind = EventKind::Input;
  std::vector<Variable> vars;

  friend bool operator==(const SymbolicAction&, const SymbolicAction&) = default;
};

struct SymbolicEvent {
  Variable delay;
  SymbolicAction action;

  friend bool operator==(const SymbolicEvent&, const SymbolicEvent&) = default;
};

struct ExecutionContext {
  EcId id = 0;
  std::string state;
  Expr pc;
  Subst lambda;
  std::optional<SymbolicEvent> ev;  // empty for the root
  EcId pec = 0;                     // the root is its own predecessor
  std::string via;                  // empty for the root and for δ-contexts
  bool delta = false;
  std::size_t depth = 0;

  [[nodiscard]] bool is_root() const { return !ev.has_value(); }
  [[nodiscard]] const std::string& channel() const;
};

// f^dur(ec), f^in_c(ec) and f^out_c(ec). Pure-signal channels map to an
// empty vector.
struct FreshRegistry {
  Variable dur;
  std::map<std::string, std::vector<Variable>> in;
  std::map<std::string, std::vector<Variable>> out;

  [[nodiscard]] const std::vector<Variable>& channel_vars(const std::string& channel) const;
};

enum class SatFlag { Unchecked, Sat, Unsat, Unknown };

[[nodiscard]] std::string_view to_string(SatFlag f);

struct TreeOptions {
  std::size_t depth_cap = 12;
  bool quiesce_quantify_ini = false;
};

class SymbolicTree {
 public:
  explicit SymbolicTree(Tiosts model, TreeOptions options = {});

  [[nodiscard]] const Tiosts& model() const { return model_; }
  [[nodiscard]] const TreeOptions& options() const { return options_; }
  [[nodiscard]] std::size_t size() const { return ecs_.size(); }
  [[nodiscard]] const ExecutionContext& root() const { return ecs_.front(); }
  [[nodiscard]] const ExecutionContext& at(EcId id) const;
  [[nodiscard]] const FreshRegistry& registry(EcId id) const;
  [[nodiscard]] const std::vector<Variable>& ini_vars() const { return ini_; }

  // Materializes the successors of id (one per outgoing transition) on
  // first use. δ-contexts are leaves. Throws InconclusiveError past the
  // depth cap.
  const std::vector<EcId>& children(EcId id);
  [[nodiscard]] bool expanded(EcId id) const;

  SatFlag satisfiable(EcId id, SolverSession& session);
  [[nodiscard]] SatFlag cached_flag(EcId id) const { return flags_.at(id); }

  // π^δ for id: the conjunction over its non-Unsat output successors.
  Expr quiescence_condition(EcId id, SolverSession& session);

  // Adds the δ-context of id when π ∧ π^δ is satisfiable; idempotent.
  // Throws SolverUnknown when the decision is not definite.
  std::optional<EcId> enrich_quiescence(EcId id, SolverSession& session);
  [[nodiscard]] std::optional<EcId> delta_child(EcId id) const;
  [[nodiscard]] bool enriched(EcId id) const;

  // Breadth-first expansion of every EC up to `depth` levels; with a
  // session, each expanded EC is also enriched with quiescence.
  void explore(std::size_t depth, SolverSession* session = nullptr);

  // The EC path induced by the selector's transitions from the root.
  std::vector<EcId> path_of(const PathSelector& selector);

  // Event variables along the path from the root to id (f̄ in the
  // notation of test purposes).
  [[nodiscard]] std::vector<Variable> revealed(EcId id) const;
  [[nodiscard]] std::vector<EcId> ancestry(EcId id) const;

  // Solves π(tgt) and reads each event's delay and payload from the model.
  ConcreteTrace concretize(const std::vector<EcId>& path, SolverSession& session,
                           const std::vector<Expr>& extra = {});

  // Trace event for ev(id) read from a valuation of its variables.
  [[nodiscard]] ConcreteEvent event_under(EcId id, const Valuation& nu) const;

  // Closes the free F^ini variables of f.
  [[nodiscard]] Expr exists_ini(const Expr& f) const;
  [[nodiscard]] Expr forall_ini(const Expr& f) const;

 private:
  EcId add(ExecutionContext ec);
  FreshRegistry make_registry(EcId id) const;
  void expand(EcId id);

  Tiosts model_;
  TreeOptions options_;
  std::deque<ExecutionContext> ecs_;
  std::deque<FreshRegistry> registries_;
  std::vector<SatFlag> flags_;
  std::map<EcId, std::vector<EcId>> children_;
  std::map<EcId, std::optional<EcId>> delta_;
  std::vector<Variable> ini_;
};

// `id | state | event | pec | SAT?` lines, optionally followed by π in
// SMT-LIB.
[[nodiscard]] std::string dump_tree(SymbolicTree& tree, SolverSession& session, bool with_pc);

[[nodiscard]] std::string format_symbolic_event(const ExecutionContext& ec);

enum class MembershipKind { InTraces, InSemViaQuiescence, NotInSem };

[[nodiscard]] std::string_view to_string(MembershipKind k);

struct Membership {
  MembershipKind kind = MembershipKind::NotInSem;
  std::vector<EcId> witness;  // root to the last matched EC
};

// Decides σ ∈ Sem(G) by depth-first search with incremental binding of
// event values into the candidate ECs' fresh variables.
Membership sem_member(const ConcreteTrace& trace, SymbolicTree& tree, SolverSession& session);

}  // namespace tiosts
