#include "tiosts/symexec.hpp"

#include "tiosts/error.hpp"

#include <algorithm>
#include <sstream>

namespace tiosts {

namespace {

const std::string kEmpty;
const std::vector<Variable> kNoVars;

std::vector<Variable> channel_registry(const Channel& c, EcId id, VarKind kind) {
  const std::string base = c.name + (kind == VarKind::FreshIn ? "$in#" : "$out#") + std::to_string(id);
  std::vector<Variable> vars;
  if (c.payload.size() == 1) {
    vars.push_back(Variable{base, c.payload[0], kind});
  } else {
    for (std::size_t i = 0; i < c.payload.size(); ++i) {
      vars.push_back(Variable{base + "." + std::to_string(i + 1), c.payload[i], kind});
    }
  }
  return vars;
}

std::vector<Variable> restrict_to_free(const std::vector<Variable>& vars, const Expr& f) {
  VarSet fv = free_vars(f);
  std::vector<Variable> out;
  for (const auto& v : vars) {
    if (fv.contains(v)) out.push_back(v);
  }
  return out;
}

}  // namespace

const std::string& ExecutionContext::channel() const { return ev ? ev->action.channel : kEmpty; }

const std::vector<Variable>& FreshRegistry::channel_vars(const std::string& channel) const {
  if (auto it = in.find(channel); it != in.end()) return it->second;
  if (auto it = out.find(channel); it != out.end()) return it->second;
  return kNoVars;
}

std::string_view to_string(SatFlag f) {
  switch (f) {
    case SatFlag::Unchecked:
      return "unchecked";
    case SatFlag::Sat:
      return "sat";
    case SatFlag::Unsat:
      return "unsat";
    case SatFlag::Unknown:
      return "unknown";
  }
  return "?";
}

std::string_view to_string(MembershipKind k) {
  switch (k) {
    case MembershipKind::InTraces:
      return "InTraces";
    case MembershipKind::InSemViaQuiescence:
      return "InSemViaQuiescence";
    case MembershipKind::NotInSem:
      return "NotInSem";
  }
  return "?";
}

SymbolicTree::SymbolicTree(Tiosts model, TreeOptions options) : model_(std::move(model)), options_(options) {
  model_.validate();
  ExecutionContext root;
  root.state = model_.initial;
  for (const auto& a : model_.data) {
    Variable ini{a.name + "$ini", a.sort, VarKind::FreshIni};
    ini_.push_back(ini);
    root.lambda[a.name] = mk_var(ini);
  }
  for (const auto& k : model_.clocks) root.lambda[k.name] = mk_time(0);
  add(std::move(root));
  flags_[0] = SatFlag::Sat;
}

EcId SymbolicTree::add(ExecutionContext ec) {
  ec.id = ecs_.size();
  if (!ec.ev) ec.pec = ec.id;
  ecs_.push_back(std::move(ec));
  registries_.push_back(make_registry(ecs_.back().id));
  flags_.push_back(SatFlag::Unchecked);
  return ecs_.back().id;
}

FreshRegistry SymbolicTree::make_registry(EcId id) const {
  FreshRegistry r;
  r.dur = Variable{"z#" + std::to_string(id), Sort::Time, VarKind::FreshDur};
  for (const auto& c : model_.channels) {
    if (c.is_input()) {
      r.in[c.name] = channel_registry(c, id, VarKind::FreshIn);
    } else {
      r.out[c.name] = channel_registry(c, id, VarKind::FreshOut);
    }
  }
  return r;
}

const ExecutionContext& SymbolicTree::at(EcId id) const {
  if (id >= ecs_.size()) throw Error("unknown execution context ec" + std::to_string(id));
  return ecs_[id];
}

const FreshRegistry& SymbolicTree::registry(EcId id) const {
  if (id >= registries_.size()) throw Error("unknown execution context ec" + std::to_string(id));
  return registries_[id];
}

bool SymbolicTree::expanded(EcId id) const { return children_.contains(id); }

const std::vector<EcId>& SymbolicTree::children(EcId id) {
  if (!expanded(id)) expand(id);
  return children_.at(id);
}

void SymbolicTree::expand(EcId id) {
  const ExecutionContext ec = at(id);
  if (ec.delta) {
    children_[id] = {};
    return;
  }
  if (ec.depth >= options_.depth_cap) {
    throw InconclusiveError("depth cap " + std::to_string(options_.depth_cap) + " reached at ec" + std::to_string(id));
  }
  const FreshRegistry reg = registry(id);
  const Expr z = mk_var(reg.dur);
  std::vector<EcId> kids;
  for (const Transition* t : model_.outgoing(ec.state)) {
    // λ′0: clocks advance by z, received variables bind to x_c.
    Subst l0 = ec.lambda;
    for (const auto& k : model_.clocks) l0[k.name] = mk_add(ec.lambda.at(k.name), z);
    const auto& chan_vars = reg.channel_vars(t->action.channel);
    if (t->action.kind == EventKind::Input) {
      for (std::size_t i = 0; i < t->action.received.size(); ++i) {
        l0[t->action.received[i].name] = mk_var(chan_vars.at(i));
      }
    }

    ExecutionContext next;
    next.state = t->target;
    next.pec = id;
    next.via = t->name;
    next.depth = ec.depth + 1;
    for (const auto& a : model_.data) next.lambda[a.name] = l0.at(a.name);
    for (const auto& u : t->updates) next.lambda[u.target.name] = substitute(u.value, l0);
    for (const auto& k : model_.clocks) next.lambda[k.name] = l0.at(k.name);
    for (const auto& k : t->resets) next.lambda[k.name] = mk_time(0);

    std::vector<Expr> parts{ec.pc, substitute(t->guard, l0)};
    if (t->action.kind == EventKind::Output) {
      for (std::size_t i = 0; i < t->action.sent.size(); ++i) {
        parts.push_back(mk_eq(mk_var(chan_vars.at(i)), substitute(t->action.sent[i], l0)));
      }
    }
    next.pc = mk_and(parts);
    next.ev = SymbolicEvent{reg.dur, SymbolicAction{t->action.channel, t->action.kind, chan_vars}};
    kids.push_back(add(std::move(next)));
  }
  children_[id] = std::move(kids);
}

SatFlag SymbolicTree::satisfiable(EcId id, SolverSession& session) {
  SatFlag& flag = flags_.at(id);
  if (flag == SatFlag::Sat || flag == SatFlag::Unsat) return flag;
  CheckResult r = session.check(at(id).pc);
  flag = r.sat() ? SatFlag::Sat : r.unsat() ? SatFlag::Unsat : SatFlag::Unknown;
  return flag;
}

Expr SymbolicTree::exists_ini(const Expr& f) const { return mk_exists(restrict_to_free(ini_, f), f); }

Expr SymbolicTree::forall_ini(const Expr& f) const { return mk_forall(restrict_to_free(ini_, f), f); }

Expr SymbolicTree::quiescence_condition(EcId id, SolverSession& session) {
  std::vector<Expr> conj;
  for (EcId c : std::vector<EcId>(children(id))) {
    const ExecutionContext& child = at(c);
    if (child.delta || child.ev->action.kind != EventKind::Output) continue;
    if (satisfiable(c, session) == SatFlag::Unsat) continue;
    std::vector<Variable> vars{registry(id).dur};
    for (const auto& y : registry(id).channel_vars(child.channel())) vars.push_back(y);
    if (options_.quiesce_quantify_ini) vars.insert(vars.end(), ini_.begin(), ini_.end());
    conj.push_back(mk_forall(restrict_to_free(vars, child.pc), mk_not(child.pc)));
  }
  return mk_and(conj);
}

std::optional<EcId> SymbolicTree::enrich_quiescence(EcId id, SolverSession& session) {
  if (auto it = delta_.find(id); it != delta_.end()) return it->second;
  if (at(id).delta) return std::nullopt;
  Expr pc = mk_and(at(id).pc, quiescence_condition(id, session));
  CheckResult r = session.check(pc);
  if (r.unknown()) {
    throw SolverUnknown("quiescence enrichment of ec" + std::to_string(id) + " undecided: " + r.reason);
  }
  if (r.unsat()) {
    delta_[id] = std::nullopt;
    return std::nullopt;
  }
  ExecutionContext d;
  d.state = at(id).state;
  d.pc = pc;
  d.lambda = at(id).lambda;
  d.pec = id;
  d.delta = true;
  d.depth = at(id).depth + 1;
  d.ev = SymbolicEvent{};
  EcId did = add(std::move(d));
  ecs_[did].ev = SymbolicEvent{registry(did).dur, SymbolicAction{std::string(kDelta), EventKind::Delta, {}}};
  flags_[did] = SatFlag::Sat;
  children_[did] = {};
  delta_[id] = did;
  return did;
}

std::optional<EcId> SymbolicTree::delta_child(EcId id) const {
  auto it = delta_.find(id);
  return it == delta_.end() ? std::nullopt : it->second;
}

bool SymbolicTree::enriched(EcId id) const { return delta_.contains(id); }

void SymbolicTree::explore(std::size_t depth, SolverSession* session) {
  std::deque<EcId> queue{0};
  while (!queue.empty()) {
    EcId id = queue.front();
    queue.pop_front();
    if (at(id).delta || at(id).depth >= depth) continue;
    for (EcId c : std::vector<EcId>(children(id))) queue.push_back(c);
    if (session) enrich_quiescence(id, *session);
  }
}

std::vector<EcId> SymbolicTree::path_of(const PathSelector& selector) {
  std::vector<EcId> path{0};
  for (const auto& name : selector.transitions) {
    EcId cur = path.back();
    std::optional<EcId> next;
    for (EcId c : children(cur)) {
      if (at(c).via == name) next = c;
    }
    if (!next) {
      throw ExecutionError("transition " + name + " is not executable from ec" + std::to_string(cur) + " (state " +
                           at(cur).state + ")");
    }
    path.push_back(*next);
  }
  return path;
}

std::vector<EcId> SymbolicTree::ancestry(EcId id) const {
  std::vector<EcId> path;
  for (EcId cur = id;; cur = at(cur).pec) {
    path.push_back(cur);
    if (at(cur).is_root()) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<Variable> SymbolicTree::revealed(EcId id) const {
  std::vector<Variable> vars;
  for (EcId e : ancestry(id)) {
    const auto& ev = at(e).ev;
    if (!ev) continue;
    vars.push_back(ev->delay);
    vars.insert(vars.end(), ev->action.vars.begin(), ev->action.vars.end());
  }
  return vars;
}

ConcreteEvent SymbolicTree::event_under(EcId id, const Valuation& nu) const {
  const auto& ev = at(id).ev;
  if (!ev) throw Error("the root context carries no event");
  auto value_of = [&](const Variable& v) {
    auto it = nu.find(v.name);
    if (it == nu.end()) throw EvalError("no value for " + v.name);
    return it->second;
  };
  ConcreteEvent out;
  out.delay = value_of(ev->delay).num;
  out.action.channel = ev->action.channel;
  out.action.kind = ev->action.kind;
  for (const auto& v : ev->action.vars) out.action.values.push_back(value_of(v));
  return out;
}

ConcreteTrace SymbolicTree::concretize(const std::vector<EcId>& path, SolverSession& session,
                                       const std::vector<Expr>& extra) {
  if (path.empty() || path.front() != 0) throw ExecutionError("a symbolic path starts at the root");
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (at(path[i]).pec != path[i - 1]) throw ExecutionError("not a symbolic path: ec" + std::to_string(path[i]));
  }
  const EcId tgt = path.back();
  std::vector<Expr> parts{at(tgt).pc};
  parts.insert(parts.end(), extra.begin(), extra.end());
  CheckResult r = session.check(mk_and(parts), true, revealed(tgt));
  if (r.unknown()) throw SolverUnknown("cannot concretize path to ec" + std::to_string(tgt) + ": " + r.reason);
  if (r.unsat()) throw ExecutionError("path condition of ec" + std::to_string(tgt) + " is unsatisfiable");
  ConcreteTrace trace;
  for (std::size_t i = 1; i < path.size(); ++i) trace.push_back(event_under(path[i], r.model));
  return trace;
}

std::string format_symbolic_event(const ExecutionContext& ec) {
  if (!ec.ev) return "-";
  const auto& a = ec.ev->action;
  std::string s = "(" + ec.ev->delay.name + ", " + a.channel;
  s += a.kind == EventKind::Input ? "?" : "!";
  if (!a.vars.empty()) {
    s += "(";
    for (std::size_t i = 0; i < a.vars.size(); ++i) s += (i ? "," : "") + a.vars[i].name;
    s += ")";
  }
  return s + ")";
}

std::string dump_tree(SymbolicTree& tree, SolverSession& session, bool with_pc) {
  std::ostringstream os;
  for (EcId id = 0; id < tree.size(); ++id) {
    const auto& ec = tree.at(id);
    os << "ec" << id << " | " << ec.state << " | " << format_symbolic_event(ec) << " | ec" << ec.pec << " | "
       << to_string(tree.satisfiable(id, session)) << "\n";
    if (with_pc) os << "    " << to_smtlib(ec.pc) << "\n";
  }
  return os.str();
}

namespace {

class MemberSearch {
 public:
  MemberSearch(const ConcreteTrace& trace, SymbolicTree& tree, SolverSession& session)
      : trace_(trace), tree_(tree), session_(session) {}

  Membership run() {
    std::vector<EcId> path{0};
    if (dfs(0, 0, {}, path)) return best_;
    return best_;
  }

 private:
  bool holds_under(const Expr& f, const Valuation& nu) {
    CheckResult r = session_.eval_under(f, nu);
    if (r.unknown()) throw SolverUnknown("membership query undecided: " + r.reason);
    return r.sat();
  }

  bool dfs(EcId ec, std::size_t i, const Valuation& nu, std::vector<EcId>& path) {
    if (i == trace_.size()) {
      best_ = {MembershipKind::InTraces, path};
      return true;
    }
    const ConcreteEvent& ev = trace_[i];
    const Variable dur = tree_.registry(ec).dur;
    if (ev.action.is_delta()) {
      if (i + 1 != trace_.size()) return false;
      if (auto d = tree_.enrich_quiescence(ec, session_)) {
        Valuation nd = nu;
        nd[tree_.at(*d).ev->delay.name] = Value::time(ev.delay);
        if (holds_under(tree_.at(*d).pc, nd)) {
          path.push_back(*d);
          best_ = {MembershipKind::InTraces, path};
          return true;
        }
      }
      if (best_.kind == MembershipKind::NotInSem) {
        for (EcId c : std::vector<EcId>(tree_.children(ec))) {
          if (tree_.at(c).delta) continue;
          if (holds_under(mk_and(tree_.at(c).pc, mk_gt(mk_var(dur), mk_time(ev.delay))), nu)) {
            best_ = {MembershipKind::InSemViaQuiescence, path};
            break;
          }
        }
      }
      return false;
    }
    for (EcId c : std::vector<EcId>(tree_.children(ec))) {
      const ExecutionContext& child = tree_.at(c);
      if (child.delta || child.channel() != ev.action.channel || child.ev->action.kind != ev.action.kind) continue;
      const auto& vars = child.ev->action.vars;
      if (vars.size() != ev.action.values.size()) continue;
      Valuation next = nu;
      next[dur.name] = Value::time(ev.delay);
      bool sorts_ok = true;
      for (std::size_t k = 0; k < vars.size(); ++k) {
        sorts_ok = sorts_ok && vars[k].sort == ev.action.values[k].sort;
        next[vars[k].name] = ev.action.values[k];
      }
      if (!sorts_ok || !holds_under(child.pc, next)) continue;
      path.push_back(c);
      if (dfs(c, i + 1, next, path)) return true;
      path.pop_back();
    }
    return false;
  }

  const ConcreteTrace& trace_;
  SymbolicTree& tree_;
  SolverSession& session_;
  Membership best_;
};

}  // namespace

Membership sem_member(const ConcreteTrace& trace, SymbolicTree& tree, SolverSession& session) {
  return MemberSearch(trace, tree, session).run();
}

}  // namespace tiosts
