#include "tiosts/lutsim.hpp"

#include "tiosts/dsl.hpp"
#include "tiosts/error.hpp"

#include <algorithm>
#include <future>
#include <random>
#include <sstream>
#include <thread>

namespace tiosts {

namespace {

std::vector<std::string> split(std::string_view text, char sep, std::size_t max_parts) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (parts.size() + 1 < max_parts) {
    std::size_t next = text.find(sep, pos);
    if (next == std::string_view::npos) break;
    parts.emplace_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
  parts.emplace_back(text.substr(pos));
  return parts;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

Expr literal_like(const Expr& e, const Rational& r) { return e.sort() == Sort::Time ? mk_time(r) : mk_int(r); }

// Time terms only support addition of non-negative literals.
Expr add_offset(const Expr& e, const Rational& d) {
  if (d >= 0) return mk_add(e, literal_like(e, d));
  if (e.sort() == Sort::Time) throw ModelError("cannot subtract from the time term " + to_string(e));
  return mk_sub(e, mk_int(-d));
}

bool mentions_clock(const Expr& e) {
  const VarSet vars = free_vars(e);
  return std::any_of(vars.begin(), vars.end(), [](const Variable& v) { return v.kind == VarKind::Clock; });
}

Expr shift_clock_bounds(const Expr& e, const Rational& d, bool& changed) {
  if (is_comparison(e.op())) {
    Expr a = e.args()[0];
    Expr b = e.args()[1];
    const bool ca = mentions_clock(a);
    const bool cb = mentions_clock(b);
    if (ca == cb) return e;
    changed = true;
    Expr& bound = ca ? b : a;
    Expr& clock = ca ? a : b;
    if (d >= 0 || bound.sort() != Sort::Time) {
      bound = add_offset(bound, d);
    } else {
      clock = mk_add(clock, mk_time(-d));
    }
    return mk_cmp(e.op(), a, b);
  }
  switch (e.op()) {
    case Op::And:
    case Op::Or:
    case Op::Not:
    case Op::Forall:
    case Op::Exists: {
      std::vector<Expr> args;
      for (const auto& a : e.args()) args.push_back(shift_clock_bounds(a, d, changed));
      return e.with_args(std::move(args));
    }
    default:
      return e;
  }
}

Transition& find_transition_or_throw(Tiosts& model, const std::string& name) {
  for (auto& t : model.transitions) {
    if (t.name == name) return t;
  }
  throw ModelError("mutation target: no transition named '" + name + "'");
}

Valuation bind_all(Valuation nu, const Valuation& more) {
  for (const auto& [k, v] : more) nu.emplace(k, v);
  return nu;
}

Subst as_subst(const Valuation& nu) {
  Subst s;
  for (const auto& [k, v] : nu) s[k] = value_expr(v);
  return s;
}

bool holds_somewhere(SolverSession& session, const Expr& f, const Valuation& nu) {
  CheckResult r = session.eval_under(f, nu);
  if (r.unknown()) throw SolverUnknown("simulation query undecided: " + r.reason);
  return r.sat();
}

}  // namespace

Mutation parse_mutation(std::string_view text) {
  const std::string t = trim(text);
  const auto head = split(t, ':', 2);
  const std::string& kind = head[0];
  auto fail = [&](const std::string& why) -> Mutation { throw Error("mutation '" + t + "': " + why); };
  auto number = [&](const std::string& s) {
    try {
      return parse_rational(s);
    } catch (const std::exception&) {
      fail("'" + s + "' is not a number");
    }
    return Rational{};
  };
  Mutation m;
  if (kind == "offset") {
    const auto p = split(t, ':', 4);
    if (p.size() != 4) return fail("expected offset:<channel>:<component>:<delta>");
    m.kind = MutationKind::OutputOffset;
    m.target = p[1];
    const Rational c = number(p[2]);
    if (!is_integral(c) || c < 1) return fail("component must be a positive integer");
    m.component = static_cast<std::size_t>(c.numerator());
    m.delta = number(p[3]);
  } else if (kind == "delay") {
    const auto p = split(t, ':', 3);
    if (p.size() != 3) return fail("expected delay:<transition>:<delta>");
    m.kind = MutationKind::DelayShift;
    m.target = p[1];
    m.delta = number(p[2]);
  } else if (kind == "drop") {
    const auto p = split(t, ':', 2);
    if (p.size() != 2 || p[1].empty()) return fail("expected drop:<transition>");
    m.kind = MutationKind::Drop;
    m.target = p[1];
  } else if (kind == "tighten" || kind == "loosen") {
    const auto p = split(t, ':', 3);
    if (p.size() != 3 || trim(p[2]).empty()) return fail("expected " + kind + ":<transition>:<formula>");
    m.kind = kind == "tighten" ? MutationKind::GuardTighten : MutationKind::GuardLoosen;
    m.target = p[1];
    m.formula = trim(p[2]);
  } else {
    return fail("unknown kind '" + kind + "'");
  }
  if (m.target.empty()) return fail("missing target");
  return m;
}

std::string describe(const Mutation& m) {
  switch (m.kind) {
    case MutationKind::OutputOffset:
      return "offset:" + m.target + ":" + std::to_string(m.component) + ":" + format_rational(m.delta);
    case MutationKind::DelayShift:
      return "delay:" + m.target + ":" + format_rational(m.delta);
    case MutationKind::Drop:
      return "drop:" + m.target;
    case MutationKind::GuardTighten:
      return "tighten:" + m.target + ":" + m.formula;
    case MutationKind::GuardLoosen:
      return "loosen:" + m.target + ":" + m.formula;
  }
  return "?";
}

std::vector<Mutation> parse_mutation_list(std::string_view text) {
  std::vector<Mutation> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    out.push_back(parse_mutation(line));
  }
  return out;
}

Mutant mutate(const Tiosts& model, const Mutation& m) {
  Mutant out{model, {}};
  Tiosts& g = out.model;
  switch (m.kind) {
    case MutationKind::OutputOffset: {
      const Channel* ch = g.find_channel(m.target);
      if (!ch || !ch->is_output()) throw ModelError("mutation target: no output channel named '" + m.target + "'");
      if (m.component == 0 || m.component > ch->payload.size()) {
        throw ModelError("mutation target: " + m.target + " has no component " + std::to_string(m.component));
      }
      if (ch->payload[m.component - 1] == Sort::Bool) throw ModelError("cannot offset a bool component");
      for (auto& t : g.transitions) {
        if (t.action.kind != EventKind::Output || t.action.channel != m.target) continue;
        Expr& e = t.action.sent[m.component - 1];
        e = add_offset(e, m.delta);
        out.edits.push_back(t.name + ": component " + std::to_string(m.component) + " of " + m.target + " is " +
                            to_string(e));
      }
      if (out.edits.empty()) throw ModelError("mutation target: nothing emits on " + m.target);
      break;
    }
    case MutationKind::DelayShift: {
      Transition& t = find_transition_or_throw(g, m.target);
      bool changed = false;
      t.guard = shift_clock_bounds(t.guard, m.delta, changed);
      if (!changed) throw ModelError("mutation target: the guard of " + t.name + " bounds no clock");
      out.edits.push_back(t.name + ": guard is " + to_string(t.guard));
      break;
    }
    case MutationKind::Drop: {
      auto it = std::find_if(g.transitions.begin(), g.transitions.end(),
                             [&](const Transition& t) { return t.name == m.target; });
      if (it == g.transitions.end()) throw ModelError("mutation target: no transition named '" + m.target + "'");
      g.transitions.erase(it);
      out.edits.push_back(m.target + ": removed");
      break;
    }
    case MutationKind::GuardTighten:
    case MutationKind::GuardLoosen: {
      Transition& t = find_transition_or_throw(g, m.target);
      Expr f = parse_formula(m.formula, g);
      t.guard = m.kind == MutationKind::GuardTighten ? mk_and(t.guard, f) : mk_or(t.guard, f);
      out.edits.push_back(t.name + ": guard is " + to_string(t.guard));
      break;
    }
  }
  g.validate();
  return out;
}

TraceSet h_close(const TraceSet& traces, const Tiosts& model, SolverSession& session) {
  std::size_t longest = 0;
  for (const auto& t : traces) longest = std::max(longest, t.size());
  SymbolicTree tree(model, TreeOptions{longest + 2, false});

  std::vector<ConcreteAction> inserted{delta_event(0).action};
  for (const auto& c : model.channels) {
    if (c.kind != ChannelKind::ControllableInput) continue;
    ConcreteAction a{c.name, EventKind::Input, {}};
    for (Sort s : c.payload) a.values.push_back(s == Sort::Bool ? Value::boolean(false) : Value{s, Rational(0), false});
    inserted.push_back(std::move(a));
  }

  TraceSet out;
  for (const auto& t : traces) {
    for (std::size_t i = 0; i <= t.size(); ++i) out.emplace(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(i));
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i].delay <= 0 || (i > 0 && t[i - 1].action.is_delta())) continue;
      for (const auto& a : inserted) {
        ConcreteTrace c(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(i));
        c.push_back({Rational(0), a});
        if (out.contains(c)) continue;
        if (sem_member(c, tree, session).kind != MembershipKind::NotInSem) out.insert(std::move(c));
      }
    }
  }
  return out;
}

TraceSet sample_traces(const Tiosts& model, std::size_t n, std::size_t depth, std::uint64_t seed,
                       SolverSession& session) {
  if (n == 0) return {};
  SymbolicTree tree(model, TreeOptions{depth + 1, false});
  std::mt19937_64 rng(seed);
  TraceSet raw;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<EcId> path{0};
    while (path.size() <= depth) {
      const EcId ec = path.back();
      if (tree.at(ec).delta) break;
      tree.enrich_quiescence(ec, session);
      std::vector<EcId> options;
      for (EcId c : std::vector<EcId>(tree.children(ec))) {
        if (tree.satisfiable(c, session) == SatFlag::Sat) options.push_back(c);
      }
      if (auto d = tree.delta_child(ec)) options.push_back(*d);
      if (options.empty()) break;
      path.push_back(options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)]);
    }
    if (path.size() == 1) throw ExecutionError("no satisfiable path from the initial state");

    std::vector<Expr> pins;
    for (const auto& v : tree.revealed(path.back())) {
      if (rng() % 2) continue;
      const auto r = static_cast<std::int64_t>(rng() % 5);
      if (v.sort == Sort::Time) pins.push_back(mk_le(mk_var(v), mk_time(r)));
      if (v.sort == Sort::Int) pins.push_back(mk_ge(mk_var(v), mk_int(r)));
    }
    try {
      raw.insert(tree.concretize(path, session, pins));
    } catch (const ExecutionError&) {
      raw.insert(tree.concretize(path, session));
    }
  }
  return h_close(raw, model, session);
}

namespace {

class Cosimulation {
 public:
  Cosimulation(const Tiosts& lut, const TestCase& tc, const CosimConfig& cfg, SolverSession& session)
      : tc_(tc),
        cfg_(cfg),
        session_(session),
        tree_(lut, TreeOptions{cfg.max_steps + 2, false}),
        rng_(cfg.seed),
        run_(start(tc)) {
    frontier_.push_back({0, {}});
    for (std::int64_t i = 0; i <= 3; ++i) pool_.push_back(i);
    for (const auto& c : lut.consts) {
      if (c.value.sort == Sort::Int) pool_.push_back(c.value.num.numerator());
    }
  }

  CosimResult run() {
    while (!run_.at_verdict() && trace_.size() < cfg_.max_steps) {
      const EcId q = std::get<EcId>(run_.state);
      Choice choice = choose(q);
      step(run_, choice.event, tc_, session_);
      trace_.push_back(choice.event);
      advance(choice);
    }
    CosimResult out;
    out.seed = cfg_.seed;
    out.outcome.verdict = run_.verdict();
    out.outcome.consumed = trace_.size();
    out.outcome.final = std::move(run_);
    out.trace = std::move(trace_);
    return out;
  }

 private:
  struct Entry {
    EcId ec;
    Valuation nu;
  };
  struct Option {
    std::size_t entry;
    EcId child;
  };
  struct Choice {
    ConcreteEvent event;
    std::optional<Option> from;  // the LUT's own move, if any
    Valuation committed;         // initial values fixed while choosing it
  };

  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  template <class T>
  const T& pick(const std::vector<T>& xs) {
    return xs[std::uniform_int_distribution<std::size_t>(0, xs.size() - 1)(rng_)];
  }

  Choice choose(EcId q) {
    const TcTransition* stim = nullptr;
    for (const auto* t : tc_.outgoing(q)) {
      if (t->rule == Rule::R1) stim = t;
    }
    if (stim) {
      Choice c = stimulus(q, *stim);
      if (c.event.delay > 0 && coin(0.25)) {
        auto opts = options(c.event.delay);
        if (!opts.empty()) return realize(pick(opts), c.event.delay);
      }
      return c;
    }
    auto opts = options(cfg_.tm);
    const bool quiet = quiescence_allowed();
    const std::size_t n = opts.size() + (quiet ? 1 : 0);
    if (n == 0) return {delta_event(cfg_.tm), std::nullopt, {}};
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
    if (k == opts.size()) return {delta_event(cfg_.tm), std::nullopt, {}};
    return realize(opts[k], cfg_.tm);
  }

  std::vector<Expr> pins_for(const std::vector<Variable>& vars, const Valuation& known, const Rational& bound) {
    std::vector<std::int64_t> ints = pool_;
    for (const auto& [name, v] : known) {
      if (v.sort == Sort::Int) ints.push_back(v.num.numerator());
    }
    std::vector<Expr> pins;
    for (const auto& v : vars) {
      switch (v.sort) {
        case Sort::Time: {
          const auto top = std::max<std::int64_t>(1, static_cast<std::int64_t>(boost::rational_cast<double>(bound)));
          const Rational r(static_cast<std::int64_t>(rng_() % static_cast<std::uint64_t>(top + 2)));
          pins.push_back(coin(0.5) ? mk_eq(mk_var(v), mk_time(r)) : mk_ge(mk_var(v), mk_time(r)));
          break;
        }
        case Sort::Int:
          pins.push_back(mk_eq(mk_var(v), mk_int(pick(ints))));
          break;
        case Sort::Bool:
          pins.push_back(coin(0.5) ? mk_var(v) : mk_not(mk_var(v)));
          break;
      }
    }
    std::shuffle(pins.begin(), pins.end(), rng_);
    return pins;
  }

  // Greedily keeps each pin that leaves f satisfiable, then reads a model.
  Valuation solve(const Expr& f, const std::vector<Expr>& pins, const std::vector<Variable>& vars) {
    Expr g = f;
    for (const auto& p : pins) {
      Expr h = mk_and(g, p);
      if (session_.is_sat(h)) g = h;
    }
    CheckResult r = session_.check(g, true, vars);
    if (r.unknown()) throw SolverUnknown("simulation query undecided: " + r.reason);
    if (r.unsat()) throw ExecutionError("simulation constraint became unsatisfiable");
    return r.model;
  }

  Choice stimulus(EcId q, const TcTransition& t) {
    const BackboneState& bs = tc_.state(q);
    std::vector<Variable> vars{bs.dur};
    vars.insert(vars.end(), t.action.vars.begin(), t.action.vars.end());
    const Expr f = substitute(t.guard, as_subst(run_.nu.values()));
    const auto pins = cfg_.diversify ? pins_for(vars, run_.nu.values(), cfg_.tm) : std::vector<Expr>{};
    const Valuation m = solve(f, pins, vars);
    ConcreteEvent ev{m.at(bs.dur.name).num, {t.action.channel, EventKind::Input, {}}};
    for (const auto& v : t.action.vars) ev.action.values.push_back(m.at(v.name));
    return {ev, std::nullopt, {}};
  }

  Expr delay_of(EcId ec) const { return mk_var(tree_.registry(ec).dur); }

  std::vector<Option> options(const Rational& bound) {
    std::vector<Option> out;
    for (std::size_t i = 0; i < frontier_.size(); ++i) {
      const Entry& e = frontier_[i];
      for (EcId c : std::vector<EcId>(tree_.children(e.ec))) {
        const auto& child = tree_.at(c);
        if (child.delta) continue;
        const Channel* ch = tree_.model().find_channel(child.channel());
        if (ch->kind == ChannelKind::ControllableInput) continue;
        if (holds_somewhere(session_, mk_and(child.pc, mk_lt(delay_of(e.ec), mk_time(bound))), e.nu)) {
          out.push_back({i, c});
        }
      }
    }
    return out;
  }

  bool quiescence_allowed() {
    for (const Entry& e : frontier_) {
      if (auto d = tree_.enrich_quiescence(e.ec, session_)) {
        if (holds_somewhere(session_, tree_.at(*d).pc, e.nu)) return true;
      }
      for (EcId c : std::vector<EcId>(tree_.children(e.ec))) {
        const auto& child = tree_.at(c);
        if (child.delta) continue;
        if (holds_somewhere(session_, mk_and(child.pc, mk_gt(delay_of(e.ec), mk_time(cfg_.tm))), e.nu)) return true;
      }
    }
    return false;
  }

  Choice realize(const Option& o, const Rational& bound) {
    const Entry& e = frontier_[o.entry];
    const auto& child = tree_.at(o.child);
    const Expr f =
        substitute(mk_and(child.pc, mk_lt(delay_of(e.ec), mk_time(bound))), as_subst(e.nu));
    std::vector<Variable> vars{child.ev->delay};
    vars.insert(vars.end(), child.ev->action.vars.begin(), child.ev->action.vars.end());
    Valuation m = solve(f, pins_for(vars, e.nu, bound), vars);
    ConcreteEvent ev = tree_.event_under(o.child, m);
    Valuation committed;
    for (const auto& v : tree_.ini_vars()) {
      if (auto it = m.find(v.name); it != m.end()) committed.emplace(v.name, it->second);
    }
    return {ev, o, committed};
  }

  void advance(const Choice& choice) {
    const ConcreteEvent& ev = choice.event;
    if (ev.action.is_delta()) return;
    std::vector<Entry> next;
    for (std::size_t i = 0; i < frontier_.size(); ++i) {
      const Entry& e = frontier_[i];
      for (EcId c : std::vector<EcId>(tree_.children(e.ec))) {
        const auto& child = tree_.at(c);
        if (child.delta || child.channel() != ev.action.channel || child.ev->action.kind != ev.action.kind) continue;
        Valuation nu = e.nu;
        nu[child.ev->delay.name] = Value::time(ev.delay);
        for (std::size_t k = 0; k < ev.action.values.size(); ++k) nu[child.ev->action.vars[k].name] = ev.action.values[k];
        if (choice.from && choice.from->entry == i && choice.from->child == c) nu = bind_all(nu, choice.committed);
        if (holds_somewhere(session_, child.pc, nu)) next.push_back({c, std::move(nu)});
      }
    }
    if (next.empty()) throw ExecutionError("the simulated implementation cannot perform " + format_event(ev));
    frontier_ = std::move(next);
  }

  const TestCase& tc_;
  CosimConfig cfg_;
  SolverSession& session_;
  SymbolicTree tree_;
  std::mt19937_64 rng_;
  RunState run_;
  std::vector<Entry> frontier_;
  ConcreteTrace trace_;
  std::vector<std::int64_t> pool_;
};

}  // namespace

CosimResult cosim(const Tiosts& lut, const TestCase& tc, const CosimConfig& cfg, SolverSession& session) {
  return Cosimulation(lut, tc, cfg, session).run();
}

std::vector<CosimResult> cosim_batch(const Tiosts& lut, const TestCase& tc, const CosimConfig& cfg, std::size_t runs,
                                     const SolverConfig& solver, std::size_t jobs) {
  if (jobs == 0) jobs = std::max(1u, std::min(4u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, std::max<std::size_t>(runs, 1));
  std::vector<CosimResult> results(runs);
  std::vector<std::future<void>> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.push_back(std::async(std::launch::async, [&, w] {
      SolverSession session(solver);
      for (std::size_t i = w; i < runs; i += jobs) {
        CosimConfig c = cfg;
        c.seed = cfg.seed + i;
        results[i] = cosim(lut, tc, c, session);
      }
    }));
  }
  for (auto& f : workers) f.get();
  return results;
}

}  // namespace tiosts
