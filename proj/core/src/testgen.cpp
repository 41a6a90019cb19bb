#include "tiosts/testgen.hpp"

#include "tiosts/error.hpp"

#include "json.hpp"

#include <algorithm>

namespace tiosts {

using Json = nlohmann::ordered_json;

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "PASS";
    case Verdict::FailOut:
      return "FAIL_out";
    case Verdict::FailDur:
      return "FAIL_dur";
    case Verdict::IncOut:
      return "INC_out";
    case Verdict::IncDur:
      return "INC_dur";
    case Verdict::IncUcInSpec:
      return "INC_ucIn_spec";
    case Verdict::IncUcInUspec:
      return "INC_ucIn_uspec";
  }
  return "?";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  for (Verdict v : kAllVerdicts) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::string to_string(Rule r) { return "R" + std::to_string(static_cast<int>(r)); }

std::optional<Rule> parse_rule(std::string_view s) {
  for (int i = 1; i <= 10; ++i) {
    if (to_string(static_cast<Rule>(i)) == s) return static_cast<Rule>(i);
  }
  return std::nullopt;
}

std::string state_name(const TcState& s) {
  if (const auto* id = std::get_if<EcId>(&s)) return "ec" + std::to_string(*id);
  return std::string(to_string(std::get<Verdict>(s)));
}

const BackboneState& TestCase::state(EcId id) const {
  for (const auto& s : states) {
    if (s.id == id) return s;
  }
  throw ExecutionError("ec" + std::to_string(id) + " is not a state of the test case");
}

std::vector<const TcTransition*> TestCase::outgoing(EcId id) const {
  std::vector<const TcTransition*> out;
  for (const auto& t : transitions) {
    if (t.source == id) out.push_back(&t);
  }
  return out;
}

std::map<Rule, std::size_t> TestCase::census() const {
  std::map<Rule, std::size_t> c;
  for (int i = 1; i <= 10; ++i) c[static_cast<Rule>(i)] = 0;
  for (const auto& t : transitions) ++c[t.rule];
  return c;
}

std::vector<std::string> TestCase::input_channels() const {
  std::vector<std::string> out;
  for (const auto& c : channels) {
    if (c.kind != ChannelKind::ControllableInput) out.push_back(c.name);
  }
  return out;
}

std::vector<std::string> TestCase::output_channels() const {
  std::vector<std::string> out;
  for (const auto& c : channels) {
    if (c.kind == ChannelKind::ControllableInput) out.push_back(c.name);
  }
  out.emplace_back(kDelta);
  return out;
}

std::vector<Variable> TestCase::clocks() const {
  std::vector<Variable> out;
  for (const auto& s : states) out.push_back(s.dur);
  return out;
}

std::vector<Variable> TestCase::variables() const {
  std::vector<Variable> out;
  for (const auto& s : states) {
    for (const auto& m : {s.inputs, s.outputs}) {
      for (const auto& [chan, vars] : m) out.insert(out.end(), vars.begin(), vars.end());
    }
  }
  return out;
}

GuardBuilder::GuardBuilder(SymbolicTree& tree, const TestPurpose& tp, GenOptions options, SolverSession& session)
    : tree_(tree), tp_(tp), options_(options), session_(session) {}

Expr GuardBuilder::timeout_before(EcId ec) const {
  return mk_lt(mk_var(tree_.registry(ec).dur), mk_time(options_.tm));
}

Expr GuardBuilder::timeout_reached(EcId ec) const {
  return mk_ge(mk_var(tree_.registry(ec).dur), mk_time(options_.tm));
}

Expr GuardBuilder::stim(EcId next) const {
  VarSet hidden = free_vars(tp_.pc);
  for (const auto& v : tree_.revealed(next)) hidden.erase(v);
  return mk_exists(std::vector<Variable>(hidden.begin(), hidden.end()), tp_.pc);
}

Expr GuardBuilder::obs_spec(EcId ec, EcId child) const {
  return mk_and(timeout_before(ec), tree_.exists_ini(tree_.at(child).pc));
}

Expr GuardBuilder::obs_uspec(EcId ec, const std::string& channel) {
  std::vector<Expr> parts{timeout_before(ec)};
  for (EcId c : std::vector<EcId>(tree_.children(ec))) {
    const auto& child = tree_.at(c);
    if (child.delta || child.channel() != channel) continue;
    if (tree_.satisfiable(c, session_) == SatFlag::Unsat) continue;
    parts.push_back(tree_.forall_ini(mk_not(child.pc)));
  }
  return mk_and(parts);
}

std::vector<EcId> GuardBuilder::observable_children(EcId ec) {
  std::vector<EcId> out;
  for (EcId c : std::vector<EcId>(tree_.children(ec))) {
    const auto& child = tree_.at(c);
    const Channel* chan = tree_.model().find_channel(child.channel());
    if (chan->kind == ChannelKind::ControllableInput) continue;
    if (tree_.satisfiable(c, session_) == SatFlag::Unsat) continue;
    out.push_back(c);
  }
  if (auto d = tree_.enrich_quiescence(ec, session_)) out.push_back(*d);
  return out;
}

std::vector<Variable> GuardBuilder::delta_closure(EcId ec, const Expr& pc) const {
  std::vector<Variable> vars = tree_.ini_vars();
  if (options_.delta_quantify_all) {
    const auto& reg = tree_.registry(ec);
    for (const auto& m : {reg.in, reg.out}) {
      for (const auto& [chan, vs] : m) vars.insert(vars.end(), vs.begin(), vs.end());
    }
  }
  VarSet fv = free_vars(pc);
  std::vector<Variable> out;
  for (const auto& v : vars) {
    if (fv.contains(v)) out.push_back(v);
  }
  return out;
}

Expr GuardBuilder::delta_spec(EcId ec) {
  std::vector<Expr> alts;
  for (EcId c : observable_children(ec)) {
    const Expr& pc = tree_.at(c).pc;
    alts.push_back(mk_exists(delta_closure(ec, pc), pc));
  }
  return mk_and(timeout_reached(ec), mk_or(alts));
}

Expr GuardBuilder::delta_uspec(EcId ec) {
  std::vector<Expr> parts{timeout_reached(ec)};
  for (EcId c : observable_children(ec)) {
    const Expr& pc = tree_.at(c).pc;
    parts.push_back(mk_forall(delta_closure(ec, pc), mk_not(pc)));
  }
  return mk_and(parts);
}

TestCase generate(const TestPurpose& tp, SymbolicTree& tree, SolverSession& session, const GenOptions& options) {
  const Tiosts& model = tree.model();
  TestCase tc;
  tc.model = model.name;
  tc.channels = model.channels;
  tc.consts = model.consts;
  tc.tm = options.tm;
  GuardBuilder guards(tree, tp, options, session);

  auto emit = [&](EcId src, TcAction action, Expr guard, std::vector<Variable> resets, TcState target, Rule rule) {
    CheckResult r = session.check(guard);
    if (r.unknown()) {
      throw SolverUnknown("guard of " + to_string(rule) + " at ec" + std::to_string(src) + " undecided: " + r.reason);
    }
    if (r.unsat()) return;
    tc.transitions.push_back({src, std::move(action), std::move(guard), std::move(resets), target, rule});
  };

  for (std::size_t i = 0; i + 1 < tp.path.size(); ++i) {
    const EcId ec = tp.path[i];
    const EcId next = tp.path[i + 1];
    const FreshRegistry& reg = tree.registry(ec);
    tc.states.push_back({ec, reg.dur, reg.in, reg.out});
    tree.enrich_quiescence(ec, session);

    for (EcId c : std::vector<EcId>(tree.children(ec))) {
      const auto& child = tree.at(c);
      if (child.delta) continue;
      const Channel* chan = model.find_channel(child.channel());
      const auto& vars = child.ev->action.vars;
      const std::vector<Variable> reset_next{tree.registry(c).dur};
      if (c == next) {
        switch (chan->kind) {
          case ChannelKind::ControllableInput:
            emit(ec, {chan->name, EventKind::Output, vars}, guards.stim(c), reset_next, c, Rule::R1);
            break;
          case ChannelKind::Output:
            if (c == tp.target()) {
              emit(ec, {chan->name, EventKind::Input, vars}, guards.obs_spec(ec, c), {}, Verdict::Pass, Rule::R3);
            } else {
              emit(ec, {chan->name, EventKind::Input, vars}, guards.obs_spec(ec, c), reset_next, c, Rule::R2);
            }
            break;
          case ChannelKind::UncontrollableInput:
            emit(ec, {chan->name, EventKind::Input, vars}, guards.obs_spec(ec, c), reset_next, c, Rule::R6);
            break;
        }
      } else if (chan->kind == ChannelKind::Output) {
        emit(ec, {chan->name, EventKind::Input, vars}, guards.obs_spec(ec, c), {}, Verdict::IncOut, Rule::R4);
      } else if (chan->kind == ChannelKind::UncontrollableInput) {
        emit(ec, {chan->name, EventKind::Input, vars}, guards.obs_spec(ec, c), {}, Verdict::IncUcInSpec, Rule::R7);
      }
    }
    for (const auto& chan : model.channels) {
      if (chan.kind != ChannelKind::Output) continue;
      emit(ec, {chan.name, EventKind::Input, reg.out.at(chan.name)}, guards.obs_uspec(ec, chan.name), {},
           Verdict::FailOut, Rule::R5);
    }
    for (const auto& chan : model.channels) {
      if (chan.kind != ChannelKind::UncontrollableInput) continue;
      emit(ec, {chan.name, EventKind::Input, reg.in.at(chan.name)}, guards.obs_uspec(ec, chan.name), {},
           Verdict::IncUcInUspec, Rule::R8);
    }
    const TcAction delta{std::string(kDelta), EventKind::Delta, {}};
    emit(ec, delta, guards.delta_spec(ec), {}, Verdict::IncDur, Rule::R9);
    emit(ec, delta, guards.delta_uspec(ec), {}, Verdict::FailDur, Rule::R10);
  }
  return tc;
}

namespace {

std::string_view channel_kind_name(ChannelKind k) {
  switch (k) {
    case ChannelKind::ControllableInput:
      return "controllable";
    case ChannelKind::UncontrollableInput:
      return "uncontrollable";
    case ChannelKind::Output:
      return "output";
  }
  return "?";
}

template <class E, std::size_t N>
E parse_enum(const std::string& s, const E (&values)[N], const char* what) {
  for (E v : values) {
    if (std::string_view(to_string(v)) == s) return v;
  }
  throw Error(std::string("unknown ") + what + " '" + s + "' in test case");
}

constexpr Sort kSorts[] = {Sort::Int, Sort::Bool, Sort::Time};
constexpr VarKind kKinds[] = {VarKind::Data,    VarKind::Clock,    VarKind::FreshIni,
                              VarKind::FreshIn, VarKind::FreshOut, VarKind::FreshDur};

ChannelKind parse_channel_kind(const std::string& s) {
  for (ChannelKind k : {ChannelKind::ControllableInput, ChannelKind::UncontrollableInput, ChannelKind::Output}) {
    if (channel_kind_name(k) == s) return k;
  }
  throw Error("unknown channel kind '" + s + "' in test case");
}

Json names(const std::vector<Variable>& vars) {
  Json a = Json::array();
  for (const auto& v : vars) a.push_back(v.name);
  return a;
}

Json registry_json(const std::map<std::string, std::vector<Variable>>& m) {
  Json o = Json::object();
  for (const auto& [chan, vars] : m) o[chan] = names(vars);
  return o;
}

void collect(const Expr& e, std::map<std::string, Variable>& out) {
  for (const auto& v : free_vars(e)) out[v.name] = v;
  for (const auto& v : bound_vars(e)) out[v.name] = v;
}

std::string value_text(const Value& v) { return v.sort == Sort::Bool ? (v.flag ? "true" : "false") : format_rational(v.num); }

}  // namespace

std::string export_json(const TestCase& tc) {
  std::map<std::string, Variable> symbols;
  for (const auto& s : tc.states) {
    symbols[s.dur.name] = s.dur;
    for (const auto& v : tc.variables()) symbols[v.name] = v;
  }
  for (const auto& t : tc.transitions) {
    collect(t.guard, symbols);
    for (const auto& v : t.action.vars) symbols[v.name] = v;
    for (const auto& v : t.resets) symbols[v.name] = v;
  }

  Json j;
  j["format"] = "tiosts-tc/1";
  j["model"] = tc.model;
  j["tm"] = format_rational(tc.tm);
  j["signature"] = {{"inputs", tc.input_channels()},
                    {"outputs", tc.output_channels()},
                    {"clocks", names(tc.clocks())},
                    {"vars", names(tc.variables())}};
  Json chans = Json::array();
  for (const auto& c : tc.channels) {
    Json payload = Json::array();
    for (Sort s : c.payload) payload.push_back(std::string(to_string(s)));
    chans.push_back({{"name", c.name}, {"kind", std::string(channel_kind_name(c.kind))}, {"payload", payload}});
  }
  j["channels"] = chans;
  Json consts = Json::array();
  for (const auto& c : tc.consts) {
    consts.push_back({{"name", c.name}, {"sort", std::string(to_string(c.value.sort))}, {"value", value_text(c.value)}});
  }
  j["consts"] = consts;
  Json syms = Json::array();
  for (const auto& [name, v] : symbols) {
    syms.push_back({{"name", name}, {"sort", std::string(to_string(v.sort))}, {"kind", std::string(to_string(v.kind))}});
  }
  j["symbols"] = syms;
  Json states = Json::array();
  for (const auto& s : tc.states) {
    states.push_back({{"id", state_name(s.id)},
                      {"kind", "backbone"},
                      {"delay", s.dur.name},
                      {"inputs", registry_json(s.inputs)},
                      {"outputs", registry_json(s.outputs)}});
  }
  for (Verdict v : kAllVerdicts) states.push_back({{"id", std::string(to_string(v))}, {"kind", "verdict"}});
  j["states"] = states;
  j["initial"] = state_name(tc.initial());
  Json trs = Json::array();
  for (const auto& t : tc.transitions) {
    Json action = {{"chan", t.action.channel},
                   {"dir", t.action.kind == EventKind::Input ? "?" : "!"},
                   {"vars", names(t.action.vars)}};
    trs.push_back({{"src", state_name(t.source)},
                   {"action", action},
                   {"guard", to_smtlib(t.guard)},
                   {"resets", names(t.resets)},
                   {"tgt", state_name(t.target)},
                   {"rule", to_string(t.rule)}});
  }
  j["transitions"] = trs;
  return j.dump(2) + "\n";
}

TestCase import_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed test case JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "tiosts-tc/1") throw Error("unsupported test case format");
    TestCase tc;
    tc.model = j.at("model").get<std::string>();
    tc.tm = parse_rational(j.at("tm").get<std::string>());
    for (const auto& c : j.at("channels")) {
      Channel ch{c.at("name").get<std::string>(), parse_channel_kind(c.at("kind").get<std::string>()), {}};
      for (const auto& s : c.at("payload")) ch.payload.push_back(parse_enum(s.get<std::string>(), kSorts, "sort"));
      tc.channels.push_back(std::move(ch));
    }
    for (const auto& c : j.at("consts")) {
      Sort s = parse_enum(c.at("sort").get<std::string>(), kSorts, "sort");
      std::string v = c.at("value").get<std::string>();
      Value val = s == Sort::Bool ? Value::boolean(v == "true") : Value{s, parse_rational(v), false};
      tc.consts.push_back({c.at("name").get<std::string>(), val});
    }
    std::map<std::string, Variable> symbols;
    for (const auto& s : j.at("symbols")) {
      Variable v{s.at("name").get<std::string>(), parse_enum(s.at("sort").get<std::string>(), kSorts, "sort"),
                 parse_enum(s.at("kind").get<std::string>(), kKinds, "variable kind")};
      symbols[v.name] = v;
    }
    auto var = [&](const Json& n) {
      auto it = symbols.find(n.get<std::string>());
      if (it == symbols.end()) throw Error("undeclared symbol '" + n.get<std::string>() + "' in test case");
      return it->second;
    };
    auto vars = [&](const Json& a) {
      std::vector<Variable> out;
      for (const auto& n : a) out.push_back(var(n));
      return out;
    };
    auto registry = [&](const Json& o) {
      std::map<std::string, std::vector<Variable>> m;
      for (const auto& [chan, a] : o.items()) m[chan] = vars(a);
      return m;
    };
    auto parse_state = [&](const std::string& s) -> TcState {
      if (auto v = parse_verdict(s)) return *v;
      if (s.size() > 2 && s.rfind("ec", 0) == 0) return static_cast<EcId>(std::stoull(s.substr(2)));
      throw Error("unknown test case state '" + s + "'");
    };
    for (const auto& s : j.at("states")) {
      if (s.at("kind") != "backbone") continue;
      auto id = parse_state(s.at("id").get<std::string>());
      if (!std::holds_alternative<EcId>(id)) throw Error("backbone state named like a verdict");
      tc.states.push_back({std::get<EcId>(id), var(s.at("delay")), registry(s.at("inputs")), registry(s.at("outputs"))});
    }
    if (tc.states.empty()) throw Error("test case without backbone states");
    if (state_name(tc.initial()) != j.at("initial").get<std::string>()) throw Error("initial state must come first");
    for (const auto& t : j.at("transitions")) {
      TcTransition tr;
      auto src = parse_state(t.at("src").get<std::string>());
      if (!std::holds_alternative<EcId>(src)) throw Error("transition leaving a verdict state");
      tr.source = std::get<EcId>(src);
      const auto& a = t.at("action");
      tr.action.channel = a.at("chan").get<std::string>();
      tr.action.kind = tr.action.channel == kDelta ? EventKind::Delta
                       : a.at("dir") == "?"        ? EventKind::Input
                                                   : EventKind::Output;
      tr.action.vars = vars(a.at("vars"));
      tr.guard = parse_smtlib(t.at("guard").get<std::string>(), symbols);
      tr.resets = vars(t.at("resets"));
      tr.target = parse_state(t.at("tgt").get<std::string>());
      auto rule = parse_rule(t.at("rule").get<std::string>());
      if (!rule) throw Error("unknown rule in test case");
      tr.rule = *rule;
      tc.transitions.push_back(std::move(tr));
    }
    return tc;
  } catch (const Json::exception& e) {
    throw Error(std::string("invalid test case JSON: ") + e.what());
  }
}

}  // namespace tiosts
