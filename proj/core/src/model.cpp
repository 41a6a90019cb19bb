#include "tiosts/model.hpp"

#include "tiosts/error.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

namespace tiosts {

bool operator<(const Value& a, const Value& b) {
  if (a.sort != b.sort) return a.sort < b.sort;
  if (a.sort == Sort::Bool) return a.flag < b.flag;
  return a.num < b.num;
}

bool operator<(const ConcreteAction& a, const ConcreteAction& b) {
  return std::tie(a.channel, a.kind, a.values) < std::tie(b.channel, b.kind, b.values);
}

bool operator<(const ConcreteEvent& a, const ConcreteEvent& b) {
  if (a.delay != b.delay) return a.delay < b.delay;
  return a.action < b.action;
}

std::string format_value(const Value& v) {
  if (v.sort == Sort::Bool) return v.flag ? "true" : "false";
  return format_rational(v.num);
}

Expr value_expr(const Value& v) {
  switch (v.sort) {
    case Sort::Int:
      return mk_int(v.num);
    case Sort::Time:
      return mk_time(v.num);
    case Sort::Bool:
      return mk_bool(v.flag);
  }
  return mk_true();
}

const Channel* find_channel(const std::vector<Channel>& channels, std::string_view name) {
  auto it = std::find_if(channels.begin(), channels.end(), [&](const Channel& c) { return c.name == name; });
  return it == channels.end() ? nullptr : &*it;
}

const Channel* Tiosts::find_channel(std::string_view name) const { return tiosts::find_channel(channels, name); }

const Variable* Tiosts::find_variable(std::string_view name) const {
  for (const auto* list : {&data, &clocks}) {
    auto it = std::find_if(list->begin(), list->end(), [&](const Variable& v) { return v.name == name; });
    if (it != list->end()) return &*it;
  }
  return nullptr;
}

const Transition* Tiosts::find_transition(std::string_view name) const {
  auto it = std::find_if(transitions.begin(), transitions.end(), [&](const Transition& t) { return t.name == name; });
  return it == transitions.end() ? nullptr : &*it;
}

std::vector<const Transition*> Tiosts::outgoing(std::string_view state) const {
  std::vector<const Transition*> out;
  for (const auto& t : transitions) {
    if (t.source == state) out.push_back(&t);
  }
  return out;
}

bool Tiosts::has_state(std::string_view state) const {
  return std::find(states.begin(), states.end(), state) != states.end();
}

void Tiosts::validate() const {
  auto fail = [](const std::string& msg) { throw ModelError(msg); };
  if (states.empty()) fail("model declares no state");
  if (!has_state(initial)) fail("initial state '" + initial + "' is not declared");

  std::set<std::string> names;
  auto unique = [&](const std::string& n, const char* what) {
    if (n == kDelta) fail(std::string(what) + " uses the reserved name '" + std::string(kDelta) + "'");
    if (!names.insert(n).second) fail(std::string("duplicate ") + what + " '" + n + "'");
  };
  for (const auto& s : states) unique(s, "state");
  for (const auto& c : channels) unique(c.name, "channel");
  for (const auto& v : data) {
    unique(v.name, "variable");
    if (v.kind != VarKind::Data) fail("variable '" + v.name + "' must be of data kind");
  }
  for (const auto& k : clocks) {
    unique(k.name, "clock");
    if (k.kind != VarKind::Clock || k.sort != Sort::Time) fail("clock '" + k.name + "' must be time-sorted");
  }
  for (const auto& c : consts) unique(c.name, "constant");

  auto check_vars = [&](const Expr& e, const std::string& where) {
    check_sorts(e);
    for (const auto& v : free_vars(e)) {
      const Variable* decl = find_variable(v.name);
      if (!decl || !(*decl == v)) fail(where + ": undeclared variable '" + v.name + "'");
    }
  };

  std::set<std::string> tr_names;
  for (const auto& t : transitions) {
    const std::string where = "transition '" + t.name + "'";
    if (!tr_names.insert(t.name).second) fail("duplicate transition '" + t.name + "'");
    if (!has_state(t.source)) fail(where + ": unknown source state '" + t.source + "'");
    if (!has_state(t.target)) fail(where + ": unknown target state '" + t.target + "'");
    const Channel* ch = find_channel(t.action.channel);
    if (!ch) fail(where + ": unknown channel '" + t.action.channel + "'");
    if (!t.guard.is_formula()) fail(where + ": guard is not a formula");
    check_vars(t.guard, where);
    if (t.action.kind == EventKind::Input) {
      if (!ch->is_input()) fail(where + ": reception on output channel '" + ch->name + "'");
      if (!t.action.sent.empty()) fail(where + ": reception carries terms");
      if (t.action.received.size() != ch->payload.size()) fail(where + ": arity mismatch on '" + ch->name + "'");
      std::set<std::string> seen;
      for (std::size_t i = 0; i < t.action.received.size(); ++i) {
        const auto& x = t.action.received[i];
        const Variable* decl = find_variable(x.name);
        if (!decl || decl->kind != VarKind::Data) fail(where + ": reception into non-data variable '" + x.name + "'");
        if (x.sort != ch->payload[i]) fail(where + ": sort mismatch for '" + x.name + "'");
        if (!seen.insert(x.name).second) fail(where + ": variable '" + x.name + "' received twice");
      }
    } else if (t.action.kind == EventKind::Output) {
      if (!ch->is_output()) fail(where + ": emission on input channel '" + ch->name + "'");
      if (!t.action.received.empty()) fail(where + ": emission receives variables");
      if (t.action.sent.size() != ch->payload.size()) fail(where + ": arity mismatch on '" + ch->name + "'");
      for (std::size_t i = 0; i < t.action.sent.size(); ++i) {
        check_vars(t.action.sent[i], where);
        if (t.action.sent[i].sort() != ch->payload[i]) fail(where + ": payload sort mismatch on '" + ch->name + "'");
      }
    } else {
      fail(where + ": quiescence is not a model action");
    }
    for (const auto& k : t.resets) {
      const Variable* decl = find_variable(k.name);
      if (!decl || decl->kind != VarKind::Clock) fail(where + ": reset of non-clock '" + k.name + "'");
    }
    std::set<std::string> assigned;
    for (const auto& u : t.updates) {
      const Variable* decl = find_variable(u.target.name);
      if (!decl || decl->kind != VarKind::Data) fail(where + ": assignment to non-data '" + u.target.name + "'");
      if (!assigned.insert(u.target.name).second) fail(where + ": '" + u.target.name + "' assigned twice");
      check_vars(u.value, where);
      if (u.value.sort() != decl->sort) fail(where + ": sort mismatch in assignment to '" + u.target.name + "'");
    }
  }
}

ConcreteEvent delta_event(const Rational& delay) { return {delay, {std::string(kDelta), EventKind::Delta, {}}}; }

void validate_event(const ConcreteEvent& ev, const std::vector<Channel>& channels) {
  if (ev.delay < 0) throw ExecutionError("negative delay in event " + format_event(ev));
  if (ev.action.is_delta()) {
    if (ev.action.channel != kDelta || !ev.action.values.empty()) throw ExecutionError("malformed quiescence event");
    return;
  }
  const Channel* ch = find_channel(channels, ev.action.channel);
  if (!ch) throw ExecutionError("event on undeclared channel '" + ev.action.channel + "'");
  if ((ev.action.kind == EventKind::Input) != ch->is_input()) {
    throw ExecutionError("wrong direction for channel '" + ch->name + "' in " + format_event(ev));
  }
  if (ev.action.values.size() != ch->payload.size()) {
    throw ExecutionError("arity mismatch on channel '" + ch->name + "' in " + format_event(ev));
  }
  for (std::size_t i = 0; i < ch->payload.size(); ++i) {
    const Value& v = ev.action.values[i];
    if (v.sort != ch->payload[i]) throw ExecutionError("payload sort mismatch in " + format_event(ev));
    if (v.sort == Sort::Int && !is_integral(v.num)) throw ExecutionError("non-integral int in " + format_event(ev));
    if (v.sort == Sort::Time && v.num < 0) throw ExecutionError("negative time value in " + format_event(ev));
  }
}

ConcreteAction mirror(const ConcreteAction& action, const std::vector<Channel>& channels) {
  if (action.is_delta()) return action;
  const Channel* ch = find_channel(channels, action.channel);
  if (!ch) throw ModelError("mirror: unknown channel '" + action.channel + "'");
  ConcreteAction out = action;
  if (ch->kind != ChannelKind::UncontrollableInput) {
    out.kind = action.kind == EventKind::Input ? EventKind::Output : EventKind::Input;
  }
  return out;
}

std::string format_action(const ConcreteAction& a) {
  if (a.is_delta()) return std::string(kDelta) + "!";
  std::ostringstream os;
  os << a.channel << (a.kind == EventKind::Input ? '?' : '!');
  if (!a.values.empty()) {
    os << '(';
    for (std::size_t i = 0; i < a.values.size(); ++i) os << (i ? "," : "") << format_value(a.values[i]);
    os << ')';
  }
  return os.str();
}

std::string format_event(const ConcreteEvent& e) {
  std::ostringstream os;
  os << format_rational(e.delay) << ' ';
  if (e.action.is_delta()) {
    os << kDelta << '!';
    return os.str();
  }
  os << e.action.channel << (e.action.kind == EventKind::Input ? '?' : '!');
  if (!e.action.values.empty()) {
    os << " [";
    for (std::size_t i = 0; i < e.action.values.size(); ++i) os << (i ? "," : "") << format_value(e.action.values[i]);
    os << ']';
  }
  return os.str();
}

std::string format_trace(const ConcreteTrace& t) {
  std::string out;
  for (const auto& e : t) out += format_event(e) + "\n";
  return out;
}

}  // namespace tiosts
