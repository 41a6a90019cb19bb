#pragma once

#include "tiosts/expr.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tiosts {

struct Value {
  Sort sort = Sort::Int;
  Rational num;
  bool flag = false;

  static Value integer(std::int64_t v) { return {Sort::Int, Rational(v), false}; }
  static Value time(const Rational& v) { return {Sort::Time, v, false}; }
  static Value boolean(bool v) { return {Sort::Bool, Rational(0), v}; }

  friend bool operator==(const Value&, const Value&) = default;
  friend bool operator<(const Value& a, const Value& b);
};

[[nodiscard]] std::string format_value(const Value& v);
[[nodiscard]] Expr value_expr(const Value& v);

// Keyed by variable name.
using Valuation = std::map<std::string, Value>;

// The reserved quiescence channel. Never declared in a model.
inline constexpr std::string_view kDelta = "delta";

enum class ChannelKind { ControllableInput, UncontrollableInput, Output };

struct Channel {
  std::string name;
  ChannelKind kind = ChannelKind::Output;
  std::vector<Sort> payload;

  [[nodiscard]] bool is_input() const { return kind != ChannelKind::Output; }
  [[nodiscard]] bool is_output() const { return kind == ChannelKind::Output; }
  friend bool operator==(const Channel&, const Channel&) = default;
};

// '?' receptions, '!' emissions, and the quiescence observation.
enum class EventKind { Input, Output, Delta };

struct Action {
  std::string channel;
  EventKind kind = EventKind::Input;
  std::vector<Variable> received;
  std::vector<Expr> sent;

  friend bool operator==(const Action&, const Action&) = default;
};

struct Assignment {
  Variable target;
  Expr value;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct Transition {
  std::string name;
  std::string source;
  std::string target;
  Action action;
  Expr guard;
  std::vector<Variable> resets;
  std::vector<Assignment> updates;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct Constant {
  std::string name;
  Value value;

  friend bool operator==(const Constant&, const Constant&) = default;
};

struct Tiosts {
  std::string name;
  std::vector<Sort> sorts;
  std::vector<Constant> consts;
  std::vector<Variable> data;
  std::vector<Variable> clocks;
  std::vector<Channel> channels;
  std::vector<std::string> states;
  std::string initial;
  std::vector<Transition> transitions;

  [[nodiscard]] const Channel* find_channel(std::string_view name) const;
  [[nodiscard]] const Variable* find_variable(std::string_view name) const;
  [[nodiscard]] const Transition* find_transition(std::string_view name) const;
  [[nodiscard]] std::vector<const Transition*> outgoing(std::string_view state) const;
  [[nodiscard]] bool has_state(std::string_view state) const;

  // Throws ModelError when a structural invariant does not hold.
  void validate() const;

  friend bool operator==(const Tiosts&, const Tiosts&) = default;
};

[[nodiscard]] const Channel* find_channel(const std::vector<Channel>& channels, std::string_view name);

struct ConcreteAction {
  std::string channel;
  EventKind kind = EventKind::Input;
  std::vector<Value> values;

  [[nodiscard]] bool is_delta() const { return kind == EventKind::Delta; }
  friend bool operator==(const ConcreteAction&, const ConcreteAction&) = default;
  friend bool operator<(const ConcreteAction& a, const ConcreteAction& b);
};

struct ConcreteEvent {
  Rational delay;
  ConcreteAction action;

  friend bool operator==(const ConcreteEvent&, const ConcreteEvent&) = default;
  friend bool operator<(const ConcreteEvent& a, const ConcreteEvent& b);
};

using ConcreteTrace = std::vector<ConcreteEvent>;

[[nodiscard]] ConcreteEvent delta_event(const Rational& delay);

// Checks delays, channel declaration, arity and payload sorts.
void validate_event(const ConcreteEvent& ev, const std::vector<Channel>& channels);

// Flips the direction on outputs and controllable inputs; uncontrollable
// inputs and quiescence are unchanged.
[[nodiscard]] ConcreteAction mirror(const ConcreteAction& action, const std::vector<Channel>& channels);

// "Debit!(1,51,42)", "delta!".
[[nodiscard]] std::string format_action(const ConcreteAction& a);
// Trace-file line: "0 Transc? [50,4]", "5 delta!".
[[nodiscard]] std::string format_event(const ConcreteEvent& e);
[[nodiscard]] std::string format_trace(const ConcreteTrace& t);

}  // namespace tiosts
