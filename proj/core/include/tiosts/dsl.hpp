#pragma once

#include "tiosts/model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace tiosts {

// Parses a .tiosts model (grammar in docs/grammar.md). The result is
// validated; failures raise ParseError carrying located diagnostics.
[[nodiscard]] Tiosts parse_model(std::string_view text);

// A guard-syntax formula over the model's variables and constants.
[[nodiscard]] Expr parse_formula(std::string_view text, const Tiosts& scope);

[[nodiscard]] Tiosts load_model(const std::string& path);

// Inverse of parse_model up to formatting.
[[nodiscard]] std::string print_model(const Tiosts& model);

struct PathSelector {
  std::vector<std::string> transitions;

  friend bool operator==(const PathSelector&, const PathSelector&) = default;
};

// Comma-separated transition references. A reference is a transition
// name, or `src->tgt` optionally followed by `:channel` and `#index`
// (0-based among the matches). The sequence must be continuous and
// start at the initial state.
[[nodiscard]] PathSelector parse_selector(std::string_view text, const Tiosts& model);

// One event per line: `<delay> <chan>? [v1,...]`, `<delay> <chan>! [...]`
// or `<delay> delta!`. `#` starts a comment. Named constants are allowed
// as values.
[[nodiscard]] ConcreteTrace parse_trace(std::string_view text, const std::vector<Channel>& channels,
                                        const std::vector<Constant>& consts = {});

[[nodiscard]] ConcreteTrace load_trace(const std::string& path, const std::vector<Channel>& channels,
                                       const std::vector<Constant>& consts = {});

[[nodiscard]] std::string read_file(const std::string& path);

}  // namespace tiosts
