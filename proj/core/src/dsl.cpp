#include "tiosts/dsl.hpp"

#include "tiosts/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace tiosts {

std::string Diagnostic::str() const {
  return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) out += (out.empty() ? "" : "\n") + d.str();
  return out;
}

}  // namespace

ParseError::ParseError(std::vector<Diagnostic> diagnostics)
    : Error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int col = 1;
};

const std::set<std::string, std::less<>> kKeywords = {
    "model", "sorts", "consts", "vars",  "clocks", "channels", "states",  "transitions",
    "in",    "out",   "controllable",    "uncontrollable",      "on",      "reset",
    "do",    "true",  "false", "int",    "bool",   "time",     "delta",   "and", "or", "not"};

const std::set<std::string, std::less<>> kBlocks = {"sorts",    "consts", "vars",       "clocks",
                                                    "channels", "states", "transitions"};

[[noreturn]] void fail_at(int line, int col, const std::string& msg) { throw ParseError({Diagnostic{line, col, msg}}); }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  static const char* kPuncts2[] = {"->", ":=", "<=", ">=", "==", "!=", "&&", "||"};
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      t.kind = Tok::Number;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else {
      t.kind = Tok::Punct;
      for (const char* p : kPuncts2) {
        if (src.substr(i, 2) == p) t.text = p;
      }
      if (t.text.empty()) {
        if (std::string_view(":,()[]{};?!<>=+-*.").find(c) == std::string_view::npos) {
          fail_at(line, col, std::string("unexpected character '") + c + "'");
        }
        t.text = std::string(1, c);
      }
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

class ModelParser {
 public:
  explicit ModelParser(std::string_view src) : toks_(lex(src)) {}
  ModelParser(std::string_view src, const Tiosts& scope) : toks_(lex(src)), m_(scope) {}

  Expr formula() {
    const Token& at = peek();
    Expr e = expr();
    if (!e.is_formula()) fail_at(at.line, at.col, "expected a formula");
    if (peek().kind != Tok::End) fail("unexpected '" + describe(peek()) + "' after formula");
    return e;
  }

  Tiosts parse() {
    if (is_ident("model")) {
      next();
      m_.name = ident("model name");
    }
    while (peek().kind != Tok::End) {
      if (!at_block_start()) fail("expected a block header (sorts/consts/vars/clocks/channels/states/transitions)");
      std::string block = next().text;
      expect(":");
      if (!seen_blocks_.insert(block).second) fail_prev("duplicate block '" + block + "'");
      if (block == "sorts") {
        parse_sorts();
      } else if (block == "consts") {
        parse_entries([&] { parse_const(); });
      } else if (block == "vars") {
        parse_entries([&] { parse_vars(); });
      } else if (block == "clocks") {
        parse_entries([&] { parse_clocks(); });
      } else if (block == "channels") {
        parse_entries([&] { parse_channel(); });
      } else if (block == "states") {
        parse_entries([&] { parse_states(); });
      } else {
        parse_entries([&] { parse_transition(); });
      }
    }
    if (m_.states.empty()) fail("model declares no state");
    m_.initial = m_.states.front();
    if (m_.sorts.empty()) m_.sorts = {Sort::Int, Sort::Bool, Sort::Time};
    try {
      m_.validate();
    } catch (const ModelError& e) {
      fail_at(1, 1, e.what());
    }
    return std::move(m_);
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool is_punct(std::string_view p, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool is_ident(std::string_view p) const { return peek().kind == Tok::Ident && peek().text == p; }
  bool accept(std::string_view p) {
    if (is_punct(p)) {
      next();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) const { fail_at(peek().line, peek().col, msg); }
  [[noreturn]] void fail_prev(const std::string& msg) const {
    const Token& t = toks_[pos_ > 0 ? pos_ - 1 : 0];
    fail_at(t.line, t.col, msg);
  }
  void expect(std::string_view p) {
    if (!accept(p)) fail("expected '" + std::string(p) + "', found '" + describe(peek()) + "'");
  }
  static std::string describe(const Token& t) { return t.kind == Tok::End ? "end of input" : t.text; }

  std::string ident(const std::string& what) {
    if (peek().kind != Tok::Ident) fail("expected " + what + ", found '" + describe(peek()) + "'");
    if (kKeywords.contains(peek().text)) fail("keyword '" + peek().text + "' cannot be used as " + what);
    return next().text;
  }

  bool at_block_start() const {
    return peek().kind == Tok::Ident && kBlocks.contains(peek().text) && is_punct(":", 1);
  }

  template <class F>
  void parse_entries(F entry) {
    while (peek().kind != Tok::End && !at_block_start()) entry();
  }

  void declare(const std::string& name) {
    if (!names_.insert(name).second) fail_prev("duplicate declaration of '" + name + "'");
  }

  Sort parse_sort_name(const Token& t) {
    Sort s;
    if (t.text == "int") {
      s = Sort::Int;
    } else if (t.text == "bool") {
      s = Sort::Bool;
    } else if (t.text == "time") {
      s = Sort::Time;
    } else {
      fail_at(t.line, t.col, "unknown sort '" + t.text + "'");
    }
    return s;
  }

  Sort sort() {
    if (peek().kind != Tok::Ident) fail("expected a sort");
    const Token& t = next();
    Sort s = parse_sort_name(t);
    if (!m_.sorts.empty() && std::find(m_.sorts.begin(), m_.sorts.end(), s) == m_.sorts.end()) {
      fail_at(t.line, t.col, "sort '" + t.text + "' is not declared in the sorts block");
    }
    return s;
  }

  void parse_sorts() {
    while (peek().kind == Tok::Ident && !at_block_start()) {
      Sort s = parse_sort_name(next());
      if (std::find(m_.sorts.begin(), m_.sorts.end(), s) != m_.sorts.end()) fail_prev("sort listed twice");
      m_.sorts.push_back(s);
      if (!accept(",")) break;
    }
    if (m_.sorts.empty()) fail("empty sorts block");
  }

  void parse_const() {
    std::string name = ident("constant name");
    declare(name);
    expect(":");
    Sort s = sort();
    expect("=");
    const Token& at = peek();
    Value v;
    if (s == Sort::Bool) {
      if (is_ident("true") || is_ident("false")) {
        v = Value::boolean(next().text == "true");
      } else {
        fail("expected a boolean literal");
      }
    } else {
      bool neg = accept("-");
      if (peek().kind != Tok::Number) fail("expected a numeric literal");
      Rational r = parse_rational(next().text);
      if (neg) r = -r;
      if (s == Sort::Int && !is_integral(r)) fail_at(at.line, at.col, "integer constant expected");
      if (s == Sort::Time && r < 0) fail_at(at.line, at.col, "time constant must be non-negative");
      v = s == Sort::Int ? Value{Sort::Int, r, false} : Value::time(r);
    }
    m_.consts.push_back({name, v});
  }

  void parse_vars() {
    std::vector<std::string> names{ident("variable name")};
    declare(names.back());
    while (accept(",")) {
      names.push_back(ident("variable name"));
      declare(names.back());
    }
    expect(":");
    Sort s = sort();
    for (auto& n : names) m_.data.push_back({n, s, VarKind::Data});
  }

  void parse_clocks() {
    do {
      std::string n = ident("clock name");
      declare(n);
      m_.clocks.push_back({n, Sort::Time, VarKind::Clock});
    } while (accept(","));
  }

  void parse_channel() {
    Channel c;
    if (is_ident("in")) {
      next();
      if (is_ident("controllable")) {
        c.kind = ChannelKind::ControllableInput;
      } else if (is_ident("uncontrollable")) {
        c.kind = ChannelKind::UncontrollableInput;
      } else {
        fail("expected 'controllable' or 'uncontrollable'");
      }
      next();
    } else if (is_ident("out")) {
      next();
      c.kind = ChannelKind::Output;
    } else {
      fail("expected 'in' or 'out' channel declaration");
    }
    c.name = ident("channel name");
    declare(c.name);
    if (accept("(")) {
      if (!accept(")")) {
        do c.payload.push_back(sort());
        while (accept(","));
        expect(")");
      }
    } else if (accept(":")) {
      c.payload.push_back(sort());
    }
    m_.channels.push_back(std::move(c));
  }

  void parse_states() {
    do {
      std::string n = ident("state name");
      declare(n);
      m_.states.push_back(n);
    } while (accept(","));
  }

  std::string state_ref() {
    const Token& t = peek();
    std::string s = ident("state name");
    if (!m_.has_state(s)) fail_at(t.line, t.col, "unknown state '" + s + "'");
    return s;
  }

  const Variable& var_ref(VarKind kind, const char* what) {
    const Token& t = peek();
    std::string n = ident(what);
    const Variable* v = m_.find_variable(n);
    if (!v || v->kind != kind) fail_at(t.line, t.col, "'" + n + "' is not a declared " + what);
    return *v;
  }

  void parse_transition() {
    Transition t;
    t.name = ident("transition name");
    declare(t.name);
    expect(":");
    t.source = state_ref();
    expect("->");
    t.target = state_ref();
    if (!is_ident("on")) fail("expected 'on'");
    next();
    const Token& ch_tok = peek();
    std::string ch_name = ident("channel name");
    const Channel* ch = m_.find_channel(ch_name);
    if (!ch) fail_at(ch_tok.line, ch_tok.col, "unknown channel '" + ch_name + "'");
    t.action.channel = ch_name;
    if (accept("?")) {
      if (!ch->is_input()) fail_prev("'" + ch_name + "' is an output channel; use '!'");
      t.action.kind = EventKind::Input;
      parse_payload(ch->payload.size(), [&](std::size_t i) {
        const Token& at = peek();
        const Variable& v = var_ref(VarKind::Data, "data variable");
        if (v.sort != ch->payload[i]) {
          fail_at(at.line, at.col, "sort mismatch: '" + v.name + "' is " + std::string(to_string(v.sort)) +
                                       ", channel component is " + std::string(to_string(ch->payload[i])));
        }
        t.action.received.push_back(v);
      });
    } else if (accept("!")) {
      if (ch->is_input()) fail_prev("'" + ch_name + "' is an input channel; use '?'");
      t.action.kind = EventKind::Output;
      parse_payload(ch->payload.size(), [&](std::size_t i) {
        const Token& at = peek();
        Expr e = expr();
        e = coerce_literal(e, ch->payload[i]);
        if (e.sort() != ch->payload[i]) {
          fail_at(at.line, at.col, "sort mismatch: term is " + std::string(to_string(e.sort())) +
                                       ", channel component is " + std::string(to_string(ch->payload[i])));
        }
        t.action.sent.push_back(e);
      });
    } else {
      fail("expected '?' or '!' after channel name");
    }
    if (accept("[")) {
      const Token& at = peek();
      t.guard = expr();
      if (!t.guard.is_formula()) fail_at(at.line, at.col, "guard must be a formula");
      expect("]");
    }
    if (is_ident("reset")) {
      next();
      expect("{");
      if (!accept("}")) {
        do t.resets.push_back(var_ref(VarKind::Clock, "clock"));
        while (accept(","));
        expect("}");
      }
    }
    if (is_ident("do")) {
      next();
      expect("{");
      while (!accept("}")) {
        const Variable& target = var_ref(VarKind::Data, "data variable");
        expect(":=");
        const Token& at = peek();
        Expr e = coerce_literal(expr(), target.sort);
        if (e.sort() != target.sort) fail_at(at.line, at.col, "sort mismatch in assignment to '" + target.name + "'");
        t.updates.push_back({target, e});
        if (!accept(";")) {
          expect("}");
          break;
        }
      }
    }
    m_.transitions.push_back(std::move(t));
  }

  template <class F>
  void parse_payload(std::size_t arity, F item) {
    if (arity == 0) {
      if (accept("(")) expect(")");
      return;
    }
    bool parens = accept("(");
    for (std::size_t i = 0; i < arity; ++i) {
      if (i) expect(",");
      item(i);
    }
    if (parens) expect(")");
  }

  static Expr coerce_literal(const Expr& e, Sort target) {
    if (target == Sort::Time && e.op() == Op::Num && e.sort() == Sort::Int && e.num() >= 0) return mk_time(e.num());
    return e;
  }

  // Expression grammar with precedence climbing; comparisons chain.
  template <class F>
  Expr build(const Token& at, F f) {
    try {
      return f();
    } catch (const SortError& e) {
      fail_at(at.line, at.col, e.what());
    }
  }

  Expr expr() { return parse_or(); }

  Expr parse_or() {
    Expr lhs = parse_and();
    while (is_punct("||") || is_ident("or")) {
      const Token& op = next();
      Expr rhs = parse_and();
      lhs = build(op, [&] { return mk_or(lhs, rhs); });
    }
    return lhs;
  }

  Expr parse_and() {
    Expr lhs = parse_not();
    while (is_punct("&&") || is_ident("and")) {
      const Token& op = next();
      Expr rhs = parse_not();
      lhs = build(op, [&] { return mk_and(lhs, rhs); });
    }
    return lhs;
  }

  Expr parse_not() {
    if (is_punct("!") || is_ident("not")) {
      const Token& op = next();
      Expr a = parse_not();
      return build(op, [&] { return mk_not(a); });
    }
    return parse_cmp();
  }

  std::optional<Op> cmp_op() const {
    if (peek().kind != Tok::Punct) return std::nullopt;
    const std::string& s = peek().text;
    if (s == "<") return Op::Lt;
    if (s == "<=") return Op::Le;
    if (s == "=" || s == "==") return Op::Eq;
    if (s == "!=") return Op::Not;
    if (s == ">=") return Op::Ge;
    if (s == ">") return Op::Gt;
    return std::nullopt;
  }

  Expr parse_cmp() {
    Expr lhs = parse_sum();
    std::vector<Expr> chain;
    while (auto op = cmp_op()) {
      const Token& at = next();
      Expr rhs = parse_sum();
      chain.push_back(build(at, [&] { return *op == Op::Not ? mk_not(mk_eq(lhs, rhs)) : mk_cmp(*op, lhs, rhs); }));
      lhs = rhs;
    }
    if (chain.empty()) return lhs;
    if (chain.size() == 1) return chain.front();
    return mk_and(chain);
  }

  Expr parse_sum() {
    Expr lhs = parse_prod();
    while (is_punct("+") || is_punct("-")) {
      const Token& op = next();
      Expr rhs = parse_prod();
      lhs = build(op, [&] { return op.text == "+" ? mk_add(lhs, rhs) : mk_sub(lhs, rhs); });
    }
    return lhs;
  }

  Expr parse_prod() {
    Expr lhs = parse_unary();
    while (is_punct("*")) {
      const Token& op = next();
      Expr rhs = parse_unary();
      lhs = build(op, [&] { return mk_mul(lhs, rhs); });
    }
    return lhs;
  }

  Expr parse_unary() {
    if (is_punct("-")) {
      const Token& op = next();
      Expr a = parse_unary();
      return build(op, [&] { return mk_neg(a); });
    }
    return parse_atom();
  }

  Expr parse_atom() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      next();
      Rational r = parse_rational(t.text);
      return t.text.find('.') == std::string::npos ? mk_int(r) : mk_time(r);
    }
    if (accept("(")) {
      Expr e = expr();
      expect(")");
      return e;
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "true" || t.text == "false") {
        next();
        return mk_bool(t.text == "true");
      }
      next();
      if (const Variable* v = m_.find_variable(t.text)) return mk_var(*v);
      for (const auto& c : m_.consts) {
        if (c.name == t.text) return value_expr(c.value);
      }
      fail_at(t.line, t.col, "unknown identifier '" + t.text + "'");
    }
    fail("expected an expression, found '" + describe(t) + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Tiosts m_;
  std::set<std::string> names_;
  std::set<std::string> seen_blocks_;
};

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? std::string(sep) : "") + parts[i];
  return out;
}

std::string payload_text(const Channel& c) {
  if (c.payload.empty()) return "";
  std::vector<std::string> s;
  for (Sort x : c.payload) s.emplace_back(to_string(x));
  return "(" + join(s, ", ") + ")";
}

}  // namespace

Tiosts parse_model(std::string_view text) { return ModelParser(text).parse(); }

Expr parse_formula(std::string_view text, const Tiosts& scope) { return ModelParser(text, scope).formula(); }

Tiosts load_model(const std::string& path) { return parse_model(read_file(path)); }

std::string print_model(const Tiosts& m) {
  std::ostringstream os;
  if (!m.name.empty()) os << "model " << m.name << "\n\n";
  {
    std::vector<std::string> s;
    for (Sort x : m.sorts) s.emplace_back(to_string(x));
    os << "sorts: " << join(s, ", ") << "\n\n";
  }
  if (!m.consts.empty()) {
    os << "consts:\n";
    for (const auto& c : m.consts) {
      os << "  " << c.name << " : " << to_string(c.value.sort) << " = "
         << (c.value.sort == Sort::Time ? format_decimal(c.value.num) : format_value(c.value)) << "\n";
    }
    os << "\n";
  }
  if (!m.data.empty()) {
    os << "vars:\n";
    for (const auto& v : m.data) os << "  " << v.name << " : " << to_string(v.sort) << "\n";
    os << "\n";
  }
  if (!m.clocks.empty()) {
    std::vector<std::string> s;
    for (const auto& k : m.clocks) s.push_back(k.name);
    os << "clocks: " << join(s, ", ") << "\n\n";
  }
  if (!m.channels.empty()) {
    os << "channels:\n";
    for (const auto& c : m.channels) {
      os << "  ";
      switch (c.kind) {
        case ChannelKind::ControllableInput:
          os << "in controllable ";
          break;
        case ChannelKind::UncontrollableInput:
          os << "in uncontrollable ";
          break;
        case ChannelKind::Output:
          os << "out ";
          break;
      }
      os << c.name << payload_text(c) << "\n";
    }
    os << "\n";
  }
  {
    // The initial state is listed first.
    std::vector<std::string> s{m.initial};
    for (const auto& q : m.states) {
      if (q != m.initial) s.push_back(q);
    }
    os << "states: " << join(s, ", ") << "\n";
  }
  if (!m.transitions.empty()) {
    os << "\ntransitions:\n";
    for (const auto& t : m.transitions) {
      os << "  " << t.name << ": " << t.source << " -> " << t.target << " on " << t.action.channel;
      if (t.action.kind == EventKind::Input) {
        os << '?';
        std::vector<std::string> xs;
        for (const auto& x : t.action.received) xs.push_back(x.name);
        if (!xs.empty()) os << '(' << join(xs, ", ") << ')';
      } else {
        os << '!';
        std::vector<std::string> ts;
        for (const auto& e : t.action.sent) ts.push_back(to_string(e));
        if (!ts.empty()) os << '(' << join(ts, ", ") << ')';
      }
      if (!t.guard.is_true()) os << " [" << to_string(t.guard) << ']';
      if (!t.resets.empty()) {
        std::vector<std::string> ks;
        for (const auto& k : t.resets) ks.push_back(k.name);
        os << " reset{" << join(ks, ", ") << '}';
      }
      if (!t.updates.empty()) {
        std::vector<std::string> us;
        for (const auto& u : t.updates) us.push_back(u.target.name + " := " + to_string(u.value));
        os << " do{" << join(us, "; ") << '}';
      }
      os << "\n";
    }
  }
  return os.str();
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t k = s.find(sep, start);
    out.push_back(trim(s.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start)));
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return out;
}

[[noreturn]] void selector_error(const std::string& msg) { throw ParseError({Diagnostic{1, 1, msg}}); }

const Transition* resolve_reference(const std::string& ref, const Tiosts& m) {
  if (const Transition* t = m.find_transition(ref)) return t;
  auto arrow = ref.find("->");
  if (arrow == std::string::npos) selector_error("unknown transition '" + ref + "'");
  std::string src = trim(ref.substr(0, arrow));
  std::string rest = ref.substr(arrow + 2);
  std::size_t index = 0;
  if (auto hash = rest.find('#'); hash != std::string::npos) {
    try {
      index = std::stoul(rest.substr(hash + 1));
    } catch (const std::exception&) {
      selector_error("bad index in reference '" + ref + "'");
    }
    rest = rest.substr(0, hash);
  }
  std::string chan;
  if (auto colon = rest.find(':'); colon != std::string::npos) {
    chan = trim(rest.substr(colon + 1));
    rest = rest.substr(0, colon);
  }
  std::string tgt = trim(rest);
  std::vector<const Transition*> matches;
  for (const auto& t : m.transitions) {
    if (t.source == src && t.target == tgt && (chan.empty() || t.action.channel == chan)) matches.push_back(&t);
  }
  if (matches.empty()) selector_error("no transition matches '" + ref + "'");
  if (matches.size() > 1 && ref.find('#') == std::string::npos) {
    selector_error("ambiguous reference '" + ref + "' (" + std::to_string(matches.size()) + " matches; add #index)");
  }
  if (index >= matches.size()) selector_error("index out of range in '" + ref + "'");
  return matches[index];
}

}  // namespace

PathSelector parse_selector(std::string_view text, const Tiosts& model) {
  if (trim(text).empty()) selector_error("empty selector");
  PathSelector sel;
  std::string expected = model.initial;
  for (const auto& ref : split(text, ',')) {
    if (ref.empty()) selector_error("empty transition reference in selector");
    const Transition* t = resolve_reference(ref, model);
    if (t->source != expected) {
      selector_error("discontinuous selector: " + t->name + "'s source " + t->source + " differs from " + expected);
    }
    sel.transitions.push_back(t->name);
    expected = t->target;
  }
  return sel;
}

namespace {

Value parse_value(const std::string& tok, Sort sort, const std::vector<Constant>& consts, int line) {
  auto fail = [&](const std::string& msg) { throw ParseError({Diagnostic{line, 1, msg}}); };
  for (const auto& c : consts) {
    if (c.name == tok) {
      if (c.value.sort != sort) fail("constant '" + tok + "' has the wrong sort");
      return c.value;
    }
  }
  if (sort == Sort::Bool) {
    if (tok == "true" || tok == "false") return Value::boolean(tok == "true");
    fail("expected a boolean value, found '" + tok + "'");
  }
  Rational r;
  try {
    r = parse_rational(tok);
  } catch (const Error&) {
    fail("bad value '" + tok + "'");
  }
  if (sort == Sort::Int) {
    if (!is_integral(r)) fail("integer value expected, found '" + tok + "'");
    return Value{Sort::Int, r, false};
  }
  if (r < 0) fail("time value must be non-negative");
  return Value::time(r);
}

}  // namespace

ConcreteTrace parse_trace(std::string_view text, const std::vector<Channel>& channels,
                          const std::vector<Constant>& consts) {
  ConcreteTrace out;
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    auto fail = [&](const std::string& msg) { throw ParseError({Diagnostic{line_no, 1, msg}}); };
    std::size_t sp = line.find_first_of(" \t");
    if (sp == std::string::npos) fail("expected '<delay> <action>'");
    ConcreteEvent ev;
    try {
      ev.delay = parse_rational(line.substr(0, sp));
    } catch (const Error&) {
      fail("bad delay '" + line.substr(0, sp) + "'");
    }
    if (ev.delay < 0) fail("negative delay");
    std::string rest = trim(line.substr(sp));
    std::size_t mark = rest.find_first_of("?!");
    if (mark == std::string::npos) fail("expected '?' or '!' after the channel name");
    std::string chan = trim(rest.substr(0, mark));
    char dir = rest[mark];
    std::string payload = trim(rest.substr(mark + 1));
    if (chan == kDelta) {
      if (dir != '!' || !payload.empty()) fail("quiescence is written '<delay> delta!'");
      out.push_back(delta_event(ev.delay));
      continue;
    }
    const Channel* ch = find_channel(channels, chan);
    if (!ch) fail("undeclared channel '" + chan + "'");
    ev.action.channel = chan;
    ev.action.kind = dir == '?' ? EventKind::Input : EventKind::Output;
    if (ch->is_input() != (dir == '?')) fail("wrong direction for channel '" + chan + "'");
    std::vector<std::string> items;
    if (!payload.empty()) {
      char open = payload.front();
      char close = open == '[' ? ']' : ')';
      if ((open != '[' && open != '(') || payload.back() != close) fail("payload must be written [v1,...]");
      std::string inner = trim(payload.substr(1, payload.size() - 2));
      if (!inner.empty()) items = split(inner, ',');
    }
    if (items.size() != ch->payload.size()) fail("arity mismatch on channel '" + chan + "'");
    for (std::size_t i = 0; i < items.size(); ++i) {
      ev.action.values.push_back(parse_value(items[i], ch->payload[i], consts, line_no));
    }
    out.push_back(std::move(ev));
  }
  return out;
}

ConcreteTrace load_trace(const std::string& path, const std::vector<Channel>& channels,
                         const std::vector<Constant>& consts) {
  return parse_trace(read_file(path), channels, consts);
}

}  // namespace tiosts
