#include "tiosts/expr.hpp"

#include "tiosts/error.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <sstream>

namespace tiosts {

struct Expr::Node {
  Op op = Op::BoolLit;
  Sort sort = Sort::Bool;
  Variable var;
  Rational num;
  bool flag = true;
  std::vector<Expr> args;
  std::vector<Variable> bound;
};

namespace {

Expr make(Expr::Node node) { return Expr(std::make_shared<const Expr::Node>(std::move(node))); }

Expr make_op(Op op, Sort sort, std::vector<Expr> args) {
  Expr::Node n;
  n.op = op;
  n.sort = sort;
  n.args = std::move(args);
  return make(std::move(n));
}

[[noreturn]] void sort_error(std::string_view what, const Expr& a, const Expr& b) {
  std::ostringstream os;
  os << "sort mismatch in " << what << ": " << to_string(a.sort()) << " vs " << to_string(b.sort()) << " ("
     << to_string(a) << ", " << to_string(b) << ")";
  throw SortError(os.str());
}

// Integer literals adopt the time sort when paired with a time operand.
Expr coerce_to(const Expr& e, Sort target) {
  if (e.sort() == target) return e;
  if (target == Sort::Time && e.op() == Op::Num && e.sort() == Sort::Int && e.num() >= 0) {
    return mk_time(e.num());
  }
  return e;
}

void unify(std::string_view what, Expr& a, Expr& b) {
  a = coerce_to(a, b.sort());
  b = coerce_to(b, a.sort());
  if (a.sort() != b.sort()) sort_error(what, a, b);
}

void require_formula(std::string_view what, const Expr& e) {
  if (!e.is_formula()) {
    throw SortError(std::string(what) + " expects a formula, got " + std::string(to_string(e.sort())) + " term " +
                    to_string(e));
  }
}

bool is_int_literal(const Expr& e) { return e.op() == Op::Num && e.sort() == Sort::Int; }

}  // namespace

std::string_view to_string(Sort s) {
  switch (s) {
    case Sort::Int:
      return "int";
    case Sort::Bool:
      return "bool";
    case Sort::Time:
      return "time";
  }
  return "?";
}

std::string_view to_string(VarKind k) {
  switch (k) {
    case VarKind::Data:
      return "data";
    case VarKind::Clock:
      return "clock";
    case VarKind::FreshIni:
      return "ini";
    case VarKind::FreshIn:
      return "in";
    case VarKind::FreshOut:
      return "out";
    case VarKind::FreshDur:
      return "dur";
  }
  return "?";
}

Rational parse_rational(std::string_view text) {
  auto fail = [&] { throw Error("invalid number '" + std::string(text) + "'"); };
  if (text.empty()) fail();
  bool negative = false;
  std::string_view body = text;
  if (body.front() == '-') {
    negative = true;
    body.remove_prefix(1);
  }
  auto to_int = [&](std::string_view digits) {
    std::int64_t v = 0;
    if (digits.empty()) fail();
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) fail();
    return v;
  };
  Rational r;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    std::int64_t den = to_int(body.substr(slash + 1));
    if (den == 0) fail();
    r = Rational(to_int(body.substr(0, slash)), den);
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    std::string_view ip = body.substr(0, dot);
    std::string_view fp = body.substr(dot + 1);
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < fp.size(); ++i) scale *= 10;
    std::int64_t whole = ip.empty() ? 0 : to_int(ip);
    std::int64_t frac = fp.empty() ? 0 : to_int(fp);
    r = Rational(whole) + Rational(frac, scale);
  } else {
    r = Rational(to_int(body));
  }
  return negative ? -r : r;
}

std::string format_rational(const Rational& r) {
  if (is_integral(r)) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::string format_decimal(const Rational& r) {
  if (is_integral(r)) return std::to_string(r.numerator());
  std::int64_t den = r.denominator();
  int twos = 0, fives = 0;
  while (den % 2 == 0) den /= 2, ++twos;
  while (den % 5 == 0) den /= 5, ++fives;
  if (den != 1) throw Error("no finite decimal expansion for " + format_rational(r));
  int digits = std::max(twos, fives);
  std::int64_t scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  Rational scaled = abs(r) * scale;
  std::int64_t n = scaled.numerator();
  std::string frac = std::to_string(n % scale);
  frac.insert(0, static_cast<std::size_t>(digits) - frac.size(), '0');
  return (r < 0 ? "-" : "") + std::to_string(n / scale) + "." + frac;
}

Expr::Expr() {
  static const auto kTrue = std::make_shared<const Node>();
  node_ = kTrue;
}

Op Expr::op() const { return node_->op; }
Sort Expr::sort() const { return node_->sort; }
const Variable& Expr::var() const {
  assert(op() == Op::Var);
  return node_->var;
}
const Rational& Expr::num() const {
  assert(op() == Op::Num);
  return node_->num;
}
bool Expr::boolean() const {
  assert(op() == Op::BoolLit);
  return node_->flag;
}
const std::vector<Expr>& Expr::args() const { return node_->args; }
const std::vector<Variable>& Expr::bound() const { return node_->bound; }

Expr Expr::with_args(std::vector<Expr> args) const {
  Node n = *node_;
  n.args = std::move(args);
  return make(std::move(n));
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.op != y.op || x.sort != y.sort) return false;
  switch (x.op) {
    case Op::Var:
      return x.var == y.var;
    case Op::Num:
      return x.num == y.num;
    case Op::BoolLit:
      return x.flag == y.flag;
    default:
      return x.bound == y.bound && x.args == y.args;
  }
}

Expr mk_var(const Variable& v) {
  Expr::Node n;
  n.op = Op::Var;
  n.sort = v.sort;
  n.var = v;
  return make(std::move(n));
}

Expr mk_int(const Rational& value) {
  if (!is_integral(value)) throw SortError("integer literal expected, got " + format_rational(value));
  Expr::Node n;
  n.op = Op::Num;
  n.sort = Sort::Int;
  n.num = value;
  return make(std::move(n));
}

Expr mk_time(const Rational& value) {
  if (value < 0) throw SortError("time literal must be non-negative, got " + format_rational(value));
  Expr::Node n;
  n.op = Op::Num;
  n.sort = Sort::Time;
  n.num = value;
  return make(std::move(n));
}

Expr mk_bool(bool value) {
  static const Expr kTrue;
  static const Expr kFalse = [] {
    Expr::Node n;
    n.flag = false;
    return make(std::move(n));
  }();
  return value ? kTrue : kFalse;
}

Expr mk_add(const Expr& a0, const Expr& b0) {
  Expr a = a0, b = b0;
  unify("+", a, b);
  if (a.sort() == Sort::Bool) sort_error("+", a, b);
  if (a.op() == Op::Num && b.op() == Op::Num) {
    return a.sort() == Sort::Int ? mk_int(a.num() + b.num()) : mk_time(a.num() + b.num());
  }
  if (a.op() == Op::Num && a.num() == 0) return b;
  if (b.op() == Op::Num && b.num() == 0) return a;
  return make_op(Op::Add, a.sort(), {a, b});
}

Expr mk_sub(const Expr& a, const Expr& b) {
  if (a.sort() != Sort::Int || b.sort() != Sort::Int) sort_error("-", a, b);
  return make_op(Op::Sub, Sort::Int, {a, b});
}

Expr mk_mul(const Expr& a, const Expr& b) {
  if (a.sort() != Sort::Int || b.sort() != Sort::Int) sort_error("*", a, b);
  if (!is_int_literal(a) && !is_int_literal(b)) {
    throw SortError("multiplication requires a literal operand: " + to_string(a) + " * " + to_string(b));
  }
  return make_op(Op::Mul, Sort::Int, {a, b});
}

Expr mk_neg(const Expr& a) {
  if (a.sort() != Sort::Int) throw SortError("unary minus on " + std::string(to_string(a.sort())) + " term");
  if (a.op() == Op::Num) return mk_int(-a.num());
  return make_op(Op::Neg, Sort::Int, {a});
}

bool is_comparison(Op op) { return op == Op::Lt || op == Op::Le || op == Op::Eq || op == Op::Ge || op == Op::Gt; }

bool is_quantifier(Op op) { return op == Op::Forall || op == Op::Exists; }

Expr mk_cmp(Op op, const Expr& a0, const Expr& b0) {
  assert(is_comparison(op));
  Expr a = a0, b = b0;
  unify("comparison", a, b);
  if (a.sort() == Sort::Bool && op != Op::Eq) sort_error("ordering", a, b);
  return make_op(op, Sort::Bool, {a, b});
}

Expr mk_not(const Expr& a) {
  require_formula("negation", a);
  if (a.op() == Op::BoolLit) return mk_bool(!a.boolean());
  return make_op(Op::Not, Sort::Bool, {a});
}

namespace {

Expr mk_nary(Op op, const std::vector<Expr>& args) {
  const bool neutral = op == Op::And;
  std::vector<Expr> flat;
  for (const auto& a : args) {
    require_formula(op == Op::And ? "conjunction" : "disjunction", a);
    if (a.op() == Op::BoolLit && a.boolean() == neutral) continue;
    if (a.op() == op) {
      flat.insert(flat.end(), a.args().begin(), a.args().end());
    } else {
      flat.push_back(a);
    }
  }
  if (flat.empty()) return mk_bool(neutral);
  if (flat.size() == 1) return flat.front();
  return make_op(op, Sort::Bool, std::move(flat));
}

Expr mk_quant(Op op, const std::vector<Variable>& vars, const Expr& body) {
  require_formula("quantifier", body);
  if (vars.empty()) return body;
  Expr::Node n;
  n.op = op;
  n.sort = Sort::Bool;
  n.args = {body};
  n.bound = vars;
  return make(std::move(n));
}

}  // namespace

Expr mk_and(const std::vector<Expr>& args) { return mk_nary(Op::And, args); }
Expr mk_or(const std::vector<Expr>& args) { return mk_nary(Op::Or, args); }
Expr mk_forall(const std::vector<Variable>& vars, const Expr& body) { return mk_quant(Op::Forall, vars, body); }
Expr mk_exists(const std::vector<Variable>& vars, const Expr& body) { return mk_quant(Op::Exists, vars, body); }

Expr mk_raw(Op op, std::vector<Expr> args) {
  Sort sort = Sort::Bool;
  switch (op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Neg:
      if (args.empty()) throw SortError("arithmetic node without operands");
      sort = args.front().sort();
      break;
    case Op::Lt:
    case Op::Le:
    case Op::Eq:
    case Op::Ge:
    case Op::Gt:
    case Op::Not:
    case Op::And:
    case Op::Or:
      break;
    default:
      throw SortError("mk_raw: unsupported operator");
  }
  Expr e = make_op(op, sort, std::move(args));
  check_sorts(e);
  return e;
}

std::vector<Expr> conjuncts(const Expr& e) {
  if (e.is_true()) return {};
  if (e.op() == Op::And) return e.args();
  return {e};
}

namespace {

void collect_free(const Expr& e, std::set<std::string>& shadow, VarSet& out) {
  switch (e.op()) {
    case Op::Var:
      if (!shadow.contains(e.var().name)) out.insert(e.var());
      return;
    case Op::Forall:
    case Op::Exists: {
      std::vector<std::string> added;
      for (const auto& v : e.bound()) {
        if (shadow.insert(v.name).second) added.push_back(v.name);
      }
      collect_free(e.args().front(), shadow, out);
      for (const auto& name : added) shadow.erase(name);
      return;
    }
    default:
      for (const auto& a : e.args()) collect_free(a, shadow, out);
  }
}

void collect_bound(const Expr& e, VarSet& out) {
  if (is_quantifier(e.op())) out.insert(e.bound().begin(), e.bound().end());
  for (const auto& a : e.args()) collect_bound(a, out);
}

void collect_names(const Expr& e, std::set<std::string>& out) {
  if (e.op() == Op::Var) out.insert(e.var().name);
  for (const auto& v : e.bound()) out.insert(v.name);
  for (const auto& a : e.args()) collect_names(a, out);
}

}  // namespace

VarSet free_vars(const Expr& e) {
  VarSet out;
  std::set<std::string> shadow;
  collect_free(e, shadow, out);
  return out;
}

VarSet bound_vars(const Expr& e) {
  VarSet out;
  collect_bound(e, out);
  return out;
}

namespace {

Expr subst_rec(const Expr& e, const Subst& s) {
  switch (e.op()) {
    case Op::Var: {
      auto it = s.find(e.var().name);
      if (it == s.end()) return e;
      if (it->second.sort() != e.sort()) {
        throw SortError("substitution changes sort of " + e.var().name + ": " + std::string(to_string(e.sort())) +
                        " -> " + std::string(to_string(it->second.sort())));
      }
      return it->second;
    }
    case Op::Num:
    case Op::BoolLit:
      return e;
    case Op::Forall:
    case Op::Exists: {
      const Expr& body = e.args().front();
      VarSet body_free = free_vars(body);
      Subst inner;
      for (const auto& [name, repl] : s) {
        bool is_bound = std::any_of(e.bound().begin(), e.bound().end(), [&](const Variable& v) { return v.name == name; });
        bool occurs = std::any_of(body_free.begin(), body_free.end(), [&](const Variable& v) { return v.name == name; });
        if (!is_bound && occurs) inner.emplace(name, repl);
      }
      if (inner.empty()) return e;
      std::set<std::string> range_names;
      for (const auto& [name, repl] : inner) {
        for (const auto& v : free_vars(repl)) range_names.insert(v.name);
      }
      std::set<std::string> taken = range_names;
      collect_names(body, taken);
      for (const auto& [name, repl] : inner) taken.insert(name);
      std::vector<Variable> new_bound;
      for (const auto& v : e.bound()) {
        if (!range_names.contains(v.name)) {
          new_bound.push_back(v);
          continue;
        }
        Variable renamed = v;
        for (int k = 1;; ++k) {
          renamed.name = v.name + "'" + std::to_string(k);
          if (!taken.contains(renamed.name)) break;
        }
        taken.insert(renamed.name);
        inner[v.name] = mk_var(renamed);
        new_bound.push_back(renamed);
      }
      Expr::Node n;
      n.op = e.op();
      n.sort = Sort::Bool;
      n.bound = std::move(new_bound);
      n.args = {subst_rec(body, inner)};
      return make(std::move(n));
    }
    default: {
      std::vector<Expr> args;
      args.reserve(e.args().size());
      bool changed = false;
      for (const auto& a : e.args()) {
        args.push_back(subst_rec(a, s));
        changed = changed || !(args.back() == a);
      }
      return changed ? e.with_args(std::move(args)) : e;
    }
  }
}

}  // namespace

Expr substitute(const Expr& e, const Subst& s) {
  if (s.empty()) return e;
  return subst_rec(e, s);
}

Subst compose(const Subst& second, const Subst& first) {
  Subst out;
  for (const auto& [name, t] : first) out.emplace(name, substitute(t, second));
  for (const auto& [name, t] : second) out.emplace(name, t);
  return out;
}

namespace {

bool alpha_rec(const Expr& a, const Expr& b, std::map<std::string, std::string>& ren) {
  if (a.op() != b.op() || a.sort() != b.sort()) return false;
  switch (a.op()) {
    case Op::Var: {
      auto it = ren.find(a.var().name);
      if (it != ren.end()) return it->second == b.var().name && a.var().sort == b.var().sort;
      return a.var() == b.var();
    }
    case Op::Num:
      return a.num() == b.num();
    case Op::BoolLit:
      return a.boolean() == b.boolean();
    case Op::Forall:
    case Op::Exists: {
      if (a.bound().size() != b.bound().size()) return false;
      auto saved = ren;
      for (std::size_t i = 0; i < a.bound().size(); ++i) {
        if (a.bound()[i].sort != b.bound()[i].sort) return false;
        ren[a.bound()[i].name] = b.bound()[i].name;
      }
      bool ok = alpha_rec(a.args().front(), b.args().front(), ren);
      ren = std::move(saved);
      return ok;
    }
    default:
      if (a.args().size() != b.args().size()) return false;
      for (std::size_t i = 0; i < a.args().size(); ++i) {
        if (!alpha_rec(a.args()[i], b.args()[i], ren)) return false;
      }
      return true;
  }
}

}  // namespace

bool alpha_equivalent(const Expr& a, const Expr& b) {
  std::map<std::string, std::string> ren;
  return alpha_rec(a, b, ren);
}

void check_sorts(const Expr& e) {
  for (const auto& a : e.args()) check_sorts(a);
  const auto& args = e.args();
  auto fail = [&](const std::string& msg) { throw SortError(msg + ": " + to_string(e)); };
  switch (e.op()) {
    case Op::Var:
      if (e.sort() != e.var().sort) fail("variable sort mismatch");
      if ((e.var().kind == VarKind::Clock || e.var().kind == VarKind::FreshDur) && e.sort() != Sort::Time) {
        fail("clock/duration variable must have sort time");
      }
      break;
    case Op::Num:
      if (e.sort() == Sort::Int && !is_integral(e.num())) fail("non-integral int literal");
      if (e.sort() == Sort::Time && e.num() < 0) fail("negative time literal");
      if (e.sort() == Sort::Bool) fail("bool-sorted numeral");
      break;
    case Op::BoolLit:
      if (e.sort() != Sort::Bool) fail("bool literal sort");
      break;
    case Op::Add:
      if (args.size() != 2 || args[0].sort() != e.sort() || args[1].sort() != e.sort() || e.sort() == Sort::Bool) {
        fail("ill-sorted addition");
      }
      break;
    case Op::Sub:
    case Op::Mul:
      if (args.size() != 2 || e.sort() != Sort::Int || args[0].sort() != Sort::Int || args[1].sort() != Sort::Int) {
        fail("ill-sorted integer operation");
      }
      if (e.op() == Op::Mul && !is_int_literal(args[0]) && !is_int_literal(args[1])) fail("non-linear product");
      break;
    case Op::Neg:
      if (args.size() != 1 || e.sort() != Sort::Int || args[0].sort() != Sort::Int) fail("ill-sorted negation");
      break;
    case Op::Lt:
    case Op::Le:
    case Op::Ge:
    case Op::Gt:
    case Op::Eq:
      if (args.size() != 2 || e.sort() != Sort::Bool || args[0].sort() != args[1].sort()) fail("ill-sorted comparison");
      if (e.op() != Op::Eq && args[0].sort() == Sort::Bool) fail("ordering on bool");
      break;
    case Op::Not:
    case Op::And:
    case Op::Or:
    case Op::Forall:
    case Op::Exists:
      if (e.sort() != Sort::Bool) fail("connective sort");
      for (const auto& a : args) {
        if (a.sort() != Sort::Bool) fail("connective over non-formula");
      }
      break;
  }
}

namespace {

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Or:
      return 1;
    case Op::And:
      return 2;
    case Op::Not:
      return 3;
    case Op::Lt:
    case Op::Le:
    case Op::Eq:
    case Op::Ge:
    case Op::Gt:
      return 4;
    case Op::Add:
    case Op::Sub:
      return 5;
    case Op::Mul:
      return 6;
    case Op::Neg:
      return 7;
    case Op::Num:
      return e.num() < 0 ? 7 : 8;
    case Op::Forall:
    case Op::Exists:
      return 0;
    default:
      return 8;
  }
}

std::string_view cmp_symbol(Op op) {
  switch (op) {
    case Op::Lt:
      return "<";
    case Op::Le:
      return "<=";
    case Op::Eq:
      return "=";
    case Op::Ge:
      return ">=";
    case Op::Gt:
      return ">";
    default:
      return "?";
  }
}

void print(std::ostream& os, const Expr& e, int min_prec);

void print_child(std::ostream& os, const Expr& e, int min_prec) {
  if (precedence(e) < min_prec) {
    os << '(';
    print(os, e, 0);
    os << ')';
  } else {
    print(os, e, min_prec);
  }
}

void print(std::ostream& os, const Expr& e, int /*min_prec*/) {
  const auto& args = e.args();
  switch (e.op()) {
    case Op::Var:
      os << e.var().name;
      return;
    case Op::Num:
      if (e.sort() == Sort::Time && !is_integral(e.num())) {
        try {
          os << format_decimal(e.num());
        } catch (const Error&) {
          os << '(' << format_rational(e.num()) << ')';
        }
      } else {
        os << format_rational(e.num());
      }
      return;
    case Op::BoolLit:
      os << (e.boolean() ? "true" : "false");
      return;
    case Op::Add:
    case Op::Sub:
      print_child(os, args[0], 5);
      os << (e.op() == Op::Add ? " + " : " - ");
      print_child(os, args[1], 6);
      return;
    case Op::Mul:
      print_child(os, args[0], 6);
      os << " * ";
      print_child(os, args[1], 7);
      return;
    case Op::Neg:
      os << '-';
      print_child(os, args[0], 8);
      return;
    case Op::Lt:
    case Op::Le:
    case Op::Eq:
    case Op::Ge:
    case Op::Gt:
      print_child(os, args[0], 5);
      os << ' ' << cmp_symbol(e.op()) << ' ';
      print_child(os, args[1], 5);
      return;
    case Op::Not: {
      const Expr& a = args[0];
      if (a.op() == Op::Eq) {
        print_child(os, a.args()[0], 5);
        os << " != ";
        print_child(os, a.args()[1], 5);
      } else if (precedence(a) == 8) {
        os << '!';
        print(os, a, 8);
      } else {
        os << "!(";
        print(os, a, 0);
        os << ')';
      }
      return;
    }
    case Op::And:
    case Op::Or:
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) os << (e.op() == Op::And ? " && " : " || ");
        print_child(os, args[i], e.op() == Op::And ? 3 : 2);
      }
      return;
    case Op::Forall:
    case Op::Exists: {
      os << (e.op() == Op::Forall ? "forall " : "exists ");
      for (std::size_t i = 0; i < e.bound().size(); ++i) {
        if (i) os << ", ";
        os << e.bound()[i].name << ':' << to_string(e.bound()[i].sort);
      }
      os << " . ";
      print(os, args[0], 0);
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(os, e, 0);
  return os.str();
}

}  // namespace tiosts
