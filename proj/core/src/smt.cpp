#include "tiosts/smt.hpp"

#include "tiosts/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <set>
#include <spawn.h>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace tiosts {

namespace {

const std::set<std::string, std::less<>> kReserved = {
    "let",     "forall", "exists", "match",   "par",     "as",      "ite",     "distinct", "true",
    "false",   "and",    "or",     "not",     "=>",      "_",       "!",       "BINARY",   "DECIMAL",
    "HEXADECIMAL",       "NUMERAL", "STRING", "assert",  "check-sat"};

bool simple_symbol_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("~!@$%^&*_-+=<>.?/").find(c) != std::string_view::npos;
}

std::string smt_sort(Sort s) {
  switch (s) {
    case Sort::Int:
      return "Int";
    case Sort::Bool:
      return "Bool";
    case Sort::Time:
      return "Real";
  }
  return "?";
}

std::string real_literal(const Rational& r) {
  auto dec = [](std::int64_t v) { return std::to_string(v) + ".0"; };
  if (is_integral(r)) return dec(r.numerator());
  return "(/ " + dec(r.numerator()) + " " + dec(r.denominator()) + ")";
}

std::string nonneg(const Variable& v) { return "(>= " + smt_symbol(v.name) + " 0.0)"; }

void emit(std::ostream& os, const Expr& e) {
  const auto& args = e.args();
  auto nary = [&](const char* op) {
    os << '(' << op;
    for (const auto& a : args) {
      os << ' ';
      emit(os, a);
    }
    os << ')';
  };
  switch (e.op()) {
    case Op::Var:
      os << smt_symbol(e.var().name);
      return;
    case Op::Num:
      if (e.sort() == Sort::Time) {
        os << real_literal(e.num());
      } else if (e.num() < 0) {
        os << "(- " << -e.num().numerator() << ')';
      } else {
        os << e.num().numerator();
      }
      return;
    case Op::BoolLit:
      os << (e.boolean() ? "true" : "false");
      return;
    case Op::Add:
      return nary("+");
    case Op::Sub:
    case Op::Neg:
      return nary("-");
    case Op::Mul:
      return nary("*");
    case Op::Lt:
      return nary("<");
    case Op::Le:
      return nary("<=");
    case Op::Eq:
      return nary("=");
    case Op::Ge:
      return nary(">=");
    case Op::Gt:
      return nary(">");
    case Op::Not:
      return nary("not");
    case Op::And:
      return nary("and");
    case Op::Or:
      return nary("or");
    case Op::Forall:
    case Op::Exists: {
      const bool forall = e.op() == Op::Forall;
      os << (forall ? "(forall (" : "(exists (");
      std::vector<Variable> times;
      for (std::size_t i = 0; i < e.bound().size(); ++i) {
        const auto& v = e.bound()[i];
        os << (i ? " " : "") << '(' << smt_symbol(v.name) << ' ' << smt_sort(v.sort) << ')';
        if (v.sort == Sort::Time) times.push_back(v);
      }
      os << ") ";
      if (times.empty()) {
        emit(os, args[0]);
      } else if (forall) {
        os << "(=> ";
        if (times.size() == 1) {
          os << nonneg(times[0]);
        } else {
          os << "(and";
          for (const auto& t : times) os << ' ' << nonneg(t);
          os << ')';
        }
        os << ' ';
        emit(os, args[0]);
        os << ')';
      } else {
        os << "(and";
        for (const auto& t : times) os << ' ' << nonneg(t);
        os << ' ';
        emit(os, args[0]);
        os << ')';
      }
      os << ')';
      return;
    }
  }
}

// Minimal s-expression reader shared by model parsing and TC import.
struct SExpr {
  std::string atom;
  bool quoted = false;
  std::vector<SExpr> list;
  bool is_list = false;
};

class SReader {
 public:
  explicit SReader(std::string_view text) : s_(text) {}

  SExpr read() {
    skip();
    if (i_ >= s_.size()) throw Error("unexpected end of s-expression");
    if (s_[i_] == '(') {
      ++i_;
      SExpr e;
      e.is_list = true;
      while (true) {
        skip();
        if (i_ >= s_.size()) throw Error("unbalanced s-expression");
        if (s_[i_] == ')') {
          ++i_;
          return e;
        }
        e.list.push_back(read());
      }
    }
    if (s_[i_] == ')') throw Error("unexpected ')' in s-expression");
    SExpr e;
    if (s_[i_] == '|') {
      auto end = s_.find('|', i_ + 1);
      if (end == std::string_view::npos) throw Error("unterminated quoted symbol");
      e.atom = std::string(s_.substr(i_ + 1, end - i_ - 1));
      e.quoted = true;
      i_ = end + 1;
      return e;
    }
    if (s_[i_] == '"') {
      auto end = s_.find('"', i_ + 1);
      while (end != std::string_view::npos && end + 1 < s_.size() && s_[end + 1] == '"') end = s_.find('"', end + 2);
      if (end == std::string_view::npos) throw Error("unterminated string");
      e.atom = std::string(s_.substr(i_ + 1, end - i_ - 1));
      e.quoted = true;
      i_ = end + 1;
      return e;
    }
    std::size_t j = i_;
    while (j < s_.size() && !std::isspace(static_cast<unsigned char>(s_[j])) && s_[j] != '(' && s_[j] != ')') ++j;
    e.atom = std::string(s_.substr(i_, j - i_));
    i_ = j;
    return e;
  }

  bool done() {
    skip();
    return i_ >= s_.size();
  }

 private:
  void skip() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
        ++i_;
      } else if (s_[i_] == ';') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

bool is_numeral(const std::string& a) {
  return !a.empty() && std::all_of(a.begin(), a.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool is_decimal(const std::string& a) {
  auto dot = a.find('.');
  return dot != std::string::npos && dot > 0 && is_numeral(a.substr(0, dot)) && is_numeral(a.substr(dot + 1));
}

Rational number_value(const SExpr& e) {
  if (!e.is_list) {
    if (is_numeral(e.atom) || is_decimal(e.atom)) return parse_rational(e.atom);
    throw Error("not a number: " + e.atom);
  }
  if (e.list.size() == 2 && !e.list[0].is_list && e.list[0].atom == "-") return -number_value(e.list[1]);
  if (e.list.size() == 3 && !e.list[0].is_list && e.list[0].atom == "/") {
    Rational d = number_value(e.list[2]);
    if (d == 0) throw Error("division by zero in solver value");
    return number_value(e.list[1]) / d;
  }
  throw Error("unsupported value form in solver model");
}

Value model_value(const SExpr& e, Sort sort) {
  if (sort == Sort::Bool) {
    if (!e.is_list && (e.atom == "true" || e.atom == "false")) return Value::boolean(e.atom == "true");
    throw Error("expected a Bool model value");
  }
  Rational r = number_value(e);
  if (sort == Sort::Int) {
    if (!is_integral(r)) throw Error("non-integral Int model value");
    return Value{Sort::Int, r, false};
  }
  return Value::time(r);
}

class SmtImporter {
 public:
  explicit SmtImporter(const std::map<std::string, Variable>& symbols) : symbols_(symbols) {}

  Expr convert(const SExpr& e) {
    if (!e.is_list) return atom(e);
    if (e.list.empty() || e.list[0].is_list) throw Error("malformed SMT-LIB term");
    const std::string& head = e.list[0].atom;
    std::vector<SExpr> rest(e.list.begin() + 1, e.list.end());
    if (head == "forall" || head == "exists") return quantifier(head == "forall", rest);
    if (head == "-" && rest.size() == 1 && !rest[0].is_list && is_numeral(rest[0].atom)) {
      return mk_int(-parse_rational(rest[0].atom));
    }
    if (head == "/" && rest.size() == 2) return mk_time(number_value(e));
    std::vector<Expr> args;
    for (const auto& r : rest) args.push_back(convert(r));
    static const std::map<std::string, Op> ops = {{"+", Op::Add}, {"*", Op::Mul},  {"<", Op::Lt},   {"<=", Op::Le},
                                                  {"=", Op::Eq},  {">=", Op::Ge},  {">", Op::Gt},   {"not", Op::Not},
                                                  {"and", Op::And}, {"or", Op::Or}};
    if (head == "-") return mk_raw(args.size() == 1 ? Op::Neg : Op::Sub, std::move(args));
    auto it = ops.find(head);
    if (it == ops.end()) throw Error("unsupported SMT-LIB operator '" + head + "'");
    return mk_raw(it->second, std::move(args));
  }

 private:
  Expr atom(const SExpr& e) {
    if (!e.quoted) {
      if (e.atom == "true") return mk_true();
      if (e.atom == "false") return mk_false();
      if (is_numeral(e.atom)) return mk_int(parse_rational(e.atom));
      if (is_decimal(e.atom)) return mk_time(parse_rational(e.atom));
    }
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(e.atom);
      if (f != it->end()) return mk_var(f->second);
    }
    auto f = symbols_.find(e.atom);
    if (f == symbols_.end()) throw Error("undeclared symbol '" + e.atom + "' in SMT-LIB text");
    return mk_var(f->second);
  }

  Variable binder(const SExpr& b) {
    if (!b.is_list || b.list.size() != 2 || b.list[0].is_list || b.list[1].is_list) throw Error("malformed binder");
    const std::string& name = b.list[0].atom;
    const std::string& sort = b.list[1].atom;
    auto f = symbols_.find(name);
    if (f == symbols_.end()) throw Error("undeclared bound symbol '" + name + "'");
    if (smt_sort(f->second.sort) != sort) throw Error("binder sort mismatch for '" + name + "'");
    return f->second;
  }

  Expr quantifier(bool forall, const std::vector<SExpr>& rest) {
    if (rest.size() != 2 || !rest[0].is_list) throw Error("malformed quantifier");
    std::vector<Variable> vars;
    std::map<std::string, Variable> scope;
    for (const auto& b : rest[0].list) {
      vars.push_back(binder(b));
      scope[vars.back().name] = vars.back();
    }
    std::size_t times = std::count_if(vars.begin(), vars.end(), [](const Variable& v) { return v.sort == Sort::Time; });
    scopes_.push_back(scope);
    const SExpr* body = &rest[1];
    if (times > 0) {
      if (!body->is_list || body->list.empty()) throw Error("missing time side constraint");
      const std::string& head = body->list[0].atom;
      if (forall) {
        if (head != "=>" || body->list.size() != 3) throw Error("missing time side constraint");
        body = &body->list[2];
      } else {
        if (head != "and" || body->list.size() != times + 2) throw Error("missing time side constraint");
        body = &body->list.back();
      }
    }
    Expr b = convert(*body);
    scopes_.pop_back();
    return forall ? mk_forall(vars, b) : mk_exists(vars, b);
  }

  const std::map<std::string, Variable>& symbols_;
  std::vector<std::map<std::string, Variable>> scopes_;
};

}  // namespace

std::string smt_symbol(std::string_view name) {
  bool simple = !name.empty() && !std::isdigit(static_cast<unsigned char>(name.front())) &&
                std::all_of(name.begin(), name.end(), simple_symbol_char) && !kReserved.contains(name);
  if (simple) return std::string(name);
  if (name.find('|') != std::string_view::npos || name.find('\\') != std::string_view::npos) {
    throw Error("symbol cannot be rendered in SMT-LIB: " + std::string(name));
  }
  return "|" + std::string(name) + "|";
}

std::string to_smtlib(const Expr& e) {
  std::ostringstream os;
  emit(os, e);
  return os.str();
}

Expr parse_smtlib(std::string_view text, const std::map<std::string, Variable>& symbols) {
  SReader reader(text);
  SExpr s = reader.read();
  if (!reader.done()) throw Error("trailing input after SMT-LIB term");
  return SmtImporter(symbols).convert(s);
}

std::string default_solver_command() {
  if (const char* env = std::getenv("TIOSTS_SOLVER"); env && *env) return env;
  return "z3 -in";
}

std::string_view to_string(SatStatus s) {
  switch (s) {
    case SatStatus::Sat:
      return "sat";
    case SatStatus::Unsat:
      return "unsat";
    case SatStatus::Unknown:
      return "unknown";
  }
  return "?";
}

namespace {

struct ProcessDied {};
struct HardTimeout {};

std::vector<std::string> split_command(const std::string& cmd) {
  std::istringstream is(cmd);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

// Renames top-level existentials (under conjunctions) apart so that
// their variables become ordinary free symbols of the query.
Expr lift_exists(const Expr& e, std::size_t& counter, std::vector<Variable>& hidden) {
  if (e.op() == Op::Exists) {
    Subst ren;
    for (const auto& v : e.bound()) {
      Variable h = v;
      h.name = v.name + "!h" + std::to_string(counter++);
      hidden.push_back(h);
      ren[v.name] = mk_var(h);
    }
    return lift_exists(substitute(e.args().front(), ren), counter, hidden);
  }
  if (e.op() == Op::And) {
    std::vector<Expr> args;
    for (const auto& a : e.args()) args.push_back(lift_exists(a, counter, hidden));
    return e.with_args(std::move(args));
  }
  return e;
}

}  // namespace

SolverSession::SolverSession(SolverConfig config) : config_(std::move(config)) {
  if (split_command(config_.command).empty()) throw SolverError("empty solver command");
  if (!config_.spawn_per_query) start();
}

SolverSession::~SolverSession() { stop(); }

void SolverSession::start() {
  static const bool sigpipe_ignored = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)sigpipe_ignored;

  int in_pipe[2], out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0 || pipe2(out_pipe, O_CLOEXEC) != 0) throw SolverError("pipe() failed");
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], 0);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], 1);
  posix_spawn_file_actions_addopen(&actions, 2, "/dev/null", O_WRONLY, 0);
  auto words = split_command(config_.command);
  std::vector<char*> argv;
  for (auto& w : words) argv.push_back(w.data());
  argv.push_back(nullptr);
  pid_t pid = -1;
  int rc = posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(in_pipe[0]);
  close(out_pipe[1]);
  if (rc != 0) {
    close(in_pipe[1]);
    close(out_pipe[0]);
    throw SolverError("cannot launch solver '" + config_.command + "': " + std::strerror(rc));
  }
  pid_ = pid;
  to_solver_ = in_pipe[1];
  from_solver_ = out_pipe[0];
  buffer_.clear();
  std::string init = "(set-option :print-success false)\n(set-option :produce-models true)\n";
  if (config_.command.find("z3") != std::string::npos) {
    init += "(set-option :timeout " + std::to_string(config_.timeout.count()) + ")\n";
  }
  init += "(set-logic ALL)\n";
  send(init);
}

void SolverSession::stop() {
  if (to_solver_ >= 0) close(to_solver_);
  if (from_solver_ >= 0) close(from_solver_);
  to_solver_ = from_solver_ = -1;
  if (pid_ > 0) {
    kill(pid_, SIGKILL);
    int status = 0;
    waitpid(pid_, &status, 0);
  }
  pid_ = -1;
}

void SolverSession::send(const std::string& text) {
  std::size_t off = 0;
  while (off < text.size()) {
    ssize_t n = write(to_solver_, text.data() + off, text.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProcessDied{};
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string SolverSession::read_response() {
  using clock = std::chrono::steady_clock;
  auto deadline = clock::now() + config_.timeout + std::chrono::seconds(5);
  auto complete = [&](std::size_t& end) {
    std::size_t i = 0;
    while (i < buffer_.size() && std::isspace(static_cast<unsigned char>(buffer_[i]))) ++i;
    if (i == buffer_.size()) return false;
    if (buffer_[i] != '(') {
      auto nl = buffer_.find('\n', i);
      if (nl == std::string::npos) return false;
      end = nl + 1;
      return true;
    }
    int depth = 0;
    bool in_bar = false, in_str = false;
    for (std::size_t j = i; j < buffer_.size(); ++j) {
      char c = buffer_[j];
      if (in_bar) {
        in_bar = c != '|';
      } else if (in_str) {
        in_str = c != '"';
      } else if (c == '|') {
        in_bar = true;
      } else if (c == '"') {
        in_str = true;
      } else if (c == '(') {
        ++depth;
      } else if (c == ')' && --depth == 0) {
        end = j + 1;
        return true;
      }
    }
    return false;
  };
  std::size_t end = 0;
  while (!complete(end)) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
    if (left <= 0) throw HardTimeout{};
    pollfd pfd{from_solver_, POLLIN, 0};
    int rc = poll(&pfd, 1, static_cast<int>(std::min<long long>(left, 1000)));
    if (rc < 0 && errno != EINTR) throw ProcessDied{};
    if (rc <= 0) continue;
    char chunk[4096];
    ssize_t n = read(from_solver_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw ProcessDied{};
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
  std::string out = buffer_.substr(0, end);
  buffer_.erase(0, end);
  auto b = out.find_first_not_of(" \t\r\n");
  auto e = out.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? "" : out.substr(b, e - b + 1);
}

CheckResult SolverSession::exchange(const std::string& script, const std::vector<Variable>& model_vars,
                                    const std::string& check_cmd) {
  send("(push 1)\n" + script + check_cmd + "\n");
  std::vector<std::string> errors;
  std::string answer;
  while (true) {
    answer = read_response();
    if (answer.rfind("(error", 0) == 0) {
      errors.push_back(answer);
      continue;
    }
    if (answer == "sat" || answer == "unsat" || answer == "unknown") break;
    errors.push_back(answer);
  }
  CheckResult res;
  if (answer == "sat") {
    res.status = SatStatus::Sat;
    if (!model_vars.empty()) {
      std::string req = "(get-value (";
      for (std::size_t i = 0; i < model_vars.size(); ++i) req += (i ? " " : "") + smt_symbol(model_vars[i].name);
      send(req + "))\n");
      std::string resp = read_response();
      if (resp.rfind("(error", 0) == 0) {
        errors.push_back(resp);
      } else {
        SReader reader(resp);
        SExpr s = reader.read();
        std::map<std::string, const Variable*> wanted;
        for (const auto& v : model_vars) wanted[v.name] = &v;
        for (const auto& pair : s.list) {
          if (!pair.is_list || pair.list.size() != 2) throw SolverError("malformed get-value response: " + resp);
          auto it = wanted.find(pair.list[0].atom);
          if (it == wanted.end()) continue;
          res.model[it->first] = model_value(pair.list[1], it->second->sort);
        }
      }
    }
  } else if (answer == "unsat") {
    res.status = SatStatus::Unsat;
  } else {
    res.status = SatStatus::Unknown;
    send("(get-info :reason-unknown)\n");
    std::string resp = read_response();
    SReader reader(resp);
    SExpr s = reader.read();
    res.reason = s.is_list && s.list.size() == 2 ? s.list[1].atom : resp;
  }
  send("(pop 1)\n");
  if (!errors.empty()) {
    std::string msg = "solver rejected query:";
    for (const auto& e : errors) msg += " " + e;
    throw SolverError(msg);
  }
  return res;
}

CheckResult SolverSession::run_query(const std::string& script, const std::vector<Variable>& model_vars,
                                     const std::string& check_cmd) {
  for (int attempt = 0;; ++attempt) {
    try {
      if (pid_ < 0) start();
      CheckResult r = exchange(script, model_vars, check_cmd);
      if (config_.spawn_per_query) stop();
      return r;
    } catch (const HardTimeout&) {
      stop();
      ++stats_.restarts;
      return CheckResult{SatStatus::Unknown, {}, "timeout"};
    } catch (const ProcessDied&) {
      stop();
      ++stats_.restarts;
      if (attempt >= 1) throw SolverError("solver process failed twice on the same query");
      spdlog::warn("solver process died; restarting");
    }
  }
}

namespace {

bool has_quantifier(const Expr& e) {
  if (is_quantifier(e.op())) return true;
  for (const auto& a : e.args()) {
    if (has_quantifier(a)) return true;
  }
  return false;
}

}  // namespace

CheckResult SolverSession::check(const Expr& f, bool want_model, const std::vector<Variable>& extra) {
  if (!f.is_formula()) throw SortError("check() expects a formula");
  auto t0 = std::chrono::steady_clock::now();
  ++stats_.queries;

  std::size_t counter = 0;
  std::vector<Variable> hidden;
  Expr g = lift_exists(f, counter, hidden);
  VarSet decl = free_vars(g);
  VarSet requested = free_vars(f);
  for (const auto& v : extra) {
    decl.insert(v);
    requested.insert(v);
  }
  std::ostringstream script;
  for (const auto& v : decl) script << "(declare-fun " << smt_symbol(v.name) << " () " << smt_sort(v.sort) << ")\n";
  for (const auto& v : decl) {
    if (v.sort == Sort::Time) script << "(assert " << nonneg(v) << ")\n";
  }
  script << "(assert " << to_smtlib(g) << ")\n";
  std::vector<Variable> model_vars;
  if (want_model) model_vars.assign(requested.begin(), requested.end());

  std::string key = script.str();
  if (want_model) {
    key += ";model";
    for (const auto& v : model_vars) key += " " + v.name;
  }
  if (config_.cache) {
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++stats_.cache_hits;
      stats_.wall += std::chrono::steady_clock::now() - t0;
      return it->second;
    }
  }
  CheckResult r = run_query(script.str(), model_vars, "(check-sat)");
  if (r.unknown() && r.reason != "timeout" && has_quantifier(g)) {
    r = run_query(script.str(), model_vars, "(check-sat-using (then qe smt))");
  }
  if (config_.cache && !r.unknown()) cache_.emplace(std::move(key), r);
  stats_.wall += std::chrono::steady_clock::now() - t0;
  return r;
}

CheckResult SolverSession::eval_under(const Expr& f, const Valuation& nu, Closure mode) {
  Subst s;
  for (const auto& v : free_vars(f)) {
    auto it = nu.find(v.name);
    if (it == nu.end()) continue;
    if (it->second.sort != v.sort) throw SortError("valuation sort mismatch for '" + v.name + "'");
    s[v.name] = value_expr(it->second);
  }
  Expr g = substitute(f, s);
  if (mode == Closure::Existential) return check(g);
  CheckResult r = check(mk_not(g));
  if (r.sat()) return CheckResult{SatStatus::Unsat, {}, {}};
  if (r.unsat()) return CheckResult{SatStatus::Sat, {}, {}};
  return r;
}

bool SolverSession::is_sat(const Expr& f) {
  CheckResult r = check(f);
  if (r.unknown()) throw SolverUnknown("solver returned unknown (" + r.reason + ") on " + to_smtlib(f));
  return r.sat();
}

}  // namespace tiosts
