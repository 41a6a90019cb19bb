#include "tiosts/dsl.hpp"
#include "tiosts/error.hpp"
#include "tiosts/lutsim.hpp"
#include "tiosts/purpose.hpp"
#include "tiosts/runtime.hpp"
#include "tiosts/smt.hpp"
#include "tiosts/symexec.hpp"
#include "tiosts/testgen.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>

using namespace tiosts;
using Json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kRejected = 2, kSolver = 3, kFail = 4 };

struct Options {
  std::string model;
  std::string tp;
  std::string tc;
  std::string trace;
  std::string out;
  std::string format = "text";
  std::string solver_cmd;
  int solver_timeout_ms = 10000;
  std::string tm = "5";
  std::size_t depth = 4;
  std::uint64_t seed = 0;
  std::size_t runs = 1;
  std::size_t max_steps = 16;
  std::size_t jobs = 0;
  std::string mutate;
  bool fail_exit = false;
  bool validate_sem = false;
  bool dump_pc = false;
  bool diversify = false;
  bool quiesce_quantify_ini = false;
  bool delta_quantify_all = false;
  bool verbose = false;
};

SolverConfig solver_config(const Options& o) {
  SolverConfig c;
  if (!o.solver_cmd.empty()) c.command = o.solver_cmd;
  c.timeout = std::chrono::milliseconds(o.solver_timeout_ms);
  return c;
}

TreeOptions tree_options(const Options& o, std::size_t depth) {
  return TreeOptions{std::max<std::size_t>(depth, 1) + 2, o.quiesce_quantify_ini};
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw Error("cannot write '" + o.out + "'");
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

Json trace_json(const ConcreteTrace& t) {
  Json a = Json::array();
  for (const auto& ev : t) a.push_back(format_event(ev));
  return a;
}

std::vector<EcId> purpose_path(SymbolicTree& tree, const Options& o) {
  return tree.path_of(parse_selector(o.tp, tree.model()));
}

int cmd_parse(const Options& o) {
  Tiosts m = load_model(o.model);
  if (o.format == "json") {
    Json j;
    j["model"] = m.name;
    j["states"] = m.states;
    j["initial"] = m.initial;
    Json ch = Json::array();
    for (const auto& c : m.channels) ch.push_back(c.name);
    j["channels"] = ch;
    Json tr = Json::array();
    for (const auto& t : m.transitions) tr.push_back(t.name);
    j["transitions"] = tr;
    emit(o, j.dump(2));
  } else {
    emit(o, print_model(m));
  }
  return kOk;
}

int cmd_explore(const Options& o) {
  SymbolicTree tree(load_model(o.model), tree_options(o, o.depth));
  SolverSession session(solver_config(o));
  tree.explore(o.depth, &session);
  if (o.format == "json") {
    Json a = Json::array();
    for (EcId id = 0; id < tree.size(); ++id) {
      const auto& ec = tree.at(id);
      Json e = {{"id", "ec" + std::to_string(id)},
                {"state", ec.state},
                {"event", format_symbolic_event(ec)},
                {"pec", "ec" + std::to_string(ec.pec)},
                {"via", ec.via},
                {"delta", ec.delta},
                {"sat", std::string(to_string(tree.satisfiable(id, session)))}};
      if (o.dump_pc) e["pc"] = to_smtlib(ec.pc);
      a.push_back(e);
    }
    emit(o, a.dump(2));
  } else {
    emit(o, dump_tree(tree, session, o.dump_pc));
  }
  return kOk;
}

int cmd_check_tp(const Options& o) {
  Tiosts m = load_model(o.model);
  const std::size_t len = parse_selector(o.tp, m).transitions.size();
  SymbolicTree tree(std::move(m), tree_options(o, len + 1));
  SolverSession session(solver_config(o));
  const auto path = purpose_path(tree, o);
  PurposeCheck chk = validate_purpose(path, tree, session);
  if (!chk.accepted()) {
    for (const auto& r : chk.rejection.reasons) spdlog::error("test purpose rejected: {}", r);
    emit(o, rejection_json(chk.rejection, tree));
    return kRejected;
  }
  if (o.format == "json") {
    Json j;
    j["accepted"] = true;
    Json p = Json::array();
    for (EcId id : path) p.push_back("ec" + std::to_string(id));
    j["path"] = p;
    j["pc"] = to_smtlib(chk.purpose->pc);
    emit(o, j.dump(2));
  } else {
    std::string s = "accepted:";
    for (EcId id : path) s += " ec" + std::to_string(id);
    emit(o, s);
  }
  return kOk;
}

int cmd_gen(const Options& o) {
  GenOptions g;
  g.tm = parse_rational(o.tm);
  g.delta_quantify_all = o.delta_quantify_all;
  Tiosts m = load_model(o.model);
  const std::size_t len = parse_selector(o.tp, m).transitions.size();
  SymbolicTree tree(std::move(m), tree_options(o, len + 1));
  SolverSession session(solver_config(o));
  const auto path = purpose_path(tree, o);
  PurposeCheck chk = validate_purpose(path, tree, session);
  if (!chk.accepted()) {
    for (const auto& r : chk.rejection.reasons) spdlog::error("test purpose rejected: {}", r);
    std::cerr << rejection_json(chk.rejection, tree) << '\n';
    return kRejected;
  }
  const auto t0 = std::chrono::steady_clock::now();
  TestCase tc = generate(*chk.purpose, tree, session, g);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string census;
  for (const auto& [rule, n] : tc.census()) census += " " + to_string(rule) + "=" + std::to_string(n);
  spdlog::info("{} transitions in {:.3f}s; census:{}", tc.transitions.size(), secs, census);
  emit(o, export_json(tc));
  return kOk;
}

TestCase load_tc(const Options& o) { return import_json(read_file(o.tc)); }

int cmd_run(const Options& o) {
  TestCase tc = load_tc(o);
  ConcreteTrace trace = load_trace(o.trace, tc.channels, tc.consts);
  std::optional<Tiosts> spec;
  if (o.validate_sem) spec = load_model(o.model);
  SolverSession session(solver_config(o));
  RunOutcome r = run_trace(trace, tc, session);

  std::optional<FailEvidence> evidence;
  if (o.validate_sem && r.verdict && is_fail(*r.verdict)) {
    SymbolicTree tree(*spec, tree_options(o, r.consumed + 1));
    ConcreteTrace consumed(trace.begin(), trace.begin() + static_cast<std::ptrdiff_t>(r.consumed));
    evidence = check_fail_evidence(consumed, tree, session);
    if (!evidence->confirmed()) spdlog::error("FAIL verdict without non-conformance evidence");
  }

  if (o.format == "json") {
    Json j;
    j["verdict"] = outcome_name(r);
    j["state"] = state_name(r.final.state);
    j["consumed"] = r.consumed;
    Json steps = Json::array();
    for (const auto& s : r.final.log) {
      steps.push_back({{"event", format_event(s.event)},
                       {"src", state_name(s.source)},
                       {"rule", to_string(s.rule)},
                       {"tgt", state_name(s.target)}});
    }
    j["steps"] = steps;
    if (evidence) {
      j["evidence"] = {{"prefix", std::string(to_string(evidence->prefix.kind))},
                       {"extension", std::string(to_string(evidence->extension.kind))},
                       {"confirmed", evidence->confirmed()}};
    }
    emit(o, j.dump(2));
  } else {
    std::string s = outcome_name(r);
    if (r.incomplete()) s += " at " + state_name(r.final.state);
    if (evidence) {
      s += "\nprefix: " + std::string(to_string(evidence->prefix.kind)) +
           "\nextension: " + std::string(to_string(evidence->extension.kind));
    }
    emit(o, s);
  }
  if (evidence && !evidence->confirmed()) return kRejected;
  return o.fail_exit && r.verdict && is_fail(*r.verdict) ? kFail : kOk;
}

int cmd_cosim(const Options& o) {
  Tiosts spec = load_model(o.model);
  TestCase tc = load_tc(o);
  Tiosts lut = spec;
  std::vector<std::string> edits;
  if (!o.mutate.empty()) {
    Mutant mt = mutate(spec, parse_mutation(o.mutate));
    lut = std::move(mt.model);
    edits = std::move(mt.edits);
  }
  CosimConfig cfg;
  cfg.seed = o.seed;
  cfg.max_steps = o.max_steps;
  cfg.tm = tc.tm;
  cfg.diversify = o.diversify;
  auto results = cosim_batch(lut, tc, cfg, o.runs, solver_config(o), o.jobs);

  std::map<std::string, std::size_t> summary;
  std::size_t fails = 0;
  std::size_t unconfirmed = 0;
  Json runs = Json::array();
  std::optional<SymbolicTree> tree;
  std::optional<SolverSession> session;
  for (const auto& r : results) {
    ++summary[outcome_name(r.outcome)];
    Json run = {{"seed", r.seed}, {"verdict", outcome_name(r.outcome)}, {"trace", trace_json(r.trace)}};
    if (r.failed()) {
      ++fails;
      if (o.validate_sem) {
        if (!tree) {
          tree.emplace(spec, tree_options(o, o.max_steps + 1));
          session.emplace(solver_config(o));
        }
        FailEvidence ev = check_fail_evidence(r.trace, *tree, *session);
        if (!ev.confirmed()) ++unconfirmed;
        run["evidence"] = {{"prefix", std::string(to_string(ev.prefix.kind))},
                           {"extension", std::string(to_string(ev.extension.kind))},
                           {"confirmed", ev.confirmed()}};
      }
    }
    runs.push_back(std::move(run));
  }
  Json j;
  j["mutation"] = o.mutate.empty() ? Json(nullptr) : Json(o.mutate);
  j["edits"] = edits;
  j["runs"] = runs;
  Json s = Json::object();
  for (const auto& [k, n] : summary) s[k] = n;
  j["summary"] = {{"runs", results.size()}, {"fail", fails}, {"verdicts", s}};
  if (o.validate_sem) j["summary"]["unconfirmed"] = unconfirmed;
  emit(o, j.dump(2));
  if (unconfirmed > 0) return kRejected;
  return o.fail_exit && fails > 0 ? kFail : kOk;
}

int cmd_member(const Options& o) {
  Tiosts m = load_model(o.model);
  ConcreteTrace trace = load_trace(o.trace, m.channels, m.consts);
  SymbolicTree tree(std::move(m), tree_options(o, trace.size() + 1));
  SolverSession session(solver_config(o));
  Membership mem = sem_member(trace, tree, session);
  if (o.format == "json") {
    Json w = Json::array();
    for (EcId id : mem.witness) w.push_back("ec" + std::to_string(id));
    emit(o, Json{{"membership", std::string(to_string(mem.kind))}, {"witness", w}}.dump(2));
  } else {
    std::string s(to_string(mem.kind));
    for (EcId id : mem.witness) s += " ec" + std::to_string(id);
    emit(o, s);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("tiosts"));
  spdlog::set_pattern("%^%l%$: %v");

  Options o;
  CLI::App app{"Symbolic test generation and execution for timed input/output symbolic transition systems"};
  app.require_subcommand(1);
  app.add_option("--solver-cmd", o.solver_cmd, "SMT solver command line (default: $TIOSTS_SOLVER or 'z3 -in')");
  app.add_option("--solver-timeout", o.solver_timeout_ms, "per-query timeout in milliseconds")
      ->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", o.verbose, "log debug information");

  auto format = [&](CLI::App* c) {
    c->add_option("--format", o.format, "output format")->check(CLI::IsMember({"text", "json"}));
  };
  auto out = [&](CLI::App* c) { c->add_option("--out", o.out, "write the result to a file instead of stdout"); };
  auto model = [&](CLI::App* c, bool required) {
    auto* opt = c->add_option("--model", o.model, "model file (.tiosts)")->check(CLI::ExistingFile);
    if (required) opt->required();
  };
  auto tree_flags = [&](CLI::App* c) {
    c->add_flag("--quiesce-quantify-ini", o.quiesce_quantify_ini,
                "also quantify initial values in quiescence conditions");
  };
  auto rational_check = CLI::Validator(
      [](std::string& s) {
        try {
          if (parse_rational(s) <= 0) return std::string("must be positive");
        } catch (const std::exception&) {
          return std::string("not a number: ") + s;
        }
        return std::string();
      },
      "RATIONAL");

  auto* parse = app.add_subcommand("parse", "parse and pretty-print a model");
  model(parse, true);
  format(parse);
  out(parse);

  auto* explore = app.add_subcommand("explore", "symbolic execution tree up to a depth");
  model(explore, true);
  explore->add_option("--depth", o.depth, "number of levels")->check(CLI::NonNegativeNumber);
  explore->add_flag("--dump-pc", o.dump_pc, "print path conditions in SMT-LIB");
  tree_flags(explore);
  format(explore);
  out(explore);

  auto* check_tp = app.add_subcommand("check-tp", "validate a test purpose");
  model(check_tp, true);
  check_tp->add_option("--tp", o.tp, "comma-separated transition path")->required();
  tree_flags(check_tp);
  format(check_tp);
  out(check_tp);

  auto* gen = app.add_subcommand("gen", "generate a test case");
  model(gen, true);
  gen->add_option("--tp", o.tp, "comma-separated transition path")->required();
  gen->add_option("--tm", o.tm, "time-out constant")->check(rational_check);
  gen->add_flag("--delta-quantify-all", o.delta_quantify_all,
                "close quiescence guards over unrevealed event variables too");
  tree_flags(gen);
  out(gen);

  auto* run = app.add_subcommand("run", "execute a trace against a test case");
  run->add_option("--tc", o.tc, "test case JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--trace", o.trace, "trace file")->required()->check(CLI::ExistingFile);
  model(run, false);
  run->add_flag("--validate-sem", o.validate_sem, "check FAIL verdicts against the model's semantics");
  run->add_flag("--fail-exit", o.fail_exit, "exit with 4 on a FAIL verdict");
  format(run);
  out(run);

  auto* cosim = app.add_subcommand("cosim", "co-simulate a test case with a simulated implementation");
  model(cosim, true);
  cosim->add_option("--tc", o.tc, "test case JSON")->required()->check(CLI::ExistingFile);
  cosim->add_option("--mutate", o.mutate, "mutation applied to the model, e.g. offset:Debit:2:-1");
  cosim->add_option("--seed", o.seed, "first seed");
  cosim->add_option("--runs", o.runs, "number of runs")->check(CLI::PositiveNumber);
  cosim->add_option("--max-steps", o.max_steps, "events per run")->check(CLI::PositiveNumber);
  cosim->add_option("--jobs", o.jobs, "worker count (0: automatic)");
  cosim->add_flag("--diversify", o.diversify, "randomize stimulation values");
  cosim->add_flag("--validate-sem", o.validate_sem, "check FAIL verdicts against the model's semantics");
  cosim->add_flag("--fail-exit", o.fail_exit, "exit with 4 when a run fails");
  out(cosim);

  auto* member = app.add_subcommand("member", "decide membership of a trace in the model's semantics");
  model(member, true);
  member->add_option("--trace", o.trace, "trace file")->required()->check(CLI::ExistingFile);
  format(member);
  out(member);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (o.verbose) spdlog::set_level(spdlog::level::debug);
  if (run->parsed() && o.validate_sem && o.model.empty()) {
    std::cerr << "--validate-sem requires --model\n";
    return kUsage;
  }
  if (!o.mutate.empty()) {
    try {
      (void)parse_mutation(o.mutate);
    } catch (const Error& e) {
      std::cerr << e.what() << '\n';
      return kUsage;
    }
  }

  try {
    if (parse->parsed()) return cmd_parse(o);
    if (explore->parsed()) return cmd_explore(o);
    if (check_tp->parsed()) return cmd_check_tp(o);
    if (gen->parsed()) return cmd_gen(o);
    if (run->parsed()) return cmd_run(o);
    if (cosim->parsed()) return cmd_cosim(o);
    if (member->parsed()) return cmd_member(o);
  } catch (const SolverUnknown& e) {
    spdlog::error("{}", e.what());
    return kSolver;
  } catch (const SolverError& e) {
    spdlog::error("{}", e.what());
    return kSolver;
  } catch (const InconclusiveError& e) {
    spdlog::error("{}", e.what());
    return kSolver;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kRejected;
  }
  return kUsage;
}
