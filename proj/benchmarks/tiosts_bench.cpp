#include "tiosts/dsl.hpp"
#include "tiosts/purpose.hpp"
#include "tiosts/runtime.hpp"
#include "tiosts/smt.hpp"
#include "tiosts/symexec.hpp"
#include "tiosts/testgen.hpp"

#include <benchmark/benchmark.h>

#include <string>

using namespace tiosts;

namespace {

const Tiosts& atm() {
  static const Tiosts m = load_model(std::string(TIOSTS_MODELS_DIR) + "/atm.tiosts");
  return m;
}

void BM_ParseModel(benchmark::State& state) {
  const std::string text = print_model(atm());
  for (auto _ : state) benchmark::DoNotOptimize(parse_model(text));
}
BENCHMARK(BM_ParseModel);

void BM_ExploreTree(benchmark::State& state) {
  const auto depth = static_cast<std::size_t>(state.range(0));
  std::size_t ecs = 0;
  for (auto _ : state) {
    SymbolicTree tree(atm());
    tree.explore(depth);
    ecs = tree.size();
  }
  state.counters["ecs"] = static_cast<double>(ecs);
}
BENCHMARK(BM_ExploreTree)->Arg(2)->Arg(4)->Arg(6);

void BM_RenderSmtlib(benchmark::State& state) {
  SymbolicTree tree(atm());
  tree.explore(6);
  for (auto _ : state) {
    std::size_t bytes = 0;
    for (EcId id = 0; id < tree.size(); ++id) bytes += to_smtlib(tree.at(id).pc).size();
    benchmark::DoNotOptimize(bytes);
  }
}
BENCHMARK(BM_RenderSmtlib);

void BM_GenerateAtmTestCase(benchmark::State& state) {
  SolverSession session;
  for (auto _ : state) {
    SymbolicTree tree(atm());
    const auto path = tree.path_of(parse_selector("tr1,tr2,tr3,tr4", atm()));
    const TestPurpose tp = *validate_purpose(path, tree, session).purpose;
    benchmark::DoNotOptimize(generate(tp, tree, session));
  }
  state.counters["queries"] = static_cast<double>(session.stats().queries);
}
BENCHMARK(BM_GenerateAtmTestCase)->Unit(benchmark::kMillisecond);

void BM_RunTrace(benchmark::State& state) {
  SolverSession session;
  SymbolicTree tree(atm());
  const auto path = tree.path_of(parse_selector("tr1,tr2,tr3,tr4", atm()));
  const TestCase tc = generate(*validate_purpose(path, tree, session).purpose, tree, session);
  const ConcreteTrace trace = parse_trace("0 Transc? [50,4]\n0 Debit! [1,51,ATM_ID]\n", atm().channels, atm().consts);
  for (auto _ : state) benchmark::DoNotOptimize(run_trace(trace, tc, session));
}
BENCHMARK(BM_RunTrace)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
