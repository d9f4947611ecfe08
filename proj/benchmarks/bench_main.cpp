#include <benchmark/benchmark.h>

#include <map>

#include "stratadoe/design.hpp"
#include "stratadoe/mixed_model.hpp"
#include "stratadoe/scenarios.hpp"
#include "stratadoe/screening.hpp"

using namespace stratadoe;

static void BM_BlockingSearch(benchmark::State& state) {
  auto base = RegularDesign::fraction(6, 1, {parse_word("abcde", 5)});
  for (auto _ : state) {
    auto schemes = search_blocking(base, 8);
    benchmark::DoNotOptimize(schemes);
  }
}
BENCHMARK(BM_BlockingSearch);

static void BM_ExtensionEnumeration(benchmark::State& state) {
  auto base = RegularDesign::fraction(6, 1, {parse_word("abcde", 5)});
  auto blocking = WordSubgroup::closure({base.base_image(parse_word("ab", 6)),
                                         base.base_image(parse_word("ce", 6)),
                                         base.base_image(parse_word("acf", 6))});
  for (auto _ : state) {
    auto exts = enumerate_four_level_extensions(base, blocking);
    benchmark::DoNotOptimize(exts);
  }
}
BENCHMARK(BM_ExtensionEnumeration);

static void BM_PresetBuild(benchmark::State& state) {
  for (auto _ : state) {
    auto pa = build_preset("paper");
    benchmark::DoNotOptimize(pa);
  }
}
BENCHMARK(BM_PresetBuild);

static void BM_RemlFit(benchmark::State& state) {
  auto pa = build_preset("paper");
  auto spec = preset_model_spec(pa);
  std::map<Word, double> beta{{parse_word("cd", 8), -2.7},
                              {parse_word("a", 8), -2.4}};
  VarianceComponents vc;
  vc.tube = 2.5;
  vc.column = 6.2;
  vc.row = 1.9;
  vc.error = 179.8;
  auto ds = simulate_response(pa.run_table, beta, 329.0, vc, 42);
  for (auto _ : state) {
    auto fm = FittedModel::fit(ds, spec);
    benchmark::DoNotOptimize(fm.reml_loglik());
  }
}
BENCHMARK(BM_RemlFit);

static void BM_CriticalMultiplier(benchmark::State& state) {
  ScreeningConfig cfg;
  cfg.mc_replicates = static_cast<int>(state.range(0));
  for (auto _ : state) {
    double c = critical_multiplier(14, 0.10, cfg);
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_CriticalMultiplier)->Arg(10000)->Arg(100000);

BENCHMARK_MAIN();
