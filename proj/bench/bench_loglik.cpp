// Serial reference vs the OpenMP likelihood kernel on simulated data.
#include <benchmark/benchmark.h>

#include <map>

#include "curesurv/likelihood.hpp"
#include "curesurv/simulation.hpp"

using namespace curesurv;

namespace {

const SurvivalDataset& dataset(Model model, long n) {
  static std::map<std::pair<int, long>, SurvivalDataset> cache;
  auto key = std::make_pair(static_cast<int>(model), n);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, generate_dataset(SimConfig::reference_design(model, n, 1, 7), 0)).first;
  return it->second;
}

template <double (*Fn)(const ParamVector&, const SurvivalDataset&)>
void run(benchmark::State& state, Model model) {
  const long n = state.range(0);
  const SimConfig cfg = SimConfig::reference_design(model, n, 1, 7);
  const SurvivalDataset& d = dataset(model, n);
  const ParamVector theta = ParamVector::from_coefficients(cfg.spec(), cfg.truth);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(theta, d));
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_serial_mog(benchmark::State& s) { run<loglik_serial>(s, Model::MOGompertz); }
void BM_parallel_mog(benchmark::State& s) { run<loglik>(s, Model::MOGompertz); }
void BM_serial_moig(benchmark::State& s) { run<loglik_serial>(s, Model::MOInverseGaussian); }
void BM_parallel_moig(benchmark::State& s) { run<loglik>(s, Model::MOInverseGaussian); }

}  // namespace

BENCHMARK(BM_serial_mog)->Arg(1000)->Arg(100000);
BENCHMARK(BM_parallel_mog)->Arg(1000)->Arg(100000);
BENCHMARK(BM_serial_moig)->Arg(1000)->Arg(100000);
BENCHMARK(BM_parallel_moig)->Arg(1000)->Arg(100000);

BENCHMARK_MAIN();
