#include <benchmark/benchmark.h>

#include <random>

#include "fregmice/imputation.hpp"
#include "fregmice/kernels.hpp"
#include "fregmice/rng.hpp"
#include "fregmice/simlab.hpp"

using namespace fregmice;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n01(gen);
  return m;
}

std::vector<KronBlock> frm_blocks(Eigen::Index n) {
  const Eigen::MatrixXd tb = random_matrix(101, 20, 3).cwiseAbs();
  return {{Eigen::MatrixXd::Ones(n, 1), tb}, {random_matrix(n, 3, 4), tb}, {random_matrix(n, 8, 5), tb}};
}

void BM_GramSerial(benchmark::State& state) {
  const Eigen::MatrixXd x = random_matrix(state.range(0), 80, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::gram_serial(x));
}

void BM_GramParallel(benchmark::State& state) {
  const Eigen::MatrixXd x = random_matrix(state.range(0), 80, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::gram_parallel(x));
}

void BM_KronSerial(benchmark::State& state) {
  const auto blocks = frm_blocks(state.range(0));
  const Eigen::MatrixXd y = random_matrix(state.range(0), 101, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::kron_cross_products_serial(blocks, y));
}

void BM_KronParallel(benchmark::State& state) {
  const auto blocks = frm_blocks(state.range(0));
  const Eigen::MatrixXd y = random_matrix(state.range(0), 101, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::kron_cross_products_parallel(blocks, y));
}

void run_imputation(benchmark::State& state, bool parallel) {
  ScenarioConfig sc;
  sc.n = 120;
  Rng gen{7, 0, 1}, mask{7, 0, 2};
  const MixedDataset data = apply_missingness(gen_frm_dataset(sc, gen), sc, mask);
  ImputationSpec spec;
  spec.M = 4;
  spec.V = 2;
  spec.parallel = parallel;
  for (auto _ : state) benchmark::DoNotOptimize(run_fregmice(data, spec));
}

void BM_ImputeSerial(benchmark::State& state) { run_imputation(state, false); }
void BM_ImputeParallel(benchmark::State& state) { run_imputation(state, true); }

}  // namespace

BENCHMARK(BM_GramSerial)->Arg(2000)->Arg(20000);
BENCHMARK(BM_GramParallel)->Arg(2000)->Arg(20000);
BENCHMARK(BM_KronSerial)->Arg(350)->Arg(1400);
BENCHMARK(BM_KronParallel)->Arg(350)->Arg(1400);
BENCHMARK(BM_ImputeSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ImputeParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
