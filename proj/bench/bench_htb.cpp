// Serial vs OpenMP timings of the repetition loop and the Monte Carlo
// estimator check, plus the per-round kernels they are built from.
//
//   HTB_THREADS=4 ./htb_bench --benchmark_filter=Experiment

#include "htb/estimators_bonuses.hpp"
#include "htb/harness.hpp"
#include "htb/optimal_design.hpp"
#include "htb/simplex_ftrl.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace htb;

namespace {

ExperimentConfig alg1_config() {
    ExperimentConfig c;
    c.policy.kind = PolicyKind::Alg1;
    c.environment.regime = RegimeKind::StochasticMab;
    c.environment.means = {-0.4, -0.2, 0.4, 0.4, 0.4};
    c.environment.noise = {NoiseKind::SymmetricPareto, 3.0};
    c.spec = HeavyTailSpec(1.5, 1.0);
    c.horizon = 4096;
    c.repetitions = 8;
    c.seed = 1;
    return c;
}

FeatureSet random_features(std::size_t k, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = n(rng);
    }
    return FeatureSet(m);
}

void BM_Experiment(benchmark::State& state) {
    const auto exec = state.range(0) ? Execution::Parallel : Execution::Serial;
    const auto cfg = alg1_config();
    for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg, exec));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.horizon * cfg.repetitions));
}
BENCHMARK(BM_Experiment)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_UnbiasedCheck(benchmark::State& state) {
    const auto exec = state.range(0) ? Execution::Parallel : Execution::Serial;
    const auto fs = random_features(8, 3, 5);
    const auto p = SimplexDistribution::uniform(8);
    std::vector<double> means(8);
    for (std::size_t a = 0; a < 8; ++a) means[a] = 0.1 * fs.feature(a).sum();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            check_unbiased_differences(EstimatorKind::VarianceReduced, p, fs, means, 0.5, 200000, 3, exec));
    }
}
BENCHMARK(BM_UnbiasedCheck)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_TsallisSolve(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::vector<double> loss(k);
    for (auto& x : loss) x = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(solve_tsallis(loss, 3.0, 2.0 / 3.0));
}
BENCHMARK(BM_TsallisSolve)->Arg(5)->Arg(100)->Arg(1000);

void BM_GOptimalDesign(benchmark::State& state) {
    const auto fs = random_features(static_cast<std::size_t>(state.range(0)), 5, 9);
    for (auto _ : state) benchmark::DoNotOptimize(g_optimal_design(fs));
}
BENCHMARK(BM_GOptimalDesign)->Arg(30)->Arg(200)->Unit(benchmark::kMicrosecond);

}  // namespace

int main(int argc, char** argv) {
    configure_threads_from_env();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
