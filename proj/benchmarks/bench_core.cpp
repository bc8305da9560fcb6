#include <benchmark/benchmark.h>
#include <dirsteer/calibration.hpp>
#include <dirsteer/direction_extraction.hpp>
#include <dirsteer/intervention.hpp>
#include <dirsteer/toy_model.hpp>

#include <random>

using namespace dirsteer;

namespace {

Matrix gaussian(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = n01(rng);
    return m;
}

const ToyModel& toy() {
    static const ToyModel m = build_toy_model(ToyModelSpec{});
    return m;
}

void BM_RawDirection(benchmark::State& state) {
    const Matrix d = gaussian(state.range(0), state.range(1), 1);
    for (auto _ : state) benchmark::DoNotOptimize(raw_direction(d));
}
BENCHMARK(BM_RawDirection)->Args({100, 32})->Args({256, 256})->Args({1000, 1024});

void BM_TrainProbe(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    Matrix x = gaussian(n, state.range(1), 2);
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        labels[static_cast<std::size_t>(i)] = i % 2;
        x(i, 0) += i % 2 ? 1.0 : -1.0;
    }
    for (auto _ : state) benchmark::DoNotOptimize(train_probe(x, labels));
}
BENCHMARK(BM_TrainProbe)->Args({200, 32})->Args({200, 256})->Unit(benchmark::kMillisecond);

void BM_TransformRows(benchmark::State& state) {
    const auto& m = toy();
    const InterventionConfig cfg{5, 1.0, 2.0, Order::kStandard, truth_direction(m, ContrastKind::kRefusal),
                                 truth_direction(m, ContrastKind::kHarm)};
    const Matrix x = gaussian(state.range(0), m.spec.hidden_dim, 3);
    for (auto _ : state) {
        Matrix rows = x;
        dbdi_transform_rows(rows, cfg);
        benchmark::DoNotOptimize(rows.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TransformRows)->Arg(200)->Arg(10000);

void BM_Forward(benchmark::State& state) {
    const auto& m = toy();
    const Matrix x = make_inputs(m, 1, static_cast<std::size_t>(state.range(0)), InputKind::kHarmful);
    for (auto _ : state) benchmark::DoNotOptimize(forward(m, x));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(200)->Arg(2000);

void BM_GridSearch(benchmark::State& state) {
    const auto& m = toy();
    const auto ref = generate_synthetic_bundle(m, 100, ContrastKind::kRefusal, 0);
    const Evaluator eval(m, kDefaultEvalSize, 0);
    const auto v = truth_direction(m, ContrastKind::kRefusal);
    const auto u = truth_direction(m, ContrastKind::kHarm);
    const auto betas = beta_grid(ref, 5, default_bhat_grid());
    for (auto _ : state) benchmark::DoNotOptimize(grid_search(eval, v, u, 5, default_alpha_grid(), betas));
}
BENCHMARK(BM_GridSearch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
