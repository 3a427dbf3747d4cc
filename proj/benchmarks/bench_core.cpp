#include <benchmark/benchmark.h>

#include "seal/evaluation.hpp"
#include "seal/features.hpp"
#include "seal/regressors.hpp"
#include "seal/util.hpp"

using namespace seal;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Matrix x(n, std::vector<double>(d));
    for (auto& row : x) {
        for (auto& v : row) {
            v = rng.uniform01() * 10.0;
        }
    }
    return x;
}

std::vector<double> linearish_targets(const Matrix& x, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<double> y;
    y.reserve(x.size());
    for (const auto& row : x) {
        double v = 1.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            v += (j % 2 == 0 ? 0.5 : -0.25) * row[j];
        }
        y.push_back(v + rng.uniform01());
    }
    return y;
}

void bm_gbdt_train(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix x = random_matrix(n, 10, 1);
    const std::vector<double> y = linearish_targets(x, 2);
    GbdtParams params;
    params.n_trees = 50;
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_gbdt(x, y, params));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(bm_gbdt_train)->Arg(500)->Arg(3000)->Unit(benchmark::kMillisecond);

void bm_gbdt_predict(benchmark::State& state) {
    const Matrix x = random_matrix(3000, 10, 3);
    const std::vector<double> y = linearish_targets(x, 4);
    GbdtParams params;
    params.n_trees = 300;
    const GbdtModel model = train_gbdt(x, y, params);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(predict_gbdt(model, x[i++ % x.size()]));
    }
}
BENCHMARK(bm_gbdt_predict);

void bm_ridge_train(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix x = random_matrix(n, 15, 5);
    const std::vector<double> y = linearish_targets(x, 6);
    RidgeParams params;
    params.alpha = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_ridge(x, y, params));
    }
}
BENCHMARK(bm_ridge_train)->Arg(3000)->Unit(benchmark::kMicrosecond);

void bm_knn_predict(benchmark::State& state) {
    const Matrix x = random_matrix(3000, 15, 7);
    const std::vector<double> y = linearish_targets(x, 8);
    const KnnModel model = train_knn(x, y, KnnParams{});
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(predict_knn(model, x[i++ % x.size()]));
    }
}
BENCHMARK(bm_knn_predict)->Unit(benchmark::kMicrosecond);

void bm_encode_scale(benchmark::State& state) {
    const GpuVocabulary vocab = GpuVocabulary::from_labels({"a", "b", "c", "d"});
    FeatureVector fv;
    fv.input_tokens = 256;
    fv.output_tokens = 64;
    fv.model_size_b = 7;
    fv.phase_latency_s_per_token = 0.01;
    fv.gpu = "c";
    fv.bbh = 50;
    fv.mmlu_pro = 40;
    std::vector<std::vector<double>> rows(16, encode(fv, vocab));
    const ScalerStats stats = fit_scaler(rows, continuous_mask(vocab));
    for (auto _ : state) {
        benchmark::DoNotOptimize(apply_scaler(encode(fv, vocab), stats));
    }
}
BENCHMARK(bm_encode_scale);

void bm_mape(benchmark::State& state) {
    SplitMix64 rng(11);
    std::vector<double> y(3000);
    std::vector<double> yhat(3000);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = 1.0 + rng.uniform01();
        yhat[i] = 1.0 + rng.uniform01();
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(mape(y, yhat));
    }
}
BENCHMARK(bm_mape);

} // namespace

BENCHMARK_MAIN();
