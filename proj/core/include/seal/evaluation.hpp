#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "seal/features.hpp"
#include "seal/ingest.hpp"
#include "seal/regressors.hpp"

namespace seal {

// 100 * mean(|y - yhat| / |y|). Zero targets are an error; cleaning removes
// them before anything reaches this point.
double mape(std::span<const double> y, std::span<const double> yhat);

// Symmetric percentage error 100 * 2|a - b| / (a + b); requires a + b > 0.
double smape(double measured, double estimated);

// 1 - SS_res / SS_tot; needs at least two targets with positive variance.
double r_squared(std::span<const double> y, std::span<const double> yhat);

struct FoldAssignment {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<int> fold_of; // one fold index per record
};

// Seeded uniform shuffle then round-robin assignment: a partition whose
// fold sizes differ by at most one, deterministic per (n, k, seed).
FoldAssignment kfold_split(std::size_t n, int k, std::uint64_t seed);

struct EvalReport {
    PhaseKind phase = PhaseKind::Prefill;
    RegimeKind regime = RegimeKind::Interpolation;
    RegressorKind kind = RegressorKind::GradientBoostedTrees;
    std::vector<double> fold_mapes;
    double mape_mean = 0.0;
    double mape_std = 0.0; // population std over folds
    double r2 = 0.0;       // pooled out-of-fold predictions
};

// Vocabulary, scaler, and model fitted on one record set for one phase.
// Evaluation fits one of these per fold so nothing leaks from held-out rows.
struct FittedPipeline {
    PhaseKind phase = PhaseKind::Prefill;
    GpuVocabulary vocabulary;
    ScalerStats scaler;
    TrainedRegressor model;

    double predict_record(const MergedRecord& record) const;
};

FittedPipeline fit_pipeline(const std::vector<MergedRecord>& records, PhaseKind phase,
                            RegressorKind kind, const TrainParams& params);

EvalReport cross_validate(const std::vector<MergedRecord>& records, PhaseKind phase,
                          RegressorKind kind, const TrainParams& params, int k = 10,
                          std::uint64_t seed = 0);

EvalReport extrapolation_validate(const std::vector<MergedRecord>& records, PhaseKind phase,
                                  RegressorKind kind, const TrainParams& params,
                                  double size_quantile = 0.8);

struct CellKey {
    PhaseKind phase;
    RegimeKind regime;

    auto operator<=>(const CellKey&) const = default;
};

// Per-cell argmin of mape_mean; ties resolve by registry declaration order.
std::map<CellKey, RegressorKind> select_model(const std::vector<EvalReport>& reports);

} // namespace seal
