#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "seal/estimator.hpp"
#include "seal/evaluation.hpp"
#include "seal/ingest.hpp"

namespace seal {

struct BundleTrainOptions {
    TrainParams params;
    std::uint64_t seed = 0;
    // Re-runs the full registry sweep and honors its per-cell winners
    // instead of the default gradient-boosted/ridge pairing.
    bool select_by_cv = false;
    int cv_k = 10;
    double size_quantile = 0.8;
    std::string created_at;
};

// Trains the four (phase x regime) slots on the full record set and fixes
// the interpolation threshold at the largest training model size.
ModelBundle train_bundle(const std::vector<MergedRecord>& records,
                         const BundleTrainOptions& options, const std::string& dataset_hash);

struct SweepEntry {
    PhaseKind phase = PhaseKind::Prefill;
    RegimeKind regime = RegimeKind::Interpolation;
    RegressorKind kind = RegressorKind::GradientBoostedTrees;
    bool ok = false;
    EvalReport report; // valid when ok
    std::string error; // set when !ok (e.g. OLS on a rank-deficient encoding)
};

struct SweepResult {
    std::vector<SweepEntry> entries;
    std::map<CellKey, RegressorKind> selected;
};

// Full registry x phase x regime evaluation. Kinds that cannot train on a
// cell are recorded as failed entries and excluded from selection.
SweepResult evaluate_sweep(const std::vector<MergedRecord>& records, const TrainParams& params,
                           int k, std::uint64_t seed, double size_quantile);

struct ReportProvenance {
    std::string dataset_hash;
    std::size_t record_count = 0;
    std::uint64_t seed = 0;
    int k = 10;
    double size_quantile = 0.8;
};

std::string sweep_report_to_text(const SweepResult& sweep, const ReportProvenance& provenance,
                                 const TrainParams& params);

std::string train_params_to_text(const TrainParams& params);

} // namespace seal
