#include "seal/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "seal/error.hpp"
#include "seal/util.hpp"

namespace seal {

double mape(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) {
        throw DataError("mape: length mismatch");
    }
    if (y.empty()) {
        throw DataError("mape: empty input");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0.0) {
            throw DataError("mape: zero target at index " + std::to_string(i));
        }
        acc += std::abs(y[i] - yhat[i]) / std::abs(y[i]);
    }
    return 100.0 * acc / static_cast<double>(y.size());
}

double smape(double measured, double estimated) {
    const double denom = measured + estimated;
    if (!(denom > 0.0)) {
        throw DataError("smape: measured + estimated must be > 0");
    }
    return 100.0 * 2.0 * std::abs(measured - estimated) / denom;
}

double r_squared(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) {
        throw DataError("r_squared: length mismatch");
    }
    if (y.size() < 2) {
        throw DataError("r_squared: need at least 2 targets");
    }
    double mean = 0.0;
    for (double v : y) {
        mean += v;
    }
    mean /= static_cast<double>(y.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    if (ss_tot == 0.0) {
        throw DataError("r_squared: zero target variance");
    }
    return 1.0 - ss_res / ss_tot;
}

FoldAssignment kfold_split(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) {
        throw DataError("kfold: k must be >= 2");
    }
    if (static_cast<std::size_t>(k) > n) {
        throw DataError("kfold: k exceeds record count");
    }
    FoldAssignment folds;
    folds.k = k;
    folds.seed = seed;
    folds.fold_of.assign(n, 0);
    const std::vector<std::size_t> perm = shuffled_indices(n, seed);
    for (std::size_t i = 0; i < n; ++i) {
        folds.fold_of[perm[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return folds;
}

double FittedPipeline::predict_record(const MergedRecord& record) const {
    const ExtractedSample sample = extract_features(record, phase);
    const std::vector<double> row = apply_scaler(encode(sample.features, vocabulary), scaler);
    return model.predict(row);
}

FittedPipeline fit_pipeline(const std::vector<MergedRecord>& records, PhaseKind phase,
                            RegressorKind kind, const TrainParams& params) {
    GpuVocabulary vocabulary = GpuVocabulary::build(records);

    Matrix x;
    std::vector<double> y;
    x.reserve(records.size());
    y.reserve(records.size());
    for (const auto& r : records) {
        const ExtractedSample sample = extract_features(r, phase);
        x.push_back(encode(sample.features, vocabulary));
        y.push_back(sample.target_j_per_token);
    }
    ScalerStats scaler = fit_scaler(x, continuous_mask(vocabulary));
    for (auto& row : x) {
        row = apply_scaler(row, scaler);
    }
    TrainedRegressor model = train(kind, x, y, params);
    return FittedPipeline{phase, std::move(vocabulary), std::move(scaler), std::move(model)};
}

namespace {

struct HeldOutEval {
    double fold_mape = 0.0;
    std::vector<double> y;
    std::vector<double> yhat;
};

HeldOutEval evaluate_held_out(const FittedPipeline& pipeline,
                              const std::vector<MergedRecord>& held_out) {
    HeldOutEval eval;
    eval.y.reserve(held_out.size());
    eval.yhat.reserve(held_out.size());
    for (const auto& r : held_out) {
        eval.y.push_back(extract_features(r, pipeline.phase).target_j_per_token);
        eval.yhat.push_back(pipeline.predict_record(r));
    }
    eval.fold_mape = mape(eval.y, eval.yhat);
    return eval;
}

// r_squared itself rejects degenerate inputs; reports still need a value
// when a fold's pooled targets are constant (legal for perfectly learnable
// synthetic data). Exact predictions count as 1, anything else as 0.
double report_r2(std::span<const double> y, std::span<const double> yhat) {
    bool degenerate = y.size() < 2;
    if (!degenerate) {
        const double first = y.front();
        degenerate = std::all_of(y.begin(), y.end(), [&](double v) { return v == first; });
    }
    if (degenerate) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] != yhat[i]) {
                return 0.0;
            }
        }
        return 1.0;
    }
    return r_squared(y, yhat);
}

void summarize(EvalReport& report) {
    double mean = 0.0;
    for (double m : report.fold_mapes) {
        mean += m;
    }
    mean /= static_cast<double>(report.fold_mapes.size());
    double var = 0.0;
    for (double m : report.fold_mapes) {
        var += (m - mean) * (m - mean);
    }
    report.mape_mean = mean;
    report.mape_std = std::sqrt(var / static_cast<double>(report.fold_mapes.size()));
}

} // namespace

EvalReport cross_validate(const std::vector<MergedRecord>& records, PhaseKind phase,
                          RegressorKind kind, const TrainParams& params, int k,
                          std::uint64_t seed) {
    if (records.size() < static_cast<std::size_t>(std::max(k, 2))) {
        throw DataError("cross_validate: fewer records than folds");
    }
    const FoldAssignment folds = kfold_split(records.size(), k, seed);

    EvalReport report;
    report.phase = phase;
    report.regime = RegimeKind::Interpolation;
    report.kind = kind;

    std::vector<double> pooled_y;
    std::vector<double> pooled_yhat;
    for (int fold = 0; fold < k; ++fold) {
        std::vector<MergedRecord> train_rows;
        std::vector<MergedRecord> test_rows;
        for (std::size_t i = 0; i < records.size(); ++i) {
            (folds.fold_of[i] == fold ? test_rows : train_rows).push_back(records[i]);
        }
        try {
            const FittedPipeline pipeline = fit_pipeline(train_rows, phase, kind, params);
            HeldOutEval eval = evaluate_held_out(pipeline, test_rows);
            report.fold_mapes.push_back(eval.fold_mape);
            pooled_y.insert(pooled_y.end(), eval.y.begin(), eval.y.end());
            pooled_yhat.insert(pooled_yhat.end(), eval.yhat.begin(), eval.yhat.end());
        } catch (const DataError& e) {
            throw DataError("fold " + std::to_string(fold) + ": " + e.what());
        }
    }
    summarize(report);
    report.r2 = report_r2(pooled_y, pooled_yhat);
    return report;
}

EvalReport extrapolation_validate(const std::vector<MergedRecord>& records, PhaseKind phase,
                                  RegressorKind kind, const TrainParams& params,
                                  double size_quantile) {
    const RegimeSplitResult split = regime_split(records, size_quantile);

    EvalReport report;
    report.phase = phase;
    report.regime = RegimeKind::Extrapolation;
    report.kind = kind;

    const FittedPipeline pipeline = fit_pipeline(split.train, phase, kind, params);
    const HeldOutEval eval = evaluate_held_out(pipeline, split.test);
    report.fold_mapes.push_back(eval.fold_mape);
    summarize(report);
    report.r2 = report_r2(eval.y, eval.yhat);
    return report;
}

std::map<CellKey, RegressorKind> select_model(const std::vector<EvalReport>& reports) {
    if (reports.empty()) {
        throw DataError("select_model: no reports");
    }
    const auto rank_of = [](RegressorKind kind) {
        for (std::size_t i = 0; i < kRegressorRegistry.size(); ++i) {
            if (kRegressorRegistry[i] == kind) {
                return i;
            }
        }
        return kRegressorRegistry.size();
    };

    struct Best {
        double mape;
        RegressorKind kind;
    };
    std::map<CellKey, Best> best;
    for (const auto& report : reports) {
        const CellKey cell{report.phase, report.regime};
        auto it = best.find(cell);
        if (it == best.end()) {
            best.emplace(cell, Best{report.mape_mean, report.kind});
            continue;
        }
        const bool better = report.mape_mean < it->second.mape ||
                            (report.mape_mean == it->second.mape &&
                             rank_of(report.kind) < rank_of(it->second.kind));
        if (better) {
            it->second = Best{report.mape_mean, report.kind};
        }
    }
    std::map<CellKey, RegressorKind> selected;
    for (const auto& [cell, b] : best) {
        selected.emplace(cell, b.kind);
    }
    return selected;
}

} // namespace seal
