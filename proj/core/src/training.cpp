#include "seal/training.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "seal/error.hpp"
#include "seal/util.hpp"

namespace seal {

namespace {

using nlohmann::json;

json params_to_json(const TrainParams& p) {
    json ridge_alpha;
    if (p.ridge.alpha.has_value()) {
        ridge_alpha = format_g17(*p.ridge.alpha);
    } else {
        ridge_alpha = nullptr;
    }
    json grid = json::array();
    for (double a : p.ridge.alpha_grid) {
        grid.push_back(format_g17(a));
    }
    return json{
        {"gbdt",
         {{"n_trees", p.gbdt.n_trees},
          {"learning_rate", format_g17(p.gbdt.learning_rate)},
          {"max_depth", p.gbdt.max_depth},
          {"min_samples_leaf", p.gbdt.min_samples_leaf},
          {"l2_leaf_penalty", format_g17(p.gbdt.l2_leaf_penalty)}}},
        {"ridge", {{"alpha", ridge_alpha}, {"alpha_grid", grid}}},
        {"knn", {{"k", p.knn.k}}},
    };
}

RegressorKind default_kind(RegimeKind regime) {
    return regime == RegimeKind::Interpolation ? RegressorKind::GradientBoostedTrees
                                               : RegressorKind::Ridge;
}

} // namespace

std::string train_params_to_text(const TrainParams& params) {
    return params_to_json(params).dump();
}

SweepResult evaluate_sweep(const std::vector<MergedRecord>& records, const TrainParams& params,
                           int k, std::uint64_t seed, double size_quantile) {
    SweepResult sweep;
    std::vector<EvalReport> ok_reports;
    for (PhaseKind phase : {PhaseKind::Prefill, PhaseKind::Decode}) {
        for (RegimeKind regime : {RegimeKind::Interpolation, RegimeKind::Extrapolation}) {
            for (RegressorKind kind : kRegressorRegistry) {
                SweepEntry entry;
                entry.phase = phase;
                entry.regime = regime;
                entry.kind = kind;
                try {
                    entry.report =
                        regime == RegimeKind::Interpolation
                            ? cross_validate(records, phase, kind, params, k, seed)
                            : extrapolation_validate(records, phase, kind, params, size_quantile);
                    entry.ok = true;
                    ok_reports.push_back(entry.report);
                } catch (const DataError& e) {
                    entry.error = e.what();
                }
                sweep.entries.push_back(std::move(entry));
            }
            const CellKey cell{phase, regime};
            const bool any_ok = std::any_of(
                ok_reports.begin(), ok_reports.end(), [&](const EvalReport& r) {
                    return CellKey{r.phase, r.regime} == cell;
                });
            if (!any_ok) {
                throw DataError("evaluation sweep: every regressor failed for " +
                                std::string(to_string(phase)) + "/" +
                                std::string(to_string(regime)));
            }
        }
    }
    sweep.selected = select_model(ok_reports);
    return sweep;
}

ModelBundle train_bundle(const std::vector<MergedRecord>& records,
                         const BundleTrainOptions& options, const std::string& dataset_hash) {
    if (records.size() < static_cast<std::size_t>(options.cv_k)) {
        throw DataError("train: dataset has " + std::to_string(records.size()) +
                        " records, below the " + std::to_string(options.cv_k) +
                        "-fold minimum");
    }

    std::map<CellKey, RegressorKind> kinds;
    if (options.select_by_cv) {
        kinds = evaluate_sweep(records, options.params, options.cv_k, options.seed,
                               options.size_quantile)
                    .selected;
    } else {
        for (PhaseKind phase : {PhaseKind::Prefill, PhaseKind::Decode}) {
            for (RegimeKind regime : {RegimeKind::Interpolation, RegimeKind::Extrapolation}) {
                kinds.emplace(CellKey{phase, regime}, default_kind(regime));
            }
        }
    }

    TrainParams params = options.params;
    params.gbdt.seed = options.seed;
    params.ridge.seed = options.seed;

    ModelBundle bundle;
    bundle.vocabulary = GpuVocabulary::build(records);
    bundle.interpolation_threshold_b = 0.0;
    for (const auto& r : records) {
        bundle.interpolation_threshold_b =
            std::max(bundle.interpolation_threshold_b, r.perf.model_size_b);
    }

    for (PhaseKind phase : {PhaseKind::Prefill, PhaseKind::Decode}) {
        Matrix x;
        std::vector<double> y;
        x.reserve(records.size());
        y.reserve(records.size());
        for (const auto& r : records) {
            const ExtractedSample sample = extract_features(r, phase);
            x.push_back(encode(sample.features, bundle.vocabulary));
            y.push_back(sample.target_j_per_token);
        }
        const ScalerStats scaler = fit_scaler(x, continuous_mask(bundle.vocabulary));
        for (auto& row : x) {
            row = apply_scaler(row, scaler);
        }
        for (RegimeKind regime : {RegimeKind::Interpolation, RegimeKind::Extrapolation}) {
            TrainedModelSlot& slot = bundle.slot(phase, regime);
            slot.phase = phase;
            slot.regime = regime;
            slot.scaler = scaler;
            slot.model = train(kinds.at(CellKey{phase, regime}), x, y, params);
        }
    }

    bundle.metadata.dataset_hash = dataset_hash;
    bundle.metadata.record_count = records.size();
    bundle.metadata.seed = options.seed;
    bundle.metadata.params = train_params_to_text(options.params);
    bundle.metadata.created_at = options.created_at;
    return bundle;
}

std::string sweep_report_to_text(const SweepResult& sweep, const ReportProvenance& provenance,
                                 const TrainParams& params) {
    json cells = json::array();
    for (PhaseKind phase : {PhaseKind::Prefill, PhaseKind::Decode}) {
        for (RegimeKind regime : {RegimeKind::Interpolation, RegimeKind::Extrapolation}) {
            json results = json::array();
            for (const auto& entry : sweep.entries) {
                if (entry.phase != phase || entry.regime != regime) {
                    continue;
                }
                json r{{"kind", std::string(to_string(entry.kind))}};
                if (entry.ok) {
                    r["status"] = "ok";
                    r["mape_mean"] = format_g17(entry.report.mape_mean);
                    r["mape_std"] = format_g17(entry.report.mape_std);
                    r["r2"] = format_g17(entry.report.r2);
                    json folds = json::array();
                    for (double m : entry.report.fold_mapes) {
                        folds.push_back(format_g17(m));
                    }
                    r["fold_mapes"] = std::move(folds);
                } else {
                    r["status"] = "failed";
                    r["error"] = entry.error;
                }
                results.push_back(std::move(r));
            }
            cells.push_back(json{
                {"phase", std::string(to_string(phase))},
                {"regime", std::string(to_string(regime))},
                {"selected", std::string(to_string(sweep.selected.at(CellKey{phase, regime})))},
                {"results", std::move(results)},
            });
        }
    }
    json doc{
        {"format_version", 1},
        {"provenance",
         {{"dataset_hash", provenance.dataset_hash},
          {"record_count", provenance.record_count},
          {"seed", provenance.seed},
          {"k", provenance.k},
          {"size_quantile", format_g17(provenance.size_quantile)},
          {"params", params_to_json(params)}}},
        {"cells", std::move(cells)},
    };
    return doc.dump(1) + "\n";
}

} // namespace seal
