// Acceptance suite: one pass/fail line per criterion, exit 1 on any failure.
//
// Criteria 2, 3, and 6 run against real leaderboard snapshots when
//   SEAL_PERF_SNAPSHOT / SEAL_QUALITY_SNAPSHOT (and optionally
//   SEAL_PERF_MAP / SEAL_QUALITY_MAP) are set; otherwise they run on the
// bundled synthetic snapshot, whose generator provides the ground truth.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <unistd.h>

#include "seal/api.hpp"
#include "seal/error.hpp"
#include "seal/estimator.hpp"
#include "seal/evaluation.hpp"
#include "seal/ingest.hpp"
#include "seal/training.hpp"
#include "seal/util.hpp"
#include "support/proc.hpp"
#include "support/synthetic.hpp"

using namespace seal;
using nlohmann::json;

namespace {

struct Checker {
    bool ok = true;
    std::vector<std::string> failures;
    std::vector<std::string> notes;

    void require(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            failures.push_back(what);
        }
    }
    void note(const std::string& what) { notes.push_back(what); }
};

struct DataContext {
    bool real_snapshot = false;
    std::vector<MergedRecord> records; // merged + cleaned
    std::string dataset_text;
    std::string perf_path;
    std::string quality_path;
    std::string perf_map_path;
    std::string quality_map_path;
    std::size_t perf_rows = 0;
    std::size_t quality_rows = 0;
    std::size_t merged_rows = 0;
};

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return (v != nullptr && *v != '\0') ? v : fallback;
}

// Generator settings for the synthetic leaderboard stand-in: enough
// curvature that trees beat linear models inside the size range, a strong
// linear size trend so ridge extrapolates, and noise sized to keep the
// best-achievable interpolation MAPE inside the accuracy band under test.
testsupport::SynthOptions snapshot_options() {
    testsupport::SynthOptions options;
    options.n_interpolation = 3000;
    options.seed = 20240809;
    options.noise_rel = 0.04;
    options.nonlinear = 1.0;
    return options;
}

DataContext& data_context() {
    static DataContext ctx = [] {
        DataContext c;
        const std::string dir = testsupport::make_temp_dir("acceptance-data");
        c.perf_map_path = env_or("SEAL_PERF_MAP",
                                 testsupport::source_dir() + "/config/llm_perf.map");
        c.quality_map_path = env_or("SEAL_QUALITY_MAP",
                                    testsupport::source_dir() + "/config/open_llm.map");
        c.perf_path = env_or("SEAL_PERF_SNAPSHOT", "");
        c.quality_path = env_or("SEAL_QUALITY_SNAPSHOT", "");
        c.real_snapshot = !c.perf_path.empty() && !c.quality_path.empty();
        if (!c.real_snapshot) {
            const testsupport::SnapshotFiles files =
                testsupport::make_snapshot(snapshot_options());
            c.perf_path = dir + "/perf.csv";
            c.quality_path = dir + "/quality.csv";
            write_file(c.perf_path, files.perf_csv);
            write_file(c.quality_path, files.quality_csv);
        }

        const PerfParseResult perf =
            parse_perf_table(read_file(c.perf_path), ColumnMapping::load(c.perf_map_path));
        const QualityParseResult quality = parse_quality_table(
            read_file(c.quality_path), ColumnMapping::load(c.quality_map_path));
        c.perf_rows = perf.records.size();
        c.quality_rows = quality.records.size();
        const std::vector<MergedRecord> merged =
            merge_benchmarks(perf.records, quality.records);
        c.merged_rows = merged.size();
        c.records = clean_records(merged).first;
        c.dataset_text = dataset_to_text(c.records);
        return c;
    }();
    return ctx;
}

struct SweepCache {
    SweepResult sweep;
    bool ready = false;
};

SweepCache& sweep_cache() {
    static SweepCache cache;
    if (!cache.ready) {
        TrainParams params;
        cache.sweep = evaluate_sweep(data_context().records, params, 10, 1, 0.8);
        cache.ready = true;
    }
    return cache;
}

ModelBundle& trained_bundle() {
    static ModelBundle bundle = [] {
        BundleTrainOptions options;
        options.seed = 1;
        return train_bundle(data_context().records, options,
                            fnv1a64_hex(data_context().dataset_text));
    }();
    return bundle;
}

// ---------------------------------------------------------------------- 1
void criterion_metric_replication(Checker& check) {
    const double a = smape(349.96, 425.60);
    const double b = smape(602.27, 707.20);
    check.require(std::abs(a - 19.51) <= 0.01,
                  "smape(349.96, 425.60) = " + format_g17(a) + ", want 19.51 +- 0.01");
    check.require(std::abs(b - 16.02) <= 0.05,
                  "smape(602.27, 707.20) = " + format_g17(b) + ", want 16.02 +- 0.05");
    check.require(std::abs((a + b) / 2.0 - 17.76) <= 0.05,
                  "mean error = " + format_g17((a + b) / 2.0) + ", want 17.76 +- 0.05");
}

// ---------------------------------------------------------------------- 2
void criterion_snapshot_merge(Checker& check) {
    const DataContext& ctx = data_context();
    if (ctx.real_snapshot && ctx.perf_rows == 3173 && ctx.quality_rows == 2045) {
        check.require(ctx.merged_rows == 3042,
                      "merged rows = " + std::to_string(ctx.merged_rows) + ", want 3042");
        check.note("reference-era snapshots detected; exact counts verified");
    } else {
        check.note(ctx.real_snapshot ? "real snapshot (not reference-era); structural checks only"
                                     : "no real snapshot; structural checks on synthetic data");
    }

    const PerfParseResult perf =
        parse_perf_table(read_file(ctx.perf_path), ColumnMapping::load(ctx.perf_map_path));
    const QualityParseResult quality = parse_quality_table(
        read_file(ctx.quality_path), ColumnMapping::load(ctx.quality_map_path));
    const std::vector<MergedRecord> merged = merge_benchmarks(perf.records, quality.records);

    check.require(merged.size() <= perf.records.size(), "|merged| must not exceed |perf|");
    for (const auto& m : merged) {
        if (canonical_key(m.perf.model_name, m.perf.precision) != m.key ||
            canonical_key(m.quality.model_name, m.quality.precision) != m.key) {
            check.require(false, "join soundness violated for key " + m.key.canonical_name);
            break;
        }
    }

    // join completeness by brute-force nested loop on a bounded sample
    std::vector<ModelKey> quality_keys;
    quality_keys.reserve(quality.records.size());
    for (const auto& q : quality.records) {
        quality_keys.push_back(canonical_key(q.model_name, q.precision));
    }
    const std::size_t sample = std::min<std::size_t>(perf.records.size(), 400);
    std::size_t expected = 0;
    for (std::size_t i = 0; i < sample; ++i) {
        const ModelKey key =
            canonical_key(perf.records[i].model_name, perf.records[i].precision);
        for (const auto& qk : quality_keys) {
            if (qk == key) {
                ++expected;
                break;
            }
        }
    }
    const std::vector<PerfRecord> head(perf.records.begin(),
                                       perf.records.begin() + static_cast<std::ptrdiff_t>(sample));
    const std::size_t got = merge_benchmarks(head, quality.records).size();
    check.require(got == expected, "join completeness: merge gave " + std::to_string(got) +
                                       ", brute force expects " + std::to_string(expected));
}

// ---------------------------------------------------------------------- 3
void criterion_selection_bands(Checker& check) {
    const SweepResult& sweep = sweep_cache().sweep;
    const DataContext& ctx = data_context();
    check.note(ctx.real_snapshot ? "evaluated on the real merged snapshot"
                                 : "evaluated on the synthetic snapshot fallback");

    for (PhaseKind phase : {PhaseKind::Prefill, PhaseKind::Decode}) {
        const RegressorKind interp_winner =
            sweep.selected.at(CellKey{phase, RegimeKind::Interpolation});
        const RegressorKind extrap_winner =
            sweep.selected.at(CellKey{phase, RegimeKind::Extrapolation});
        check.require(interp_winner == RegressorKind::GradientBoostedTrees,
                      std::string(to_string(phase)) + " interpolation winner is " +
                          std::string(to_string(interp_winner)) +
                          ", want gradient_boosted_trees");
        check.require(extrap_winner == RegressorKind::Ridge,
                      std::string(to_string(phase)) + " extrapolation winner is " +
                          std::string(to_string(extrap_winner)) + ", want ridge");

        double interp_mape = 0.0;
        for (const auto& entry : sweep.entries) {
            if (!entry.ok) {
                continue;
            }
            if (entry.phase == phase && entry.regime == RegimeKind::Interpolation &&
                entry.kind == interp_winner) {
                interp_mape = entry.report.mape_mean;
                check.require(entry.report.mape_mean >= 3.0 && entry.report.mape_mean <= 15.0,
                              std::string(to_string(phase)) + " interpolation MAPE " +
                                  format_g17(entry.report.mape_mean) + "% outside [3%, 15%]");
                check.require(entry.report.r2 >= 0.98,
                              std::string(to_string(phase)) + " interpolation R2 " +
                                  format_g17(entry.report.r2) + " below 0.98");
                check.note(std::string(to_string(phase)) + " interpolation: MAPE " +
                           format_g17(entry.report.mape_mean) + "% +- " +
                           format_g17(entry.report.mape_std) + "%, R2 " +
                           format_g17(entry.report.r2));
            }
        }
        for (const auto& entry : sweep.entries) {
            if (!entry.ok) {
                continue;
            }
            if (entry.phase == phase && entry.regime == RegimeKind::Extrapolation &&
                entry.kind == extrap_winner) {
                check.require(entry.report.mape_mean > interp_mape,
                              std::string(to_string(phase)) + " extrapolation MAPE " +
                                  format_g17(entry.report.mape_mean) +
                                  "% does not exceed interpolation MAPE " +
                                  format_g17(interp_mape) + "%");
                check.note(std::string(to_string(phase)) + " extrapolation: MAPE " +
                           format_g17(entry.report.mape_mean) + "%, R2 " +
                           format_g17(entry.report.r2));
            }
        }
    }
}

// ---------------------------------------------------------------------- 4
void criterion_synthetic_oracle(Checker& check) {
    testsupport::SynthOptions options; // the frozen linear oracle: 2% noise
    options.n_interpolation = 2000;
    options.n_extrapolation = 300;
    options.seed = 7;
    const testsupport::SynthData data = testsupport::make_synthetic(options);

    TrainParams params;
    for (PhaseKind phase : {PhaseKind::Prefill, PhaseKind::Decode}) {
        const EvalReport cv = cross_validate(data.interpolation, phase,
                                             RegressorKind::GradientBoostedTrees, params, 10, 3);
        check.require(cv.mape_mean <= 10.0,
                      std::string(to_string(phase)) + " GBDT 10-fold MAPE " +
                          format_g17(cv.mape_mean) + "% exceeds 10%");

        const FittedPipeline ridge = fit_pipeline(data.interpolation, phase,
                                                  RegressorKind::Ridge, params);
        const FittedPipeline gbdt = fit_pipeline(data.interpolation, phase,
                                                 RegressorKind::GradientBoostedTrees, params);
        std::vector<double> y;
        std::vector<double> ridge_pred;
        std::vector<double> gbdt_pred;
        for (const auto& r : data.extrapolation) {
            y.push_back(extract_features(r, phase).target_j_per_token);
            ridge_pred.push_back(ridge.predict_record(r));
            gbdt_pred.push_back(gbdt.predict_record(r));
        }
        const double ridge_mape = mape(y, ridge_pred);
        const double gbdt_mape = mape(y, gbdt_pred);
        check.require(ridge_mape <= 5.0, std::string(to_string(phase)) +
                                             " ridge extrapolation MAPE " +
                                             format_g17(ridge_mape) + "% exceeds 5%");
        check.require(ridge_mape < gbdt_mape,
                      std::string(to_string(phase)) + " ridge extrapolation MAPE " +
                          format_g17(ridge_mape) + "% not strictly below GBDT's " +
                          format_g17(gbdt_mape) + "%");
        check.note(std::string(to_string(phase)) + ": GBDT cv " + format_g17(cv.mape_mean) +
                   "%, ridge extrap " + format_g17(ridge_mape) + "%, gbdt extrap " +
                   format_g17(gbdt_mape) + "%");
    }
}

// ---------------------------------------------------------------------- 5
void criterion_micro_oracles(Checker& check) {
    {
        const Matrix x = {{0.0}, {1.0}};
        const std::vector<double> y = {0.0, 10.0};
        GbdtParams p;
        p.n_trees = 1;
        p.max_depth = 1;
        p.learning_rate = 1.0;
        p.min_samples_leaf = 1;
        p.l2_leaf_penalty = 0.0;
        const GbdtModel plain = train_gbdt(x, y, p);
        check.require(std::abs(predict_gbdt(plain, x[0]) - 0.0) <= 1e-9 &&
                          std::abs(predict_gbdt(plain, x[1]) - 10.0) <= 1e-9,
                      "GBDT stump with lambda 0 must hit [0, 10]");
        p.l2_leaf_penalty = 1.0;
        const GbdtModel damped = train_gbdt(x, y, p);
        check.require(std::abs(predict_gbdt(damped, x[0]) - 2.5) <= 1e-9 &&
                          std::abs(predict_gbdt(damped, x[1]) - 7.5) <= 1e-9,
                      "GBDT stump with lambda 1 must hit [2.5, 7.5]");
    }
    {
        RidgeParams p;
        p.alpha = 1.0;
        const RidgeModel m = train_ridge({{1.0}, {2.0}}, {1.0, 2.0}, p);
        const std::vector<double> probe = {3.0};
        check.require(std::abs(m.weights[0] - 1.0 / 3.0) <= 1e-9 &&
                          std::abs(m.intercept - 1.0) <= 1e-9 &&
                          std::abs(predict_ridge(m, probe) - 2.0) <= 1e-9,
                      "ridge closed form must give weight 1/3, intercept 1, f(3) = 2");
    }

    std::size_t monotone_failures = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        SplitMix64 rng(seed * 2654435761ull);
        const std::size_t n = 4 + rng.bounded(16);
        Matrix x(n, std::vector<double>(2));
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i][0] = rng.uniform01() * 10.0;
            x[i][1] = rng.uniform01() * 10.0;
            y[i] = rng.uniform01() * 8.0 - 4.0;
        }
        GbdtParams p;
        p.n_trees = 10;
        p.max_depth = 3;
        p.min_samples_leaf = 1;
        p.learning_rate = 0.05 + 0.95 * rng.uniform01();
        p.l2_leaf_penalty = 2.0 * rng.uniform01();
        const GbdtModel model = train_gbdt(x, y, p);

        std::vector<double> pred(n, model.base_score);
        double prev = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            prev += (pred[i] - y[i]) * (pred[i] - y[i]);
        }
        for (const auto& tree : model.trees) {
            double cur = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                pred[i] += model.learning_rate * tree.leaf_weight(x[i]);
                cur += (pred[i] - y[i]) * (pred[i] - y[i]);
            }
            if (cur > prev + 1e-12) {
                ++monotone_failures;
                break;
            }
            prev = cur;
        }

        std::vector<double> shrink_y(n);
        for (auto& v : shrink_y) {
            v = rng.uniform01() * 6.0;
        }
        double prev_norm = std::numeric_limits<double>::infinity();
        for (double alpha : {0.01, 0.1, 1.0, 10.0, 100.0}) {
            RidgeParams rp;
            rp.alpha = alpha;
            const RidgeModel rm = train_ridge(x, shrink_y, rp);
            double norm = 0.0;
            for (double w : rm.weights) {
                norm += w * w;
            }
            if (std::sqrt(norm) > prev_norm + 1e-12) {
                ++monotone_failures;
                break;
            }
            prev_norm = std::sqrt(norm);
        }
    }
    check.require(monotone_failures == 0,
                  std::to_string(monotone_failures) +
                      " of 100 random datasets broke a monotonicity property");
}

// ---------------------------------------------------------------------- 6
void criterion_external_validation(Checker& check) {
    const ModelBundle& bundle = trained_bundle();

    // Documented llama-2 query mapping (the published study pins only the
    // token counts; the rest follows the worked latency example and the
    // bundle's own vocabulary):
    //   tokens: 38 in / 64 out; latencies from ttft 0.5 s of a 2.1 s request
    //   (7B) and ttft 0.65 s of a 2.9 s request (13B); gpu: first vocabulary
    //   label; quality scores: bbh 35 / mmlu_pro 20 (7B), bbh 40 / 24 (13B).
    struct ReferenceRow {
        const char* llm;
        double size_b;
        double empirical_j;
        double published_estimate_j;
        double ttft_s;
        double total_s;
        double bbh;
        double mmlu_pro;
    };
    const ReferenceRow rows[] = {
        {"llama-2-7B", 7.0, 349.96, 425.60, 0.50, 2.1, 35.0, 20.0},
        {"llama-2-13B", 13.0, 602.27, 707.20, 0.65, 2.9, 40.0, 24.0},
    };

    json report = json::array();
    std::vector<double> errors;
    for (const ReferenceRow& row : rows) {
        EstimateQuery q;
        q.model_size_b = row.size_b;
        q.input_tokens = 38;
        q.output_tokens = 64;
        const auto [prefill, decode] = derive_latencies(row.ttft_s, row.total_s, 38, 64);
        q.prefill_latency_s_per_input_token = prefill;
        q.decode_latency_s_per_output_token = decode;
        q.gpu = bundle.vocabulary.labels().front();
        q.bbh = row.bbh;
        q.mmlu_pro = row.mmlu_pro;

        const EnergyEstimate estimate = estimate_energy(bundle, q);
        const double error_pct = smape(row.empirical_j, estimate.total_j);
        errors.push_back(error_pct);
        report.push_back(json{
            {"llm", row.llm},
            {"active_params_b", row.size_b},
            {"energy_empirical_j", row.empirical_j},
            {"energy_estimated_j", estimate.total_j},
            {"error_pct", error_pct},
        });

        const double band = 0.5 * row.published_estimate_j;
        const bool in_band = std::abs(estimate.total_j - row.published_estimate_j) <= band;
        check.note(std::string(row.llm) + ": estimated " + format_g17(estimate.total_j) +
                   " J vs published estimate " + format_g17(row.published_estimate_j) + " J -> " +
                   (in_band ? "within" : "OUTSIDE") + " +-50% (flag only, never fails)");
    }

    // report arithmetic must be exact: the error column equals the sMAPE of
    // the energy columns
    for (const auto& r : report) {
        const double recomputed = smape(r.at("energy_empirical_j").get<double>(),
                                        r.at("energy_estimated_j").get<double>());
        check.require(recomputed == r.at("error_pct").get<double>(),
                      "report error column does not reproduce from its own energy columns");
    }

    const std::string path = testsupport::make_temp_dir("external") + "/external_validation_report.json";
    write_file(path, json{{"rows", report},
                          {"mean_error_pct",
                           std::accumulate(errors.begin(), errors.end(), 0.0) /
                               static_cast<double>(errors.size())}}
                         .dump(1) +
                         "\n");
    check.note("external validation report written to " + path);
}

// ---------------------------------------------------------------------- 7
void criterion_determinism(Checker& check) {
    const DataContext& ctx = data_context();
    const std::string cli = testsupport::cli_path();

    std::string bundles[2];
    for (int run = 0; run < 2; ++run) {
        const std::string dir = testsupport::make_temp_dir("determinism");
        const std::string dataset = dir + "/dataset.json";
        const std::string bundle = dir + "/bundle.json";
        const auto ingest = testsupport::run_command(
            cli + " ingest --perf " + ctx.perf_path + " --quality " + ctx.quality_path +
            " --perf-map " + ctx.perf_map_path + " --quality-map " + ctx.quality_map_path +
            " --out " + dataset + " >/dev/null 2>&1");
        check.require(ingest.exit_code == 0, "cmd_ingest failed on run " + std::to_string(run));
        const auto train = testsupport::run_command(cli + " train --dataset " + dataset +
                                                    " --out " + bundle +
                                                    " --seed 7 --gbdt-trees 60 >/dev/null 2>&1");
        check.require(train.exit_code == 0, "cmd_train failed on run " + std::to_string(run));
        bundles[run] = read_file(bundle);
        std::filesystem::remove_all(dir);
    }
    check.require(!bundles[0].empty() && bundles[0] == bundles[1],
                  "two seeded ingest->train runs must produce byte-identical bundles");

    // save/load round trip preserves predictions exactly
    const ModelBundle& bundle = trained_bundle();
    const std::string dir = testsupport::make_temp_dir("roundtrip");
    save_bundle(bundle, dir + "/b.json");
    const ModelBundle loaded = load_bundle(dir + "/b.json");
    SplitMix64 rng(99);
    bool all_equal = true;
    for (int i = 0; i < 100; ++i) {
        EstimateQuery q;
        q.model_size_b = 0.5 + rng.uniform01() * 400.0;
        q.input_tokens = 1 + static_cast<std::int64_t>(rng.bounded(4096));
        q.output_tokens = 1 + static_cast<std::int64_t>(rng.bounded(2048));
        q.prefill_latency_s_per_input_token = rng.uniform01() * 0.05;
        q.decode_latency_s_per_output_token = rng.uniform01() * 0.1;
        q.gpu = i % 5 == 0 ? "never-seen"
                           : bundle.vocabulary.labels()[rng.bounded(bundle.vocabulary.size())];
        q.bbh = rng.uniform01() * 100.0;
        q.mmlu_pro = rng.uniform01() * 100.0;
        const EnergyEstimate a = estimate_energy(bundle, q);
        const EnergyEstimate b = estimate_energy(loaded, q);
        all_equal = all_equal && a.prefill_j == b.prefill_j && a.decode_j == b.decode_j &&
                    a.total_j == b.total_j && a.regime == b.regime;
    }
    check.require(all_equal, "loaded bundle must reproduce all 100 random predictions exactly");
    std::filesystem::remove_all(dir);
}

// ---------------------------------------------------------------------- 8
void criterion_carbon(Checker& check) {
    IntensityTable table;
    table.gco2e_per_kwh["r"] = 500.0;
    EnergyEstimate kwh;
    kwh.total_j = 3'600'000.0;
    check.require(energy_to_carbon(kwh, "r", table).grams_co2e == 500.0,
                  "1 kWh at 500 g/kWh must be exactly 500 g");

    SplitMix64 rng(4);
    bool linear = true;
    for (int i = 0; i < 50; ++i) {
        EnergyEstimate e;
        e.total_j = rng.uniform01() * 1e7;
        const double intensity = 1.0 + rng.uniform01() * 999.0;
        const double scale = 0.1 + rng.uniform01() * 9.9;
        table.gco2e_per_kwh["r"] = intensity;
        const double base = energy_to_carbon(e, "r", table).grams_co2e;

        EnergyEstimate scaled_e = e;
        scaled_e.total_j *= scale;
        const double in_energy = energy_to_carbon(scaled_e, "r", table).grams_co2e;
        table.gco2e_per_kwh["r"] = intensity * scale;
        const double in_intensity = energy_to_carbon(e, "r", table).grams_co2e;
        linear = linear && std::abs(in_energy - base * scale) <= 1e-12 * std::abs(base * scale);
        linear = linear &&
                 std::abs(in_intensity - base * scale) <= 1e-12 * std::abs(base * scale);
    }
    check.require(linear, "carbon conversion must be linear in energy and intensity");
}

// ---------------------------------------------------------------------- 9
void criterion_parity(Checker& check) {
    const ModelBundle& bundle = trained_bundle();
    const std::string dir = testsupport::make_temp_dir("parity");
    const std::string bundle_path = dir + "/bundle.json";
    save_bundle(bundle, bundle_path);
    const std::string intensities = testsupport::source_dir() + "/config/intensities.csv";

    const int port = 18000 + static_cast<int>(getpid() % 4000);
    const pid_t pid = testsupport::spawn_process({testsupport::cli_path(), "serve", "--bundle",
                                                  bundle_path, "--port", std::to_string(port),
                                                  "--intensities", intensities});
    httplib::Client client("127.0.0.1", port);
    bool up = false;
    for (int i = 0; i < 100 && !up; ++i) {
        if (auto res = client.Get("/v1/health")) {
            up = res->status == 200;
        }
        if (!up) {
            usleep(100 * 1000);
        }
    }
    check.require(up, "service did not come up on port " + std::to_string(port));

    if (up) {
        const auto models = client.Get("/v1/models");
        check.require(models && models->status == 200 &&
                          json::parse(models->body).at("models").size() == 4,
                      "GET /v1/models must describe the four slots");

        const auto malformed = client.Post("/v1/estimate", "{\"bbh\": 9000}",
                                           "application/json");
        bool field_level = false;
        std::string detail = "no response";
        if (malformed) {
            detail = "status " + std::to_string(malformed->status) + " body " +
                     malformed->body.substr(0, 200);
            if (malformed->status == 400) {
                const json parsed = json::parse(malformed->body);
                for (const auto& e : parsed.at("errors")) {
                    field_level = field_level || e.at("field") == "bbh";
                }
            }
        } else {
            detail = "transport error " + std::to_string(static_cast<int>(malformed.error()));
        }
        check.require(field_level,
                      "malformed body must yield 400 with field-level messages (" + detail +
                          ")");

        const auto busy = testsupport::run_command(
            testsupport::cli_path() + " serve --bundle " + bundle_path + " --port " +
            std::to_string(port) + " >/dev/null 2>&1");
        check.require(busy.exit_code == 3,
                      "second bind of a busy port must exit 3, got " +
                          std::to_string(busy.exit_code));
    }

    SplitMix64 rng(2718);
    for (int i = 0; i < 20 && up; ++i) {
        EstimateQuery q;
        q.model_size_b = 0.5 + rng.uniform01() * 300.0;
        q.input_tokens = 1 + static_cast<std::int64_t>(rng.bounded(2000));
        q.output_tokens = 1 + static_cast<std::int64_t>(rng.bounded(1000));
        q.prefill_latency_s_per_input_token = rng.uniform01() * 0.05;
        q.decode_latency_s_per_output_token = rng.uniform01() * 0.1;
        q.gpu = bundle.vocabulary.labels()[rng.bounded(bundle.vocabulary.size())];
        q.bbh = rng.uniform01() * 100.0;
        q.mmlu_pro = rng.uniform01() * 100.0;
        const bool with_region = i % 2 == 0;

        std::string cmd = testsupport::cli_path() + " estimate --bundle " + bundle_path +
                          " --model-size-b " + format_g17(q.model_size_b) + " --input-tokens " +
                          std::to_string(q.input_tokens) + " --output-tokens " +
                          std::to_string(q.output_tokens) + " --lat-prefill-s " +
                          format_g17(q.prefill_latency_s_per_input_token) + " --lat-decode-s " +
                          format_g17(q.decode_latency_s_per_output_token) + " --gpu '" + q.gpu +
                          "' --bbh " + format_g17(q.bbh) + " --mmlu-pro " +
                          format_g17(q.mmlu_pro);
        json body{{"model_size_b", q.model_size_b},
                  {"input_tokens", q.input_tokens},
                  {"output_tokens", q.output_tokens},
                  {"prefill_latency_s_per_input_token", q.prefill_latency_s_per_input_token},
                  {"decode_latency_s_per_output_token", q.decode_latency_s_per_output_token},
                  {"gpu", q.gpu},
                  {"bbh", q.bbh},
                  {"mmlu_pro", q.mmlu_pro}};
        if (with_region) {
            cmd += " --region eu-west --intensities " + intensities;
            body["region"] = "eu-west";
        }

        const auto cli_result = testsupport::run_command(cmd + " 2>/dev/null");
        const auto http_result = client.Post("/v1/estimate", body.dump(), "application/json");
        if (cli_result.exit_code != 0 || !http_result || http_result->status != 200) {
            check.require(false, "request " + std::to_string(i) + " failed (cli exit " +
                                     std::to_string(cli_result.exit_code) + ")");
            continue;
        }
        // numeric parity must be exact, so compare the serialized bytes too
        check.require(cli_result.stdout_text == http_result->body,
                      "request " + std::to_string(i) +
                          ": CLI and service responses differ");
    }
    testsupport::stop_process(pid);
    std::filesystem::remove_all(dir);
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Checker&)> run;
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc == 3 && std::string(argv[1]) == "--criterion") {
        only = std::atoi(argv[2]);
    }

    const std::vector<Criterion> criteria = {
        {1, "published error-metric replication", criterion_metric_replication},
        {2, "snapshot merge counts and join invariants", criterion_snapshot_merge},
        {3, "model-selection winners and accuracy bands", criterion_selection_bands},
        {4, "synthetic oracle bands", criterion_synthetic_oracle},
        {5, "regressor micro-oracles and monotonicity", criterion_micro_oracles},
        {6, "external validation harness", criterion_external_validation},
        {7, "end-to-end determinism and round trip", criterion_determinism},
        {8, "carbon conversion", criterion_carbon},
        {9, "CLI/service parity", criterion_parity},
    };

    bool all_ok = true;
    for (const auto& criterion : criteria) {
        if (only != 0 && criterion.id != only) {
            continue;
        }
        Checker check;
        try {
            criterion.run(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("unexpected exception: ") + e.what());
        }
        std::printf("[%s] criterion %d: %s\n", check.ok ? "PASS" : "FAIL", criterion.id,
                    criterion.name);
        for (const auto& note : check.notes) {
            std::printf("         note: %s\n", note.c_str());
        }
        for (const auto& failure : check.failures) {
            std::printf("         !!!   %s\n", failure.c_str());
        }
        all_ok = all_ok && check.ok;
    }
    return all_ok ? 0 : 1;
}
