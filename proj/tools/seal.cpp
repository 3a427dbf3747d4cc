#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "seal/api.hpp"
#include "seal/error.hpp"
#include "seal/estimator.hpp"
#include "seal/evaluation.hpp"
#include "seal/ingest.hpp"
#include "seal/training.hpp"
#include "seal/util.hpp"
#include "serve.hpp"

using namespace seal;
using nlohmann::json;

namespace {

struct IngestOptions {
    std::string perf_path;
    std::string quality_path;
    std::string perf_map_path;
    std::string quality_map_path;
    std::string out_path;
};

struct TrainOptions {
    std::string dataset_path;
    std::string out_path;
    std::uint64_t seed = 0;
    bool select = false;
    int k = 10;
    double size_quantile = 0.8;
    std::string created_at;
    TrainParams params;
    double ridge_alpha = -1.0; // < 0 means "select by inner CV"
};

struct EvaluateOptions {
    std::string dataset_path;
    std::string report_path;
    std::uint64_t seed = 0;
    int k = 10;
    double size_quantile = 0.8;
    TrainParams params;
    double ridge_alpha = -1.0;
};

struct EstimateOptions {
    std::string bundle_path;
    EstimateQuery query;
    double ttft_s = -1.0;
    double total_latency_s = -1.0;
    double lat_prefill_s = -1.0;
    double lat_decode_s = -1.0;
    std::string region;
    std::string intensities_path;
};

struct ServeOptions {
    std::string bundle_path;
    std::string intensities_path;
    std::string host = "127.0.0.1";
    int port = 8080;
};

void add_param_flags(CLI::App* cmd, TrainParams& params, double& ridge_alpha) {
    cmd->add_option("--gbdt-trees", params.gbdt.n_trees, "Boosting iterations");
    cmd->add_option("--gbdt-learning-rate", params.gbdt.learning_rate, "Shrinkage in (0,1]");
    cmd->add_option("--gbdt-max-depth", params.gbdt.max_depth, "Max tree depth");
    cmd->add_option("--gbdt-min-leaf", params.gbdt.min_samples_leaf, "Min samples per leaf");
    cmd->add_option("--gbdt-lambda", params.gbdt.l2_leaf_penalty, "L2 leaf penalty");
    cmd->add_option("--ridge-alpha", ridge_alpha,
                    "Fixed ridge alpha (otherwise selected by inner 5-fold CV)");
    cmd->add_option("--ridge-alpha-grid", params.ridge.alpha_grid,
                    "Comma-separated alpha candidates")
        ->delimiter(',');
    cmd->add_option("--knn-k", params.knn.k, "Neighbors for the KNN baseline");
}

void apply_ridge_alpha(TrainParams& params, double ridge_alpha) {
    if (ridge_alpha >= 0.0) {
        params.ridge.alpha = ridge_alpha;
    }
}

// Default bundle stamp: SOURCE_DATE_EPOCH when set (the reproducible-build
// convention), otherwise empty so repeated runs stay byte-identical.
std::string default_created_at() {
    const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
    if (epoch == nullptr || *epoch == '\0') {
        return "";
    }
    char* end = nullptr;
    const long long seconds = std::strtoll(epoch, &end, 10);
    if (end == nullptr || *end != '\0') {
        return "";
    }
    std::time_t t = static_cast<std::time_t>(seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int run_ingest(const IngestOptions& opt) {
    const std::string perf_text = read_file(opt.perf_path);
    const std::string quality_text = read_file(opt.quality_path);
    const ColumnMapping perf_map = ColumnMapping::load(opt.perf_map_path);
    const ColumnMapping quality_map = ColumnMapping::load(opt.quality_map_path);

    const PerfParseResult perf = parse_perf_table(perf_text, perf_map);
    const QualityParseResult quality = parse_quality_table(quality_text, quality_map);
    for (const auto& r : perf.rejected) {
        std::cerr << "seal ingest: perf row " << r.row_index << " rejected: " << r.reason
                  << "\n";
    }
    for (const auto& r : quality.rejected) {
        std::cerr << "seal ingest: quality row " << r.row_index << " rejected: " << r.reason
                  << "\n";
    }

    MergeStats stats;
    const std::vector<MergedRecord> merged =
        merge_benchmarks(perf.records, quality.records, &stats);
    auto [records, report] = clean_records(merged);
    write_dataset(opt.out_path, records);

    json unmatched = json::array();
    for (const auto& key : stats.unmatched_keys) {
        unmatched.push_back(key.canonical_name + "/" + key.canonical_precision);
    }
    json out{
        {"perf_rows", perf.records.size()},
        {"perf_rejected", perf.rejected.size()},
        {"quality_rows", quality.records.size()},
        {"quality_rejected", quality.rejected.size()},
        {"merged_rows", merged.size()},
        {"perf_rows_unmatched", stats.perf_rows_unmatched},
        {"unmatched_keys", std::move(unmatched)},
        {"clean",
         {{"rows_in", report.rows_in},
          {"rows_dropped_missing", report.rows_dropped_missing},
          {"rows_dropped_duplicate", report.rows_dropped_duplicate},
          {"rows_out", report.rows_out}}},
        {"out", opt.out_path},
    };
    std::cout << out.dump(1) << "\n";
    std::cerr << "seal ingest: " << perf.records.size() << " perf rows x "
              << quality.records.size() << " quality rows -> " << merged.size()
              << " merged, " << report.rows_out << " after cleaning ("
              << stats.perf_rows_unmatched << " perf rows had no quality key)\n";
    return 0;
}

int run_train(TrainOptions opt) {
    apply_ridge_alpha(opt.params, opt.ridge_alpha);
    const std::string dataset_text = read_file(opt.dataset_path);
    const std::vector<MergedRecord> records = dataset_from_text(dataset_text);

    BundleTrainOptions options;
    options.params = opt.params;
    options.seed = opt.seed;
    options.select_by_cv = opt.select;
    options.cv_k = opt.k;
    options.size_quantile = opt.size_quantile;
    options.created_at = opt.created_at.empty() ? default_created_at() : opt.created_at;

    const ModelBundle bundle = train_bundle(records, options, fnv1a64_hex(dataset_text));
    save_bundle(bundle, opt.out_path);

    json models = json::array();
    for (const auto& slot : bundle.slots) {
        models.push_back(json{{"phase", std::string(to_string(slot.phase))},
                              {"regime", std::string(to_string(slot.regime))},
                              {"kind", std::string(to_string(slot.model.kind()))}});
    }
    json out{
        {"bundle", opt.out_path},
        {"threshold_b", bundle.interpolation_threshold_b},
        {"record_count", bundle.metadata.record_count},
        {"dataset_hash", bundle.metadata.dataset_hash},
        {"models", std::move(models)},
    };
    std::cout << out.dump(1) << "\n";
    std::cerr << "seal train: " << records.size() << " records -> " << opt.out_path
              << " (interpolation threshold " << bundle.interpolation_threshold_b << "B)\n";
    return 0;
}

int run_evaluate(EvaluateOptions opt) {
    apply_ridge_alpha(opt.params, opt.ridge_alpha);
    const std::string dataset_text = read_file(opt.dataset_path);
    const std::vector<MergedRecord> records = dataset_from_text(dataset_text);

    const SweepResult sweep =
        evaluate_sweep(records, opt.params, opt.k, opt.seed, opt.size_quantile);
    ReportProvenance provenance;
    provenance.dataset_hash = fnv1a64_hex(dataset_text);
    provenance.record_count = records.size();
    provenance.seed = opt.seed;
    provenance.k = opt.k;
    provenance.size_quantile = opt.size_quantile;

    const std::string report = sweep_report_to_text(sweep, provenance, opt.params);
    if (!opt.report_path.empty()) {
        write_file(opt.report_path, report);
        std::cerr << "seal evaluate: report written to " << opt.report_path << "\n";
    }
    std::cout << report;
    return 0;
}

int run_estimate(EstimateOptions opt) {
    const ModelBundle bundle = load_bundle(opt.bundle_path);

    const bool direct = opt.lat_prefill_s >= 0.0 || opt.lat_decode_s >= 0.0;
    const bool derived = opt.ttft_s >= 0.0 || opt.total_latency_s >= 0.0;
    if (direct && derived) {
        throw UsageError("give either --lat-prefill-s/--lat-decode-s or "
                         "--ttft-s/--total-latency-s, not both");
    }
    if (derived) {
        if (opt.ttft_s < 0.0 || opt.total_latency_s < 0.0) {
            throw UsageError("--ttft-s and --total-latency-s must be given together");
        }
        auto [prefill, decode] = derive_latencies(opt.ttft_s, opt.total_latency_s,
                                                  opt.query.input_tokens,
                                                  opt.query.output_tokens);
        opt.query.prefill_latency_s_per_input_token = prefill;
        opt.query.decode_latency_s_per_output_token = decode;
    } else {
        if (opt.lat_prefill_s < 0.0 || opt.lat_decode_s < 0.0) {
            throw UsageError("--lat-prefill-s and --lat-decode-s must be given together");
        }
        opt.query.prefill_latency_s_per_input_token = opt.lat_prefill_s;
        opt.query.decode_latency_s_per_output_token = opt.lat_decode_s;
    }

    std::optional<IntensityTable> table;
    if (!opt.region.empty()) {
        if (opt.intensities_path.empty()) {
            throw UsageError("--region needs --intensities");
        }
        table = IntensityTable::load(opt.intensities_path);
        opt.query.region = opt.region;
    }

    std::cout << estimate_response_text(bundle, opt.query,
                                        table.has_value() ? &*table : nullptr);
    return 0;
}

int run_serve(const ServeOptions& opt) {
    const ModelBundle bundle = load_bundle(opt.bundle_path);
    std::optional<IntensityTable> table;
    if (!opt.intensities_path.empty()) {
        table = IntensityTable::load(opt.intensities_path);
    }
    return serve_http(bundle, table, opt.host, opt.port);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prompt-level LLM inference energy and carbon estimation"};
    app.require_subcommand(1);

    IngestOptions ingest_opt;
    CLI::App* ingest = app.add_subcommand(
        "ingest", "Merge performance and quality leaderboard snapshots into a dataset");
    ingest->add_option("--perf", ingest_opt.perf_path, "Performance snapshot (CSV/TSV)")
        ->required();
    ingest->add_option("--quality", ingest_opt.quality_path, "Quality snapshot (CSV/TSV)")
        ->required();
    ingest->add_option("--perf-map", ingest_opt.perf_map_path, "Column mapping for --perf")
        ->required();
    ingest
        ->add_option("--quality-map", ingest_opt.quality_map_path,
                     "Column mapping for --quality")
        ->required();
    ingest->add_option("--out", ingest_opt.out_path, "Merged dataset output path")->required();

    TrainOptions train_opt;
    CLI::App* train = app.add_subcommand("train", "Train the four phase x regime models");
    train->add_option("--dataset", train_opt.dataset_path, "Merged dataset")->required();
    train->add_option("--out", train_opt.out_path, "Bundle output path")->required();
    train->add_option("--seed", train_opt.seed, "Training seed");
    train->add_flag("--select", train_opt.select,
                    "Pick per-cell regressors by cross-validation instead of the defaults");
    train->add_option("--k", train_opt.k, "Folds used by --select and the dataset minimum");
    train->add_option("--size-quantile", train_opt.size_quantile,
                      "Extrapolation split quantile used by --select");
    train->add_option("--created-at", train_opt.created_at, "Metadata timestamp");
    add_param_flags(train, train_opt.params, train_opt.ridge_alpha);

    EvaluateOptions eval_opt;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Cross-validate every regressor per phase and regime");
    evaluate->add_option("--dataset", eval_opt.dataset_path, "Merged dataset")->required();
    evaluate->add_option("--k", eval_opt.k, "Folds");
    evaluate->add_option("--seed", eval_opt.seed, "Fold seed");
    evaluate->add_option("--size-quantile", eval_opt.size_quantile,
                         "Extrapolation split quantile");
    evaluate->add_option("--report", eval_opt.report_path, "Also write the report here");
    add_param_flags(evaluate, eval_opt.params, eval_opt.ridge_alpha);

    EstimateOptions est_opt;
    CLI::App* estimate =
        app.add_subcommand("estimate", "Estimate per-prompt energy (and carbon)");
    estimate->add_option("--bundle", est_opt.bundle_path, "Trained bundle")->required();
    estimate->add_option("--model-size-b", est_opt.query.model_size_b, "Model size, billions")
        ->required();
    estimate->add_option("--input-tokens", est_opt.query.input_tokens, "Prompt tokens")
        ->required();
    estimate->add_option("--output-tokens", est_opt.query.output_tokens, "Completion tokens")
        ->required();
    estimate->add_option("--lat-prefill-s", est_opt.lat_prefill_s,
                         "Prefill latency, seconds per input token");
    estimate->add_option("--lat-decode-s", est_opt.lat_decode_s,
                         "Decode latency, seconds per output token");
    estimate->add_option("--ttft-s", est_opt.ttft_s, "Time to first token, seconds");
    estimate->add_option("--total-latency-s", est_opt.total_latency_s,
                         "Total request latency, seconds");
    estimate->add_option("--gpu", est_opt.query.gpu, "GPU label")->required();
    estimate->add_option("--bbh", est_opt.query.bbh, "BBH score [0,100]")->required();
    estimate->add_option("--mmlu-pro", est_opt.query.mmlu_pro, "MMLU-Pro score [0,100]")
        ->required();
    CLI::Option* region = estimate->add_option("--region", est_opt.region, "Region code");
    CLI::Option* intensities = estimate->add_option(
        "--intensities", est_opt.intensities_path, "Carbon intensity table");
    region->needs(intensities);

    ServeOptions serve_opt;
    CLI::App* serve = app.add_subcommand("serve", "Serve estimates over HTTP");
    serve->add_option("--bundle", serve_opt.bundle_path, "Trained bundle")->required();
    serve->add_option("--port", serve_opt.port, "TCP port")->required();
    serve->add_option("--host", serve_opt.host, "Bind address");
    serve->add_option("--intensities", serve_opt.intensities_path, "Carbon intensity table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(ingest)) {
            return run_ingest(ingest_opt);
        }
        if (app.got_subcommand(train)) {
            return run_train(train_opt);
        }
        if (app.got_subcommand(evaluate)) {
            return run_evaluate(eval_opt);
        }
        if (app.got_subcommand(estimate)) {
            return run_estimate(est_opt);
        }
        if (app.got_subcommand(serve)) {
            return run_serve(serve_opt);
        }
        std::cerr << "seal: no subcommand\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "seal: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "seal: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "seal: internal error: " << e.what() << "\n";
        return 3;
    }
}
