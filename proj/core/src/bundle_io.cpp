#include <cmath>

#include <nlohmann/json.hpp>

#include "seal/error.hpp"
#include "seal/estimator.hpp"
#include "seal/regressors.hpp"
#include "seal/util.hpp"

namespace seal {

namespace {

using nlohmann::json;

constexpr const char* kChecksumField = "checksum";

json tree_node_to_json(const GbdtTree& tree, int idx) {
    const GbdtNode& node = tree.nodes[static_cast<std::size_t>(idx)];
    if (node.is_leaf()) {
        return json{{"weight", format_g17(node.weight)}};
    }
    return json{
        {"feature", node.feature},
        {"threshold", format_g17(node.threshold)},
        {"left", tree_node_to_json(tree, node.left)},
        {"right", tree_node_to_json(tree, node.right)},
    };
}

int tree_node_from_json(const json& j, GbdtTree& tree) {
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(GbdtNode{});
    if (j.contains("weight")) {
        tree.nodes[static_cast<std::size_t>(idx)].weight =
            parse_double_strict(j.at("weight").get<std::string>());
        return idx;
    }
    const int feature = j.at("feature").get<int>();
    const double threshold = parse_double_strict(j.at("threshold").get<std::string>());
    if (feature < 0 || !std::isfinite(threshold)) {
        throw DataError("bundle: malformed tree node");
    }
    const int left = tree_node_from_json(j.at("left"), tree);
    const int right = tree_node_from_json(j.at("right"), tree);
    GbdtNode& node = tree.nodes[static_cast<std::size_t>(idx)];
    node.feature = feature;
    node.threshold = threshold;
    node.left = left;
    node.right = right;
    return idx;
}

json numbers_to_json(const std::vector<double>& values) {
    json arr = json::array();
    for (double v : values) {
        arr.push_back(format_g17(v));
    }
    return arr;
}

std::vector<double> numbers_from_json(const json& arr) {
    std::vector<double> values;
    values.reserve(arr.size());
    for (const auto& v : arr) {
        values.push_back(parse_double_strict(v.get<std::string>()));
    }
    return values;
}

json model_to_json(const TrainedRegressor& model) {
    json j;
    j["kind"] = std::string(to_string(model.kind()));
    switch (model.kind()) {
    case RegressorKind::GradientBoostedTrees: {
        const GbdtModel& m = model.gbdt();
        j["base_score"] = format_g17(m.base_score);
        j["learning_rate"] = format_g17(m.learning_rate);
        j["n_features"] = m.n_features;
        json trees = json::array();
        for (const auto& tree : m.trees) {
            trees.push_back(tree_node_to_json(tree, 0));
        }
        j["trees"] = std::move(trees);
        break;
    }
    case RegressorKind::Ridge:
    case RegressorKind::OrdinaryLeastSquares: {
        const RidgeModel& m = model.ridge();
        j["weights"] = numbers_to_json(m.weights);
        j["intercept"] = format_g17(m.intercept);
        j["alpha_used"] = format_g17(m.alpha_used);
        break;
    }
    case RegressorKind::KNearestNeighbors: {
        const KnnModel& m = model.knn();
        j["k"] = m.k;
        json rows = json::array();
        for (const auto& row : m.train_rows) {
            rows.push_back(numbers_to_json(row));
        }
        j["train_rows"] = std::move(rows);
        j["train_targets"] = numbers_to_json(m.train_targets);
        break;
    }
    }
    return j;
}

TrainedRegressor model_from_json(const json& j) {
    const RegressorKind kind = regressor_kind_from_string(j.at("kind").get<std::string>());
    switch (kind) {
    case RegressorKind::GradientBoostedTrees: {
        GbdtModel m;
        m.base_score = parse_double_strict(j.at("base_score").get<std::string>());
        m.learning_rate = parse_double_strict(j.at("learning_rate").get<std::string>());
        m.n_features = j.at("n_features").get<std::size_t>();
        for (const auto& t : j.at("trees")) {
            GbdtTree tree;
            tree_node_from_json(t, tree);
            m.trees.push_back(std::move(tree));
        }
        return {kind, std::move(m)};
    }
    case RegressorKind::Ridge:
    case RegressorKind::OrdinaryLeastSquares: {
        RidgeModel m;
        m.weights = numbers_from_json(j.at("weights"));
        m.intercept = parse_double_strict(j.at("intercept").get<std::string>());
        m.alpha_used = parse_double_strict(j.at("alpha_used").get<std::string>());
        return {kind, std::move(m)};
    }
    case RegressorKind::KNearestNeighbors: {
        KnnModel m;
        m.k = j.at("k").get<int>();
        for (const auto& row : j.at("train_rows")) {
            m.train_rows.push_back(numbers_from_json(row));
        }
        m.train_targets = numbers_from_json(j.at("train_targets"));
        return {kind, std::move(m)};
    }
    }
    throw DataError("bundle: unknown model kind");
}

json scaler_to_json(const ScalerStats& stats) {
    json constant = json::array();
    for (std::size_t c : stats.constant_columns) {
        constant.push_back(c);
    }
    return json{
        {"mean", numbers_to_json(stats.mean)},
        {"stddev", numbers_to_json(stats.stddev)},
        {"scaled", stats.scaled},
        {"constant_columns", std::move(constant)},
    };
}

ScalerStats scaler_from_json(const json& j) {
    ScalerStats stats;
    stats.mean = numbers_from_json(j.at("mean"));
    stats.stddev = numbers_from_json(j.at("stddev"));
    stats.scaled = j.at("scaled").get<std::vector<bool>>();
    stats.constant_columns = j.at("constant_columns").get<std::vector<std::size_t>>();
    if (stats.mean.size() != stats.stddev.size() || stats.mean.size() != stats.scaled.size()) {
        throw DataError("bundle: inconsistent scaler block");
    }
    return stats;
}

json slot_to_json(const TrainedModelSlot& slot) {
    return json{
        {"phase", std::string(to_string(slot.phase))},
        {"regime", std::string(to_string(slot.regime))},
        {"scaler", scaler_to_json(slot.scaler)},
        {"model", model_to_json(slot.model)},
    };
}

json bundle_to_json(const ModelBundle& bundle) {
    json feature_order = json::array();
    for (std::string_view name : kContinuousFeatureOrder) {
        feature_order.push_back(std::string(name));
    }
    feature_order.push_back("gpu");

    json models = json::array();
    for (const auto& slot : bundle.slots) {
        models.push_back(slot_to_json(slot));
    }

    return json{
        {"format_version", bundle.format_version},
        {"threshold_b", format_g17(bundle.interpolation_threshold_b)},
        {"schema",
         {{"feature_order", std::move(feature_order)},
          {"gpu_vocabulary", bundle.vocabulary.labels()}}},
        {"models", std::move(models)},
        {"metadata",
         {{"dataset_hash", bundle.metadata.dataset_hash},
          {"record_count", bundle.metadata.record_count},
          {"seed", bundle.metadata.seed},
          {"params", bundle.metadata.params},
          {"created_at", bundle.metadata.created_at}}},
    };
}

} // namespace

std::string to_json_text(const TrainedRegressor& model) {
    return model_to_json(model).dump(1) + "\n";
}

TrainedRegressor regressor_from_json_text(std::string_view text) {
    try {
        return model_from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw DataError(std::string("model: invalid document: ") + e.what());
    }
}

std::string bundle_to_text(const ModelBundle& bundle) {
    json doc = bundle_to_json(bundle);
    doc[kChecksumField] = fnv1a64_hex(doc.dump());
    return doc.dump(1) + "\n";
}

ModelBundle bundle_from_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("bundle: invalid document: ") + e.what());
    }
    try {
        if (!doc.contains("format_version") || !doc.at("format_version").is_number_integer()) {
            throw DataError("bundle: missing format_version");
        }
        const int version = doc.at("format_version").get<int>();
        if (version != ModelBundle::kFormatVersion) {
            throw DataError("bundle: unsupported format_version " + std::to_string(version));
        }

        if (!doc.contains(kChecksumField)) {
            throw DataError("bundle: missing checksum");
        }
        const std::string stored = doc.at(kChecksumField).get<std::string>();
        json canonical = doc;
        canonical.erase(kChecksumField);
        if (fnv1a64_hex(canonical.dump()) != stored) {
            throw DataError("bundle: checksum mismatch");
        }

        ModelBundle bundle;
        bundle.format_version = version;
        bundle.interpolation_threshold_b =
            parse_double_strict(doc.at("threshold_b").get<std::string>());
        if (!(bundle.interpolation_threshold_b > 0.0)) {
            throw DataError("bundle: threshold must be > 0");
        }
        bundle.vocabulary = GpuVocabulary::from_labels(
            doc.at("schema").at("gpu_vocabulary").get<std::vector<std::string>>());

        const json& models = doc.at("models");
        if (!models.is_array() || models.size() != 4) {
            throw DataError("bundle: expected exactly 4 model slots");
        }
        std::array<bool, 4> seen{};
        for (const auto& j : models) {
            TrainedModelSlot slot{
                phase_from_string(j.at("phase").get<std::string>()),
                regime_from_string(j.at("regime").get<std::string>()),
                scaler_from_json(j.at("scaler")),
                model_from_json(j.at("model")),
            };
            const std::size_t idx = ModelBundle::slot_index(slot.phase, slot.regime);
            if (seen[idx]) {
                throw DataError("bundle: duplicate model slot");
            }
            seen[idx] = true;
            const std::size_t expect = encoded_width(bundle.vocabulary);
            if (slot.scaler.mean.size() != expect) {
                throw DataError("bundle: scaler width does not match schema");
            }
            bundle.slots[idx] = std::move(slot);
        }
        for (bool s : seen) {
            if (!s) {
                throw DataError("bundle: missing model slot");
            }
        }

        const json& meta = doc.at("metadata");
        bundle.metadata.dataset_hash = meta.at("dataset_hash").get<std::string>();
        bundle.metadata.record_count = meta.at("record_count").get<std::size_t>();
        bundle.metadata.seed = meta.at("seed").get<std::uint64_t>();
        bundle.metadata.params = meta.at("params").get<std::string>();
        bundle.metadata.created_at = meta.at("created_at").get<std::string>();
        return bundle;
    } catch (const json::exception& e) {
        throw DataError(std::string("bundle: malformed document: ") + e.what());
    }
}

void save_bundle(const ModelBundle& bundle, const std::string& path) {
    write_file(path, bundle_to_text(bundle));
}

ModelBundle load_bundle(const std::string& path) {
    return bundle_from_text(read_file(path));
}

} // namespace seal
