#include "seal/api.hpp"

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "seal/error.hpp"

namespace seal {

namespace {

using nlohmann::json;

const std::set<std::string>& known_request_fields() {
    static const std::set<std::string> fields = {
        "model_size_b",
        "input_tokens",
        "output_tokens",
        "prefill_latency_s_per_input_token",
        "decode_latency_s_per_output_token",
        "ttft_s",
        "total_latency_s",
        "gpu",
        "bbh",
        "mmlu_pro",
        "region",
    };
    return fields;
}

bool require_number(const json& body, const char* field, double& out,
                    std::vector<FieldError>& errors) {
    if (!body.contains(field)) {
        errors.push_back({field, "required"});
        return false;
    }
    if (!body.at(field).is_number()) {
        errors.push_back({field, "must be a number"});
        return false;
    }
    out = body.at(field).get<double>();
    if (!std::isfinite(out)) {
        errors.push_back({field, "must be finite"});
        return false;
    }
    return true;
}

bool require_count(const json& body, const char* field, std::int64_t& out,
                   std::vector<FieldError>& errors) {
    if (!body.contains(field)) {
        errors.push_back({field, "required"});
        return false;
    }
    if (!body.at(field).is_number_integer()) {
        errors.push_back({field, "must be an integer"});
        return false;
    }
    out = body.at(field).get<std::int64_t>();
    if (out <= 0) {
        errors.push_back({field, "must be > 0"});
        return false;
    }
    return true;
}

} // namespace

ParsedEstimateRequest parse_estimate_request(std::string_view body) {
    ParsedEstimateRequest parsed;
    auto& errors = parsed.errors;

    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        errors.push_back({"", std::string("invalid JSON body: ") + e.what()});
        return parsed;
    }
    if (!j.is_object()) {
        errors.push_back({"", "request body must be a JSON object"});
        return parsed;
    }
    for (const auto& [key, value] : j.items()) {
        if (!known_request_fields().contains(key)) {
            errors.push_back({key, "unknown field"});
        }
    }

    EstimateQuery& q = parsed.query;
    if (require_number(j, "model_size_b", q.model_size_b, errors) && !(q.model_size_b > 0.0)) {
        errors.push_back({"model_size_b", "must be > 0"});
    }
    require_count(j, "input_tokens", q.input_tokens, errors);
    require_count(j, "output_tokens", q.output_tokens, errors);

    if (!j.contains("gpu")) {
        errors.push_back({"gpu", "required"});
    } else if (!j.at("gpu").is_string() || j.at("gpu").get<std::string>().empty()) {
        errors.push_back({"gpu", "must be a non-empty string"});
    } else {
        q.gpu = j.at("gpu").get<std::string>();
    }

    if (require_number(j, "bbh", q.bbh, errors) && !(q.bbh >= 0.0 && q.bbh <= 100.0)) {
        errors.push_back({"bbh", "must lie in [0, 100]"});
    }
    if (require_number(j, "mmlu_pro", q.mmlu_pro, errors) &&
        !(q.mmlu_pro >= 0.0 && q.mmlu_pro <= 100.0)) {
        errors.push_back({"mmlu_pro", "must lie in [0, 100]"});
    }

    const bool direct = j.contains("prefill_latency_s_per_input_token") ||
                        j.contains("decode_latency_s_per_output_token");
    const bool derived = j.contains("ttft_s") || j.contains("total_latency_s");
    if (direct && derived) {
        errors.push_back(
            {"ttft_s", "conflicts with per-token latency fields; give one latency style"});
    } else if (derived) {
        double ttft = 0.0;
        double total = 0.0;
        const bool have_ttft = require_number(j, "ttft_s", ttft, errors);
        const bool have_total = require_number(j, "total_latency_s", total, errors);
        if (have_ttft && have_total && q.input_tokens > 0 && q.output_tokens > 0) {
            try {
                auto [prefill, decode] =
                    derive_latencies(ttft, total, q.input_tokens, q.output_tokens);
                q.prefill_latency_s_per_input_token = prefill;
                q.decode_latency_s_per_output_token = decode;
            } catch (const DataError& e) {
                errors.push_back({"ttft_s", e.what()});
            }
        }
    } else {
        double prefill = 0.0;
        double decode = 0.0;
        if (require_number(j, "prefill_latency_s_per_input_token", prefill, errors) &&
            !(prefill >= 0.0)) {
            errors.push_back({"prefill_latency_s_per_input_token", "must be >= 0"});
        } else {
            q.prefill_latency_s_per_input_token = prefill;
        }
        if (require_number(j, "decode_latency_s_per_output_token", decode, errors) &&
            !(decode >= 0.0)) {
            errors.push_back({"decode_latency_s_per_output_token", "must be >= 0"});
        } else {
            q.decode_latency_s_per_output_token = decode;
        }
    }

    if (j.contains("region")) {
        if (!j.at("region").is_string() || j.at("region").get<std::string>().empty()) {
            errors.push_back({"region", "must be a non-empty string"});
        } else {
            q.region = j.at("region").get<std::string>();
        }
    }
    return parsed;
}

std::string estimate_response_text(const ModelBundle& bundle, const EstimateQuery& query,
                                   const IntensityTable* table) {
    const EnergyEstimate energy = estimate_energy(bundle, query);
    json resp{
        {"energy",
         {{"prefill_j", energy.prefill_j},
          {"decode_j", energy.decode_j},
          {"total_j", energy.total_j},
          {"per_token_prefill_j", energy.per_token_prefill_j},
          {"per_token_decode_j", energy.per_token_decode_j},
          {"regime", std::string(to_string(energy.regime))},
          {"clamped", energy.clamped}}},
    };
    if (query.region.has_value()) {
        if (table == nullptr) {
            throw UsageError("region given but no intensity table loaded");
        }
        const CarbonEstimate carbon = energy_to_carbon(energy, *query.region, *table);
        resp["carbon"] = {
            {"grams_co2e", carbon.grams_co2e},
            {"region", carbon.region},
            {"intensity_used", carbon.intensity_used},
            {"pue_used", carbon.pue_used},
        };
    }
    return resp.dump(1) + "\n";
}

std::string field_errors_text(const std::vector<FieldError>& errors) {
    json arr = json::array();
    for (const auto& e : errors) {
        arr.push_back(json{{"field", e.field}, {"message", e.message}});
    }
    return json{{"errors", std::move(arr)}}.dump(1) + "\n";
}

std::string bundle_info_text(const ModelBundle& bundle) {
    json models = json::array();
    for (const auto& slot : bundle.slots) {
        models.push_back(json{
            {"phase", std::string(to_string(slot.phase))},
            {"regime", std::string(to_string(slot.regime))},
            {"kind", std::string(to_string(slot.model.kind()))},
        });
    }
    return json{
        {"format_version", bundle.format_version},
        {"threshold_b", bundle.interpolation_threshold_b},
        {"gpu_vocabulary", bundle.vocabulary.labels()},
        {"models", std::move(models)},
        {"metadata",
         {{"dataset_hash", bundle.metadata.dataset_hash},
          {"record_count", bundle.metadata.record_count},
          {"seed", bundle.metadata.seed},
          {"created_at", bundle.metadata.created_at}}},
    }.dump(1) + "\n";
}

std::string health_text(const ModelBundle& bundle) {
    return json{{"status", "ok"}, {"dataset_hash", bundle.metadata.dataset_hash}}.dump(1) +
           "\n";
}

} // namespace seal
