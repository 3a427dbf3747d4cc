#include "seal/estimator.hpp"

#include <cmath>
#include <sstream>

#include "seal/error.hpp"
#include "seal/util.hpp"

namespace seal {

IntensityTable IntensityTable::parse(std::string_view text) {
    IntensityTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty()) {
            continue;
        }
        if (sv.front() == '#') {
            std::string_view directive = trim(sv.substr(1));
            if (directive.starts_with("pue=")) {
                table.pue = parse_double_strict(directive.substr(4));
                if (!(table.pue >= 1.0)) {
                    throw DataError("intensity table: pue must be >= 1");
                }
            }
            continue;
        }
        auto comma = sv.find(',');
        if (comma == std::string_view::npos) {
            comma = sv.find('\t');
        }
        if (comma == std::string_view::npos) {
            throw DataError("intensity table line " + std::to_string(line_no) +
                            ": expected region,gco2e_per_kwh");
        }
        std::string region{trim(sv.substr(0, comma))};
        std::string_view value = trim(sv.substr(comma + 1));
        if (region == "region" && value == "gco2e_per_kwh") {
            continue; // optional header row
        }
        const double intensity = parse_double_strict(value);
        if (!(intensity > 0.0)) {
            throw DataError("intensity table: non-positive intensity for region '" + region +
                            "'");
        }
        if (!table.gco2e_per_kwh.emplace(std::move(region), intensity).second) {
            throw DataError("intensity table: duplicate region on line " +
                            std::to_string(line_no));
        }
    }
    return table;
}

IntensityTable IntensityTable::load(const std::string& path) {
    return parse(read_file(path));
}

std::size_t ModelBundle::slot_index(PhaseKind phase, RegimeKind regime) {
    const std::size_t p = phase == PhaseKind::Prefill ? 0 : 1;
    const std::size_t r = regime == RegimeKind::Interpolation ? 0 : 1;
    return p * 2 + r;
}

const TrainedModelSlot& ModelBundle::slot(PhaseKind phase, RegimeKind regime) const {
    return slots[slot_index(phase, regime)];
}

TrainedModelSlot& ModelBundle::slot(PhaseKind phase, RegimeKind regime) {
    return slots[slot_index(phase, regime)];
}

RegimeKind route_regime(double model_size_b, double threshold_b) {
    if (!(model_size_b > 0.0) || !std::isfinite(model_size_b)) {
        throw DataError("route_regime: model size must be > 0");
    }
    if (!(threshold_b > 0.0)) {
        throw DataError("route_regime: threshold must be > 0");
    }
    return model_size_b <= threshold_b ? RegimeKind::Interpolation : RegimeKind::Extrapolation;
}

namespace {

void validate_query(const EstimateQuery& q) {
    if (!(std::isfinite(q.model_size_b) && q.model_size_b > 0.0)) {
        throw DataError("query: model_size_b must be > 0");
    }
    if (q.input_tokens <= 0) {
        throw DataError("query: input_tokens must be > 0");
    }
    if (q.output_tokens <= 0) {
        throw DataError("query: output_tokens must be > 0");
    }
    if (!(std::isfinite(q.prefill_latency_s_per_input_token) &&
          q.prefill_latency_s_per_input_token >= 0.0)) {
        throw DataError("query: prefill_latency_s_per_input_token must be >= 0");
    }
    if (!(std::isfinite(q.decode_latency_s_per_output_token) &&
          q.decode_latency_s_per_output_token >= 0.0)) {
        throw DataError("query: decode_latency_s_per_output_token must be >= 0");
    }
    if (q.gpu.empty()) {
        throw DataError("query: gpu label must not be empty");
    }
    if (!(std::isfinite(q.bbh) && q.bbh >= 0.0 && q.bbh <= 100.0)) {
        throw DataError("query: bbh must lie in [0, 100]");
    }
    if (!(std::isfinite(q.mmlu_pro) && q.mmlu_pro >= 0.0 && q.mmlu_pro <= 100.0)) {
        throw DataError("query: mmlu_pro must lie in [0, 100]");
    }
}

double per_token_prediction(const ModelBundle& bundle, const EstimateQuery& q, PhaseKind phase,
                            RegimeKind regime, bool& clamped) {
    FeatureVector fv;
    fv.input_tokens = static_cast<double>(q.input_tokens);
    fv.output_tokens = static_cast<double>(q.output_tokens);
    fv.model_size_b = q.model_size_b;
    fv.phase_latency_s_per_token = phase == PhaseKind::Prefill
                                       ? q.prefill_latency_s_per_input_token
                                       : q.decode_latency_s_per_output_token;
    fv.gpu = q.gpu;
    fv.bbh = q.bbh;
    fv.mmlu_pro = q.mmlu_pro;

    const TrainedModelSlot& slot = bundle.slot(phase, regime);
    const std::vector<double> row =
        apply_scaler(encode(fv, bundle.vocabulary), slot.scaler);
    double prediction = slot.model.predict(row);
    if (prediction < 0.0) {
        prediction = 0.0;
        clamped = true;
    }
    return prediction;
}

} // namespace

EnergyEstimate estimate_energy(const ModelBundle& bundle, const EstimateQuery& query) {
    validate_query(query);

    EnergyEstimate estimate;
    estimate.regime = route_regime(query.model_size_b, bundle.interpolation_threshold_b);
    estimate.per_token_prefill_j =
        per_token_prediction(bundle, query, PhaseKind::Prefill, estimate.regime, estimate.clamped);
    estimate.per_token_decode_j =
        per_token_prediction(bundle, query, PhaseKind::Decode, estimate.regime, estimate.clamped);
    estimate.prefill_j = estimate.per_token_prefill_j * static_cast<double>(query.input_tokens);
    estimate.decode_j = estimate.per_token_decode_j * static_cast<double>(query.output_tokens);
    estimate.total_j = estimate.prefill_j + estimate.decode_j;
    return estimate;
}

std::pair<double, double> derive_latencies(double ttft_s, double total_latency_s,
                                           std::int64_t input_tokens,
                                           std::int64_t output_tokens) {
    if (input_tokens <= 0 || output_tokens <= 0) {
        throw DataError("derive_latencies: token counts must be > 0");
    }
    if (!(ttft_s > 0.0) || !std::isfinite(ttft_s) || !std::isfinite(total_latency_s)) {
        throw DataError("derive_latencies: ttft must be > 0 and finite");
    }
    if (!(ttft_s < total_latency_s)) {
        throw DataError("derive_latencies: ttft must be strictly below total latency");
    }
    return {ttft_s / static_cast<double>(input_tokens),
            (total_latency_s - ttft_s) / static_cast<double>(output_tokens)};
}

CarbonEstimate energy_to_carbon(const EnergyEstimate& energy, const std::string& region,
                                const IntensityTable& table) {
    auto it = table.gco2e_per_kwh.find(region);
    if (it == table.gco2e_per_kwh.end()) {
        throw DataError("unknown region '" + region + "' in intensity table");
    }
    CarbonEstimate carbon;
    carbon.region = region;
    carbon.intensity_used = it->second;
    carbon.pue_used = table.pue;
    carbon.energy = energy;
    carbon.grams_co2e = (energy.total_j / 3'600'000.0) * it->second * table.pue;
    return carbon;
}

} // namespace seal
