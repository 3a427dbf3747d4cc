#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "seal/features.hpp"
#include "seal/regressors.hpp"

namespace seal {

// Everything needed to estimate one prompt, restricted to attributes a
// caller can observe or reasonably approximate for both open and closed
// models.
struct EstimateQuery {
    double model_size_b = 0.0;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    double prefill_latency_s_per_input_token = 0.0;
    double decode_latency_s_per_output_token = 0.0;
    std::string gpu;
    double bbh = 0.0;
    double mmlu_pro = 0.0;
    std::optional<std::string> region;
};

struct EnergyEstimate {
    double prefill_j = 0.0;
    double decode_j = 0.0;
    double total_j = 0.0; // always exactly prefill_j + decode_j
    RegimeKind regime = RegimeKind::Interpolation;
    double per_token_prefill_j = 0.0;
    double per_token_decode_j = 0.0;
    bool clamped = false; // a negative per-token prediction was clamped to 0
};

// region code -> grid carbon intensity, with an optional datacenter PUE
// multiplier (1.0 unless the table file sets one).
struct IntensityTable {
    std::map<std::string, double> gco2e_per_kwh;
    double pue = 1.0;

    static IntensityTable parse(std::string_view text);
    static IntensityTable load(const std::string& path);
};

struct CarbonEstimate {
    double grams_co2e = 0.0;
    std::string region;
    double intensity_used = 0.0;
    double pue_used = 1.0;
    EnergyEstimate energy;
};

struct TrainedModelSlot {
    PhaseKind phase = PhaseKind::Prefill;
    RegimeKind regime = RegimeKind::Interpolation;
    ScalerStats scaler;
    TrainedRegressor model;
};

struct TrainingMetadata {
    std::string dataset_hash;
    std::size_t record_count = 0;
    std::uint64_t seed = 0;
    std::string params; // JSON text of the training parameters
    std::string created_at; // empty unless stamped; keeps training reproducible
};

// The persisted artifact: four (phase x regime) models sharing one feature
// schema, plus the size threshold that routes queries between regimes.
struct ModelBundle {
    static constexpr int kFormatVersion = 1;

    int format_version = kFormatVersion;
    double interpolation_threshold_b = 0.0;
    GpuVocabulary vocabulary;
    std::array<TrainedModelSlot, 4> slots; // prefill/dec x interp/extrap
    TrainingMetadata metadata;

    static std::size_t slot_index(PhaseKind phase, RegimeKind regime);
    const TrainedModelSlot& slot(PhaseKind phase, RegimeKind regime) const;
    TrainedModelSlot& slot(PhaseKind phase, RegimeKind regime);
};

// size <= threshold routes to Interpolation (threshold-sized models exist in
// the training data); anything larger extrapolates.
RegimeKind route_regime(double model_size_b, double threshold_b);

EnergyEstimate estimate_energy(const ModelBundle& bundle, const EstimateQuery& query);

// (prefill s/input-token, decode s/output-token) from time-to-first-token
// and total latency, the two numbers any chat API exposes.
std::pair<double, double> derive_latencies(double ttft_s, double total_latency_s,
                                           std::int64_t input_tokens,
                                           std::int64_t output_tokens);

CarbonEstimate energy_to_carbon(const EnergyEstimate& energy, const std::string& region,
                                const IntensityTable& table);

// Bundle persistence: one JSON document, floating point as decimal text
// with 17 significant digits, integrity-checked by a digest over the
// canonicalized document minus the checksum field.
std::string bundle_to_text(const ModelBundle& bundle);
ModelBundle bundle_from_text(std::string_view text);
void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(const std::string& path);

} // namespace seal
