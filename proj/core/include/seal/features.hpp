#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "seal/ingest.hpp"

namespace seal {

enum class PhaseKind { Prefill, Decode };
enum class RegimeKind { Interpolation, Extrapolation };

std::string_view to_string(PhaseKind phase);
std::string_view to_string(RegimeKind regime);
PhaseKind phase_from_string(std::string_view s);
RegimeKind regime_from_string(std::string_view s);

// The seven model inputs for one phase of one observation: six continuous
// values plus the categorical GPU label. phase_latency_s_per_token is the
// prefill per-input-token latency when phase=Prefill and the decode
// per-output-token latency when phase=Decode.
struct FeatureVector {
    double input_tokens = 0.0;
    double output_tokens = 0.0;
    double model_size_b = 0.0;
    double phase_latency_s_per_token = 0.0;
    std::string gpu;
    double bbh = 0.0;
    double mmlu_pro = 0.0;
};

// Encoding order of the continuous block; the one-hot GPU block follows.
inline constexpr std::array<std::string_view, 6> kContinuousFeatureOrder = {
    "input_tokens", "output_tokens",         "model_size_b",
    "phase_latency_s_per_token", "bbh", "mmlu_pro",
};

struct ExtractedSample {
    FeatureVector features;
    double target_j_per_token = 0.0;
};

ExtractedSample extract_features(const MergedRecord& record, PhaseKind phase);

// Distinct GPU labels in lexicographic order plus a reserved slot for
// labels unseen at fit time.
class GpuVocabulary {
public:
    GpuVocabulary() = default;
    static GpuVocabulary build(const std::vector<MergedRecord>& records);
    static GpuVocabulary from_labels(std::vector<std::string> sorted_labels);

    std::size_t size() const { return labels_.size(); }
    std::size_t unknown_index() const { return labels_.size(); }
    // Position in the one-hot block; unknown labels map to unknown_index().
    std::size_t index_of(std::string_view label) const;
    const std::vector<std::string>& labels() const { return labels_; }

    bool operator==(const GpuVocabulary&) const = default;

private:
    std::vector<std::string> labels_;
};

// Continuous block in kContinuousFeatureOrder, then a one-hot block of
// width |vocab|+1 with exactly one 1. Total width = 6 + |vocab| + 1.
std::vector<double> encode(const FeatureVector& fv, const GpuVocabulary& vocab);

std::size_t encoded_width(const GpuVocabulary& vocab);

// true for the continuous columns, false for the one-hot block.
std::vector<bool> continuous_mask(const GpuVocabulary& vocab);

// Per-column standardization statistics fitted on training rows only.
// Zero-variance columns pass through unscaled and are flagged.
struct ScalerStats {
    std::vector<double> mean;
    std::vector<double> stddev; // population std
    std::vector<bool> scaled;
    std::vector<std::size_t> constant_columns;
};

ScalerStats fit_scaler(const std::vector<std::vector<double>>& rows,
                       const std::vector<bool>& continuous_columns);
std::vector<double> apply_scaler(const std::vector<double>& row, const ScalerStats& stats);

// Size-based split for extrapolation validation: the test set holds all
// records strictly above the nearest-rank quantile of model sizes.
struct RegimeSplitResult {
    std::vector<MergedRecord> train;
    std::vector<MergedRecord> test;
    double size_cutoff_b = 0.0;
};

RegimeSplitResult regime_split(const std::vector<MergedRecord>& records, double size_quantile);

} // namespace seal
