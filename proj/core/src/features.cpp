#include "seal/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "seal/error.hpp"

namespace seal {

std::string_view to_string(PhaseKind phase) {
    return phase == PhaseKind::Prefill ? "prefill" : "decode";
}

std::string_view to_string(RegimeKind regime) {
    return regime == RegimeKind::Interpolation ? "interpolation" : "extrapolation";
}

PhaseKind phase_from_string(std::string_view s) {
    if (s == "prefill") {
        return PhaseKind::Prefill;
    }
    if (s == "decode") {
        return PhaseKind::Decode;
    }
    throw DataError("unknown phase '" + std::string(s) + "'");
}

RegimeKind regime_from_string(std::string_view s) {
    if (s == "interpolation") {
        return RegimeKind::Interpolation;
    }
    if (s == "extrapolation") {
        return RegimeKind::Extrapolation;
    }
    throw DataError("unknown regime '" + std::string(s) + "'");
}

ExtractedSample extract_features(const MergedRecord& record, PhaseKind phase) {
    ExtractedSample sample;
    sample.features.input_tokens = record.perf.bench_input_tokens;
    sample.features.output_tokens = record.perf.bench_output_tokens;
    sample.features.model_size_b = record.perf.model_size_b;
    sample.features.gpu = record.perf.gpu;
    sample.features.bbh = record.quality.bbh;
    sample.features.mmlu_pro = record.quality.mmlu_pro;
    if (phase == PhaseKind::Prefill) {
        sample.features.phase_latency_s_per_token = record.perf.prefill_latency_s_per_token;
        sample.target_j_per_token = record.perf.prefill_energy_j_per_token;
    } else {
        sample.features.phase_latency_s_per_token = record.perf.decode_latency_s_per_token;
        sample.target_j_per_token = record.perf.decode_energy_j_per_token;
    }
    return sample;
}

GpuVocabulary GpuVocabulary::build(const std::vector<MergedRecord>& records) {
    if (records.empty()) {
        throw DataError("gpu vocabulary: no records");
    }
    std::set<std::string> labels;
    for (const auto& r : records) {
        labels.insert(r.perf.gpu);
    }
    GpuVocabulary vocab;
    vocab.labels_.assign(labels.begin(), labels.end());
    return vocab;
}

GpuVocabulary GpuVocabulary::from_labels(std::vector<std::string> sorted_labels) {
    for (std::size_t i = 1; i < sorted_labels.size(); ++i) {
        if (!(sorted_labels[i - 1] < sorted_labels[i])) {
            throw DataError("gpu vocabulary: labels must be sorted and distinct");
        }
    }
    GpuVocabulary vocab;
    vocab.labels_ = std::move(sorted_labels);
    return vocab;
}

std::size_t GpuVocabulary::index_of(std::string_view label) const {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it != labels_.end() && *it == label) {
        return static_cast<std::size_t>(it - labels_.begin());
    }
    return unknown_index();
}

std::size_t encoded_width(const GpuVocabulary& vocab) {
    return kContinuousFeatureOrder.size() + vocab.size() + 1;
}

std::vector<double> encode(const FeatureVector& fv, const GpuVocabulary& vocab) {
    std::vector<double> row(encoded_width(vocab), 0.0);
    row[0] = fv.input_tokens;
    row[1] = fv.output_tokens;
    row[2] = fv.model_size_b;
    row[3] = fv.phase_latency_s_per_token;
    row[4] = fv.bbh;
    row[5] = fv.mmlu_pro;
    row[kContinuousFeatureOrder.size() + vocab.index_of(fv.gpu)] = 1.0;
    return row;
}

std::vector<bool> continuous_mask(const GpuVocabulary& vocab) {
    std::vector<bool> mask(encoded_width(vocab), false);
    for (std::size_t i = 0; i < kContinuousFeatureOrder.size(); ++i) {
        mask[i] = true;
    }
    return mask;
}

ScalerStats fit_scaler(const std::vector<std::vector<double>>& rows,
                       const std::vector<bool>& continuous_columns) {
    if (rows.size() < 2) {
        throw DataError("scaler: need at least 2 rows to fit");
    }
    const std::size_t width = rows.front().size();
    if (continuous_columns.size() != width) {
        throw DataError("scaler: mask width mismatch");
    }
    for (const auto& row : rows) {
        if (row.size() != width) {
            throw DataError("scaler: ragged rows");
        }
    }

    ScalerStats stats;
    stats.mean.assign(width, 0.0);
    stats.stddev.assign(width, 0.0);
    stats.scaled.assign(width, false);

    const double n = static_cast<double>(rows.size());
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < width; ++j) {
            stats.mean[j] += row[j];
        }
    }
    for (std::size_t j = 0; j < width; ++j) {
        stats.mean[j] /= n;
    }
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < width; ++j) {
            const double d = row[j] - stats.mean[j];
            stats.stddev[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < width; ++j) {
        stats.stddev[j] = std::sqrt(stats.stddev[j] / n);
        if (!continuous_columns[j]) {
            continue;
        }
        if (stats.stddev[j] > 0.0) {
            stats.scaled[j] = true;
        } else {
            stats.constant_columns.push_back(j);
        }
    }
    return stats;
}

std::vector<double> apply_scaler(const std::vector<double>& row, const ScalerStats& stats) {
    if (row.size() != stats.mean.size()) {
        throw DataError("scaler: row width mismatch");
    }
    std::vector<double> out(row);
    for (std::size_t j = 0; j < out.size(); ++j) {
        if (stats.scaled[j]) {
            out[j] = (out[j] - stats.mean[j]) / stats.stddev[j];
        }
    }
    return out;
}

RegimeSplitResult regime_split(const std::vector<MergedRecord>& records, double size_quantile) {
    if (records.empty()) {
        throw DataError("regime split: no records");
    }
    if (!(size_quantile > 0.0 && size_quantile < 1.0)) {
        throw UsageError("regime split: quantile must lie in (0, 1)");
    }

    std::vector<double> sizes;
    sizes.reserve(records.size());
    for (const auto& r : records) {
        sizes.push_back(r.perf.model_size_b);
    }
    std::sort(sizes.begin(), sizes.end());

    // nearest-rank quantile; the epsilon guards against 0.8*5 -> 4.0000000002
    const double n = static_cast<double>(sizes.size());
    std::size_t rank = static_cast<std::size_t>(std::ceil(size_quantile * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sizes.size());
    const double cutoff = sizes[rank - 1];

    RegimeSplitResult split;
    split.size_cutoff_b = cutoff;
    for (const auto& r : records) {
        if (r.perf.model_size_b > cutoff) {
            split.test.push_back(r);
        } else {
            split.train.push_back(r);
        }
    }
    if (split.test.empty()) {
        throw DataError("regime split: no extrapolation frontier above the size quantile");
    }
    return split;
}

} // namespace seal
