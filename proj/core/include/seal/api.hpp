#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "seal/estimator.hpp"

namespace seal {

struct FieldError {
    std::string field;
    std::string message;
};

// Outcome of validating a JSON estimate request. Field-level errors are
// collected rather than thrown so the service can answer 400 with details.
struct ParsedEstimateRequest {
    EstimateQuery query;
    std::vector<FieldError> errors;

    bool ok() const { return errors.empty(); }
};

// Body fields mirror EstimateQuery in snake_case. Latencies come either as
// {prefill_latency_s_per_input_token, decode_latency_s_per_output_token} or
// as {ttft_s, total_latency_s}; mixing the two styles is an error.
ParsedEstimateRequest parse_estimate_request(std::string_view body);

// JSON response shared verbatim by `seal estimate` and POST /v1/estimate;
// both therefore print byte-identical numeric content. `table` may be null
// when the query carries no region.
std::string estimate_response_text(const ModelBundle& bundle, const EstimateQuery& query,
                                   const IntensityTable* table);

std::string field_errors_text(const std::vector<FieldError>& errors);
std::string bundle_info_text(const ModelBundle& bundle);
std::string health_text(const ModelBundle& bundle);

} // namespace seal
