#pragma once

#include <optional>
#include <string>

#include "seal/estimator.hpp"

// Blocks serving /v1/estimate, /v1/models, /v1/health until terminated.
// Returns the process exit code (3 when the port cannot be bound).
int serve_http(const seal::ModelBundle& bundle,
               const std::optional<seal::IntensityTable>& intensities, const std::string& host,
               int port);
