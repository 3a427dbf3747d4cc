#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seal/ingest.hpp"
#include "seal/util.hpp"

namespace testsupport {

// Synthetic benchmark generator with a known closed-form ground truth:
//   per-token energy = 0.05*model_size_b + 40*phase_latency
//                    + 0.02*(100 - bbh) + gpu_offset
//                    (+ nonlinear * bends, see clean_signal)
//                    + Gaussian noise with sigma = noise_rel * signal.
// The linear part matches the oracle the acceptance suite freezes; the
// nonlinear knob bends the surface so tree models have something linear
// models cannot fit.
struct SynthOptions {
    std::size_t n_interpolation = 2000;
    std::size_t n_extrapolation = 300;
    std::uint64_t seed = 1;
    double size_min = 1.0;
    double size_max = 111.0;
    double extrapolation_max = 400.0;
    double noise_rel = 0.02;
    double nonlinear = 0.0;
};

double gpu_offset(const std::string& gpu);

// Noise-free per-token energy for the generator's feature values.
double clean_signal(double model_size_b, double phase_latency, double bbh,
                    const std::string& gpu, double nonlinear);

struct SynthData {
    std::vector<seal::MergedRecord> interpolation;
    std::vector<seal::MergedRecord> extrapolation;
};

SynthData make_synthetic(const SynthOptions& options);

// Small fully-random record generator for property tests: positive energies,
// a handful of GPU labels, sizes in [1, 200].
std::vector<seal::MergedRecord> make_random_records(std::size_t n, std::uint64_t seed);

// Leaderboard-shaped snapshot files whose headers match config/llm_perf.map
// and config/open_llm.map. A slice of perf rows gets keys absent from the
// quality table, one row a missing energy cell, and one row is duplicated,
// so ingest exercises its unmatched/clean paths.
struct SnapshotFiles {
    std::string perf_csv;
    std::string quality_csv;
    std::size_t perf_rows = 0;
    std::size_t quality_rows = 0;
};

SnapshotFiles make_snapshot(const SynthOptions& options);

// Standard normal via Box-Muller on SplitMix64 uniforms; keeps generated
// datasets identical across platforms.
double gaussian(seal::SplitMix64& rng);

} // namespace testsupport
