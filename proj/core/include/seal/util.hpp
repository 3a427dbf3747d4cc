#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace seal {

// splitmix64. Used for every seeded shuffle so that fold assignments and
// trained artifacts reproduce across platforms and standard libraries
// (std::shuffle / std::uniform_int_distribution are implementation-defined).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Rejection sampling keeps it unbiased.
    std::uint64_t bounded(std::uint64_t n);

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Deterministic Fisher-Yates permutation of {0, ..., n-1}.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

// Shortest text that round-trips a double exactly is not required here;
// 17 significant digits always do.
std::string format_g17(double value);

// Strict full-token parse. Throws DataError when `text` is not a single
// finite-or-inf decimal number (leading/trailing spaces tolerated).
double parse_double_strict(std::string_view text);

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

// FNV-1a 64-bit. Content fingerprints for datasets and bundle documents.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace seal
