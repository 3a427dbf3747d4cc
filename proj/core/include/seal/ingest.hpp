#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace seal {

// One row of a performance leaderboard snapshot. Latencies and energies are
// stored per token for the respective phase; numeric fields left empty in
// the source are carried as NaN and removed by clean_records.
struct PerfRecord {
    std::string model_name;
    std::string precision;
    std::string gpu;
    double prefill_latency_s_per_token = 0.0;
    double decode_latency_s_per_token = 0.0;
    double prefill_energy_j_per_token = 0.0;
    double decode_energy_j_per_token = 0.0;
    double model_size_b = 0.0;
    double bench_input_tokens = 0.0;
    double bench_output_tokens = 0.0;
};

// One row of a quality leaderboard snapshot. Scores are percentages in
// [0, 100]. other_scores holds up to four additional named benchmarks.
struct QualityRecord {
    std::string model_name;
    std::string precision;
    double bbh = 0.0;
    double mmlu_pro = 0.0;
    std::map<std::string, double> other_scores;
};

// Join key: lowercased trimmed model name plus synonym-normalized precision.
struct ModelKey {
    std::string canonical_name;
    std::string canonical_precision;

    auto operator<=>(const ModelKey&) const = default;
};

struct MergedRecord {
    ModelKey key;
    PerfRecord perf;
    QualityRecord quality;
};

struct CleanReport {
    std::size_t rows_in = 0;
    std::size_t rows_dropped_missing = 0;
    std::size_t rows_dropped_duplicate = 0;
    std::size_t rows_out = 0;
};

// Lowercases/trims the name and maps precision synonyms
// {fp16->float16, fp32->float32, bf16->bfloat16, 8bit->int8, 4bit->int4}.
// Throws DataError on an empty name or a precision outside the closed
// vocabulary {float32, float16, bfloat16, int8, int4} after mapping.
ModelKey canonical_key(std::string_view model_name, std::string_view precision);

// Maps record fields to snapshot column names, parsed from lines of
// `record_field=source_column`. Extras:
//   - a value starting with '@' is a literal applied to every row
//     (for snapshots whose fixed bench token counts are not columns);
//   - energy/latency fields may instead be mapped through their
//     `<field>_aggregate` variants, in which case the parser divides the
//     per-prompt aggregate by the row's bench token count;
//   - quality mappings may add up to four `other:<name>=<column>` lines.
struct ColumnMapping {
    std::map<std::string, std::string> fields;
    std::map<std::string, std::string> other_scores;

    static ColumnMapping parse(std::string_view text);
    static ColumnMapping load(const std::string& path);
};

struct RejectedRow {
    std::size_t row_index; // 0-based data-row index, header excluded
    std::string reason;
};

// UTF-8 delimited table, first row a header; comma or tab auto-detected
// from the header line. Quoted fields follow the usual CSV rules.
struct DelimitedTable {
    char delimiter = ',';
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

DelimitedTable read_delimited(std::string_view text);

struct PerfParseResult {
    std::vector<PerfRecord> records;
    std::vector<RejectedRow> rejected;
};

struct QualityParseResult {
    std::vector<QualityRecord> records;
    std::vector<RejectedRow> rejected;
};

// Rows that cannot become a valid record (unparseable numerics, negative
// values, empty key fields, unknown precision, out-of-range scores) land in
// `rejected` with their row index; they are never silently dropped. A
// missing mapped column is a schema error (DataError) naming the column.
PerfParseResult parse_perf_table(std::string_view table_text, const ColumnMapping& mapping);
QualityParseResult parse_quality_table(std::string_view table_text, const ColumnMapping& mapping);

struct MergeStats {
    std::size_t perf_rows_unmatched = 0;
    std::vector<ModelKey> unmatched_keys; // distinct, sorted
};

// Inner join on the canonical key. Every perf row whose key exists in
// quality yields exactly one MergedRecord, in perf input order. Duplicate
// quality keys are an error listing the offenders.
std::vector<MergedRecord> merge_benchmarks(const std::vector<PerfRecord>& perf,
                                           const std::vector<QualityRecord>& quality,
                                           MergeStats* stats = nullptr);

// Drops rows with missing/non-finite numerics or a zero per-token energy
// target (zero targets would break MAPE downstream), then deduplicates
// exact repeats keeping the first under a stable sort by (key, gpu).
std::pair<std::vector<MergedRecord>, CleanReport>
clean_records(std::vector<MergedRecord> records);

// Versioned dataset persistence (the format the feature pipeline consumes).
std::string dataset_to_text(const std::vector<MergedRecord>& records);
std::vector<MergedRecord> dataset_from_text(std::string_view text);
void write_dataset(const std::string& path, const std::vector<MergedRecord>& records);
std::vector<MergedRecord> read_dataset(const std::string& path);

} // namespace seal
