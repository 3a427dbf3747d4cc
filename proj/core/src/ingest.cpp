#include "seal/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "seal/error.hpp"
#include "seal/util.hpp"

namespace seal {

namespace {

using nlohmann::json;

const std::map<std::string, std::string>& precision_synonyms() {
    static const std::map<std::string, std::string> synonyms = {
        {"fp16", "float16"}, {"fp32", "float32"}, {"bf16", "bfloat16"},
        {"8bit", "int8"},    {"4bit", "int4"},
    };
    return synonyms;
}

const std::set<std::string>& precision_vocabulary() {
    static const std::set<std::string> vocab = {
        "float32", "float16", "bfloat16", "int8", "int4",
    };
    return vocab;
}

} // namespace

ModelKey canonical_key(std::string_view model_name, std::string_view precision) {
    std::string name = to_lower(trim(model_name));
    if (name.empty()) {
        throw DataError("canonical_key: empty model name");
    }
    std::string prec = to_lower(trim(precision));
    if (prec.empty()) {
        throw DataError("canonical_key: empty precision");
    }
    if (auto it = precision_synonyms().find(prec); it != precision_synonyms().end()) {
        prec = it->second;
    }
    if (!precision_vocabulary().contains(prec)) {
        throw DataError("canonical_key: unknown precision '" + prec + "'");
    }
    return ModelKey{std::move(name), std::move(prec)};
}

ColumnMapping ColumnMapping::parse(std::string_view text) {
    ColumnMapping mapping;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') {
            continue;
        }
        auto eq = sv.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            throw DataError("mapping line " + std::to_string(line_no) +
                            ": expected record_field=source_column");
        }
        std::string key{trim(sv.substr(0, eq))};
        std::string value{trim(sv.substr(eq + 1))};
        if (key.starts_with("other:")) {
            std::string name{trim(std::string_view(key).substr(6))};
            if (name.empty()) {
                throw DataError("mapping line " + std::to_string(line_no) +
                                ": empty other-score name");
            }
            if (!mapping.other_scores.emplace(name, value).second) {
                throw DataError("mapping: duplicate other-score '" + name + "'");
            }
            if (mapping.other_scores.size() > 4) {
                throw DataError("mapping: at most 4 other-score columns supported");
            }
        } else {
            if (!mapping.fields.emplace(key, value).second) {
                throw DataError("mapping: duplicate field '" + key + "'");
            }
        }
    }
    return mapping;
}

ColumnMapping ColumnMapping::load(const std::string& path) {
    return parse(read_file(path));
}

DelimitedTable read_delimited(std::string_view text) {
    DelimitedTable table;

    // Delimiter from the header line: whichever of tab/comma occurs more
    // outside quoted fields.
    {
        bool in_quotes = false;
        std::size_t commas = 0;
        std::size_t tabs = 0;
        for (char c : text) {
            if (c == '"') {
                in_quotes = !in_quotes;
            } else if (!in_quotes) {
                if (c == '\n') {
                    break;
                }
                if (c == ',') {
                    ++commas;
                } else if (c == '\t') {
                    ++tabs;
                }
            }
        }
        table.delimiter = tabs > commas ? '\t' : ',';
    }

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (!(row.size() == 1 && row[0].empty())) { // skip blank lines
            rows.push_back(std::move(row));
        }
        row = {};
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == table.delimiter) {
            end_field();
        } else if (c == '\r') {
            // tolerate CRLF
        } else if (c == '\n') {
            end_row();
        } else {
            field += c;
            field_started = true;
        }
    }
    if (field_started || !field.empty() || !row.empty()) {
        end_row();
    }

    if (!rows.empty()) {
        table.header = std::move(rows.front());
        for (auto& h : table.header) {
            h = std::string(trim(h));
        }
        table.rows.assign(std::make_move_iterator(rows.begin() + 1),
                          std::make_move_iterator(rows.end()));
    }
    return table;
}

namespace {

// A record field resolved against a concrete table: either a column index
// or a '@' literal applied to every row.
struct FieldSource {
    int column = -1;
    std::string literal;
    bool is_literal = false;
    bool mapped = false;
};

FieldSource resolve_field(const DelimitedTable& table, const ColumnMapping& mapping,
                          const std::string& field, bool required) {
    FieldSource src;
    auto it = mapping.fields.find(field);
    if (it == mapping.fields.end()) {
        if (required) {
            throw DataError("mapping is missing required field '" + field + "'");
        }
        return src;
    }
    src.mapped = true;
    const std::string& value = it->second;
    if (!value.empty() && value.front() == '@') {
        src.is_literal = true;
        src.literal = value.substr(1);
        return src;
    }
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (table.header[i] == value) {
            src.column = static_cast<int>(i);
            return src;
        }
    }
    throw DataError("column '" + value + "' (mapped from field '" + field +
                    "') not found in table header");
}

FieldSource resolve_column(const DelimitedTable& table, const std::string& field,
                           const std::string& column) {
    FieldSource src;
    src.mapped = true;
    if (!column.empty() && column.front() == '@') {
        src.is_literal = true;
        src.literal = column.substr(1);
        return src;
    }
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (table.header[i] == column) {
            src.column = static_cast<int>(i);
            return src;
        }
    }
    throw DataError("column '" + column + "' (mapped from field '" + field +
                    "') not found in table header");
}

std::string cell_text(const std::vector<std::string>& row, const FieldSource& src) {
    if (src.is_literal) {
        return src.literal;
    }
    if (src.column < 0 || static_cast<std::size_t>(src.column) >= row.size()) {
        throw DataError("row is shorter than the header");
    }
    return std::string(trim(row[static_cast<std::size_t>(src.column)]));
}

// Empty cells mean "missing" and come back as NaN; clean_records removes
// them later. Anything non-empty must parse.
double numeric_cell(const std::vector<std::string>& row, const FieldSource& src,
                    const std::string& field) {
    std::string text = cell_text(row, src);
    if (text.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    try {
        return parse_double_strict(text);
    } catch (const DataError&) {
        throw DataError(field + ": not a number: '" + text + "'");
    }
}

// Per-token fields accept either a direct per-token column or an
// `<field>_aggregate` column divided by the row's bench token count.
struct PerTokenSource {
    FieldSource per_token;
    FieldSource aggregate;
};

PerTokenSource resolve_per_token(const DelimitedTable& table, const ColumnMapping& mapping,
                                 const std::string& per_token_field) {
    PerTokenSource src;
    src.per_token = resolve_field(table, mapping, per_token_field, false);
    const std::string aggregate_field = [&] {
        // strip the unit suffix: prefill_energy_j_per_token -> prefill_energy_j_aggregate
        std::string base = per_token_field;
        const std::string suffix = "_per_token";
        return base.substr(0, base.size() - suffix.size()) + "_aggregate";
    }();
    auto it = mapping.fields.find(aggregate_field);
    if (it != mapping.fields.end()) {
        src.aggregate = resolve_column(table, aggregate_field, it->second);
    }
    if (src.per_token.mapped && src.aggregate.mapped) {
        throw DataError("map exactly one of '" + per_token_field + "' and '" +
                        aggregate_field + "'");
    }
    if (!src.per_token.mapped && !src.aggregate.mapped) {
        throw DataError("mapping is missing required field '" + per_token_field + "'");
    }
    return src;
}

double per_token_value(const std::vector<std::string>& row, const PerTokenSource& src,
                       const std::string& field, double bench_tokens) {
    if (src.per_token.mapped) {
        return numeric_cell(row, src.per_token, field);
    }
    double aggregate = numeric_cell(row, src.aggregate, field);
    if (std::isnan(aggregate)) {
        return aggregate;
    }
    if (!(bench_tokens > 0.0) || std::isnan(bench_tokens)) {
        throw DataError(field + ": aggregate value needs a positive bench token count");
    }
    return aggregate / bench_tokens;
}

void check_non_negative(double v, const std::string& field) {
    if (std::isnan(v)) {
        return; // missing, handled by clean_records
    }
    if (!std::isfinite(v)) {
        throw DataError(field + ": non-finite value");
    }
    if (v < 0.0) {
        throw DataError(field + ": negative value");
    }
}

void check_positive(double v, const std::string& field) {
    if (std::isnan(v)) {
        return;
    }
    if (!std::isfinite(v) || v <= 0.0) {
        throw DataError(field + ": must be > 0");
    }
}

void check_score(double v, const std::string& field, bool required) {
    if (std::isnan(v)) {
        if (required) {
            throw DataError(field + ": missing");
        }
        return;
    }
    if (!std::isfinite(v) || v < 0.0 || v > 100.0) {
        throw DataError(field + ": score outside [0, 100]");
    }
}

} // namespace

PerfParseResult parse_perf_table(std::string_view table_text, const ColumnMapping& mapping) {
    const DelimitedTable table = read_delimited(table_text);
    if (table.header.empty() && table.rows.empty()) {
        // no header at all: resolving any field below would be misleading
        if (!mapping.fields.empty()) {
            throw DataError("perf table has no header row");
        }
    }

    const FieldSource model_name = resolve_field(table, mapping, "model_name", true);
    const FieldSource precision = resolve_field(table, mapping, "precision", true);
    const FieldSource gpu = resolve_field(table, mapping, "gpu", true);
    const FieldSource model_size = resolve_field(table, mapping, "model_size_b", true);
    const FieldSource bench_in = resolve_field(table, mapping, "bench_input_tokens", true);
    const FieldSource bench_out = resolve_field(table, mapping, "bench_output_tokens", true);
    const PerTokenSource prefill_lat = resolve_per_token(table, mapping, "prefill_latency_s_per_token");
    const PerTokenSource decode_lat = resolve_per_token(table, mapping, "decode_latency_s_per_token");
    const PerTokenSource prefill_energy = resolve_per_token(table, mapping, "prefill_energy_j_per_token");
    const PerTokenSource decode_energy = resolve_per_token(table, mapping, "decode_energy_j_per_token");

    PerfParseResult result;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        try {
            PerfRecord rec;
            rec.model_name = cell_text(row, model_name);
            rec.precision = cell_text(row, precision);
            rec.gpu = cell_text(row, gpu);
            if (rec.gpu.empty()) {
                throw DataError("gpu: missing label");
            }
            canonical_key(rec.model_name, rec.precision); // validates key fields

            rec.model_size_b = numeric_cell(row, model_size, "model_size_b");
            check_positive(rec.model_size_b, "model_size_b");
            rec.bench_input_tokens = numeric_cell(row, bench_in, "bench_input_tokens");
            check_positive(rec.bench_input_tokens, "bench_input_tokens");
            rec.bench_output_tokens = numeric_cell(row, bench_out, "bench_output_tokens");
            check_positive(rec.bench_output_tokens, "bench_output_tokens");

            rec.prefill_latency_s_per_token =
                per_token_value(row, prefill_lat, "prefill_latency_s_per_token", rec.bench_input_tokens);
            rec.decode_latency_s_per_token =
                per_token_value(row, decode_lat, "decode_latency_s_per_token", rec.bench_output_tokens);
            rec.prefill_energy_j_per_token =
                per_token_value(row, prefill_energy, "prefill_energy_j_per_token", rec.bench_input_tokens);
            rec.decode_energy_j_per_token =
                per_token_value(row, decode_energy, "decode_energy_j_per_token", rec.bench_output_tokens);
            check_non_negative(rec.prefill_latency_s_per_token, "prefill_latency_s_per_token");
            check_non_negative(rec.decode_latency_s_per_token, "decode_latency_s_per_token");
            check_non_negative(rec.prefill_energy_j_per_token, "prefill_energy_j_per_token");
            check_non_negative(rec.decode_energy_j_per_token, "decode_energy_j_per_token");

            result.records.push_back(std::move(rec));
        } catch (const DataError& e) {
            result.rejected.push_back({i, e.what()});
        }
    }
    return result;
}

QualityParseResult parse_quality_table(std::string_view table_text, const ColumnMapping& mapping) {
    const DelimitedTable table = read_delimited(table_text);
    if (table.header.empty() && table.rows.empty() && !mapping.fields.empty()) {
        throw DataError("quality table has no header row");
    }

    const FieldSource model_name = resolve_field(table, mapping, "model_name", true);
    const FieldSource precision = resolve_field(table, mapping, "precision", true);
    const FieldSource bbh = resolve_field(table, mapping, "bbh", true);
    const FieldSource mmlu_pro = resolve_field(table, mapping, "mmlu_pro", true);
    std::vector<std::pair<std::string, FieldSource>> others;
    for (const auto& [name, column] : mapping.other_scores) {
        others.emplace_back(name, resolve_column(table, "other:" + name, column));
    }

    QualityParseResult result;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        try {
            QualityRecord rec;
            rec.model_name = cell_text(row, model_name);
            rec.precision = cell_text(row, precision);
            canonical_key(rec.model_name, rec.precision);

            rec.bbh = numeric_cell(row, bbh, "bbh");
            check_score(rec.bbh, "bbh", true);
            rec.mmlu_pro = numeric_cell(row, mmlu_pro, "mmlu_pro");
            check_score(rec.mmlu_pro, "mmlu_pro", true);
            for (const auto& [name, src] : others) {
                double v = numeric_cell(row, src, name);
                if (std::isnan(v)) {
                    continue; // optional score absent on this row
                }
                check_score(v, name, false);
                rec.other_scores.emplace(name, v);
            }
            result.records.push_back(std::move(rec));
        } catch (const DataError& e) {
            result.rejected.push_back({i, e.what()});
        }
    }
    return result;
}

std::vector<MergedRecord> merge_benchmarks(const std::vector<PerfRecord>& perf,
                                           const std::vector<QualityRecord>& quality,
                                           MergeStats* stats) {
    std::map<ModelKey, const QualityRecord*> by_key;
    std::set<ModelKey> duplicates;
    for (const auto& q : quality) {
        ModelKey key = canonical_key(q.model_name, q.precision);
        if (!by_key.emplace(key, &q).second) {
            duplicates.insert(key);
        }
    }
    if (!duplicates.empty()) {
        std::string msg = "duplicate quality keys:";
        for (const auto& k : duplicates) {
            msg += " " + k.canonical_name + "/" + k.canonical_precision;
        }
        throw DataError(msg);
    }

    std::vector<MergedRecord> merged;
    merged.reserve(perf.size());
    std::set<ModelKey> unmatched;
    std::size_t unmatched_rows = 0;
    for (const auto& p : perf) {
        ModelKey key = canonical_key(p.model_name, p.precision);
        auto it = by_key.find(key);
        if (it == by_key.end()) {
            ++unmatched_rows;
            unmatched.insert(std::move(key));
            continue;
        }
        merged.push_back(MergedRecord{std::move(key), p, *it->second});
    }
    if (stats != nullptr) {
        stats->perf_rows_unmatched = unmatched_rows;
        stats->unmatched_keys.assign(unmatched.begin(), unmatched.end());
    }
    return merged;
}

namespace {

bool has_missing_or_invalid(const MergedRecord& r) {
    const double numerics[] = {
        r.perf.prefill_latency_s_per_token, r.perf.decode_latency_s_per_token,
        r.perf.prefill_energy_j_per_token,  r.perf.decode_energy_j_per_token,
        r.perf.model_size_b,                r.perf.bench_input_tokens,
        r.perf.bench_output_tokens,         r.quality.bbh,
        r.quality.mmlu_pro,
    };
    for (double v : numerics) {
        if (!std::isfinite(v)) {
            return true;
        }
    }
    for (const auto& [name, v] : r.quality.other_scores) {
        if (!std::isfinite(v)) {
            return true;
        }
    }
    // zero per-token energy cannot serve as a MAPE target
    return r.perf.prefill_energy_j_per_token == 0.0 || r.perf.decode_energy_j_per_token == 0.0;
}

bool same_observation(const MergedRecord& a, const MergedRecord& b) {
    return a.key == b.key && a.perf.gpu == b.perf.gpu &&
           a.perf.model_name == b.perf.model_name &&
           a.perf.precision == b.perf.precision &&
           a.perf.prefill_latency_s_per_token == b.perf.prefill_latency_s_per_token &&
           a.perf.decode_latency_s_per_token == b.perf.decode_latency_s_per_token &&
           a.perf.prefill_energy_j_per_token == b.perf.prefill_energy_j_per_token &&
           a.perf.decode_energy_j_per_token == b.perf.decode_energy_j_per_token &&
           a.perf.model_size_b == b.perf.model_size_b &&
           a.perf.bench_input_tokens == b.perf.bench_input_tokens &&
           a.perf.bench_output_tokens == b.perf.bench_output_tokens &&
           a.quality.bbh == b.quality.bbh && a.quality.mmlu_pro == b.quality.mmlu_pro &&
           a.quality.other_scores == b.quality.other_scores;
}

} // namespace

std::pair<std::vector<MergedRecord>, CleanReport>
clean_records(std::vector<MergedRecord> records) {
    CleanReport report;
    report.rows_in = records.size();

    std::vector<MergedRecord> kept;
    kept.reserve(records.size());
    for (auto& r : records) {
        if (has_missing_or_invalid(r)) {
            ++report.rows_dropped_missing;
        } else {
            kept.push_back(std::move(r));
        }
    }

    std::stable_sort(kept.begin(), kept.end(), [](const MergedRecord& a, const MergedRecord& b) {
        if (a.key != b.key) {
            return a.key < b.key;
        }
        return a.perf.gpu < b.perf.gpu;
    });

    std::vector<MergedRecord> out;
    out.reserve(kept.size());
    for (auto& r : kept) {
        if (!out.empty() && same_observation(out.back(), r)) {
            ++report.rows_dropped_duplicate;
        } else {
            out.push_back(std::move(r));
        }
    }
    report.rows_out = out.size();
    return {std::move(out), report};
}

namespace {

constexpr int kDatasetFormatVersion = 1;

json record_to_json(const MergedRecord& r) {
    json other = json::object();
    for (const auto& [name, v] : r.quality.other_scores) {
        other[name] = format_g17(v);
    }
    return json{
        {"key",
         {{"canonical_name", r.key.canonical_name},
          {"canonical_precision", r.key.canonical_precision}}},
        {"perf",
         {{"model_name", r.perf.model_name},
          {"precision", r.perf.precision},
          {"gpu", r.perf.gpu},
          {"prefill_latency_s_per_token", format_g17(r.perf.prefill_latency_s_per_token)},
          {"decode_latency_s_per_token", format_g17(r.perf.decode_latency_s_per_token)},
          {"prefill_energy_j_per_token", format_g17(r.perf.prefill_energy_j_per_token)},
          {"decode_energy_j_per_token", format_g17(r.perf.decode_energy_j_per_token)},
          {"model_size_b", format_g17(r.perf.model_size_b)},
          {"bench_input_tokens", format_g17(r.perf.bench_input_tokens)},
          {"bench_output_tokens", format_g17(r.perf.bench_output_tokens)}}},
        {"quality",
         {{"model_name", r.quality.model_name},
          {"precision", r.quality.precision},
          {"bbh", format_g17(r.quality.bbh)},
          {"mmlu_pro", format_g17(r.quality.mmlu_pro)},
          {"other_scores", other}}},
    };
}

double number_field(const json& obj, const char* field) {
    if (!obj.contains(field)) {
        throw DataError(std::string("dataset: missing field '") + field + "'");
    }
    return parse_double_strict(obj.at(field).get<std::string>());
}

MergedRecord record_from_json(const json& j) {
    MergedRecord r;
    const json& key = j.at("key");
    r.key.canonical_name = key.at("canonical_name").get<std::string>();
    r.key.canonical_precision = key.at("canonical_precision").get<std::string>();
    const json& perf = j.at("perf");
    r.perf.model_name = perf.at("model_name").get<std::string>();
    r.perf.precision = perf.at("precision").get<std::string>();
    r.perf.gpu = perf.at("gpu").get<std::string>();
    r.perf.prefill_latency_s_per_token = number_field(perf, "prefill_latency_s_per_token");
    r.perf.decode_latency_s_per_token = number_field(perf, "decode_latency_s_per_token");
    r.perf.prefill_energy_j_per_token = number_field(perf, "prefill_energy_j_per_token");
    r.perf.decode_energy_j_per_token = number_field(perf, "decode_energy_j_per_token");
    r.perf.model_size_b = number_field(perf, "model_size_b");
    r.perf.bench_input_tokens = number_field(perf, "bench_input_tokens");
    r.perf.bench_output_tokens = number_field(perf, "bench_output_tokens");
    const json& quality = j.at("quality");
    r.quality.model_name = quality.at("model_name").get<std::string>();
    r.quality.precision = quality.at("precision").get<std::string>();
    r.quality.bbh = number_field(quality, "bbh");
    r.quality.mmlu_pro = number_field(quality, "mmlu_pro");
    for (const auto& [name, v] : quality.at("other_scores").items()) {
        r.quality.other_scores.emplace(name, parse_double_strict(v.get<std::string>()));
    }
    return r;
}

} // namespace

std::string dataset_to_text(const std::vector<MergedRecord>& records) {
    json doc;
    doc["format_version"] = kDatasetFormatVersion;
    json rows = json::array();
    for (const auto& r : records) {
        rows.push_back(record_to_json(r));
    }
    doc["records"] = std::move(rows);
    return doc.dump(1) + "\n";
}

std::vector<MergedRecord> dataset_from_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("dataset: invalid document: ") + e.what());
    }
    try {
        if (!doc.contains("format_version") || !doc.at("format_version").is_number_integer()) {
            throw DataError("dataset: missing format_version");
        }
        int version = doc.at("format_version").get<int>();
        if (version != kDatasetFormatVersion) {
            throw DataError("dataset: unsupported format_version " + std::to_string(version));
        }
        std::vector<MergedRecord> records;
        for (const auto& j : doc.at("records")) {
            records.push_back(record_from_json(j));
        }
        return records;
    } catch (const json::exception& e) {
        throw DataError(std::string("dataset: malformed record: ") + e.what());
    }
}

void write_dataset(const std::string& path, const std::vector<MergedRecord>& records) {
    write_file(path, dataset_to_text(records));
}

std::vector<MergedRecord> read_dataset(const std::string& path) {
    return dataset_from_text(read_file(path));
}

} // namespace seal
