#include "intermit/store.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <json.hpp>

#include "intermit/errors.hpp"
#include "intermit/textio.hpp"

namespace intermit {

namespace {

constexpr const char* kRecordHeader = "night,system,script,params,verdict";
constexpr const char* kRevisionHeader = "night,sw_revision,tw_revision";

// Line breaks inside key fields would make the line-based CSV form
// ambiguous, breaking the export/ingest round trip.
void validate_key_fields(const TestCaseKey& key) {
    for (const std::string* field :
         {&key.test_system, &key.test_script, &key.parameter_setting}) {
        if (field->find('\n') != std::string::npos || field->find('\r') != std::string::npos)
            throw DataError("test case key fields must not contain line breaks");
    }
}

}  // namespace

std::optional<RecordFormat> parse_record_format(const std::string& token) {
    if (token == "jsonl") return RecordFormat::Jsonl;
    if (token == "csv") return RecordFormat::Csv;
    return std::nullopt;
}

std::string to_string(RecordFormat format) {
    return format == RecordFormat::Jsonl ? "jsonl" : "csv";
}

const VerdictHistory* Dataset::find(const TestCaseKey& key) const {
    const auto it = std::lower_bound(
        histories.begin(), histories.end(), key,
        [](const VerdictHistory& h, const TestCaseKey& k) { return h.key < k; });
    if (it == histories.end() || it->key != key) return nullptr;
    return &*it;
}

std::size_t Dataset::total_verdicts() const {
    std::size_t total = 0;
    for (const VerdictHistory& history : histories) total += history.size();
    return total;
}

bool Dataset::content_equals(const Dataset& other) const {
    if (nights != other.nights || histories.size() != other.histories.size()) return false;
    for (std::size_t i = 0; i < histories.size(); ++i) {
        const VerdictHistory& a = histories[i];
        const VerdictHistory& b = other.histories[i];
        if (a.key != b.key || a.nights != b.nights || a.verdicts != b.verdicts) return false;
    }
    return true;
}

Dataset dataset_from_records(std::vector<VerdictRecord> records, std::string provenance) {
    std::sort(records.begin(), records.end(), [](const VerdictRecord& a, const VerdictRecord& b) {
        return std::tie(a.key, a.night, a.verdict) < std::tie(b.key, b.night, b.verdict);
    });

    Dataset dataset;
    dataset.provenance = std::move(provenance);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const VerdictRecord& record = records[i];
        if (i > 0 && record.key == records[i - 1].key && record.night == records[i - 1].night) {
            if (record.verdict == records[i - 1].verdict) continue;  // idempotent duplicate
            throw ConflictingVerdict("conflicting verdicts for " + record.key.test_system + "/" +
                                     record.key.test_script + "/" + record.key.parameter_setting +
                                     " on " + record.night.to_string());
        }
        if (dataset.histories.empty() || dataset.histories.back().key != record.key) {
            validate_key_fields(record.key);
            dataset.histories.emplace_back();
            dataset.histories.back().key = record.key;
        }
        dataset.histories.back().append(record.night, record.verdict);
        dataset.nights.push_back(record.night);
    }
    std::sort(dataset.nights.begin(), dataset.nights.end());
    dataset.nights.erase(std::unique(dataset.nights.begin(), dataset.nights.end()),
                         dataset.nights.end());
    return dataset;
}

Dataset dataset_from_histories(std::vector<VerdictHistory> histories, std::string provenance) {
    std::sort(histories.begin(), histories.end(),
              [](const VerdictHistory& a, const VerdictHistory& b) { return a.key < b.key; });
    Dataset dataset;
    dataset.provenance = std::move(provenance);
    for (std::size_t i = 0; i < histories.size(); ++i) {
        validate_key_fields(histories[i].key);
        if (i > 0 && histories[i].key == histories[i - 1].key)
            throw DataError("duplicate test case key: " + histories[i].key.test_system + "/" +
                            histories[i].key.test_script + "/" +
                            histories[i].key.parameter_setting);
        for (Night night : histories[i].nights) dataset.nights.push_back(night);
    }
    dataset.histories = std::move(histories);
    std::sort(dataset.nights.begin(), dataset.nights.end());
    dataset.nights.erase(std::unique(dataset.nights.begin(), dataset.nights.end()),
                         dataset.nights.end());
    return dataset;
}

namespace {

Night parse_night_field(const std::string& text, std::size_t line_no) {
    const auto night = Night::parse(text);
    if (!night) throw ParseError(line_no, "bad date '" + text + "' (want YYYY-MM-DD)");
    return *night;
}

Verdict parse_verdict_field(const std::string& text, std::size_t line_no) {
    const auto verdict = parse_verdict(text);
    if (!verdict)
        throw ParseError(line_no, "bad verdict '" + text + "' (want pass, fail or invalid)");
    return *verdict;
}

std::string json_string_field(const nlohmann::json& object, const char* field,
                              std::size_t line_no) {
    const auto it = object.find(field);
    if (it == object.end()) throw ParseError(line_no, std::string("missing field '") + field + "'");
    if (!it->is_string())
        throw ParseError(line_no, std::string("field '") + field + "' must be a string");
    return it->get<std::string>();
}

VerdictRecord record_from_json_line(std::string_view line, std::size_t line_no) {
    nlohmann::json object;
    try {
        object = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!object.is_object()) throw ParseError(line_no, "record must be a JSON object");
    for (const auto& [field, value] : object.items()) {
        (void)value;
        if (field != "night" && field != "system" && field != "script" && field != "params" &&
            field != "verdict")
            throw ParseError(line_no, "unexpected field '" + field + "'");
    }
    VerdictRecord record;
    record.night = parse_night_field(json_string_field(object, "night", line_no), line_no);
    record.key.test_system = json_string_field(object, "system", line_no);
    record.key.test_script = json_string_field(object, "script", line_no);
    record.key.parameter_setting = json_string_field(object, "params", line_no);
    record.verdict = parse_verdict_field(json_string_field(object, "verdict", line_no), line_no);
    return record;
}

}  // namespace

Dataset ingest(const std::string& text, RecordFormat format, std::string provenance) {
    std::vector<VerdictRecord> records;
    const std::vector<std::string_view> lines = split_lines(text);

    if (format == RecordFormat::Jsonl) {
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            records.push_back(record_from_json_line(lines[i], i + 1));
        }
    } else {
        bool saw_header = false;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            if (!saw_header) {
                if (lines[i] != kRecordHeader)
                    throw ParseError(i + 1, std::string("bad header (want '") + kRecordHeader +
                                                "')");
                saw_header = true;
                continue;
            }
            std::vector<std::string> fields = split_csv_line(lines[i], i + 1);
            if (fields.size() != 5)
                throw ParseError(i + 1, "want 5 fields, got " + std::to_string(fields.size()));
            VerdictRecord record;
            record.night = parse_night_field(fields[0], i + 1);
            record.key.test_system = std::move(fields[1]);
            record.key.test_script = std::move(fields[2]);
            record.key.parameter_setting = std::move(fields[3]);
            record.verdict = parse_verdict_field(fields[4], i + 1);
            records.push_back(std::move(record));
        }
    }
    return dataset_from_records(std::move(records), std::move(provenance));
}

std::string export_records(const Dataset& dataset, RecordFormat format) {
    std::string out;
    if (format == RecordFormat::Csv) {
        out += kRecordHeader;
        out += '\n';
    }
    for (const VerdictHistory& history : dataset.histories) {
        for (std::size_t i = 0; i < history.size(); ++i) {
            if (format == RecordFormat::Jsonl) {
                nlohmann::ordered_json line;
                line["night"] = history.nights[i].to_string();
                line["system"] = history.key.test_system;
                line["script"] = history.key.test_script;
                line["params"] = history.key.parameter_setting;
                line["verdict"] = to_string(history.verdicts[i]);
                out += line.dump();
            } else {
                out += history.nights[i].to_string();
                out += ',';
                out += csv_quote(history.key.test_system);
                out += ',';
                out += csv_quote(history.key.test_script);
                out += ',';
                out += csv_quote(history.key.parameter_setting);
                out += ',';
                out += to_string(history.verdicts[i]);
            }
            out += '\n';
        }
    }
    return out;
}

VerdictHistory query_history(const Dataset& dataset, const TestCaseKey& key) {
    const VerdictHistory* history = dataset.find(key);
    if (history != nullptr) return *history;
    VerdictHistory empty;
    empty.key = key;
    return empty;
}

std::vector<VerdictRecord> query_night(const Dataset& dataset, Night night) {
    std::vector<VerdictRecord> records;
    for (const VerdictHistory& history : dataset.histories) {
        const auto it = std::lower_bound(history.nights.begin(), history.nights.end(), night);
        if (it != history.nights.end() && *it == night) {
            const auto index = static_cast<std::size_t>(it - history.nights.begin());
            records.push_back({history.key, night, history.verdicts[index]});
        }
    }
    return records;
}

RevisionLog parse_revision_log(const std::string& text, RecordFormat format) {
    RevisionLog log;
    const std::vector<std::string_view> lines = split_lines(text);
    bool saw_header = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        RevisionEntry entry;
        if (format == RecordFormat::Jsonl) {
            nlohmann::json object;
            try {
                object = nlohmann::json::parse(lines[i]);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(i + 1, std::string("invalid JSON: ") + e.what());
            }
            if (!object.is_object()) throw ParseError(i + 1, "record must be a JSON object");
            entry.night = parse_night_field(json_string_field(object, "night", i + 1), i + 1);
            entry.sw_revision = json_string_field(object, "sw_revision", i + 1);
            entry.tw_revision = json_string_field(object, "tw_revision", i + 1);
        } else {
            if (!saw_header) {
                if (lines[i] != kRevisionHeader)
                    throw ParseError(i + 1, std::string("bad header (want '") + kRevisionHeader +
                                                "')");
                saw_header = true;
                continue;
            }
            std::vector<std::string> fields = split_csv_line(lines[i], i + 1);
            if (fields.size() != 3)
                throw ParseError(i + 1, "want 3 fields, got " + std::to_string(fields.size()));
            entry.night = parse_night_field(fields[0], i + 1);
            entry.sw_revision = std::move(fields[1]);
            entry.tw_revision = std::move(fields[2]);
        }
        if (!log.entries.empty() && entry.night <= log.entries.back().night)
            throw ParseError(i + 1, "nights must be strictly ascending");
        log.entries.push_back(std::move(entry));
    }
    return log;
}

std::string export_revision_log(const RevisionLog& log, RecordFormat format) {
    std::string out;
    if (format == RecordFormat::Csv) {
        out += kRevisionHeader;
        out += '\n';
    }
    for (const RevisionEntry& entry : log.entries) {
        if (format == RecordFormat::Jsonl) {
            nlohmann::ordered_json line;
            line["night"] = entry.night.to_string();
            line["sw_revision"] = entry.sw_revision;
            line["tw_revision"] = entry.tw_revision;
            out += line.dump();
        } else {
            out += entry.night.to_string();
            out += ',';
            out += csv_quote(entry.sw_revision);
            out += ',';
            out += csv_quote(entry.tw_revision);
        }
        out += '\n';
    }
    return out;
}

namespace {

RunStats stats_from_runs(std::vector<std::uint64_t> runs) {
    std::sort(runs.begin(), runs.end());
    RunStats stats;
    stats.min = runs.front();
    stats.max = runs.back();
    const std::size_t n = runs.size();
    double sum = 0.0;
    for (std::uint64_t r : runs) sum += static_cast<double>(r);
    stats.mean = sum / static_cast<double>(n);
    stats.median = n % 2 == 1 ? static_cast<double>(runs[n / 2])
                              : (static_cast<double>(runs[n / 2 - 1]) +
                                 static_cast<double>(runs[n / 2])) /
                                    2.0;
    double squares = 0.0;
    for (std::uint64_t r : runs) {
        const double d = static_cast<double>(r) - stats.mean;
        squares += d * d;
    }
    stats.std_population = std::sqrt(squares / static_cast<double>(n));
    stats.std_sample = n > 1 ? std::sqrt(squares / static_cast<double>(n - 1)) : 0.0;
    return stats;
}

template <class Projector>
RunStats run_stats_for(const std::vector<RevisionEntry>& entries, Projector&& id_of) {
    std::vector<std::uint64_t> runs;
    std::uint64_t current = 1;
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (id_of(entries[i]) == id_of(entries[i - 1])) {
            ++current;
        } else {
            runs.push_back(current);
            current = 1;
        }
    }
    runs.push_back(current);
    return stats_from_runs(std::move(runs));
}

}  // namespace

RunLengthStats run_length_stats(const RevisionLog& log) {
    if (log.entries.empty()) throw EmptyLog();
    RunLengthStats stats;
    stats.sw = run_stats_for(log.entries, [](const RevisionEntry& e) { return e.sw_revision; });
    stats.tw = run_stats_for(log.entries, [](const RevisionEntry& e) { return e.tw_revision; });
    stats.both = run_stats_for(log.entries, [](const RevisionEntry& e) {
        return e.sw_revision + '\x1f' + e.tw_revision;
    });
    return stats;
}

}  // namespace intermit
