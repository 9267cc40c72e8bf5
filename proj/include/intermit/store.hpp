#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "intermit/night.hpp"
#include "intermit/verdicts.hpp"

namespace intermit {

enum class RecordFormat { Jsonl, Csv };

std::optional<RecordFormat> parse_record_format(const std::string& token);
std::string to_string(RecordFormat format);

/// An immutable corpus of verdict histories. Histories are sorted by key;
/// `nights` is the sorted set of nights on which anything at all ran.
struct Dataset {
    std::vector<VerdictHistory> histories;
    std::vector<Night> nights;
    std::string provenance;

    const VerdictHistory* find(const TestCaseKey& key) const;
    std::size_t total_verdicts() const;

    /// Field-for-field equality of records; provenance is a description of
    /// where the data came from, not part of the data.
    bool content_equals(const Dataset& other) const;
};

/// Builds a dataset from loose records. Records may arrive in any order;
/// duplicates of the same (key, night, verdict) collapse to one record,
/// while the same (key, night) with two different verdicts throws
/// ConflictingVerdict.
Dataset dataset_from_records(std::vector<VerdictRecord> records, std::string provenance);

/// Wraps pre-built histories (e.g. simulator output). Keys must be unique.
Dataset dataset_from_histories(std::vector<VerdictHistory> histories, std::string provenance);

/// Parses line-delimited verdict records. JSONL objects carry the fields
/// night, system, script, params, verdict; the CSV variant uses exactly
/// that header. Malformed lines throw ParseError(line, reason).
Dataset ingest(const std::string& text, RecordFormat format, std::string provenance = "");

/// Inverse of ingest, bit-exact: records sorted by key then night, LF line
/// endings, fields in the documented order.
std::string export_records(const Dataset& dataset, RecordFormat format);

/// Missing keys and nights yield empty results, not errors.
VerdictHistory query_history(const Dataset& dataset, const TestCaseKey& key);
std::vector<VerdictRecord> query_night(const Dataset& dataset, Night night);

/// One night of the revision streams: which software build and which
/// testware revision were in service.
struct RevisionEntry {
    Night night;
    std::string sw_revision;
    std::string tw_revision;

    bool operator==(const RevisionEntry&) const = default;
};

struct RevisionLog {
    std::vector<RevisionEntry> entries;  // strictly ascending nights

    bool operator==(const RevisionLog&) const = default;
};

/// Fields night, sw_revision, tw_revision (JSONL keys / CSV header).
RevisionLog parse_revision_log(const std::string& text, RecordFormat format);
std::string export_revision_log(const RevisionLog& log, RecordFormat format);

/// Five-number statistics over run lengths. The median of an even count is
/// the mean of the two central values. Both standard-deviation conventions
/// are exposed; the population form is the primary one.
struct RunStats {
    std::uint64_t min = 0;
    std::uint64_t max = 0;
    double mean = 0.0;
    double median = 0.0;
    double std_population = 0.0;
    double std_sample = 0.0;  // 0 for a single run

    bool operator==(const RunStats&) const = default;
};

struct RunLengthStats {
    RunStats sw;
    RunStats tw;
    RunStats both;  // runs where the (sw, tw) pair stayed identical
};

/// Runs are maximal blocks of consecutive log entries with an identical
/// revision id; a missing calendar night between entries does NOT break a
/// run (runs count log entries, not calendar days). Throws EmptyLog.
RunLengthStats run_length_stats(const RevisionLog& log);

}  // namespace intermit
