#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "intermit/scoring.hpp"
#include "intermit/verdicts.hpp"

namespace intermit {

enum class GroupKind { Intermittent, Consistent };

// A named membership rule over a fixed window size. Intermittent specs fire
// on a high change-rate window (q >= q_min); consistent specs fire on a deep
// pass-rate dip (p < p_dip_max) and additionally require the test NOT to be a
// member of the same-window intermittent spec. Both demand recovery: the last
// full window's p-score must reach p_final_min.
struct GroupSpec {
    std::string label;
    GroupKind kind = GroupKind::Intermittent;
    int window_size = 0;
    double q_min = 0.0;        // intermittent only, inclusive
    double p_dip_max = 0.0;    // consistent only, strict
    double p_final_min = 0.0;  // inclusive
};

// A6, A13, B6, B13 with the default thresholds.
std::vector<GroupSpec> default_group_specs();

struct Evidence {
    bool member = false;
    bool insufficient_data = false;  // history shorter than the window
    // Index of the last verdict of the first window that met the trigger
    // condition, plus the score that met it. Unset when not a member.
    std::optional<std::size_t> trigger_window_end;
    std::optional<Score> trigger_score;
    std::optional<Score> final_window_p;  // p of the last full window
    std::string reason;
};

// Evaluates one spec against one history. Consistent specs need their
// same-window intermittent partner to apply the exclusion; passing nullptr
// for one throws MissingExclusionPartner.
Evidence classify_one(const VerdictHistory& history, const GroupSpec& spec,
                      const GroupSpec* exclusion_partner = nullptr);

struct Classification {
    TestCaseKey key;
    std::size_t executions = 0;
    std::vector<std::string> groups;  // labels in spec order
    std::map<std::string, Evidence> evidence;
};

struct OverlapReport {
    std::vector<std::string> labels;
    // counts[i][j]: tests in both labels[i] and labels[j]; diagonal = group size.
    std::vector<std::vector<std::size_t>> counts;
    // k_histogram[k]: tests that are members of exactly k groups (k >= 1).
    std::map<std::size_t, std::size_t> k_histogram;
};

struct ClassifyResult {
    std::vector<Classification> classified;  // only tests with >= 1 group, sorted by key
    std::size_t population = 0;              // all histories seen
    std::size_t classifiable = 0;            // histories long enough for some window
    OverlapReport overlap;
};

// Runs every spec against every history. Validates the spec set up front:
// distinct labels, each consistent spec preceded by a same-window
// intermittent spec acting as its exclusion partner.
ClassifyResult classify_all(const std::vector<VerdictHistory>& histories,
                            const std::vector<GroupSpec>& specs);

struct StatFive {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double std_dev = 0.0;  // population form
};

struct PopulationSummary {
    std::size_t tests = 0;                    // all tests
    std::size_t scored_tests = 0;             // tests with >= 2 executions
    std::size_t excluded_single_execution_tests = 0;
    std::uint64_t verdicts = 0;
    std::map<Verdict, std::uint64_t> verdict_counts;
    std::map<Verdict, double> verdict_fractions;
    StatFive full_p;       // over scored tests
    StatFive full_q;       // over scored tests
    StatFive executions;   // over all tests
    double fraction_nonzero_q = 0.0;  // of scored tests
};

// Full-sequence p/q statistics over a population. Tests with a single
// execution have no transitions, hence no q; they are excluded from the
// p/q statistics (but counted, and included in the verdict distribution
// and execution-count statistics).
PopulationSummary summarize_population(const std::vector<VerdictHistory>& histories);

StatFive stat_five(std::vector<double> values);  // throws EmptyWindow on empty input

}  // namespace intermit
