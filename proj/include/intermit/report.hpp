#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "intermit/classify.hpp"
#include "intermit/night.hpp"
#include "intermit/scoring.hpp"
#include "intermit/store.hpp"
#include "intermit/verdicts.hpp"

namespace intermit {

enum class AnnotationStatus { Fixed, MultipleRootCauses, UnderInvestigation, UnknownFix };

std::string to_string(AnnotationStatus status);
std::optional<AnnotationStatus> parse_annotation_status(const std::string& token);

/// Root-cause record for one investigated test case. fix_id is shared by
/// all test cases repaired by one fix — those count as duplicates when
/// fixes are tallied — and is required when status is fixed.
struct Annotation {
    TestCaseKey key;
    std::string category;  // leaf path, e.g. "Test System Issues / I/O relay"
    std::string fix_id;
    AnnotationStatus status = AnnotationStatus::Fixed;
    std::string note;
};

/// Category paths join levels with " / " (spaces matter: category names may
/// themselves contain a bare slash, as in "I/O relay").
inline constexpr const char* kCategorySeparator = " / ";

struct Taxonomy {
    struct Node {
        std::string name;
        std::vector<Node> children;
    };
    std::vector<Node> roots;
};

/// Names must be non-empty, free of the path separator, and unique per
/// level; otherwise ConfigError. Only two levels are supported.
void validate_taxonomy(const Taxonomy& taxonomy);

/// The built-in root-cause taxonomy: five investigated categories with
/// their subcategories, plus the remaining intermittence factors as
/// subcategory-free categories.
Taxonomy default_taxonomy();

/// Addressable category paths, in taxonomy order: "Root / Child" for every
/// child, plus bare "Root" for childless roots.
std::vector<std::string> taxonomy_leaf_paths(const Taxonomy& taxonomy);

/// JSONL annotations: system, script, params, category, status, fix_id
/// (required when fixed), note (optional). Malformed lines → ParseError.
std::vector<Annotation> parse_annotations(const std::string& text);

/// Taxonomy config: {"categories": [{"name": ..., "children": [...]}]}.
Taxonomy parse_taxonomy(const std::string& json_text);

struct LedgerRow {
    enum class Kind { Category, Subcategory, Status };
    Kind kind = Kind::Category;
    std::string name;
    std::string parent;  // owning category for subcategory rows
    std::vector<std::size_t> group_counts;
    std::size_t total_tests = 0;    // distinct annotated test cases
    std::size_t distinct_fixes = 0; // distinct fix ids (0 for status rows)
};

/// Root-cause counts per group. Category rows are column-wise sums of
/// their subcategory rows; status rows tally the not-fixed annotations.
/// total_tests deduplicates by test case, while fixes shared across test
/// cases are counted once in distinct_fixes.
struct Ledger {
    std::vector<std::string> group_labels;
    std::vector<LedgerRow> rows;  // zero rows omitted
    std::size_t annotated_tests = 0;
    std::size_t fixed_tests = 0;
    std::size_t distinct_fixes = 0;
    std::size_t duplicate_fix_tests = 0;  // fixed_tests - distinct_fixes
};

/// Annotations must name taxonomy leaf paths (UnknownCategory otherwise).
/// Keys that were classified into no group still count toward totals;
/// their group columns stay zero.
Ledger ledger_report(const ClassifyResult& classification,
                     const std::vector<Annotation>& annotations, const Taxonomy& taxonomy);

std::string render_ledger_text(const Ledger& ledger);
std::string render_ledger_markdown(const Ledger& ledger);

/// Fixed accessible palette (Okabe-Ito hues) shared by every renderer.
namespace palette {
inline constexpr const char* kPass = "#009E73";
inline constexpr const char* kFail = "#D55E00";
inline constexpr const char* kInvalid = "#E69F00";
inline constexpr const char* kAbsent = "#CCCCCC";
inline constexpr const char* kSeries[] = {"#0072B2", "#CC79A7", "#56B4E9", "#882255"};
}  // namespace palette

/// Plot transform of the timeline renderer, exposed so tests can verify
/// that every rendered coordinate is a pure function of sidecar values.
double timeline_x(std::size_t index, std::size_t count);
double timeline_y(double score);

/// Verdict marks plus overlaid q (dashed) and p (dotted) curves per window
/// size, as a standalone SVG document, with every plotted number repeated
/// exactly in a JSONL sidecar. A series whose history is shorter than its
/// window renders no curve and states that in the legend.
struct TimelineReport {
    std::string svg;
    std::string sidecar_jsonl;
};

/// Series must have been computed from `history` (point counts and window
/// indices are checked; SeriesMismatch otherwise). Empty history → EmptyWindow.
TimelineReport timeline_report(const VerdictHistory& history,
                               const std::vector<ScoreSeries>& series_list);

/// Night-by-test verdict grid: rows = test cases sorted by key, columns =
/// nights of the (inclusive) range; executions absent on a night get their
/// own color. Sidecar is the same matrix as CSV.
struct HeatmapReport {
    std::string svg;
    std::string sidecar_csv;
};

HeatmapReport heatmap_report(const Dataset& dataset, Night from, Night to);
/// Full night span of the dataset.
HeatmapReport heatmap_report(const Dataset& dataset);

/// Population statistics, group sizes (as counts and as fractions of both
/// the population and the classifiable tests), overlap matrix and
/// group-count histogram, as aligned plain text and as Markdown.
struct SummaryReport {
    std::string text;
    std::string markdown;
};

SummaryReport summary_report(const PopulationSummary& population,
                             const ClassifyResult& classification);

}  // namespace intermit
