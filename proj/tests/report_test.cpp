#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include <json.hpp>

#include "intermit/classify.hpp"
#include "intermit/errors.hpp"
#include "intermit/report.hpp"
#include "intermit/scoring.hpp"
#include "intermit/store.hpp"
#include "intermit/textio.hpp"
#include "testutil.hpp"

using namespace intermit;
using testutil::make_history;
using testutil::verdicts_from_string;

namespace {

std::size_t count_of(const std::string& haystack, const std::string& needle) {
    std::size_t count = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + needle.size()))
        ++count;
    return count;
}

std::vector<Verdict> a6_shape() {
    auto sequence = verdicts_from_string("P F P F");
    sequence.insert(sequence.end(), 36, Verdict::Pass);
    return sequence;
}

std::vector<Verdict> a6_a13_shape() {
    std::vector<Verdict> sequence;
    for (int i = 0; i < 12; ++i)
        sequence.push_back(i % 2 == 0 ? Verdict::Pass : Verdict::Fail);
    sequence.insert(sequence.end(), 30, Verdict::Pass);
    return sequence;
}

std::vector<Verdict> b6_b13_shape() {
    std::vector<Verdict> sequence(13, Verdict::Fail);
    sequence.insert(sequence.end(), 30, Verdict::Pass);
    return sequence;
}

std::vector<Verdict> b6_only_shape() {
    std::vector<Verdict> sequence(10, Verdict::Pass);
    sequence.insert(sequence.end(), 6, Verdict::Fail);
    sequence.insert(sequence.end(), 24, Verdict::Pass);
    return sequence;
}

Annotation note(const TestCaseKey& key, const std::string& category, AnnotationStatus status,
                const std::string& fix = "") {
    return {key, category, fix, status, ""};
}

}  // namespace

TEST_CASE("the default taxonomy validates and exposes leaf paths") {
    const Taxonomy taxonomy = default_taxonomy();
    CHECK_NOTHROW(validate_taxonomy(taxonomy));
    const auto leaves = taxonomy_leaf_paths(taxonomy);
    const std::set<std::string> leaf_set(leaves.begin(), leaves.end());
    CHECK(leaf_set.count("HW Allocation / link breaker") == 1);
    CHECK(leaf_set.count("TC Assumptions / lib. version") == 1);
    CHECK(leaf_set.count("Test System Issues / I/O relay") == 1);
    CHECK(leaf_set.count("Code Maintenance / forgotten patch") == 1);
    CHECK(leaf_set.count("Network Issues") == 1);  // childless root is its own leaf
    CHECK(leaf_set.count("HW Allocation") == 0);   // parents are not leaves
    CHECK(leaves.size() == 25);
}

TEST_CASE("taxonomy validation catches structural mistakes") {
    Taxonomy duplicate_roots;
    duplicate_roots.roots = {{"A", {}}, {"A", {}}};
    CHECK_THROWS_AS(validate_taxonomy(duplicate_roots), ConfigError);

    Taxonomy duplicate_children;
    duplicate_children.roots = {{"A", {{"x", {}}, {"x", {}}}}};
    CHECK_THROWS_AS(validate_taxonomy(duplicate_children), ConfigError);

    Taxonomy three_levels;
    three_levels.roots = {{"A", {{"x", {{"y", {}}}}}}};
    CHECK_THROWS_AS(validate_taxonomy(three_levels), ConfigError);

    Taxonomy separator_in_name;
    separator_in_name.roots = {{"A / B", {}}};
    CHECK_THROWS_AS(validate_taxonomy(separator_in_name), ConfigError);

    Taxonomy bare_slash_is_fine;
    bare_slash_is_fine.roots = {{"I/O", {}}};
    CHECK_NOTHROW(validate_taxonomy(bare_slash_is_fine));
}

TEST_CASE("taxonomy JSON parses and rejects malformed documents") {
    const Taxonomy taxonomy = parse_taxonomy(
        R"({"categories": [{"name": "A", "children": ["x", "y"]}, {"name": "B"}]})");
    REQUIRE(taxonomy.roots.size() == 2);
    CHECK(taxonomy.roots[0].children.size() == 2);
    CHECK(taxonomy_leaf_paths(taxonomy) ==
          std::vector<std::string>{"A / x", "A / y", "B"});
    CHECK_THROWS_AS(parse_taxonomy("nope"), ConfigError);
    CHECK_THROWS_AS(parse_taxonomy(R"({"categories": [{"noname": 1}]})"), ConfigError);
}

TEST_CASE("annotations parse from JSONL with per-line errors") {
    const std::string text =
        R"({"system":"s","script":"t1","params":"d","category":"Network Issues","status":"fixed","fix_id":"F1"})"
        "\n"
        R"({"system":"s","script":"t2","params":"d","category":"HW Allocation / link breaker","status":"under_investigation","note":"cable"})"
        "\n";
    const auto annotations = parse_annotations(text);
    REQUIRE(annotations.size() == 2);
    CHECK(annotations[0].status == AnnotationStatus::Fixed);
    CHECK(annotations[0].fix_id == "F1");
    CHECK(annotations[1].status == AnnotationStatus::UnderInvestigation);
    CHECK(annotations[1].note == "cable");

    const auto line_of = [](const std::string& bad) {
        try {
            parse_annotations(bad);
        } catch (const ParseError& e) {
            return e.line;
        }
        return std::size_t{0};
    };
    CHECK(line_of("{\n") == 1);
    CHECK(line_of(R"({"system":"s","script":"t","params":"d","status":"fixed","fix_id":"F"})"
                  "\n") == 1);  // no category
    CHECK(line_of(
              R"({"system":"s","script":"t","params":"d","category":"Network Issues","status":"odd"})"
              "\n") == 1);
    CHECK(line_of(
              R"({"system":"s","script":"t","params":"d","category":"Network Issues","status":"fixed"})"
              "\n") == 1);  // fixed without fix_id
}

TEST_CASE("annotation status names round-trip") {
    for (const AnnotationStatus status :
         {AnnotationStatus::Fixed, AnnotationStatus::MultipleRootCauses,
          AnnotationStatus::UnderInvestigation, AnnotationStatus::UnknownFix})
        CHECK(parse_annotation_status(to_string(status)) == status);
    CHECK_FALSE(parse_annotation_status("wontfix").has_value());
}

TEST_CASE("the ledger tallies distinct tests per group with shared fixes counted once") {
    // the published example row: five distinct tests, one shared fix,
    // spread (4, 4, 1, 0) over A6/A13/B6/B13, distinct total 5
    std::vector<VerdictHistory> histories;
    std::vector<Annotation> annotations;
    for (int i = 0; i < 4; ++i) {
        const TestCaseKey key{"rig", "flaky" + std::to_string(i), "d"};
        histories.push_back(make_history(key, a6_a13_shape()));
        annotations.push_back(
            note(key, "HW Allocation / link breaker", AnnotationStatus::Fixed, "FIX-0042"));
    }
    const TestCaseKey dipper{"rig", "dipper", "d"};
    histories.push_back(make_history(dipper, b6_only_shape()));
    annotations.push_back(
        note(dipper, "HW Allocation / link breaker", AnnotationStatus::Fixed, "FIX-0042"));

    const ClassifyResult result = classify_all(histories, default_group_specs());
    const Ledger ledger = ledger_report(result, annotations, default_taxonomy());

    CHECK(ledger.group_labels == std::vector<std::string>{"A6", "A13", "B6", "B13"});
    REQUIRE(ledger.rows.size() == 2);  // category + one subcategory
    const LedgerRow& category = ledger.rows[0];
    CHECK(category.kind == LedgerRow::Kind::Category);
    CHECK(category.name == "HW Allocation");
    const LedgerRow& row = ledger.rows[1];
    CHECK(row.kind == LedgerRow::Kind::Subcategory);
    CHECK(row.name == "link breaker");
    CHECK(row.parent == "HW Allocation");
    CHECK(row.group_counts == std::vector<std::size_t>{4, 4, 1, 0});
    CHECK(row.total_tests == 5);
    CHECK(row.distinct_fixes == 1);
    CHECK(category.group_counts == row.group_counts);
    CHECK(category.total_tests == 5);

    CHECK(ledger.annotated_tests == 5);
    CHECK(ledger.fixed_tests == 5);
    CHECK(ledger.distinct_fixes == 1);
    CHECK(ledger.duplicate_fix_tests == 4);
}

TEST_CASE("category rows are column-wise sums of their subcategory rows") {
    std::vector<VerdictHistory> histories{
        make_history({"r", "a", "d"}, a6_shape()),
        make_history({"r", "b", "d"}, b6_b13_shape()),
        make_history({"r", "c", "d"}, a6_a13_shape()),
    };
    const std::vector<Annotation> annotations{
        note({"r", "a", "d"}, "HW Allocation / link breaker", AnnotationStatus::Fixed, "F1"),
        note({"r", "b", "d"}, "HW Allocation / switch core", AnnotationStatus::Fixed, "F2"),
        note({"r", "c", "d"}, "HW Allocation / switch core", AnnotationStatus::Fixed, "F3"),
        // the same test under a second subcategory: sums count it twice
        note({"r", "a", "d"}, "HW Allocation / empty port", AnnotationStatus::Fixed, "F1"),
    };
    const ClassifyResult result = classify_all(histories, default_group_specs());
    const Ledger ledger = ledger_report(result, annotations, default_taxonomy());

    REQUIRE(ledger.rows.size() == 4);
    const LedgerRow& category = ledger.rows[0];
    REQUIRE(category.kind == LedgerRow::Kind::Category);
    std::vector<std::size_t> sums(ledger.group_labels.size(), 0);
    std::size_t total = 0;
    std::size_t fixes = 0;
    for (std::size_t r = 1; r < ledger.rows.size(); ++r) {
        REQUIRE(ledger.rows[r].kind == LedgerRow::Kind::Subcategory);
        REQUIRE(ledger.rows[r].parent == category.name);
        for (std::size_t g = 0; g < sums.size(); ++g)
            sums[g] += ledger.rows[r].group_counts[g];
        total += ledger.rows[r].total_tests;
        fixes += ledger.rows[r].distinct_fixes;
    }
    CHECK(category.group_counts == sums);
    CHECK(category.total_tests == total);
    CHECK(category.distinct_fixes == fixes);
    // subcategories appear in taxonomy order
    CHECK(ledger.rows[1].name == "link breaker");
    CHECK(ledger.rows[2].name == "switch core");
    CHECK(ledger.rows[3].name == "empty port");
    // distinct keys across the whole ledger, not row sums
    CHECK(ledger.annotated_tests == 3);
    CHECK(ledger.distinct_fixes == 3);
    CHECK(ledger.duplicate_fix_tests == 0);
}

TEST_CASE("non-fixed annotations land in status rows and skip the fix column") {
    std::vector<VerdictHistory> histories{make_history({"r", "a", "d"}, a6_shape())};
    const std::vector<Annotation> annotations{
        note({"r", "a", "d"}, "Network Issues", AnnotationStatus::UnderInvestigation),
        note({"r", "ghost", "d"}, "Resource Leaks", AnnotationStatus::UnknownFix),
        note({"r", "a", "d"}, "Complexity of Testing", AnnotationStatus::MultipleRootCauses),
    };
    const ClassifyResult result = classify_all(histories, default_group_specs());
    const Ledger ledger = ledger_report(result, annotations, default_taxonomy());

    REQUIRE(ledger.rows.size() == 3);
    CHECK(ledger.rows[0].kind == LedgerRow::Kind::Status);
    CHECK(ledger.rows[0].name == "Multiple Root Causes");
    CHECK(ledger.rows[0].group_counts == std::vector<std::size_t>{1, 0, 0, 0});
    CHECK(ledger.rows[1].name == "Under Investigation");
    CHECK(ledger.rows[1].group_counts == std::vector<std::size_t>{1, 0, 0, 0});
    CHECK(ledger.rows[2].name == "Unknown Fix");
    // unknown keys still count toward the total, with zero group columns
    CHECK(ledger.rows[2].group_counts == std::vector<std::size_t>{0, 0, 0, 0});
    CHECK(ledger.rows[2].total_tests == 1);
    CHECK(ledger.annotated_tests == 2);
    CHECK(ledger.fixed_tests == 0);
    CHECK(ledger.distinct_fixes == 0);
}

TEST_CASE("annotations must name taxonomy leaves") {
    const ClassifyResult result = classify_all({}, default_group_specs());
    CHECK_THROWS_AS(
        ledger_report(result, {note({"r", "a", "d"}, "HW Allocation", AnnotationStatus::Fixed,
                                    "F1")},
                      default_taxonomy()),
        UnknownCategory);
    CHECK_THROWS_AS(
        ledger_report(result, {note({"r", "a", "d"}, "Gremlins", AnnotationStatus::Fixed, "F1")},
                      default_taxonomy()),
        UnknownCategory);
}

TEST_CASE("ledger renderings carry the rows and totals") {
    std::vector<VerdictHistory> histories{make_history({"r", "a", "d"}, a6_shape())};
    const std::vector<Annotation> annotations{
        note({"r", "a", "d"}, "HW Allocation / link breaker", AnnotationStatus::Fixed, "F1")};
    const Ledger ledger = ledger_report(classify_all(histories, default_group_specs()),
                                        annotations, default_taxonomy());
    const std::string text = render_ledger_text(ledger);
    CHECK(text.find("root cause / fix") != std::string::npos);
    CHECK(text.find("- link breaker") != std::string::npos);
    CHECK(text.find("annotated test cases: 1") != std::string::npos);
    CHECK(text.find("distinct fixes: 1") != std::string::npos);
    const std::string md = render_ledger_markdown(ledger);
    CHECK(md.find("| HW Allocation |") != std::string::npos);
    CHECK(md.find("| - link breaker |") != std::string::npos);

    const Ledger empty = ledger_report(classify_all({}, default_group_specs()), {},
                                       default_taxonomy());
    CHECK(render_ledger_text(empty).find("(no annotations)") != std::string::npos);
}

TEST_CASE("timeline geometry is a plain affine map with a centered singleton") {
    CHECK(timeline_y(1.0) < timeline_y(0.0));
    CHECK(timeline_y(0.0) - timeline_y(1.0) == 240.0);
    CHECK(timeline_x(0, 2) < timeline_x(1, 2));
    CHECK(timeline_x(0, 1) == timeline_x(5, 1));  // singleton centers regardless of index
    // evenly spaced
    const double step = timeline_x(1, 11) - timeline_x(0, 11);
    for (std::size_t i = 1; i < 10; ++i)
        CHECK(timeline_x(i + 1, 11) - timeline_x(i, 11) == doctest::Approx(step).epsilon(1e-12));
}

TEST_CASE("the timeline sidecar holds exactly what the chart plots") {
    const VerdictHistory history = make_history("relay", "F P P F F P F F");
    const std::vector<ScoreSeries> series{windowed_scores(history, 3),
                                          windowed_scores(history, 6)};
    const TimelineReport report = timeline_report(history, series);

    std::size_t verdict_lines = 0;
    std::size_t score_lines = 0;
    for (const auto line : split_lines(report.sidecar_jsonl)) {
        const auto object = nlohmann::json::parse(line);
        if (object["record"] == "verdict") {
            ++verdict_lines;
            const auto index = object["index"].get<std::size_t>();
            CHECK(object["night"] == history.nights[index].to_string());
            CHECK(object["verdict"] == to_string(history.verdicts[index]));
        } else {
            REQUIRE(object["record"] == "score");
            ++score_lines;
            // the plotted coordinates derive from the sidecar numbers alone
            const auto end = object["window_end"].get<std::size_t>();
            const double x = timeline_x(end, history.size());
            const double yq = timeline_y(object["q"].get<double>());
            const double yp = timeline_y(object["p"].get<double>());
            CHECK(report.svg.find(format_double(x) + "," + format_double(yq)) !=
                  std::string::npos);
            CHECK(report.svg.find(format_double(x) + "," + format_double(yp)) !=
                  std::string::npos);
        }
    }
    CHECK(verdict_lines == history.size());
    CHECK(score_lines == series[0].points.size() + series[1].points.size());
}

TEST_CASE("timeline marks use one shape per verdict in the published colors") {
    const VerdictHistory history = make_history("relay", "F P P F F P F F I");
    const TimelineReport report =
        timeline_report(history, {windowed_scores(history, 3)});
    // one mark per verdict plus one legend sample each
    CHECK(count_of(report.svg, std::string("fill=\"") + palette::kPass + "\"") == 3 + 1);
    CHECK(count_of(report.svg, std::string("stroke=\"") + palette::kFail + "\"") == 5 + 1);
    CHECK(count_of(report.svg, std::string("fill=\"") + palette::kInvalid + "\"") == 1 + 1);
    CHECK(report.svg.find("stroke-dasharray=\"7 4\"") != std::string::npos);  // q style
    CHECK(report.svg.find("stroke-dasharray=\"2 5\"") != std::string::npos);  // p style
    CHECK(report.svg.find(history.nights.front().to_string()) != std::string::npos);
    CHECK(report.svg.find(history.nights.back().to_string()) != std::string::npos);
    CHECK(report.svg.rfind("</svg>\n") == report.svg.size() - 7);
}

TEST_CASE("timeline validation rejects series that do not match the history") {
    const VerdictHistory history = make_history("t", "P F P F P F");
    ScoreSeries series = windowed_scores(history, 3);
    series.points.pop_back();
    CHECK_THROWS_AS(timeline_report(history, {series}), SeriesMismatch);

    ScoreSeries shifted = windowed_scores(history, 3);
    for (ScorePoint& point : shifted.points) ++point.window_end;
    CHECK_THROWS_AS(timeline_report(history, {shifted}), SeriesMismatch);

    ScoreSeries narrow;
    narrow.window_size = 1;
    CHECK_THROWS_AS(timeline_report(history, {narrow}), WindowTooSmall);

    CHECK_THROWS_AS(timeline_report(VerdictHistory{}, {}), EmptyWindow);
}

TEST_CASE("short histories render marks with a note instead of curves") {
    const VerdictHistory history = make_history("t", "P F P");
    const TimelineReport report =
        timeline_report(history, {windowed_scores(history, 2), windowed_scores(history, 6)});
    CHECK(report.svg.find("w=6: history shorter than window") != std::string::npos);
    CHECK(count_of(report.svg, "<polyline") == 2);  // only the w=2 series draws q and p

    // a single-window series draws point markers rather than a polyline
    const VerdictHistory exact = make_history("t", "P F");
    const TimelineReport dots = timeline_report(exact, {windowed_scores(exact, 2)});
    CHECK(count_of(dots.svg, "<polyline") == 0);
    CHECK(count_of(dots.svg, "r=\"3\"") == 2);  // q dot and p ring
}

TEST_CASE("the heatmap sidecar matches a per-night query of the dataset") {
    const Dataset dataset = dataset_from_histories(
        {
            make_history({"r", "a", "d"}, verdicts_from_string("P F I")),
            // gap: b runs on nights 1 and 4 only
            make_history({"r", "b", "d"}, {Verdict::Pass}, Night::from_ymd(2020, 1, 1)),
        },
        "test");
    Dataset with_gap = dataset;
    VerdictHistory& b = with_gap.histories[1];
    b.append(Night::from_ymd(2020, 1, 4), Verdict::Fail);
    with_gap.nights.push_back(Night::from_ymd(2020, 1, 4));
    std::sort(with_gap.nights.begin(), with_gap.nights.end());

    const HeatmapReport report = heatmap_report(with_gap);
    const auto lines = split_lines(report.sidecar_csv);
    REQUIRE(lines.size() == 3);  // header + 2 rows
    CHECK(lines[0] == "system,script,params,2020-01-01,2020-01-02,2020-01-03,2020-01-04");
    CHECK(lines[1] == "r,a,d,pass,fail,invalid,absent");
    CHECK(lines[2] == "r,b,d,pass,absent,absent,fail");

    // every cell paints: 2 rows x 4 nights, plus 4 legend swatches + background
    CHECK(count_of(report.svg, "<rect") == 2 * 4 + 4 + 1);
    CHECK(count_of(report.svg, std::string("fill=\"") + palette::kAbsent + "\"") == 3 + 1);

    // cross-check each grid cell against query_night
    for (int day = 1; day <= 4; ++day) {
        const auto night = Night::from_ymd(2020, 1, static_cast<unsigned>(day));
        const auto records = query_night(with_gap, night);
        for (std::size_t row = 0; row < with_gap.histories.size(); ++row) {
            const auto fields = split_csv_line(lines[row + 1], row + 2);
            const std::string& cell = fields[3 + static_cast<std::size_t>(day - 1)];
            const auto it = std::find_if(records.begin(), records.end(),
                                         [&](const VerdictRecord& r) {
                                             return r.key == with_gap.histories[row].key;
                                         });
            if (it == records.end())
                CHECK(cell == "absent");
            else
                CHECK(cell == to_string(it->verdict));
        }
    }
}

TEST_CASE("heatmap ranges clip columns and reject inverted bounds") {
    const Dataset dataset = dataset_from_histories(
        {make_history({"r", "a", "d"}, verdicts_from_string("P F I P"))}, "t");
    const HeatmapReport clipped =
        heatmap_report(dataset, Night::from_ymd(2020, 1, 2), Night::from_ymd(2020, 1, 3));
    const auto lines = split_lines(clipped.sidecar_csv);
    CHECK(lines[0] == "system,script,params,2020-01-02,2020-01-03");
    CHECK(lines[1] == "r,a,d,fail,invalid");
    CHECK_THROWS_AS(
        heatmap_report(dataset, Night::from_ymd(2020, 1, 3), Night::from_ymd(2020, 1, 2)),
        ConfigError);
}

TEST_CASE("an empty dataset heatmap says so") {
    const HeatmapReport report = heatmap_report(Dataset{});
    CHECK(report.sidecar_csv == "system,script,params\n");
    CHECK(report.svg.find("(empty dataset)") != std::string::npos);
}

TEST_CASE("summary report covers population, groups, overlap and histogram") {
    std::vector<VerdictHistory> histories{
        make_history({"r", "a", "d"}, a6_shape()),
        make_history({"r", "b", "d"}, b6_b13_shape()),
        make_history({"r", "c", "d"}, verdicts_from_string("P P P P")),
    };
    const ClassifyResult result = classify_all(histories, default_group_specs());
    const PopulationSummary population = summarize_population(histories);
    const SummaryReport report = summary_report(population, result);

    CHECK(report.text.find("tests") != std::string::npos);
    CHECK(report.text.find("A6     1") != std::string::npos);
    CHECK(report.text.find("k=1: 1") != std::string::npos);
    CHECK(report.text.find("k=2: 1") != std::string::npos);
    CHECK(report.markdown.find("## Groups") != std::string::npos);
    CHECK(report.markdown.find("| A6 | 1 |") != std::string::npos);
}

TEST_CASE("summary report marks empty populations and undefined fractions") {
    const SummaryReport empty =
        summary_report(summarize_population({}), classify_all({}, default_group_specs()));
    CHECK(empty.text.find("(empty dataset)") != std::string::npos);

    // classifiable 0 -> the per-classifiable fraction is a dash
    std::vector<VerdictHistory> histories{
        make_history({"r", "tiny", "d"}, verdicts_from_string("P F"))};
    const SummaryReport dashes = summary_report(summarize_population(histories),
                                                classify_all(histories, default_group_specs()));
    CHECK(dashes.text.find("-") != std::string::npos);
    CHECK(dashes.text.find("classifiable 0") != std::string::npos);
}

TEST_CASE("palette colors are pinned") {
    CHECK(std::string(palette::kPass) == "#009E73");
    CHECK(std::string(palette::kFail) == "#D55E00");
    CHECK(std::string(palette::kInvalid) == "#E69F00");
    CHECK(std::string(palette::kAbsent) == "#CCCCCC");
    CHECK(std::size(palette::kSeries) == 4);
    CHECK(std::string(palette::kSeries[0]) == "#0072B2");
}
