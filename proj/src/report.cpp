#include "intermit/report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

#include "intermit/errors.hpp"
#include "intermit/textio.hpp"

namespace intermit {

std::string to_string(AnnotationStatus status) {
    switch (status) {
        case AnnotationStatus::Fixed: return "fixed";
        case AnnotationStatus::MultipleRootCauses: return "multiple_root_causes";
        case AnnotationStatus::UnderInvestigation: return "under_investigation";
        case AnnotationStatus::UnknownFix: return "unknown_fix";
    }
    return "fixed";
}

std::optional<AnnotationStatus> parse_annotation_status(const std::string& token) {
    if (token == "fixed") return AnnotationStatus::Fixed;
    if (token == "multiple_root_causes") return AnnotationStatus::MultipleRootCauses;
    if (token == "under_investigation") return AnnotationStatus::UnderInvestigation;
    if (token == "unknown_fix") return AnnotationStatus::UnknownFix;
    return std::nullopt;
}

void validate_taxonomy(const Taxonomy& taxonomy) {
    std::set<std::string> root_names;
    for (const Taxonomy::Node& root : taxonomy.roots) {
        if (root.name.empty() || root.name.find(kCategorySeparator) != std::string::npos)
            throw ConfigError("bad taxonomy category name: '" + root.name + "'");
        if (!root_names.insert(root.name).second)
            throw ConfigError("duplicate taxonomy category: '" + root.name + "'");
        std::set<std::string> child_names;
        for (const Taxonomy::Node& child : root.children) {
            if (child.name.empty() || child.name.find(kCategorySeparator) != std::string::npos)
                throw ConfigError("bad taxonomy subcategory name: '" + child.name + "'");
            if (!child_names.insert(child.name).second)
                throw ConfigError("duplicate subcategory '" + child.name + "' under '" +
                                  root.name + "'");
            if (!child.children.empty())
                throw ConfigError("taxonomy supports two levels; '" + child.name +
                                  "' has children");
        }
    }
}

Taxonomy default_taxonomy() {
    Taxonomy taxonomy;
    taxonomy.roots = {
        {"HW Allocation", {{"link breaker", {}}, {"switch core", {}}, {"empty port", {}}}},
        {"TC Assumptions",
         {{"timing", {}},
          {"test system layout", {}},
          {"temperature", {}},
          {"log file", {}},
          {"lib. version", {}}}},
        {"Test System Issues",
         {{"replace device", {}},
          {"console junk", {}},
          {"I/O relay", {}},
          {"USB sticks", {}},
          {"FTP server", {}},
          {"license", {}}}},
        {"SW or HW Faults", {{"SW impact on HW", {}}, {"SW timing", {}}}},
        {"Code Maintenance",
         {{"unclear", {}},
          {"broken renaming", {}},
          {"traffic generator", {}},
          {"forgotten patch", {}}}},
        {"Complexity of Testing", {}},
        {"Test Case Dependencies", {}},
        {"Resource Leaks", {}},
        {"Network Issues", {}},
        {"Random Number Issues", {}},
    };
    return taxonomy;
}

std::vector<std::string> taxonomy_leaf_paths(const Taxonomy& taxonomy) {
    std::vector<std::string> paths;
    for (const Taxonomy::Node& root : taxonomy.roots) {
        if (root.children.empty()) {
            paths.push_back(root.name);
            continue;
        }
        for (const Taxonomy::Node& child : root.children)
            paths.push_back(root.name + kCategorySeparator + child.name);
    }
    return paths;
}

std::vector<Annotation> parse_annotations(const std::string& text) {
    std::vector<Annotation> annotations;
    const std::vector<std::string_view> lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        nlohmann::json object;
        try {
            object = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(i + 1, std::string("invalid JSON: ") + e.what());
        }
        if (!object.is_object()) throw ParseError(i + 1, "annotation must be a JSON object");
        Annotation annotation;
        for (const char* field : {"system", "script", "params", "category", "status"}) {
            if (!object.contains(field) || !object[field].is_string())
                throw ParseError(i + 1, std::string("missing string field '") + field + "'");
        }
        annotation.key.test_system = object["system"].get<std::string>();
        annotation.key.test_script = object["script"].get<std::string>();
        annotation.key.parameter_setting = object["params"].get<std::string>();
        annotation.category = object["category"].get<std::string>();
        const auto status = parse_annotation_status(object["status"].get<std::string>());
        if (!status)
            throw ParseError(i + 1, "bad status '" + object["status"].get<std::string>() + "'");
        annotation.status = *status;
        if (object.contains("fix_id")) annotation.fix_id = object["fix_id"].get<std::string>();
        if (object.contains("note")) annotation.note = object["note"].get<std::string>();
        if (annotation.status == AnnotationStatus::Fixed && annotation.fix_id.empty())
            throw ParseError(i + 1, "status 'fixed' requires a fix_id");
        annotations.push_back(std::move(annotation));
    }
    return annotations;
}

Taxonomy parse_taxonomy(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("taxonomy is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("categories") || !doc["categories"].is_array())
        throw ConfigError("taxonomy must be an object with a 'categories' array");
    Taxonomy taxonomy;
    for (const auto& root : doc["categories"]) {
        if (!root.is_object() || !root.contains("name"))
            throw ConfigError("each taxonomy category needs a 'name'");
        Taxonomy::Node node{root["name"].get<std::string>(), {}};
        for (const auto& child : root.value("children", nlohmann::json::array()))
            node.children.push_back({child.get<std::string>(), {}});
        taxonomy.roots.push_back(std::move(node));
    }
    validate_taxonomy(taxonomy);
    return taxonomy;
}

namespace {

std::string key_string(const TestCaseKey& key) {
    return key.test_system + "/" + key.test_script + "/" + key.parameter_setting;
}

struct LedgerCell {
    std::set<TestCaseKey> keys;
    std::vector<std::set<TestCaseKey>> per_group;
    std::set<std::string> fixes;
};

LedgerRow row_from_cell(LedgerRow::Kind kind, std::string name, std::string parent,
                        const LedgerCell& cell) {
    LedgerRow row;
    row.kind = kind;
    row.name = std::move(name);
    row.parent = std::move(parent);
    row.total_tests = cell.keys.size();
    row.distinct_fixes = cell.fixes.size();
    row.group_counts.reserve(cell.per_group.size());
    for (const auto& members : cell.per_group) row.group_counts.push_back(members.size());
    return row;
}

}  // namespace

Ledger ledger_report(const ClassifyResult& classification,
                     const std::vector<Annotation>& annotations, const Taxonomy& taxonomy) {
    validate_taxonomy(taxonomy);
    const std::vector<std::string> leaf_list = taxonomy_leaf_paths(taxonomy);
    const std::set<std::string> leaves(leaf_list.begin(), leaf_list.end());

    const std::vector<std::string>& labels = classification.overlap.labels;
    std::map<std::string, std::size_t> label_index;
    for (std::size_t i = 0; i < labels.size(); ++i) label_index.emplace(labels[i], i);
    std::map<TestCaseKey, const std::vector<std::string>*> groups_of;
    for (const Classification& cls : classification.classified)
        groups_of.emplace(cls.key, &cls.groups);

    std::map<std::string, LedgerCell> fixed_cells;
    std::array<LedgerCell, 3> status_cells;  // multiple, under investigation, unknown

    Ledger ledger;
    ledger.group_labels = labels;
    std::set<TestCaseKey> all_keys;
    std::set<TestCaseKey> fixed_keys;
    std::set<std::string> all_fixes;

    for (const Annotation& annotation : annotations) {
        if (leaves.find(annotation.category) == leaves.end())
            throw UnknownCategory(annotation.category);
        if (annotation.status == AnnotationStatus::Fixed && annotation.fix_id.empty())
            throw DataError("annotation for " + key_string(annotation.key) +
                            " has status 'fixed' but no fix_id");
        LedgerCell& cell = annotation.status == AnnotationStatus::Fixed
                               ? fixed_cells[annotation.category]
                               : status_cells[static_cast<std::size_t>(annotation.status) - 1];
        if (cell.per_group.size() != labels.size()) cell.per_group.resize(labels.size());
        cell.keys.insert(annotation.key);
        all_keys.insert(annotation.key);
        if (annotation.status == AnnotationStatus::Fixed) {
            cell.fixes.insert(annotation.fix_id);
            all_fixes.insert(annotation.fix_id);
            fixed_keys.insert(annotation.key);
        }
        const auto member = groups_of.find(annotation.key);
        if (member != groups_of.end())
            for (const std::string& label : *member->second)
                cell.per_group[label_index.at(label)].insert(annotation.key);
    }

    for (const Taxonomy::Node& root : taxonomy.roots) {
        if (root.children.empty()) {
            const auto cell = fixed_cells.find(root.name);
            if (cell == fixed_cells.end() || cell->second.keys.empty()) continue;
            ledger.rows.push_back(
                row_from_cell(LedgerRow::Kind::Category, root.name, "", cell->second));
            continue;
        }
        // Category row = column-wise sums of its subcategory rows.
        std::vector<LedgerRow> child_rows;
        LedgerRow parent;
        parent.kind = LedgerRow::Kind::Category;
        parent.name = root.name;
        parent.group_counts.assign(labels.size(), 0);
        for (const Taxonomy::Node& child : root.children) {
            const auto cell = fixed_cells.find(root.name + kCategorySeparator + child.name);
            if (cell == fixed_cells.end() || cell->second.keys.empty()) continue;
            LedgerRow row = row_from_cell(LedgerRow::Kind::Subcategory, child.name, root.name,
                                          cell->second);
            for (std::size_t g = 0; g < labels.size(); ++g)
                parent.group_counts[g] += row.group_counts[g];
            parent.total_tests += row.total_tests;
            parent.distinct_fixes += row.distinct_fixes;
            child_rows.push_back(std::move(row));
        }
        if (child_rows.empty()) continue;
        ledger.rows.push_back(std::move(parent));
        for (LedgerRow& row : child_rows) ledger.rows.push_back(std::move(row));
    }

    static constexpr const char* kStatusNames[] = {"Multiple Root Causes", "Under Investigation",
                                                   "Unknown Fix"};
    for (std::size_t s = 0; s < status_cells.size(); ++s) {
        if (status_cells[s].keys.empty()) continue;
        if (status_cells[s].per_group.size() != labels.size())
            status_cells[s].per_group.resize(labels.size());
        ledger.rows.push_back(
            row_from_cell(LedgerRow::Kind::Status, kStatusNames[s], "", status_cells[s]));
    }

    ledger.annotated_tests = all_keys.size();
    ledger.fixed_tests = fixed_keys.size();
    ledger.distinct_fixes = all_fixes.size();
    ledger.duplicate_fix_tests = ledger.fixed_tests - ledger.distinct_fixes;
    return ledger;
}

namespace {

std::string pad_right(std::string text, std::size_t width) {
    if (text.size() < width) text.append(width - text.size(), ' ');
    return text;
}

std::string ledger_row_name(const LedgerRow& row) {
    return row.kind == LedgerRow::Kind::Subcategory ? "- " + row.name : row.name;
}

std::string ledger_footer(const Ledger& ledger) {
    std::string out;
    out += "annotated test cases: " + std::to_string(ledger.annotated_tests) + "\n";
    out += "fixed test cases:     " + std::to_string(ledger.fixed_tests) + " (distinct fixes: " +
           std::to_string(ledger.distinct_fixes) + ", duplicates by fix: " +
           std::to_string(ledger.duplicate_fix_tests) + ")\n";
    return out;
}

}  // namespace

std::string render_ledger_text(const Ledger& ledger) {
    std::string out = "root-cause ledger\n";
    if (ledger.rows.empty()) {
        out += "(no annotations)\n";
        return out;
    }
    std::size_t name_width = std::string("root cause / fix").size();
    for (const LedgerRow& row : ledger.rows)
        name_width = std::max(name_width, ledger_row_name(row).size());

    out += pad_right("root cause / fix", name_width + 2);
    for (const std::string& label : ledger.group_labels) out += pad_right(label, 5);
    out += pad_right("tot.", 6) + "fixes\n";
    for (const LedgerRow& row : ledger.rows) {
        out += pad_right(ledger_row_name(row), name_width + 2);
        for (std::size_t count : row.group_counts) out += pad_right(std::to_string(count), 5);
        out += pad_right(std::to_string(row.total_tests), 6);
        out += row.kind == LedgerRow::Kind::Status ? "-" : std::to_string(row.distinct_fixes);
        out += '\n';
    }
    out += ledger_footer(ledger);
    return out;
}

std::string render_ledger_markdown(const Ledger& ledger) {
    std::string out = "## Root-cause ledger\n\n";
    if (ledger.rows.empty()) {
        out += "(no annotations)\n";
        return out;
    }
    out += "| Root cause / fix |";
    for (const std::string& label : ledger.group_labels) out += " " + label + " |";
    out += " Tot. | Fixes |\n|---|";
    for (std::size_t i = 0; i < ledger.group_labels.size(); ++i) out += "---|";
    out += "---|---|\n";
    for (const LedgerRow& row : ledger.rows) {
        out += "| " + ledger_row_name(row) + " |";
        for (std::size_t count : row.group_counts) out += " " + std::to_string(count) + " |";
        out += " " + std::to_string(row.total_tests) + " | ";
        out += row.kind == LedgerRow::Kind::Status ? "-" : std::to_string(row.distinct_fixes);
        out += " |\n";
    }
    out += "\n" + ledger_footer(ledger);
    return out;
}

// ---------------------------------------------------------------------------
// Timeline

namespace {
constexpr double kMarginLeft = 60.0;
constexpr double kMarginTop = 60.0;
constexpr double kPlotWidth = 720.0;
constexpr double kPlotHeight = 240.0;
constexpr double kMarkRowY = 330.0;
constexpr double kSvgWidth = 810.0;
constexpr double kSvgHeight = 410.0;
}  // namespace

double timeline_x(std::size_t index, std::size_t count) {
    if (count <= 1) return kMarginLeft + kPlotWidth / 2.0;
    return kMarginLeft +
           static_cast<double>(index) * kPlotWidth / static_cast<double>(count - 1);
}

double timeline_y(double score) { return kMarginTop + (1.0 - score) * kPlotHeight; }

namespace {

std::string num(double v) { return format_double(v); }

void svg_text(std::string& svg, double x, double y, const std::string& text,
              const std::string& extra = "") {
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\"" + extra + ">" + text + "</text>\n";
}

void svg_line(std::string& svg, double x1, double y1, double x2, double y2,
              const std::string& stroke, const std::string& extra = "") {
    svg += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
           num(y2) + "\" stroke=\"" + stroke + "\"" + extra + "/>\n";
}

void svg_pass_mark(std::string& svg, double x, double y) {
    svg += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"4\" fill=\"" +
           palette::kPass + "\"/>\n";
}

void svg_fail_mark(std::string& svg, double x, double y) {
    svg += "<path d=\"M" + num(x - 4) + " " + num(y - 4) + " L" + num(x + 4) + " " + num(y + 4) +
           " M" + num(x - 4) + " " + num(y + 4) + " L" + num(x + 4) + " " + num(y - 4) +
           "\" stroke=\"" + palette::kFail + "\" stroke-width=\"1.8\" fill=\"none\"/>\n";
}

void svg_invalid_mark(std::string& svg, double x, double y) {
    svg += "<path d=\"M" + num(x) + " " + num(y - 5) + " L" + num(x + 4.5) + " " + num(y + 3) +
           " L" + num(x - 4.5) + " " + num(y + 3) + " Z\" fill=\"" + palette::kInvalid +
           "\"/>\n";
}

void svg_mark(std::string& svg, Verdict verdict, double x, double y) {
    switch (verdict) {
        case Verdict::Pass: svg_pass_mark(svg, x, y); break;
        case Verdict::Fail: svg_fail_mark(svg, x, y); break;
        case Verdict::Invalid: svg_invalid_mark(svg, x, y); break;
    }
}

constexpr const char* kQDash = "7 4";
constexpr const char* kPDash = "2 5";
constexpr double kCharWidth = 7.3;  // monospace 12px estimate for legend layout

void validate_series(const VerdictHistory& history, const ScoreSeries& series) {
    if (series.window_size < 2) throw WindowTooSmall(series.window_size);
    const std::size_t w = static_cast<std::size_t>(series.window_size);
    const std::size_t expected = history.size() >= w ? history.size() - w + 1 : 0;
    if (series.points.size() != expected)
        throw SeriesMismatch("series for window " + std::to_string(series.window_size) + " has " +
                             std::to_string(series.points.size()) + " points, history of " +
                             std::to_string(history.size()) + " wants " +
                             std::to_string(expected));
    if (!series.points.empty() &&
        (series.points.front().window_end != w - 1 ||
         series.points.back().window_end != history.size() - 1))
        throw SeriesMismatch("series window indices do not match the history");
}

}  // namespace

TimelineReport timeline_report(const VerdictHistory& history,
                               const std::vector<ScoreSeries>& series_list) {
    if (history.empty()) throw EmptyWindow();
    for (const ScoreSeries& series : series_list) validate_series(history, series);
    const std::size_t n = history.size();

    TimelineReport report;
    std::string& svg = report.svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kSvgWidth) +
           "\" height=\"" + num(kSvgHeight) + "\" viewBox=\"0 0 " + num(kSvgWidth) + " " +
           num(kSvgHeight) + "\" font-family=\"monospace\" font-size=\"12\">\n";
    svg += "<rect width=\"" + num(kSvgWidth) + "\" height=\"" + num(kSvgHeight) +
           "\" fill=\"#FFFFFF\"/>\n";
    svg_text(svg, kMarginLeft, 20, "test: " + key_string(history.key));

    // Legend: verdict shapes, then one q and one p sample per series.
    double cursor = kMarginLeft;
    const double legend_y = 38;
    svg_pass_mark(svg, cursor + 4, legend_y - 4);
    svg_text(svg, cursor + 12, legend_y, "pass");
    cursor += 12 + 4 * kCharWidth + 16;
    svg_fail_mark(svg, cursor + 4, legend_y - 4);
    svg_text(svg, cursor + 12, legend_y, "fail");
    cursor += 12 + 4 * kCharWidth + 16;
    svg_invalid_mark(svg, cursor + 4, legend_y - 4);
    svg_text(svg, cursor + 12, legend_y, "invalid");
    cursor += 12 + 7 * kCharWidth + 16;
    for (std::size_t s = 0; s < series_list.size(); ++s) {
        const std::string color = palette::kSeries[s % std::size(palette::kSeries)];
        const std::string w = std::to_string(series_list[s].window_size);
        svg_line(svg, cursor, legend_y - 4, cursor + 22, legend_y - 4, color,
                 " stroke-dasharray=\"" + std::string(kQDash) + "\" stroke-width=\"1.5\"");
        svg_text(svg, cursor + 26, legend_y, "q w=" + w);
        cursor += 26 + (4 + w.size()) * kCharWidth + 14;
        svg_line(svg, cursor, legend_y - 4, cursor + 22, legend_y - 4, color,
                 " stroke-dasharray=\"" + std::string(kPDash) + "\" stroke-width=\"1.5\"");
        svg_text(svg, cursor + 26, legend_y, "p w=" + w);
        cursor += 26 + (4 + w.size()) * kCharWidth + 14;
    }

    // Score axis and grid.
    for (int g = 0; g <= 5; ++g) {
        const double s = g / 5.0;
        svg_line(svg, kMarginLeft, timeline_y(s), kMarginLeft + kPlotWidth, timeline_y(s),
                 "#EEEEEE");
        svg_text(svg, kMarginLeft - 8, timeline_y(s) + 4, num(s),
                 " text-anchor=\"end\" fill=\"#333333\"");
    }
    svg_line(svg, kMarginLeft, timeline_y(1.0), kMarginLeft, timeline_y(0.0), "#333333");
    svg_line(svg, kMarginLeft, timeline_y(0.0), kMarginLeft + kPlotWidth, timeline_y(0.0),
             "#333333");
    svg_text(svg, 8, timeline_y(0.5), "score");

    // Curves. A single-point series gets dots instead of a polyline.
    for (std::size_t s = 0; s < series_list.size(); ++s) {
        const ScoreSeries& series = series_list[s];
        if (series.points.empty()) continue;
        const std::string color = palette::kSeries[s % std::size(palette::kSeries)];
        if (series.points.size() == 1) {
            const ScorePoint& pt = series.points.front();
            const double x = timeline_x(pt.window_end, n);
            svg += "<circle cx=\"" + num(x) + "\" cy=\"" + num(timeline_y(pt.q.value)) +
                   "\" r=\"3\" fill=\"" + color + "\"/>\n";
            svg += "<circle cx=\"" + num(x) + "\" cy=\"" + num(timeline_y(pt.p.value)) +
                   "\" r=\"3\" fill=\"none\" stroke=\"" + color + "\"/>\n";
            continue;
        }
        for (const bool is_q : {true, false}) {
            svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"" +
                   " stroke-dasharray=\"" + (is_q ? kQDash : kPDash) + "\" points=\"";
            bool first = true;
            for (const ScorePoint& pt : series.points) {
                if (!first) svg += ' ';
                first = false;
                svg += num(timeline_x(pt.window_end, n)) + "," +
                       num(timeline_y(is_q ? pt.q.value : pt.p.value));
            }
            svg += "\"/>\n";
        }
    }

    // Verdict marks and the execution-index / night axes.
    for (std::size_t i = 0; i < n; ++i)
        svg_mark(svg, history.verdicts[i], timeline_x(i, n), kMarkRowY);
    const std::size_t step = std::max<std::size_t>(1, (n + 9) / 10);
    for (std::size_t i = 0; i < n; i += step) {
        svg_line(svg, timeline_x(i, n), timeline_y(0.0), timeline_x(i, n), timeline_y(0.0) + 6,
                 "#333333");
        svg_text(svg, timeline_x(i, n), timeline_y(0.0) + 20, std::to_string(i),
                 " text-anchor=\"middle\" fill=\"#333333\"");
    }
    svg_text(svg, 8, timeline_y(0.0) + 20, "index");
    svg_text(svg, 8, kMarkRowY + 4, "runs");
    svg_text(svg, timeline_x(0, n), kMarkRowY + 26, history.nights.front().to_string());
    if (n > 1)
        svg_text(svg, timeline_x(n - 1, n), kMarkRowY + 26, history.nights.back().to_string(),
                 " text-anchor=\"end\"");

    // A series too short to have any window states that fact instead of drawing nothing.
    double note_y = kMarkRowY + 46;
    for (const ScoreSeries& series : series_list) {
        if (!series.points.empty()) continue;
        svg_text(svg, kMarginLeft, note_y,
                 "w=" + std::to_string(series.window_size) +
                     ": history shorter than window, marks only",
                 " fill=\"#333333\"");
        note_y += 16;
    }
    svg += "</svg>\n";

    // Sidecar: exactly the numbers that were plotted.
    std::string& sidecar = report.sidecar_jsonl;
    for (std::size_t i = 0; i < n; ++i) {
        nlohmann::ordered_json line;
        line["record"] = "verdict";
        line["index"] = i;
        line["night"] = history.nights[i].to_string();
        line["verdict"] = to_string(history.verdicts[i]);
        sidecar += line.dump();
        sidecar += '\n';
    }
    for (const ScoreSeries& series : series_list) {
        for (const ScorePoint& pt : series.points) {
            nlohmann::ordered_json line;
            line["record"] = "score";
            line["window"] = series.window_size;
            line["window_end"] = pt.window_end;
            line["q"] = pt.q.value;
            line["p"] = pt.p.value;
            sidecar += line.dump();
            sidecar += '\n';
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Heatmap

namespace {
constexpr double kRowLabelWidth = 230.0;
constexpr double kColLabelHeight = 90.0;
constexpr double kCellPitch = 14.0;
constexpr double kCellSize = 13.0;

const char* verdict_fill(Verdict verdict) {
    switch (verdict) {
        case Verdict::Pass: return palette::kPass;
        case Verdict::Fail: return palette::kFail;
        case Verdict::Invalid: return palette::kInvalid;
    }
    return palette::kAbsent;
}

}  // namespace

HeatmapReport heatmap_report(const Dataset& dataset, Night from, Night to) {
    if (to < from) throw ConfigError("heatmap night range is empty (from > to)");
    const std::size_t cols = static_cast<std::size_t>(to.serial() - from.serial()) + 1;
    const std::size_t rows = dataset.histories.size();

    HeatmapReport report;
    std::string& csv = report.sidecar_csv;
    csv += "system,script,params";
    for (std::size_t c = 0; c < cols; ++c)
        csv += "," + Night::from_serial(from.serial() + static_cast<std::int64_t>(c)).to_string();
    csv += '\n';

    const double width = kRowLabelWidth + static_cast<double>(cols) * kCellPitch + 20;
    const double height = kColLabelHeight + static_cast<double>(rows) * kCellPitch + 70;
    std::string& svg = report.svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) +
           "\" font-family=\"monospace\" font-size=\"10\">\n";
    svg += "<rect width=\"" + num(width) + "\" height=\"" + num(height) +
           "\" fill=\"#FFFFFF\"/>\n";
    svg_text(svg, 10, 20, "verdicts " + from.to_string() + " .. " + to.to_string(),
             " font-size=\"12\"");

    const std::size_t label_step = std::max<std::size_t>(1, cols / 12);
    for (std::size_t c = 0; c < cols; c += label_step) {
        const Night night = Night::from_serial(from.serial() + static_cast<std::int64_t>(c));
        const double x = kRowLabelWidth + static_cast<double>(c) * kCellPitch + kCellSize / 2;
        svg += "<text transform=\"translate(" + num(x) + " " + num(kColLabelHeight - 6) +
               ") rotate(-60)\" fill=\"#333333\">" + night.to_string() + "</text>\n";
    }

    for (std::size_t r = 0; r < rows; ++r) {
        const VerdictHistory& history = dataset.histories[r];
        const double y = kColLabelHeight + static_cast<double>(r) * kCellPitch;
        svg_text(svg, kRowLabelWidth - 6, y + kCellSize - 3, key_string(history.key),
                 " text-anchor=\"end\"");
        csv += csv_quote(history.key.test_system) + "," + csv_quote(history.key.test_script) +
               "," + csv_quote(history.key.parameter_setting);
        auto night_it = history.nights.begin();
        for (std::size_t c = 0; c < cols; ++c) {
            const Night night = Night::from_serial(from.serial() + static_cast<std::int64_t>(c));
            while (night_it != history.nights.end() && *night_it < night) ++night_it;
            const bool ran = night_it != history.nights.end() && *night_it == night;
            const char* fill = palette::kAbsent;
            if (ran) {
                const std::size_t index =
                    static_cast<std::size_t>(night_it - history.nights.begin());
                fill = verdict_fill(history.verdicts[index]);
                csv += "," + to_string(history.verdicts[index]);
            } else {
                csv += ",absent";
            }
            svg += "<rect x=\"" + num(kRowLabelWidth + static_cast<double>(c) * kCellPitch) +
                   "\" y=\"" + num(y) + "\" width=\"" + num(kCellSize) + "\" height=\"" +
                   num(kCellSize) + "\" fill=\"" + fill + "\"/>\n";
        }
        csv += '\n';
    }

    if (rows == 0) svg_text(svg, kRowLabelWidth, kColLabelHeight + 14, "(empty dataset)");

    // Legend.
    const double legend_y = kColLabelHeight + static_cast<double>(rows) * kCellPitch + 24;
    double cursor = kRowLabelWidth;
    const std::array<std::pair<const char*, const char*>, 4> swatches{{
        {palette::kPass, "pass"},
        {palette::kFail, "fail"},
        {palette::kInvalid, "invalid"},
        {palette::kAbsent, "not run"},
    }};
    for (const auto& [fill, name] : swatches) {
        svg += "<rect x=\"" + num(cursor) + "\" y=\"" + num(legend_y) + "\" width=\"" +
               num(kCellSize) + "\" height=\"" + num(kCellSize) + "\" fill=\"" + fill + "\"/>\n";
        svg_text(svg, cursor + kCellSize + 5, legend_y + kCellSize - 3, name);
        cursor += kCellSize + 5 + static_cast<double>(std::string(name).size()) * 6.2 + 18;
    }
    svg += "</svg>\n";
    return report;
}

HeatmapReport heatmap_report(const Dataset& dataset) {
    if (dataset.nights.empty()) {
        HeatmapReport report;
        report.sidecar_csv = "system,script,params\n";
        report.svg =
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"320\" height=\"60\" "
            "viewBox=\"0 0 320 60\" font-family=\"monospace\" font-size=\"12\">\n"
            "<rect width=\"320\" height=\"60\" fill=\"#FFFFFF\"/>\n"
            "<text x=\"10\" y=\"32\">(empty dataset)</text>\n</svg>\n";
        return report;
    }
    return heatmap_report(dataset, dataset.nights.front(), dataset.nights.back());
}

// ---------------------------------------------------------------------------
// Summary

namespace {

std::string g6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fraction_or_dash(std::size_t numerator, std::size_t denominator) {
    if (denominator == 0) return "-";
    return g6(static_cast<double>(numerator) / static_cast<double>(denominator));
}

struct Table {
    std::vector<std::vector<std::string>> rows;  // rows[0] = header

    std::string text() const {
        std::vector<std::size_t> widths;
        for (const auto& row : rows)
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (widths.size() <= c) widths.push_back(0);
                widths[c] = std::max(widths[c], row[c].size());
            }
        std::string out;
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                out += pad_right(row[c], c + 1 == row.size() ? row[c].size() : widths[c] + 2);
            }
            out += '\n';
        }
        return out;
    }

    std::string markdown() const {
        std::string out;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            out += '|';
            for (const std::string& cell : rows[r]) out += ' ' + cell + " |";
            out += '\n';
            if (r == 0) {
                out += '|';
                for (std::size_t c = 0; c < rows[0].size(); ++c) out += "---|";
                out += '\n';
            }
        }
        return out;
    }
};

std::vector<std::string> stat_row(const std::string& name, const StatFive& stats) {
    return {name, g6(stats.min), g6(stats.max), g6(stats.mean), g6(stats.median),
            g6(stats.std_dev)};
}

}  // namespace

SummaryReport summary_report(const PopulationSummary& population,
                             const ClassifyResult& classification) {
    std::string text;
    std::string md;

    text += "population\n";
    md += "## Population\n\n";
    if (population.tests == 0) {
        text += "(empty dataset)\n";
        md += "(empty dataset)\n";
    } else {
        Table facts;
        facts.rows = {
            {"tests", std::to_string(population.tests)},
            {"scored tests (>= 2 executions)", std::to_string(population.scored_tests)},
            {"single-execution tests", std::to_string(population.excluded_single_execution_tests)},
            {"verdicts", std::to_string(population.verdicts)},
        };
        for (const Verdict v : {Verdict::Pass, Verdict::Fail, Verdict::Invalid}) {
            facts.rows.push_back({"  " + to_string(v),
                                  std::to_string(population.verdict_counts.at(v)) + " (" +
                                      g6(population.verdict_fractions.at(v)) + ")"});
        }
        facts.rows.push_back({"nonzero-q fraction of scored", g6(population.fraction_nonzero_q)});
        text += facts.text();
        for (const auto& row : facts.rows) md += "- " + row[0] + ": " + row[1] + "\n";

        Table stats;
        stats.rows.push_back({"metric", "min", "max", "mean", "median", "std"});
        stats.rows.push_back(stat_row("p", population.full_p));
        stats.rows.push_back(stat_row("q", population.full_q));
        stats.rows.push_back(stat_row("executions", population.executions));
        text += "\nfull-sequence scores\n" + stats.text();
        md += "\n## Full-sequence scores\n\n" + stats.markdown();
    }

    const std::vector<std::string>& labels = classification.overlap.labels;
    Table groups;
    groups.rows.push_back({"group", "tests", "of population", "of classifiable"});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::size_t size = classification.overlap.counts.empty()
                                     ? 0
                                     : classification.overlap.counts[i][i];
        groups.rows.push_back({labels[i], std::to_string(size),
                               fraction_or_dash(size, classification.population),
                               fraction_or_dash(size, classification.classifiable)});
    }
    text += "\ngroups (population " + std::to_string(classification.population) +
            ", classifiable " + std::to_string(classification.classifiable) + ")\n" +
            groups.text();
    md += "\n## Groups\n\npopulation " + std::to_string(classification.population) +
          ", classifiable " + std::to_string(classification.classifiable) + "\n\n" +
          groups.markdown();

    Table overlap;
    std::vector<std::string> header = {""};
    header.insert(header.end(), labels.begin(), labels.end());
    overlap.rows.push_back(header);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::vector<std::string> row = {labels[i]};
        for (std::size_t j = 0; j < labels.size(); ++j)
            row.push_back(std::to_string(classification.overlap.counts[i][j]));
        overlap.rows.push_back(row);
    }
    text += "\ngroup overlap (tests in both)\n" + overlap.text();
    md += "\n## Group overlap\n\n" + overlap.markdown();

    text += "\ntests in exactly k groups\n";
    md += "\n## Tests in exactly k groups\n\n";
    if (classification.overlap.k_histogram.empty()) {
        text += "(none)\n";
        md += "(none)\n";
    }
    for (const auto& [k, count] : classification.overlap.k_histogram) {
        text += "k=" + std::to_string(k) + ": " + std::to_string(count) + "\n";
        md += "- k=" + std::to_string(k) + ": " + std::to_string(count) + "\n";
    }

    return {std::move(text), std::move(md)};
}

}  // namespace intermit
