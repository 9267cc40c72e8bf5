#include "commands.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <utility>

#include <json.hpp>

#include "intermit/classify.hpp"
#include "intermit/errors.hpp"
#include "intermit/report.hpp"
#include "intermit/scoring.hpp"
#include "intermit/simulate.hpp"
#include "intermit/store.hpp"
#include "intermit/textio.hpp"

namespace intermit::cli {

namespace {

using nlohmann::ordered_json;

/// Collects output files in memory and writes them in one go, so a command
/// that throws halfway leaves no partial output behind.
class OutputBatch {
public:
    explicit OutputBatch(std::string dir) : dir_(std::move(dir)) {}

    void add(std::string name, std::string content) {
        files_.emplace_back(std::move(name), std::move(content));
    }

    void commit() const {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec)
            throw ConfigError("cannot create output directory '" + dir_.string() +
                              "': " + ec.message());
        for (const auto& [name, content] : files_) write_file((dir_ / name).string(), content);
    }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

RecordFormat detect_format(const RunConfig& config) {
    if (config.format != "auto") {
        const auto format = parse_record_format(config.format);
        if (!format)
            throw ConfigError("unknown format '" + config.format + "' (expected jsonl or csv)");
        return *format;
    }
    return config.input_path.ends_with(".csv") ? RecordFormat::Csv : RecordFormat::Jsonl;
}

Dataset load_dataset(const RunConfig& config) {
    if (config.input_path.empty()) throw ConfigError("an input dataset is required (--input)");
    return ingest(read_file(config.input_path), detect_format(config), config.input_path);
}

double require_number(const nlohmann::json& object, const char* field, const std::string& label) {
    if (!object.contains(field) || !object[field].is_number())
        throw ConfigError("group spec '" + label + "' needs a numeric '" + field + "'");
    return object[field].get<double>();
}

std::vector<GroupSpec> parse_group_specs(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("spec file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("groups") || !doc["groups"].is_array())
        throw ConfigError("spec file must be an object with a 'groups' array");
    std::vector<GroupSpec> specs;
    for (const auto& entry : doc["groups"]) {
        GroupSpec spec;
        if (!entry.is_object() || !entry.contains("label") || !entry["label"].is_string())
            throw ConfigError("every group spec needs a string 'label'");
        spec.label = entry["label"].get<std::string>();
        const std::string kind = entry.value("kind", std::string());
        if (kind == "intermittent") {
            spec.kind = GroupKind::Intermittent;
            spec.q_min = require_number(entry, "q_min", spec.label);
            if (entry.contains("p_dip_max"))
                throw ConfigError("group spec '" + spec.label +
                                  "' is intermittent; 'p_dip_max' does not apply");
        } else if (kind == "consistent") {
            spec.kind = GroupKind::Consistent;
            spec.p_dip_max = require_number(entry, "p_dip_max", spec.label);
            if (entry.contains("q_min"))
                throw ConfigError("group spec '" + spec.label +
                                  "' is consistent; 'q_min' does not apply");
        } else {
            throw ConfigError("group spec '" + spec.label +
                              "' needs kind 'intermittent' or 'consistent'");
        }
        if (!entry.contains("window") || !entry["window"].is_number_integer())
            throw ConfigError("group spec '" + spec.label + "' needs an integer 'window'");
        spec.window_size = entry["window"].get<int>();
        spec.p_final_min = require_number(entry, "p_final_min", spec.label);
        specs.push_back(std::move(spec));
    }
    return specs;
}

/// Group specs for this run: the spec file (or the defaults), optionally
/// restricted to the requested window sizes. Relative order is preserved,
/// keeping each consistent spec behind its exclusion partner.
std::vector<GroupSpec> resolve_specs(const RunConfig& config) {
    std::vector<GroupSpec> specs = config.spec_file.empty()
                                       ? default_group_specs()
                                       : parse_group_specs(read_file(config.spec_file));
    const std::vector<int> windows = config.windows_resolved();
    if (windows.empty()) return specs;
    for (const int w : windows) {
        if (std::none_of(specs.begin(), specs.end(),
                         [w](const GroupSpec& s) { return s.window_size == w; }))
            throw ConfigError("no group spec uses window " + std::to_string(w) +
                              "; supply one with --spec-file");
    }
    std::erase_if(specs, [&](const GroupSpec& s) {
        return std::find(windows.begin(), windows.end(), s.window_size) == windows.end();
    });
    return specs;
}

/// Window sizes to score/plot, in first-appearance order of the specs.
std::vector<int> spec_windows(const std::vector<GroupSpec>& specs) {
    std::vector<int> windows;
    for (const GroupSpec& spec : specs)
        if (std::find(windows.begin(), windows.end(), spec.window_size) == windows.end())
            windows.push_back(spec.window_size);
    return windows;
}

ordered_json key_json(const TestCaseKey& key) {
    ordered_json object;
    object["system"] = key.test_system;
    object["script"] = key.test_script;
    object["params"] = key.parameter_setting;
    return object;
}

ordered_json evidence_json(const Evidence& evidence) {
    ordered_json object;
    object["member"] = evidence.member;
    object["insufficient_data"] = evidence.insufficient_data;
    object["reason"] = evidence.reason;
    if (evidence.trigger_window_end) object["trigger_window_end"] = *evidence.trigger_window_end;
    if (evidence.trigger_score) object["trigger_score"] = evidence.trigger_score->value;
    if (evidence.final_window_p) object["final_window_p"] = evidence.final_window_p->value;
    return object;
}

std::string groups_jsonl(const ClassifyResult& result) {
    std::string out;
    for (const Classification& cls : result.classified) {
        ordered_json line = key_json(cls.key);
        line["executions"] = cls.executions;
        line["groups"] = cls.groups;
        ordered_json evidence = ordered_json::object();
        for (const auto& [label, ev] : cls.evidence) evidence[label] = evidence_json(ev);
        line["evidence"] = evidence;
        out += line.dump();
        out += '\n';
    }
    return out;
}

ordered_json overlap_json(const ClassifyResult& result) {
    ordered_json object;
    object["population"] = result.population;
    object["classifiable"] = result.classifiable;
    object["labels"] = result.overlap.labels;
    object["counts"] = result.overlap.counts;
    ordered_json histogram = ordered_json::object();
    for (const auto& [k, count] : result.overlap.k_histogram)
        histogram[std::to_string(k)] = count;
    object["k_histogram"] = histogram;
    return object;
}

ordered_json stat_json(const StatFive& stats) {
    ordered_json object;
    object["min"] = stats.min;
    object["max"] = stats.max;
    object["mean"] = stats.mean;
    object["median"] = stats.median;
    object["std"] = stats.std_dev;
    return object;
}

ordered_json population_json(const PopulationSummary& population) {
    ordered_json object;
    object["tests"] = population.tests;
    object["scored_tests"] = population.scored_tests;
    object["single_execution_tests"] = population.excluded_single_execution_tests;
    object["verdicts"] = population.verdicts;
    ordered_json counts = ordered_json::object();
    ordered_json fractions = ordered_json::object();
    for (const Verdict v : {Verdict::Pass, Verdict::Fail, Verdict::Invalid}) {
        counts[to_string(v)] = population.verdict_counts.at(v);
        fractions[to_string(v)] = population.verdict_fractions.at(v);
    }
    object["verdict_counts"] = counts;
    object["verdict_fractions"] = fractions;
    if (population.scored_tests > 0) {
        object["full_p"] = stat_json(population.full_p);
        object["full_q"] = stat_json(population.full_q);
    }
    if (population.tests > 0) object["executions"] = stat_json(population.executions);
    object["fraction_nonzero_q"] = population.fraction_nonzero_q;
    return object;
}

std::string key_slug(const TestCaseKey& key) {
    std::string slug =
        key.test_system + "_" + key.test_script + "_" + key.parameter_setting;
    for (char& c : slug)
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    return slug;
}

Night parse_night_flag(const std::string& value, const char* flag) {
    const auto night = Night::parse(value);
    if (!night)
        throw ConfigError(std::string(flag) + " wants a YYYY-MM-DD date, got '" + value + "'");
    return *night;
}

}  // namespace

void RunConfig::load_config_file() {
    if (config_file.empty()) return;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(config_file));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
    if (doc.contains("out_dir")) file.out_dir = doc["out_dir"].get<std::string>();
    if (doc.contains("seed")) file.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("windows")) file.windows = doc["windows"].get<std::vector<int>>();
}

std::string RunConfig::out_dir_resolved() const {
    if (!out_dir.empty()) return out_dir;
    if (!file.out_dir.empty()) return file.out_dir;
    if (const char* env = std::getenv("INTERMIT_OUT_DIR"); env && *env) return env;
    return ".";
}

std::uint64_t RunConfig::seed_resolved() const {
    if (seed) return *seed;
    if (file.seed) return *file.seed;
    return kDefaultSuiteSeed;
}

std::vector<int> RunConfig::windows_resolved() const {
    if (!windows.empty()) return windows;
    return file.windows;
}

int cmd_ingest(const RunConfig& config) {
    const Dataset dataset = load_dataset(config);
    OutputBatch out(config.out_dir_resolved());
    out.add("dataset.jsonl", export_records(dataset, RecordFormat::Jsonl));
    out.add("dataset.csv", export_records(dataset, RecordFormat::Csv));
    out.commit();
    std::cout << "ingested " << dataset.histories.size() << " tests, "
              << dataset.total_verdicts() << " verdicts over " << dataset.nights.size()
              << " nights\n";
    return 0;
}

int cmd_score(const RunConfig& config) {
    const Dataset dataset = load_dataset(config);
    if (dataset.histories.empty())
        std::cerr << "warning: empty dataset, nothing to score\n";
    std::vector<int> windows = config.windows_resolved();
    if (windows.empty()) windows = spec_windows(default_group_specs());
    for (const int w : windows)
        if (w < 2) throw WindowTooSmall(w);

    std::string full;
    std::string series_lines;
    for (const VerdictHistory& history : dataset.histories) {
        const FullScores scores = full_sequence_scores(history);
        ordered_json line = key_json(history.key);
        line["executions"] = history.size();
        line["p"] = scores.p.value;
        if (scores.q)
            line["q"] = scores.q->value;
        else
            line["q"] = nullptr;
        full += line.dump();
        full += '\n';
        for (const int w : windows) {
            const ScoreSeries series = windowed_scores(history, w);
            for (const ScorePoint& point : series.points) {
                ordered_json entry = key_json(history.key);
                entry["window"] = w;
                entry["window_end"] = point.window_end;
                entry["q"] = point.q.value;
                entry["p"] = point.p.value;
                series_lines += entry.dump();
                series_lines += '\n';
            }
        }
    }
    OutputBatch out(config.out_dir_resolved());
    out.add("full_scores.jsonl", full);
    out.add("score_series.jsonl", series_lines);
    out.commit();
    std::cout << "scored " << dataset.histories.size() << " tests\n";
    return 0;
}

int cmd_classify(const RunConfig& config) {
    const Dataset dataset = load_dataset(config);
    const std::vector<GroupSpec> specs = resolve_specs(config);
    const ClassifyResult result = classify_all(dataset.histories, specs);
    const PopulationSummary population = summarize_population(dataset.histories);

    OutputBatch out(config.out_dir_resolved());
    out.add("groups.jsonl", groups_jsonl(result));
    out.add("overlap.json", overlap_json(result).dump(2) + "\n");
    out.add("summary.json", population_json(population).dump(2) + "\n");
    out.commit();

    std::cout << "classified " << result.classified.size() << " of " << result.population
              << " tests into at least one group\n";
    for (std::size_t i = 0; i < result.overlap.labels.size(); ++i)
        std::cout << "  " << result.overlap.labels[i] << ": " << result.overlap.counts[i][i]
                  << "\n";
    return 0;
}

int cmd_simulate(const RunConfig& config) {
    ScenarioSuite suite = config.suite_file.empty()
                              ? default_scenario_suite()
                              : parse_scenario_suite(read_file(config.suite_file));
    if (config.seed || config.file.seed) suite.seed = config.seed_resolved();
    const SyntheticDataset synthetic = generate_suite(suite);
    const Dataset dataset = dataset_from_histories(synthetic.histories, "simulated");

    std::string truth;
    for (const auto& [key, groups] : synthetic.ground_truth) {
        ordered_json line = key_json(key);
        line["expected_groups"] = groups;
        truth += line.dump();
        truth += '\n';
    }
    ordered_json manifest;
    manifest["seed"] = synthetic.seed;
    manifest["rng_algorithm"] = synthetic.rng_algorithm;
    ordered_json scenarios = ordered_json::array();
    for (const ScenarioSpec& scenario : suite.scenarios) {
        std::size_t length = 0;
        for (const Phase& phase : scenario.phases) length += phase.length;
        ordered_json entry;
        entry["name"] = scenario.name;
        entry["length"] = length;
        entry["expected_groups"] = scenario.expected_groups;
        scenarios.push_back(entry);
    }
    manifest["scenarios"] = scenarios;

    OutputBatch out(config.out_dir_resolved());
    out.add("dataset.jsonl", export_records(dataset, RecordFormat::Jsonl));
    out.add("dataset.csv", export_records(dataset, RecordFormat::Csv));
    out.add("ground_truth.jsonl", truth);
    out.add("manifest.json", manifest.dump(2) + "\n");
    out.commit();

    std::cout << "simulated " << dataset.histories.size() << " tests, "
              << dataset.total_verdicts() << " verdicts (seed " << synthetic.seed << ")\n";
    return 0;
}

int cmd_report(const RunConfig& config) {
    const Dataset dataset = load_dataset(config);
    const std::vector<GroupSpec> specs = resolve_specs(config);
    const ClassifyResult result = classify_all(dataset.histories, specs);
    const PopulationSummary population = summarize_population(dataset.histories);
    const SummaryReport summary = summary_report(population, result);

    OutputBatch out(config.out_dir_resolved());
    out.add("summary.txt", summary.text);
    out.add("summary.md", summary.markdown);
    out.add("groups.jsonl", groups_jsonl(result));

    // Heatmap over at most heatmap_limit rows (a full corpus would render
    // an unreasonably large SVG); the night range defaults to the dataset's.
    Dataset view;
    view.provenance = dataset.provenance;
    view.nights = dataset.nights;
    const std::size_t rows = std::min(config.heatmap_limit, dataset.histories.size());
    view.histories.assign(dataset.histories.begin(),
                          dataset.histories.begin() + static_cast<std::ptrdiff_t>(rows));
    HeatmapReport heatmap;
    if (!config.from_night.empty() || !config.to_night.empty()) {
        if (config.from_night.empty() || config.to_night.empty())
            throw ConfigError("--from and --to must be given together");
        heatmap = heatmap_report(view, parse_night_flag(config.from_night, "--from"),
                                 parse_night_flag(config.to_night, "--to"));
    } else {
        heatmap = heatmap_report(view);
    }
    out.add("heatmap.svg", heatmap.svg);
    out.add("heatmap.csv", heatmap.sidecar_csv);

    // Timelines: classified tests first (already sorted by key), then the
    // rest in key order, up to the limit.
    const std::vector<int> windows = spec_windows(specs);
    std::vector<const VerdictHistory*> picks;
    std::set<TestCaseKey> picked;
    for (const Classification& cls : result.classified) {
        if (static_cast<int>(picks.size()) >= config.timeline_limit) break;
        if (const VerdictHistory* history = dataset.find(cls.key)) {
            picks.push_back(history);
            picked.insert(cls.key);
        }
    }
    for (const VerdictHistory& history : dataset.histories) {
        if (static_cast<int>(picks.size()) >= config.timeline_limit) break;
        if (picked.insert(history.key).second) picks.push_back(&history);
    }
    for (std::size_t i = 0; i < picks.size(); ++i) {
        std::vector<ScoreSeries> series_list;
        for (const int w : windows) series_list.push_back(windowed_scores(*picks[i], w));
        const TimelineReport timeline = timeline_report(*picks[i], series_list);
        const std::string stem = "timeline_" + std::to_string(i) + "_" + key_slug(picks[i]->key);
        out.add(stem + ".svg", timeline.svg);
        out.add(stem + ".jsonl", timeline.sidecar_jsonl);
    }

    if (!config.annotations_file.empty()) {
        const std::vector<Annotation> annotations =
            parse_annotations(read_file(config.annotations_file));
        const Taxonomy taxonomy = config.taxonomy_file.empty()
                                      ? default_taxonomy()
                                      : parse_taxonomy(read_file(config.taxonomy_file));
        const Ledger ledger = ledger_report(result, annotations, taxonomy);
        out.add("ledger.txt", render_ledger_text(ledger));
        out.add("ledger.md", render_ledger_markdown(ledger));
    }

    out.commit();
    std::cout << "report written for " << dataset.histories.size() << " tests ("
              << picks.size() << " timelines)\n";
    return 0;
}

}  // namespace intermit::cli
