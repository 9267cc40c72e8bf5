#include <cstdint>
#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "intermit/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"intermittence scoring over nightly verdict histories"};
    app.require_subcommand(1);

    intermit::cli::RunConfig config;
    std::uint64_t seed_value = 0;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", config.out_dir,
                        "output directory (beats config file and $INTERMIT_OUT_DIR)");
        cmd->add_option("--config", config.config_file,
                        "JSON file with defaults: out_dir, seed, windows");
    };
    const auto add_input = [&](CLI::App* cmd) {
        cmd->add_option("-i,--input", config.input_path, "dataset file (JSONL or CSV)");
        cmd->add_option("--format", config.format, "input format: auto, jsonl or csv");
    };
    const auto add_specs = [&](CLI::App* cmd) {
        cmd->add_option("-w,--window", config.windows,
                        "keep only group specs with this window size (repeatable)");
        cmd->add_option("--spec-file", config.spec_file, "JSON file with custom group specs");
    };

    CLI::App* ingest =
        app.add_subcommand("ingest", "validate a dataset and write canonical exports");
    add_input(ingest);
    add_common(ingest);

    CLI::App* score = app.add_subcommand("score", "write full-sequence and windowed scores");
    add_input(score);
    add_specs(score);
    add_common(score);

    CLI::App* classify =
        app.add_subcommand("classify", "assign tests to intermittence groups");
    add_input(classify);
    add_specs(classify);
    add_common(classify);

    CLI::App* simulate =
        app.add_subcommand("simulate", "generate a synthetic dataset with known groups");
    simulate->add_option("--seed", seed_value, "random seed for the scenario suite");
    simulate->add_option("--suite", config.suite_file, "JSON scenario-suite file");
    add_common(simulate);

    CLI::App* report =
        app.add_subcommand("report", "render summary, heatmap, timelines and ledger");
    add_input(report);
    add_specs(report);
    report->add_option("--annotations", config.annotations_file,
                       "JSONL root-cause annotations; enables the ledger");
    report->add_option("--taxonomy", config.taxonomy_file, "JSON root-cause taxonomy");
    report->add_option("--timelines", config.timeline_limit,
                       "number of per-test timelines to render");
    report->add_option("--heatmap-rows", config.heatmap_limit, "max heatmap rows");
    report->add_option("--from", config.from_night, "heatmap range start (YYYY-MM-DD)");
    report->add_option("--to", config.to_night, "heatmap range end (YYYY-MM-DD)");
    add_common(report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    if (simulate->count("--seed") > 0) config.seed = seed_value;

    try {
        config.load_config_file();
        if (ingest->parsed()) return intermit::cli::cmd_ingest(config);
        if (score->parsed()) return intermit::cli::cmd_score(config);
        if (classify->parsed()) return intermit::cli::cmd_classify(config);
        if (simulate->parsed()) return intermit::cli::cmd_simulate(config);
        if (report->parsed()) return intermit::cli::cmd_report(config);
    } catch (const intermit::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const intermit::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
