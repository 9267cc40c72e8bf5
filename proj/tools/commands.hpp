#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace intermit::cli {

/// Everything a subcommand needs, assembled from flags, the optional
/// --config JSON file, and the environment. A flag left at its "unset"
/// value (empty string / empty vector / nullopt) falls back to the config
/// file, then to the environment ($INTERMIT_OUT_DIR), then to a default.
struct RunConfig {
    // common
    std::string input_path;
    std::string format = "auto";  // auto | jsonl | csv
    std::string out_dir;
    std::string config_file;

    // classification / scoring
    std::vector<int> windows;  // empty = all configured specs / windows
    std::string spec_file;

    // simulation
    std::optional<std::uint64_t> seed;
    std::string suite_file;

    // reporting
    std::string annotations_file;
    std::string taxonomy_file;
    int timeline_limit = 3;
    std::size_t heatmap_limit = 200;
    std::string from_night;
    std::string to_night;

    // values loaded from --config
    struct FileDefaults {
        std::string out_dir;
        std::optional<std::uint64_t> seed;
        std::vector<int> windows;
    } file;

    /// Parses the --config JSON file into `file`. No-op without one.
    void load_config_file();

    std::string out_dir_resolved() const;
    std::uint64_t seed_resolved() const;
    std::vector<int> windows_resolved() const;
};

int cmd_ingest(const RunConfig& config);
int cmd_score(const RunConfig& config);
int cmd_classify(const RunConfig& config);
int cmd_simulate(const RunConfig& config);
int cmd_report(const RunConfig& config);

}  // namespace intermit::cli
