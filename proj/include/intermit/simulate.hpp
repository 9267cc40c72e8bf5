#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "intermit/night.hpp"
#include "intermit/scoring.hpp"
#include "intermit/verdicts.hpp"

namespace intermit {

/// Identifier of the random stream: std::mt19937_64, uniforms taken as the
/// top 53 bits scaled to [0,1), states picked by inverse CDF over the fixed
/// order (pass, fail, invalid). Datasets generated by a different algorithm
/// are not byte-comparable; this string is recorded next to every dataset.
inline constexpr const char* kRngAlgorithm = "mt19937_64/u53-invcdf";

inline constexpr std::uint64_t kDefaultSuiteSeed = 20200101;

/// True per-test transition probabilities, rows = source state, columns =
/// destination state, order (pass, fail, invalid). The observable
/// TransitionCounts matrix is this model's empirical counterpart.
struct TransitionModel {
    std::array<std::array<double, 3>, 3> m{};
    Verdict initial_state = Verdict::Pass;

    bool operator==(const TransitionModel&) const = default;
};

/// Rows must sum to 1 within 1e-9 with all entries in [0,1];
/// otherwise InvalidModel.
void validate_model(const TransitionModel& model);

TransitionModel make_model(const std::array<std::array<double, 3>, 3>& rows, Verdict initial);

/// Every row jumps to `target` with probability 1.
TransitionModel force_model(Verdict target);

/// Deterministic pass/fail alternation (invalid exits to pass).
TransitionModel flip_model();

/// Pass and fail each switch to the other with probability `flip`;
/// invalid exits to pass.
TransitionModel noisy_flip_model(double flip, Verdict initial);

/// Seed of the per-history random stream: a hash of the dataset seed and
/// the test-case key, so distinct histories can be generated independently
/// and in parallel.
std::uint64_t derive_stream_seed(std::uint64_t seed, const TestCaseKey& key);

/// Forward-samples the chain: the first verdict is the model's initial
/// state, each later verdict is drawn from the row of the current state.
/// Deterministic for a fixed (model, length, seed).
std::vector<Verdict> generate_sequence(const TransitionModel& model, std::size_t length,
                                       std::uint64_t seed);

/// π with πM = π and Σπ = 1, restricted to the states reachable from the
/// initial state, padded with zeros for unreachable states. Solved as a
/// linear system to absolute tolerance 1e-10; a chain without a unique
/// stationary distribution throws NotErgodic. Periodic chains with a
/// unique π (e.g. the deterministic flip chain) are accepted.
std::array<double, 3> stationary_distribution(const TransitionModel& model);

/// Long-run expected q-score: 1 − Σ_s π_s · m_ss.
Score expected_q(const TransitionModel& model);

/// One stretch of nights governed by a single transition model.
struct Phase {
    std::size_t length = 0;
    TransitionModel model;

    bool operator==(const Phase&) const = default;
};

/// A scripted test-case life: phases played back to back, plus the group
/// labels the planted test is expected to land in (ground truth for
/// classifier validation). Phase boundaries chain state: the first verdict
/// of phase k+1 is drawn from the last state of phase k using the new
/// phase's matrix, overriding that model's initial_state.
struct ScenarioSpec {
    std::string name;
    std::vector<Phase> phases;
    std::vector<std::string> expected_groups;

    bool operator==(const ScenarioSpec&) const = default;
};

/// Total length ≥ 2, every phase length positive, every model valid;
/// otherwise ConfigError/InvalidModel.
void validate_scenario(const ScenarioSpec& spec);

/// Plays the phases into one history with consecutive nights.
VerdictHistory generate_scenario(const ScenarioSpec& spec, const TestCaseKey& key,
                                 std::uint64_t seed,
                                 Night start_night = Night::from_ymd(2020, 1, 1));

struct ScenarioSuite {
    std::uint64_t seed = kDefaultSuiteSeed;
    std::vector<ScenarioSpec> scenarios;

    bool operator==(const ScenarioSuite&) const = default;
};

/// The bundled suite: planted members for every default group and overlap
/// shape, no-group shapes, and too-short histories. Ground-truth labels are
/// exact for the suite's own seed (all but one scenario are deterministic
/// chains, so theirs hold for any seed).
ScenarioSuite default_scenario_suite();

struct SyntheticDataset {
    std::uint64_t seed = 0;
    std::string rng_algorithm;
    std::vector<VerdictHistory> histories;  // sorted by key
    std::map<TestCaseKey, std::vector<std::string>> ground_truth;
};

/// One history per scenario under key {"sim", scenario name, "default"};
/// per-history seeds derived via derive_stream_seed. Bit-identical when
/// regenerated from the same suite.
SyntheticDataset generate_suite(const ScenarioSuite& suite);

/// JSON round-trip for suite config files. Malformed input → ConfigError.
ScenarioSuite parse_scenario_suite(const std::string& json_text);
std::string scenario_suite_to_json(const ScenarioSuite& suite);

}  // namespace intermit
