#include "intermit/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string_view>

#include <json.hpp>

#include "intermit/errors.hpp"

namespace intermit {

void validate_model(const TransitionModel& model) {
    for (std::size_t r = 0; r < kVerdictCount; ++r) {
        double sum = 0.0;
        for (double entry : model.m[r]) {
            if (!(entry >= 0.0 && entry <= 1.0))
                throw InvalidModel("transition probability out of [0,1] in row " +
                                   to_string(verdict_from_index(r)));
            sum += entry;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw InvalidModel("row " + to_string(verdict_from_index(r)) +
                               " does not sum to 1 (got " + std::to_string(sum) + ")");
    }
}

TransitionModel make_model(const std::array<std::array<double, 3>, 3>& rows, Verdict initial) {
    TransitionModel model{rows, initial};
    validate_model(model);
    return model;
}

TransitionModel force_model(Verdict target) {
    std::array<std::array<double, 3>, 3> rows{};
    for (auto& row : rows) row[verdict_index(target)] = 1.0;
    return {rows, target};
}

TransitionModel flip_model() {
    return {{{{0, 1, 0}, {1, 0, 0}, {1, 0, 0}}}, Verdict::Pass};
}

TransitionModel noisy_flip_model(double flip, Verdict initial) {
    TransitionModel model{{{{1 - flip, flip, 0}, {flip, 1 - flip, 0}, {1, 0, 0}}}, initial};
    validate_model(model);
    return model;
}

namespace {

std::uint64_t fnv1a64(std::string_view text, std::uint64_t h) {
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Inverse-CDF draws over the fixed state order from the documented
/// mt19937_64 stream. uniform() uses the top 53 bits so every value is an
/// exactly representable double in [0,1) on any platform.
class VerdictSampler {
public:
    explicit VerdictSampler(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    Verdict draw(const TransitionModel& model, Verdict from) {
        const auto& row = model.m[verdict_index(from)];
        const double u = uniform();
        double cumulative = row[0];
        if (u < cumulative) return Verdict::Pass;
        cumulative += row[1];
        if (u < cumulative) return Verdict::Fail;
        return Verdict::Invalid;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t seed, const TestCaseKey& key) {
    std::uint64_t h = 1469598103934665603ULL;
    h = fnv1a64(key.test_system, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(key.test_script, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(key.parameter_setting, h);
    return splitmix64(seed ^ h);
}

std::vector<Verdict> generate_sequence(const TransitionModel& model, std::size_t length,
                                       std::uint64_t seed) {
    validate_model(model);
    if (length < 1) throw ConfigError("sequence length must be positive");
    std::vector<Verdict> sequence;
    sequence.reserve(length);
    VerdictSampler sampler(seed);
    Verdict state = model.initial_state;
    sequence.push_back(state);
    for (std::size_t i = 1; i < length; ++i) {
        state = sampler.draw(model, state);
        sequence.push_back(state);
    }
    return sequence;
}

std::array<double, 3> stationary_distribution(const TransitionModel& model) {
    validate_model(model);

    // States reachable from the initial state; the system is solved on this
    // closed set only, unreachable states get probability 0.
    std::array<bool, 3> reachable{};
    reachable[verdict_index(model.initial_state)] = true;
    for (bool grew = true; grew;) {
        grew = false;
        for (std::size_t i = 0; i < 3; ++i) {
            if (!reachable[i]) continue;
            for (std::size_t j = 0; j < 3; ++j)
                if (model.m[i][j] > 0.0 && !reachable[j]) {
                    reachable[j] = true;
                    grew = true;
                }
        }
    }
    std::vector<std::size_t> states;
    for (std::size_t i = 0; i < 3; ++i)
        if (reachable[i]) states.push_back(i);
    const std::size_t k = states.size();

    // Stack the constraints πM = π and Σπ = 1 as a (k+1)×k system A·π = b
    // and solve the normal equations. A singular system means π is not
    // unique (more than one recurrent class): not ergodic.
    std::array<std::array<double, 4>, 4> a{};  // [AtA | Atb]
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            double dot = 1.0;  // the ones row contributes 1 to every entry
            for (std::size_t r = 0; r < k; ++r) {
                const double ari = model.m[states[i]][states[r]] - (r == i ? 1.0 : 0.0);
                const double arj = model.m[states[j]][states[r]] - (r == j ? 1.0 : 0.0);
                dot += ari * arj;
            }
            a[i][j] = dot;
        }
        a[i][k] = 1.0;  // Atb: only the Σπ = 1 row has a nonzero rhs
    }

    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-9)
            throw NotErgodic("no unique stationary distribution for this model");
        std::swap(a[col], a[pivot]);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            const double factor = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= k; ++c) a[r][c] -= factor * a[col][c];
        }
    }

    std::vector<double> pi(k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        pi[i] = a[i][k] / a[i][i];
        total += pi[i];
    }

    if (std::abs(total - 1.0) > 1e-10)
        throw NotErgodic("stationary distribution does not normalize");
    for (std::size_t j = 0; j < k; ++j) {
        double flow = 0.0;
        for (std::size_t i = 0; i < k; ++i) flow += pi[i] * model.m[states[i]][states[j]];
        if (std::abs(flow - pi[j]) > 1e-10)
            throw NotErgodic("stationary distribution residual too large");
        if (pi[j] < -1e-10) throw NotErgodic("stationary distribution is not a distribution");
    }

    std::array<double, 3> result{};
    for (std::size_t i = 0; i < k; ++i) result[states[i]] = std::max(pi[i], 0.0);
    return result;
}

Score expected_q(const TransitionModel& model) {
    const std::array<double, 3> pi = stationary_distribution(model);
    double stay = 0.0;
    for (std::size_t s = 0; s < 3; ++s) stay += pi[s] * model.m[s][s];
    return Score{std::clamp(1.0 - stay, 0.0, 1.0)};
}

void validate_scenario(const ScenarioSpec& spec) {
    if (spec.name.empty()) throw ConfigError("scenario name must not be empty");
    if (spec.phases.empty()) throw ConfigError("scenario '" + spec.name + "' has no phases");
    std::size_t total = 0;
    for (const Phase& phase : spec.phases) {
        if (phase.length == 0)
            throw ConfigError("scenario '" + spec.name + "' has a zero-length phase");
        validate_model(phase.model);
        total += phase.length;
    }
    if (total < 2)
        throw ConfigError("scenario '" + spec.name + "' must span at least 2 nights");
}

VerdictHistory generate_scenario(const ScenarioSpec& spec, const TestCaseKey& key,
                                 std::uint64_t seed, Night start_night) {
    validate_scenario(spec);
    VerdictHistory history;
    history.key = key;
    VerdictSampler sampler(seed);
    Night night = start_night;
    Verdict state = Verdict::Pass;
    bool first = true;
    for (const Phase& phase : spec.phases) {
        for (std::size_t step = 0; step < phase.length; ++step) {
            state = first ? phase.model.initial_state : sampler.draw(phase.model, state);
            first = false;
            history.append(night, state);
            night = night.next();
        }
    }
    return history;
}

ScenarioSuite default_scenario_suite() {
    const TransitionModel kPass = force_model(Verdict::Pass);
    const TransitionModel kFail = force_model(Verdict::Fail);
    const TransitionModel kInvalid = force_model(Verdict::Invalid);
    const TransitionModel kFlip = flip_model();

    ScenarioSuite suite;
    suite.seed = kDefaultSuiteSeed;
    suite.scenarios = {
        // One early burst of alternation, then stable: hot 6-windows but the
        // 13-windows dilute below 0.35.
        {"a6_only", {{4, kFlip}, {36, kPass}}, {"A6"}},
        // Fails spread 5 apart: every 6-window sees at most 2 changes while
        // a 13-window sees 6 of 12.
        {"a13_only",
         {{1, kPass}, {1, kFail}, {4, kPass}, {1, kFail}, {4, kPass}, {1, kFail}, {28, kPass}},
         {"A13"}},
        // Long alternation saturates both window sizes.
        {"a6_a13", {{12, kFlip}, {30, kPass}}, {"A6", "A13"}},
        // A fail streak long enough that even a 13-window dips below 0.2.
        {"b6_b13", {{13, kFail}, {30, kPass}}, {"B6", "B13"}},
        // A 6-night outage: 6-windows dip to 0, every 13-window keeps 7 passes.
        {"b6_only", {{10, kPass}, {6, kFail}, {24, kPass}}, {"B6"}},
        // A short choppy patch inside a long outage: 6-windows see 3+ changes,
        // no 13-window collects more than 4, and the dip still reaches 1/13.
        {"a6_b13",
         {{5, kFail}, {1, kPass}, {1, kFail}, {1, kPass}, {12, kFail}, {20, kPass}},
         {"A6", "B13"}},
        {"no_group_allpass", {{40, kPass}}, {}},
        // A single invalid night moves q no higher than 2/5.
        {"no_group_invalid_blip", {{20, kPass}, {1, kInvalid}, {19, kPass}}, {}},
        // Alternation at the very end: the final-window pass-rate gate
        // rejects what the q trigger would otherwise admit.
        {"no_group_late_spike", {{30, kPass}, {10, kFlip}}, {}},
        // Long enough for the 6-windows only.
        {"short_a6", {{4, kFlip}, {6, kPass}}, {"A6"}},
        {"insufficient_all", {{4, kFlip}}, {}},
        // a13_only with the fails replaced by invalids: invalid verdicts are
        // state changes too.
        {"a13_invalid_runs",
         {{1, kPass}, {1, kInvalid}, {4, kPass}, {1, kInvalid}, {4, kPass}, {1, kInvalid},
          {28, kPass}},
         {"A13"}},
        // b6_only with an invalid outage: invalid counts as non-pass.
        {"b6_invalid_dip", {{10, kPass}, {6, kInvalid}, {24, kPass}}, {"B6"}},
        // Stochastic phase; the label is exact for the suite's own seed and
        // is cross-checked against an independent classifier in the tests.
        {"stochastic_intermittent",
         {{14, noisy_flip_model(0.9, Verdict::Pass)}, {30, kPass}},
         {"A6", "A13"}},
    };
    return suite;
}

SyntheticDataset generate_suite(const ScenarioSuite& suite) {
    std::set<std::string> names;
    for (const ScenarioSpec& spec : suite.scenarios)
        if (!names.insert(spec.name).second)
            throw ConfigError("duplicate scenario name: " + spec.name);

    SyntheticDataset dataset;
    dataset.seed = suite.seed;
    dataset.rng_algorithm = kRngAlgorithm;
    for (const ScenarioSpec& spec : suite.scenarios) {
        const TestCaseKey key{"sim", spec.name, "default"};
        dataset.histories.push_back(
            generate_scenario(spec, key, derive_stream_seed(suite.seed, key)));
        dataset.ground_truth.emplace(key, spec.expected_groups);
    }
    std::sort(dataset.histories.begin(), dataset.histories.end(),
              [](const VerdictHistory& a, const VerdictHistory& b) { return a.key < b.key; });
    return dataset;
}

namespace {

Verdict verdict_from_json_token(const nlohmann::json& token, const std::string& context) {
    if (!token.is_string())
        throw ConfigError("scenario suite: " + context + " must be a verdict string");
    const auto verdict = parse_verdict(token.get<std::string>());
    if (!verdict)
        throw ConfigError("scenario suite: bad verdict '" + token.get<std::string>() + "' in " +
                          context);
    return *verdict;
}

}  // namespace

ScenarioSuite parse_scenario_suite(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scenario suite is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("scenarios") || !doc["scenarios"].is_array())
        throw ConfigError("scenario suite must be an object with a 'scenarios' array");
    if (doc["scenarios"].empty()) throw ConfigError("scenario suite has no scenarios");
    if (doc.contains("rng_algorithm") && doc["rng_algorithm"] != kRngAlgorithm)
        throw ConfigError(std::string("scenario suite expects rng_algorithm '") + kRngAlgorithm +
                          "'");

    ScenarioSuite suite;
    suite.seed = doc.value("seed", kDefaultSuiteSeed);
    for (const auto& entry : doc["scenarios"]) {
        if (!entry.is_object() || !entry.contains("name") || !entry.contains("phases"))
            throw ConfigError("each scenario needs 'name' and 'phases'");
        ScenarioSpec spec;
        spec.name = entry["name"].get<std::string>();
        for (const auto& label : entry.value("expected_groups", nlohmann::json::array()))
            spec.expected_groups.push_back(label.get<std::string>());
        for (const auto& phase_json : entry["phases"]) {
            if (!phase_json.is_object() || !phase_json.contains("length") ||
                !phase_json.contains("model"))
                throw ConfigError("scenario '" + spec.name +
                                  "': each phase needs 'length' and 'model'");
            Phase phase;
            phase.length = phase_json["length"].get<std::size_t>();
            const auto& model_json = phase_json["model"];
            if (!model_json.contains("rows") || !model_json["rows"].is_array() ||
                model_json["rows"].size() != 3)
                throw ConfigError("scenario '" + spec.name + "': model needs 3 'rows'");
            for (std::size_t r = 0; r < 3; ++r) {
                const auto& row = model_json["rows"][r];
                if (!row.is_array() || row.size() != 3)
                    throw ConfigError("scenario '" + spec.name + "': model rows must have 3 entries");
                for (std::size_t c = 0; c < 3; ++c)
                    phase.model.m[r][c] = row[c].get<double>();
            }
            phase.model.initial_state =
                verdict_from_json_token(model_json.value("initial", nlohmann::json("pass")),
                                        "scenario '" + spec.name + "' model initial state");
            validate_model(phase.model);
            spec.phases.push_back(std::move(phase));
        }
        validate_scenario(spec);
        suite.scenarios.push_back(std::move(spec));
    }
    return suite;
}

std::string scenario_suite_to_json(const ScenarioSuite& suite) {
    nlohmann::ordered_json doc;
    doc["seed"] = suite.seed;
    doc["rng_algorithm"] = kRngAlgorithm;
    doc["scenarios"] = nlohmann::ordered_json::array();
    for (const ScenarioSpec& spec : suite.scenarios) {
        nlohmann::ordered_json scenario;
        scenario["name"] = spec.name;
        scenario["expected_groups"] = spec.expected_groups;
        scenario["phases"] = nlohmann::ordered_json::array();
        for (const Phase& phase : spec.phases) {
            nlohmann::ordered_json phase_json;
            phase_json["length"] = phase.length;
            phase_json["model"]["initial"] = to_string(phase.model.initial_state);
            phase_json["model"]["rows"] = phase.model.m;
            scenario["phases"].push_back(std::move(phase_json));
        }
        doc["scenarios"].push_back(std::move(scenario));
    }
    return doc.dump(2) + "\n";
}

}  // namespace intermit
