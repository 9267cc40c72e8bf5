#include "intermit/classify.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "intermit/errors.hpp"
#include "intermit/parallel.hpp"

namespace intermit {

std::vector<GroupSpec> default_group_specs() {
    return {
        {"A6", GroupKind::Intermittent, 6, 0.5, 0.0, 0.96},
        {"A13", GroupKind::Intermittent, 13, 0.35, 0.0, 0.96},
        {"B6", GroupKind::Consistent, 6, 0.0, 0.2, 0.96},
        {"B13", GroupKind::Consistent, 13, 0.0, 0.2, 0.96},
    };
}

Evidence classify_one(const VerdictHistory& history, const GroupSpec& spec,
                      const GroupSpec* exclusion_partner) {
    if (spec.window_size < 2) throw WindowTooSmall(spec.window_size);
    if (spec.kind == GroupKind::Consistent) {
        if (exclusion_partner == nullptr)
            throw MissingExclusionPartner(spec.label, spec.window_size);
        if (exclusion_partner->kind != GroupKind::Intermittent ||
            exclusion_partner->window_size != spec.window_size)
            throw MissingExclusionPartner(spec.label, spec.window_size);
    }

    Evidence ev;
    const ScoreSeries series = windowed_scores(history, spec.window_size);
    if (series.points.empty()) {
        ev.insufficient_data = true;
        ev.reason = "insufficient_data";
        return ev;
    }
    ev.final_window_p = series.points.back().p;
    if (series.points.back().p.value < spec.p_final_min) {
        ev.reason = "final_window_p_below_min";
        return ev;
    }

    if (spec.kind == GroupKind::Intermittent) {
        for (const ScorePoint& pt : series.points) {
            if (pt.q.value >= spec.q_min) {
                ev.member = true;
                ev.trigger_window_end = pt.window_end;
                ev.trigger_score = pt.q;
                ev.reason = "q_window_at_or_above_min";
                return ev;
            }
        }
        ev.reason = "no_window_reached_q_min";
        return ev;
    }

    // Consistent: exclusion first, then the dip.
    const Evidence partner_ev = classify_one(history, *exclusion_partner);
    if (partner_ev.member) {
        ev.reason = "excluded_by_intermittent_partner";
        return ev;
    }
    for (const ScorePoint& pt : series.points) {
        if (pt.p.value < spec.p_dip_max) {
            ev.member = true;
            ev.trigger_window_end = pt.window_end;
            ev.trigger_score = pt.p;
            ev.reason = "p_window_below_dip_max";
            return ev;
        }
    }
    ev.reason = "no_window_below_p_dip_max";
    return ev;
}

namespace {

void validate_specs(const std::vector<GroupSpec>& specs) {
    std::set<std::string> labels;
    for (const GroupSpec& spec : specs) {
        if (spec.window_size < 2) throw WindowTooSmall(spec.window_size);
        if (!labels.insert(spec.label).second)
            throw ConfigError("duplicate group label: " + spec.label);
    }
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (specs[i].kind != GroupKind::Consistent) continue;
        bool found = false;
        for (std::size_t j = 0; j < i; ++j) {
            if (specs[j].kind == GroupKind::Intermittent &&
                specs[j].window_size == specs[i].window_size) {
                found = true;
                break;
            }
        }
        if (!found) throw MissingExclusionPartner(specs[i].label, specs[i].window_size);
    }
}

const GroupSpec* partner_for(const std::vector<GroupSpec>& specs, std::size_t i) {
    for (std::size_t j = 0; j < i; ++j)
        if (specs[j].kind == GroupKind::Intermittent &&
            specs[j].window_size == specs[i].window_size)
            return &specs[j];
    return nullptr;
}

}  // namespace

ClassifyResult classify_all(const std::vector<VerdictHistory>& histories,
                            const std::vector<GroupSpec>& specs) {
    validate_specs(specs);

    ClassifyResult result;
    result.population = histories.size();
    result.overlap.labels.reserve(specs.size());
    for (const GroupSpec& spec : specs) result.overlap.labels.push_back(spec.label);
    result.overlap.counts.assign(specs.size(), std::vector<std::size_t>(specs.size(), 0));

    int min_window = 0;
    for (const GroupSpec& spec : specs)
        if (min_window == 0 || spec.window_size < min_window) min_window = spec.window_size;

    // Per-test evidence is independent work; the fold below is sequential so
    // the result does not depend on scheduling.
    std::vector<Classification> per_test(histories.size());
    std::vector<std::vector<std::size_t>> member_indices(histories.size());
    parallel_for(histories.size(), [&](std::size_t h) {
        const VerdictHistory& history = histories[h];
        Classification cls;
        cls.key = history.key;
        cls.executions = history.size();
        for (std::size_t i = 0; i < specs.size(); ++i) {
            Evidence ev = classify_one(history, specs[i], partner_for(specs, i));
            if (ev.member) {
                cls.groups.push_back(specs[i].label);
                member_indices[h].push_back(i);
            }
            cls.evidence.emplace(specs[i].label, std::move(ev));
        }
        per_test[h] = std::move(cls);
    });

    for (std::size_t h = 0; h < histories.size(); ++h) {
        if (min_window != 0 && histories[h].size() >= static_cast<std::size_t>(min_window))
            ++result.classifiable;
        if (member_indices[h].empty()) continue;
        for (std::size_t a : member_indices[h])
            for (std::size_t b : member_indices[h]) ++result.overlap.counts[a][b];
        ++result.overlap.k_histogram[member_indices[h].size()];
        result.classified.push_back(std::move(per_test[h]));
    }

    std::sort(result.classified.begin(), result.classified.end(),
              [](const Classification& a, const Classification& b) { return a.key < b.key; });
    return result;
}

StatFive stat_five(std::vector<double> values) {
    if (values.empty()) throw EmptyWindow();
    std::sort(values.begin(), values.end());
    StatFive s;
    s.min = values.front();
    s.max = values.back();
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    const std::size_t n = values.size();
    s.median = (n % 2 == 1) ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(sq / static_cast<double>(n));
    return s;
}

PopulationSummary summarize_population(const std::vector<VerdictHistory>& histories) {
    PopulationSummary summary;
    summary.tests = histories.size();
    summary.verdict_counts = {{Verdict::Pass, 0}, {Verdict::Fail, 0}, {Verdict::Invalid, 0}};

    std::vector<double> p_values;
    std::vector<double> q_values;
    std::vector<double> exec_counts;
    exec_counts.reserve(histories.size());
    std::size_t nonzero_q = 0;

    for (const VerdictHistory& history : histories) {
        if (history.empty()) throw EmptyLog();
        exec_counts.push_back(static_cast<double>(history.size()));
        summary.verdicts += history.size();
        for (Verdict v : history.verdicts) ++summary.verdict_counts[v];
        if (history.size() < 2) {
            ++summary.excluded_single_execution_tests;
            continue;
        }
        const FullScores scores = full_sequence_scores(history);
        p_values.push_back(scores.p.value);
        q_values.push_back(scores.q->value);
        if (scores.q->value > 0.0) ++nonzero_q;
    }

    summary.scored_tests = p_values.size();
    for (const auto& [verdict, count] : summary.verdict_counts)
        summary.verdict_fractions[verdict] =
            summary.verdicts == 0 ? 0.0
                                  : static_cast<double>(count) / static_cast<double>(summary.verdicts);
    if (!p_values.empty()) {
        summary.full_p = stat_five(p_values);
        summary.full_q = stat_five(q_values);
        summary.fraction_nonzero_q =
            static_cast<double>(nonzero_q) / static_cast<double>(summary.scored_tests);
    }
    if (!exec_counts.empty()) summary.executions = stat_five(exec_counts);
    return summary;
}

}  // namespace intermit
