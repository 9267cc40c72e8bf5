#include "intermit/scoring.hpp"

#include "intermit/errors.hpp"

namespace intermit {

std::uint64_t TransitionCounts::total() const {
    std::uint64_t sum = 0;
    for (const auto& row : n)
        for (std::uint64_t c : row) sum += c;
    return sum;
}

std::uint64_t TransitionCounts::trace() const {
    return n[0][0] + n[1][1] + n[2][2];
}

TransitionCounts count_transitions(std::span<const Verdict> window) {
    if (window.empty()) throw EmptyWindow();
    TransitionCounts counts;
    for (std::size_t i = 0; i + 1 < window.size(); ++i)
        ++counts.at(window[i], window[i + 1]);
    return counts;
}

Score q_score(const TransitionCounts& counts) {
    const std::uint64_t sum = counts.total();
    if (sum == 0) throw NoTransitions();
    // (sum - trace) / sum rather than 1 - trace/sum: one correctly rounded
    // division of exact integers, so e.g. 4 changes of 7 yields exactly the
    // double nearest 4/7.
    const std::uint64_t changed = sum - counts.trace();
    return Score{static_cast<double>(changed) / static_cast<double>(sum)};
}

Score p_score(std::span<const Verdict> window) {
    if (window.empty()) throw EmptyWindow();
    std::uint64_t passed = 0;
    for (Verdict v : window)
        if (v == Verdict::Pass) ++passed;
    return Score{static_cast<double>(passed) / static_cast<double>(window.size())};
}

ScoreSeries windowed_scores(std::span<const Verdict> sequence, int w) {
    if (w < 2) throw WindowTooSmall(w);
    ScoreSeries series;
    series.window_size = w;
    const std::size_t n = sequence.size();
    const std::size_t width = static_cast<std::size_t>(w);
    if (n < width) return series;

    series.points.reserve(n - width + 1);

    // Slide incrementally: drop the leading transition and pass, add the
    // trailing ones. Every window has exactly w - 1 transitions.
    TransitionCounts counts = count_transitions(sequence.subspan(0, width));
    std::uint64_t passed = 0;
    for (std::size_t i = 0; i < width; ++i)
        if (sequence[i] == Verdict::Pass) ++passed;

    const auto transitions = static_cast<double>(width - 1);
    const auto den = static_cast<double>(width);
    for (std::size_t end = width - 1;; ++end) {
        const std::uint64_t changed = (width - 1) - counts.trace();
        series.points.push_back({end, Score{static_cast<double>(changed) / transitions},
                                 Score{static_cast<double>(passed) / den}});
        if (end + 1 >= n) break;
        const std::size_t start = end + 1 - width;
        --counts.at(sequence[start], sequence[start + 1]);
        ++counts.at(sequence[end], sequence[end + 1]);
        if (sequence[start] == Verdict::Pass) --passed;
        if (sequence[end + 1] == Verdict::Pass) ++passed;
    }
    return series;
}

ScoreSeries windowed_scores(const VerdictHistory& history, int w) {
    return windowed_scores(history.sequence(), w);
}

FullScores full_sequence_scores(std::span<const Verdict> sequence) {
    if (sequence.empty()) throw EmptyWindow();
    FullScores scores;
    scores.p = p_score(sequence);
    if (sequence.size() >= 2) scores.q = q_score(count_transitions(sequence));
    return scores;
}

FullScores full_sequence_scores(const VerdictHistory& history) {
    return full_sequence_scores(history.sequence());
}

}  // namespace intermit
