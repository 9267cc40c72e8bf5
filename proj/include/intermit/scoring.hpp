#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "intermit/verdicts.hpp"

namespace intermit {

/// A fraction in [0, 1]. Scores are kept unrounded; rounding happens only
/// at presentation time, and threshold comparisons always use the raw value.
struct Score {
    double value = 0.0;
    auto operator<=>(const Score&) const = default;
};

/// Observed transition counts between verdict states, rows = source state,
/// columns = destination state, in the fixed order (pass, fail, invalid).
/// For a window of length L the entries sum to L - 1.
struct TransitionCounts {
    std::array<std::array<std::uint64_t, 3>, 3> n{};

    std::uint64_t& at(Verdict from, Verdict to) { return n[verdict_index(from)][verdict_index(to)]; }
    std::uint64_t at(Verdict from, Verdict to) const {
        return n[verdict_index(from)][verdict_index(to)];
    }

    /// Total observed transitions.
    std::uint64_t total() const;
    /// Transitions that kept the same verdict (the diagonal).
    std::uint64_t trace() const;

    bool operator==(const TransitionCounts&) const = default;
};

/// Counts the transitions between adjacent verdicts of a window.
/// Throws EmptyWindow for an empty window.
TransitionCounts count_transitions(std::span<const Verdict> window);

/// Fraction of transitions that changed state: (sum - trace) / sum.
/// Throws NoTransitions when the counts hold no transitions at all
/// (q is undefined for a single verdict).
Score q_score(const TransitionCounts& counts);

/// Fraction of passed verdicts in the window; invalid counts as non-pass.
/// Throws EmptyWindow for an empty window.
Score p_score(std::span<const Verdict> window);

/// Scores of one moving-window position; window_end is the 0-based index
/// of the last verdict inside the window.
struct ScorePoint {
    std::size_t window_end = 0;
    Score q;
    Score p;

    bool operator==(const ScorePoint&) const = default;
};

/// q and p measured over a moving window of w consecutive verdicts,
/// sliding by one execution at a time.
struct ScoreSeries {
    int window_size = 0;
    std::vector<ScorePoint> points;

    bool empty() const { return points.empty(); }
};

/// One point per contiguous window of exactly w verdicts; empty series when
/// the sequence is shorter than w. Throws WindowTooSmall for w < 2.
ScoreSeries windowed_scores(std::span<const Verdict> sequence, int w);
ScoreSeries windowed_scores(const VerdictHistory& history, int w);

/// q and p over an entire history taken as a single window. q is absent
/// for a single-verdict history (no transitions); an empty history throws
/// EmptyWindow.
struct FullScores {
    std::optional<Score> q;
    Score p;
};

FullScores full_sequence_scores(std::span<const Verdict> sequence);
FullScores full_sequence_scores(const VerdictHistory& history);

}  // namespace intermit
