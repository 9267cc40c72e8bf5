#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "intermit/night.hpp"

namespace intermit {

/// Outcome of one test execution. `Invalid` means the execution could not
/// be completed. There is no severity attached to the non-pass verdicts.
enum class Verdict : std::uint8_t { Pass = 0, Fail = 1, Invalid = 2 };

inline constexpr std::size_t kVerdictCount = 3;

constexpr std::size_t verdict_index(Verdict v) { return static_cast<std::size_t>(v); }

constexpr Verdict verdict_from_index(std::size_t i) { return static_cast<Verdict>(i); }

std::string to_string(Verdict v);

/// Accepts exactly "pass", "fail" or "invalid"; anything else is a parse
/// error at the caller.
std::optional<Verdict> parse_verdict(const std::string& token);

/// Identity of a test case. The same script run on two different test
/// systems counts as two distinct test cases.
struct TestCaseKey {
    std::string test_system;
    std::string test_script;
    std::string parameter_setting;

    auto operator<=>(const TestCaseKey&) const = default;
};

/// One execution outcome of one test case on one night.
struct VerdictRecord {
    TestCaseKey key;
    Night night;
    Verdict verdict = Verdict::Pass;
};

/// Ordered verdict sequence of one test case. Transitions are counted
/// between consecutive executions; calendar gaps between nights do not
/// break the sequence, nights are metadata only.
struct VerdictHistory {
    TestCaseKey key;
    std::vector<Night> nights;
    std::vector<Verdict> verdicts;

    std::size_t size() const { return verdicts.size(); }
    bool empty() const { return verdicts.empty(); }

    /// Appends one execution; nights must arrive strictly ascending.
    void append(Night night, Verdict verdict);

    std::span<const Verdict> sequence() const { return verdicts; }
};

}  // namespace intermit
