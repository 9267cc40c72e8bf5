#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace intermit {

/// Calendar date of one nightly test run. Stored as a serial day count
/// (days since 1970-01-01) so ordering and "next night" are integer ops.
class Night {
public:
    Night() = default;

    static Night from_ymd(int year, unsigned month, unsigned day);
    static Night from_serial(std::int64_t days) { return Night(days); }

    /// Strict ISO-8601 date: "YYYY-MM-DD", validated against the calendar.
    static std::optional<Night> parse(const std::string& iso);

    std::int64_t serial() const { return days_; }
    Night next() const { return Night(days_ + 1); }

    std::string to_string() const;

    auto operator<=>(const Night&) const = default;

private:
    explicit Night(std::int64_t days) : days_(days) {}
    std::int64_t days_ = 0;
};

}  // namespace intermit
