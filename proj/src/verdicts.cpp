#include "intermit/verdicts.hpp"

#include <stdexcept>

namespace intermit {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Invalid: return "invalid";
    }
    throw std::logic_error("unreachable verdict value");
}

std::optional<Verdict> parse_verdict(const std::string& token) {
    if (token == "pass") return Verdict::Pass;
    if (token == "fail") return Verdict::Fail;
    if (token == "invalid") return Verdict::Invalid;
    return std::nullopt;
}

void VerdictHistory::append(Night night, Verdict verdict) {
    if (!nights.empty() && night <= nights.back())
        throw std::invalid_argument("history nights must be strictly ascending, got " +
                                    night.to_string() + " after " + nights.back().to_string());
    nights.push_back(night);
    verdicts.push_back(verdict);
}

}  // namespace intermit
