#include "trustsim/money.hpp"

#include <cctype>
#include <charconv>
#include <limits>

namespace trustsim {

std::optional<Money> Money::parse(std::string_view text) {
    if (!text.empty() && text.front() == '$') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;

    const auto dot = text.find('.');
    const std::string_view whole = text.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (whole.empty() || frac.size() > 2 || (dot != std::string_view::npos && frac.empty())) {
        return std::nullopt;
    }
    for (char c : whole)
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    for (char c : frac)
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;

    std::int64_t dollars = 0;
    auto [ptr, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), dollars);
    if (ec != std::errc{} || ptr != whole.data() + whole.size()) return std::nullopt;
    if (dollars > std::numeric_limits<std::int64_t>::max() / 100 - 1) return std::nullopt;

    std::int64_t cents = 0;
    if (frac.size() >= 1) cents += 10 * (frac[0] - '0');
    if (frac.size() == 2) cents += frac[1] - '0';
    return Money::cents(dollars * 100 + cents);
}

std::string Money::to_string() const {
    const bool negative = cents_ < 0;
    const std::int64_t abs = negative ? -cents_ : cents_;
    std::string out = negative ? "-" : "";
    out += std::to_string(abs / 100);
    if (abs % 100 != 0) {
        const auto frac = abs % 100;
        out += '.';
        out += static_cast<char>('0' + frac / 10);
        out += static_cast<char>('0' + frac % 10);
    }
    return out;
}

}  // namespace trustsim
