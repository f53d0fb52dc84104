#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace trustsim {

/// An exact amount of money held as integer cents.
///
/// Amounts are signed so that deltas can be expressed, but every game-facing
/// quantity (endowment, sent, returned, payoffs) is non-negative.
class Money {
public:
    constexpr Money() = default;

    static constexpr Money cents(std::int64_t c) { return Money{c}; }
    static constexpr Money dollars(std::int64_t d) { return Money{d * 100}; }

    /// Parses "7", "7.5", "7.50", "$7.50". At most two decimals; no sign.
    static std::optional<Money> parse(std::string_view text);

    constexpr std::int64_t in_cents() const { return cents_; }
    constexpr double in_dollars() const { return static_cast<double>(cents_) / 100.0; }
    constexpr bool is_whole_dollars() const { return cents_ % 100 == 0; }

    /// Plain integer when whole ("10"), otherwise two decimals ("7.50").
    std::string to_string() const;

    constexpr Money operator+(Money o) const { return Money{cents_ + o.cents_}; }
    constexpr Money operator-(Money o) const { return Money{cents_ - o.cents_}; }
    constexpr Money operator*(std::int64_t k) const { return Money{cents_ * k}; }
    constexpr Money &operator+=(Money o) {
        cents_ += o.cents_;
        return *this;
    }

    constexpr auto operator<=>(const Money &) const = default;

private:
    constexpr explicit Money(std::int64_t c) : cents_(c) {}

    std::int64_t cents_ = 0;
};

/// Inclusive range of admissible amounts for one decision.
struct MoneyRange {
    Money min;
    Money max;

    constexpr bool contains(Money m) const { return min <= m && m <= max; }
    bool operator==(const MoneyRange &) const = default;
};

}  // namespace trustsim
