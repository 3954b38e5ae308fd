#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fearcorr {

// Calendar date stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::int32_t ordinal) : ordinal_(ordinal) {}

    static Date from_ymd(int year, unsigned month, unsigned day);

    // Accepts exactly yyyy-mm-dd. Returns nullopt for anything else,
    // including impossible dates such as 2001-02-30.
    static std::optional<Date> parse_iso(std::string_view text);

    constexpr std::int32_t ordinal() const { return ordinal_; }
    std::chrono::year_month_day ymd() const;
    std::string iso() const;

    // 0 = Monday .. 6 = Sunday
    int weekday() const;

    constexpr auto operator<=>(const Date&) const = default;

private:
    std::int32_t ordinal_ = 0;
};

} // namespace fearcorr
