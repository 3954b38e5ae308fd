#include "fearcorr/date.hpp"

#include <cstdio>

namespace fearcorr {

using namespace std::chrono;

Date Date::from_ymd(int y, unsigned m, unsigned d) {
    const year_month_day date{year{y}, month{m}, day{d}};
    return Date(static_cast<std::int32_t>(sys_days{date}.time_since_epoch().count()));
}

std::optional<Date> Date::parse_iso(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    auto digits = [&](std::size_t pos, std::size_t len, int& out) {
        out = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            const char c = text[i];
            if (c < '0' || c > '9') return false;
            out = out * 10 + (c - '0');
        }
        return true;
    };
    int y = 0, m = 0, d = 0;
    if (!digits(0, 4, y) || !digits(5, 2, m) || !digits(8, 2, d)) {
        return std::nullopt;
    }
    const year_month_day date{year{y}, month{static_cast<unsigned>(m)},
                              day{static_cast<unsigned>(d)}};
    if (!date.ok()) {
        return std::nullopt;
    }
    return Date(static_cast<std::int32_t>(sys_days{date}.time_since_epoch().count()));
}

year_month_day Date::ymd() const {
    return year_month_day{sys_days{days{ordinal_}}};
}

std::string Date::iso() const {
    const auto date = ymd();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

int Date::weekday() const {
    // 1970-01-01 was a Thursday.
    const int w = (ordinal_ + 3) % 7;
    return w < 0 ? w + 7 : w;
}

} // namespace fearcorr
