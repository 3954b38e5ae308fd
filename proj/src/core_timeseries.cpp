#include "fearcorr/core_timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <unordered_set>

#include "fearcorr/error.hpp"

namespace fearcorr {

PriceSeries::PriceSeries(std::string ticker, std::vector<Date> dates, std::vector<double> closes)
    : ticker_(std::move(ticker)), dates_(std::move(dates)), closes_(std::move(closes)) {
    if (dates_.size() != closes_.size()) {
        throw data_error("price series '" + ticker_ + "': " + std::to_string(dates_.size()) +
                         " dates but " + std::to_string(closes_.size()) + " closes");
    }
    for (std::size_t i = 0; i < closes_.size(); ++i) {
        if (!(closes_[i] > 0.0) || !std::isfinite(closes_[i])) {
            throw data_error("price series '" + ticker_ + "': non-positive price at " +
                             dates_[i].iso());
        }
        if (i > 0 && !(dates_[i - 1] < dates_[i])) {
            throw data_error("price series '" + ticker_ + "': dates not strictly increasing at " +
                             dates_[i].iso());
        }
    }
}

std::vector<double> PriceSeries::log_prices() const {
    std::vector<double> out(closes_.size());
    std::transform(closes_.begin(), closes_.end(), out.begin(), [](double p) { return std::log(p); });
    return out;
}

std::vector<double> log_returns(std::span<const double> closes, int horizon) {
    if (horizon < 1) {
        throw validation_error("return horizon must be >= 1, got " + std::to_string(horizon));
    }
    const auto h = static_cast<std::size_t>(horizon);
    if (closes.size() <= h) {
        throw data_error("series of length " + std::to_string(closes.size()) +
                         " is too short for horizon " + std::to_string(horizon));
    }
    std::vector<double> out(closes.size() - h);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(closes[i] > 0.0) || !(closes[i + h] > 0.0)) {
            throw data_error("non-positive price in log return input");
        }
        out[i] = std::log(closes[i + h] / closes[i]);
    }
    return out;
}

LogReturnSeries log_returns(const PriceSeries& series, int horizon) {
    LogReturnSeries out;
    out.ticker = series.ticker();
    out.horizon = horizon;
    out.values = log_returns(std::span<const double>(series.closes()), horizon);
    out.dates.assign(series.dates().begin(), series.dates().begin() + static_cast<std::ptrdiff_t>(out.values.size()));
    return out;
}

WindowStats window_stats(std::span<const double> returns, std::size_t window_start, int window_span) {
    if (window_span < 1) {
        throw validation_error("window span must be >= 1");
    }
    const auto n = static_cast<std::size_t>(window_span) + 1;
    if (window_start >= returns.size() || returns.size() - window_start < n) {
        throw validation_error("window [" + std::to_string(window_start) + ", " +
                               std::to_string(window_start + n - 1) + "] exceeds series of length " +
                               std::to_string(returns.size()));
    }
    const auto window = returns.subspan(window_start, n);
    double sum = 0.0;
    for (double v : window) sum += v;
    const double mean = sum / static_cast<double>(n);
    // Two-pass form of <r^2> - <r>^2.
    double sq = 0.0;
    for (double v : window) sq += (v - mean) * (v - mean);
    WindowStats out;
    out.mean = mean;
    out.volatility = std::sqrt(sq / static_cast<double>(n));
    out.window_start = window_start;
    out.window_span = window_span;
    out.sample_count = n;
    return out;
}

WindowStats window_stats(const LogReturnSeries& returns, std::size_t window_start, int window_span) {
    return window_stats(std::span<const double>(returns.values), window_start, window_span);
}

std::vector<double> detrend_log_values(std::span<const double> log_price, int window, DetrendMode mode) {
    if (window < 3) {
        throw validation_error("detrend window must be >= 3, got " + std::to_string(window));
    }
    if (mode == DetrendMode::Centered && window % 2 == 0) {
        throw validation_error("centered detrend window must be odd, got " + std::to_string(window));
    }
    const auto w = static_cast<std::size_t>(window);
    if (w > log_price.size()) {
        throw validation_error("detrend window " + std::to_string(window) +
                               " exceeds series length " + std::to_string(log_price.size()));
    }
    const std::size_t count = log_price.size() - w + 1;
    const std::size_t lag = mode == DetrendMode::Centered ? w / 2 : w - 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        double sum = 0.0;
        for (std::size_t k = i; k < i + w; ++k) sum += log_price[k];
        out[i] = log_price[i + lag] - sum / static_cast<double>(w);
    }
    return out;
}

DetrendedSeries detrend_log_price(const PriceSeries& series, int window, DetrendMode mode) {
    const auto logs = series.log_prices();
    DetrendedSeries out;
    out.values = detrend_log_values(logs, window, mode);
    const auto w = static_cast<std::size_t>(window);
    out.source_offset = mode == DetrendMode::Centered ? w / 2 : w - 1;
    const auto first = series.dates().begin() + static_cast<std::ptrdiff_t>(out.source_offset);
    out.dates.assign(first, first + static_cast<std::ptrdiff_t>(out.values.size()));
    return out;
}

namespace {

PriceSeries restrict_to(const PriceSeries& s, const std::vector<Date>& calendar) {
    std::vector<double> closes;
    closes.reserve(calendar.size());
    std::size_t j = 0;
    for (const Date d : calendar) {
        while (s.dates()[j] < d) ++j;
        closes.push_back(s.closes()[j]);
    }
    return PriceSeries(s.ticker(), calendar, std::move(closes));
}

} // namespace

AlignedPanel align_panel(const std::vector<PriceSeries>& stocks, const PriceSeries& index,
                         std::size_t min_calendar) {
    if (stocks.size() < 2) {
        throw validation_error("a panel needs at least 2 stocks, got " + std::to_string(stocks.size()));
    }
    std::unordered_set<std::string> seen;
    for (const auto& s : stocks) {
        if (s.empty()) throw data_error("stock '" + s.ticker() + "' has no prices");
        if (!seen.insert(s.ticker()).second) {
            throw data_error("duplicate ticker '" + s.ticker() + "' in panel");
        }
    }
    if (index.empty()) throw data_error("index series '" + index.ticker() + "' has no prices");

    std::vector<Date> calendar = index.dates();
    for (const auto& s : stocks) {
        std::vector<Date> next;
        std::set_intersection(calendar.begin(), calendar.end(), s.dates().begin(), s.dates().end(),
                              std::back_inserter(next));
        calendar = std::move(next);
    }
    if (calendar.empty()) {
        throw data_error("stock and index calendars have no date in common");
    }
    if (calendar.size() < min_calendar) {
        throw data_error("common calendar has " + std::to_string(calendar.size()) +
                         " dates, fewer than the required " + std::to_string(min_calendar));
    }

    AlignedPanel panel;
    panel.calendar = calendar;
    panel.stocks.reserve(stocks.size());
    for (const auto& s : stocks) panel.stocks.push_back(restrict_to(s, calendar));
    panel.index_series = restrict_to(index, calendar);
    return panel;
}

} // namespace fearcorr
