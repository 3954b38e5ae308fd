#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fearcorr/date.hpp"

namespace fearcorr {

// One asset's daily closes. The constructor enforces the invariants:
// equal lengths, strictly increasing dates, strictly positive prices.
class PriceSeries {
public:
    PriceSeries() = default;
    PriceSeries(std::string ticker, std::vector<Date> dates, std::vector<double> closes);

    const std::string& ticker() const { return ticker_; }
    const std::vector<Date>& dates() const { return dates_; }
    const std::vector<double>& closes() const { return closes_; }
    std::size_t size() const { return closes_.size(); }
    bool empty() const { return closes_.empty(); }

    std::vector<double> log_prices() const;

private:
    std::string ticker_;
    std::vector<Date> dates_;
    std::vector<double> closes_;
};

// r(t) = ln(p(t + horizon) / p(t)); dates[i] is the interval start.
struct LogReturnSeries {
    std::string ticker;
    std::vector<Date> dates;
    std::vector<double> values;
    int horizon = 1;
};

// Population moments over the span + 1 samples starting at window_start.
struct WindowStats {
    double mean = 0.0;
    double volatility = 0.0;
    std::size_t window_start = 0;
    int window_span = 0;
    std::size_t sample_count = 0;
};

enum class DetrendMode { Centered, Trailing };

struct DetrendedSeries {
    std::vector<Date> dates;
    std::vector<double> values;
    // Index into the source series of values[0].
    std::size_t source_offset = 0;
};

struct AlignedPanel {
    std::vector<Date> calendar;
    std::vector<PriceSeries> stocks;
    PriceSeries index_series;

    std::size_t stock_count() const { return stocks.size(); }
    std::size_t length() const { return calendar.size(); }
};

LogReturnSeries log_returns(const PriceSeries& series, int horizon);

// Raw-vector form used by the analysis code, same contract.
std::vector<double> log_returns(std::span<const double> closes, int horizon);

WindowStats window_stats(std::span<const double> returns, std::size_t window_start, int window_span);
WindowStats window_stats(const LogReturnSeries& returns, std::size_t window_start, int window_span);

// Removes the moving average of ln p. Centered mode needs an odd window and
// yields the length - window + 1 fully covered centers; trailing mode yields
// one value per index from window - 1 onwards.
DetrendedSeries detrend_log_price(const PriceSeries& series, int window,
                                  DetrendMode mode = DetrendMode::Centered);
std::vector<double> detrend_log_values(std::span<const double> log_price, int window,
                                       DetrendMode mode = DetrendMode::Centered);

// Intersects every calendar and restricts each series to it.
AlignedPanel align_panel(const std::vector<PriceSeries>& stocks, const PriceSeries& index,
                         std::size_t min_calendar = 2);

} // namespace fearcorr
