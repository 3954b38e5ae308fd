#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fearcorr/core_timeseries.hpp"

namespace fearcorr {

// Inclusive range of correlation window spans [first, last] in trading days.
struct WindowRange {
    int first = 10;
    int last = 35;

    std::size_t count() const { return static_cast<std::size_t>(last - first + 1); }
};

struct StockPair {
    std::size_t x = 0;
    std::size_t y = 0;
};

// Every unordered pair x < y of n stocks, in lexicographic order.
std::vector<StockPair> all_pairs(std::size_t n);

// Log returns of every stock at one horizon plus the index log price. This
// is the common input to everything in this header; build it once per run.
class PanelReturns {
public:
    PanelReturns(std::vector<std::string> tickers, const std::vector<std::vector<double>>& stock_log_prices,
                 std::vector<double> index_log_price, int horizon);

    static PanelReturns from_panel(const AlignedPanel& panel, int horizon);

    std::size_t stock_count() const { return returns_.size(); }
    // Number of returns per stock: prices - horizon.
    std::size_t return_count() const { return return_count_; }
    int horizon() const { return horizon_; }
    const std::string& ticker(std::size_t i) const { return tickers_[i]; }
    std::span<const double> returns(std::size_t stock) const { return returns_[stock]; }
    std::span<const double> index_log_price() const { return index_log_price_; }
    double mean_return(std::size_t stock) const { return means_[stock]; }
    // Window variances at or below this value count as zero volatility: a
    // tiny fraction of the stock's overall mean squared return, i.e. a window
    // that is flat up to rounding.
    double variance_floor(std::size_t stock) const { return floors_[stock]; }

    // Index log return over [t, t + span]: ln I(t + span) - ln I(t).
    double index_return(std::size_t t, int span) const;

    // Number of window starts t with t + span inside the return series.
    std::size_t start_count(int span) const;

private:
    std::vector<std::string> tickers_;
    std::vector<std::vector<double>> returns_;
    std::vector<double> index_log_price_;
    std::vector<double> means_;
    std::vector<double> floors_;
    std::size_t return_count_ = 0;
    int horizon_ = 1;
};

// Level condition on the index return: r >= level for level >= 0,
// r < level for level < 0.
inline bool meets_level(double index_return, double level) {
    return level >= 0.0 ? index_return >= level : index_return < level;
}

// Pearson correlation of two return windows [t, t + span] with population
// moments. Empty when either window has zero volatility.
std::optional<double> pair_correlation(const PanelReturns& returns, std::size_t x, std::size_t y, std::size_t t,
                                       int span);

struct MarketPoint {
    std::optional<double> value;
    std::size_t pair_count = 0;
};

// Mean over all unordered pairs with a defined correlation. Optional weights
// follow the order of all_pairs(); empty means uniform.
MarketPoint market_component_correlation(const PanelReturns& returns, std::size_t t, int span,
                                         std::span<const double> pair_weights = {});

struct MarketCorrelationSeries {
    int window_span = 0;
    int horizon = 1;
    std::vector<std::optional<double>> values;
    std::vector<std::size_t> pair_counts;
};

MarketCorrelationSeries market_correlation_series(const PanelReturns& returns, int span);

// r_span(t) for every start t of market_correlation_series(returns, span).
std::vector<double> index_return_series(const PanelReturns& returns, int span);

struct ConditionalSet {
    double level = 0.0;
    std::vector<std::size_t> member_times;
    std::vector<double> member_values;
};

ConditionalSet conditional_select(std::span<const std::optional<double>> values,
                                  std::span<const double> index_returns, double level);

struct ConditionalMean {
    double value = 0.0;
    std::size_t sample_count = 0;
};

std::optional<ConditionalMean> conditional_mean(const ConditionalSet& set);

std::optional<ConditionalMean> conditional_market_correlation(const PanelReturns& returns, double level, int span);

struct WindowAverage {
    std::optional<double> value;
    std::size_t sample_count = 0;
    std::size_t windows_used = 0;
    std::size_t windows_excluded = 0;
};

// Mean of the per-span values that exist; missing spans count as excluded.
WindowAverage average_window_values(std::span<const std::optional<ConditionalMean>> per_span);

struct TimeResolvedSample {
    std::size_t t = 0;
    double value = 0.0;
    std::size_t windows = 0;
};

struct CurvePoint {
    double level = 0.0;
    double value = 0.0;
    std::size_t sample_count = 0;
    std::size_t windows_excluded = 0;
    bool poor_statistics = false;
};

struct CorrelationCurve {
    int horizon = 1;
    WindowRange windows;
    std::vector<CurvePoint> points;
};

struct ScanOptions {
    WindowRange windows;
    // Pairs entering the market average; empty means all_pairs().
    std::vector<StockPair> pairs;
    // One weight per pair; empty means uniform.
    std::vector<double> pair_weights;
    // Levels for which per-pair conditional sums are kept.
    std::vector<double> pair_levels;
    // 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;
};

// One pass over every (t, span) of a window range. Keeps the market
// correlation cube S0(t, span), the matching index returns, and optional
// per-pair conditional sums. Results do not depend on the thread count.
class ConditionalScan {
public:
    static ConditionalScan run(const PanelReturns& returns, ScanOptions options);

    const WindowRange& windows() const { return options_.windows; }
    const std::vector<StockPair>& pairs() const { return options_.pairs; }
    int horizon() const { return horizon_; }
    // Starts of the shortest window; longer spans cover a prefix of these.
    std::size_t start_count() const { return starts_; }

    bool covers(std::size_t t, int span) const;
    std::optional<double> market_correlation(std::size_t t, int span) const;
    std::size_t pair_count(std::size_t t, int span) const;
    double index_return(std::size_t t, int span) const;

    ConditionalSet select(double level, int span) const;
    std::optional<ConditionalMean> conditional_mean(double level, int span) const;
    WindowAverage window_average(double level) const;
    std::vector<TimeResolvedSample> time_resolved(double level) const;
    CorrelationCurve curve(std::span<const double> levels, std::size_t min_samples) const;

    // Per-pair conditional correlation averaged over spans. The level must
    // be one of ScanOptions::pair_levels.
    WindowAverage pair_window_average(std::size_t pair_index, double level) const;

private:
    std::size_t cell(std::size_t t, int span) const {
        return t * options_.windows.count() + static_cast<std::size_t>(span - options_.windows.first);
    }
    std::size_t level_slot(double level) const;

    ScanOptions options_;
    int horizon_ = 1;
    std::size_t starts_ = 0;
    std::vector<double> s0_;          // NaN where undefined
    std::vector<std::uint32_t> counts_;
    std::vector<double> index_ret_;   // NaN where the window is not covered
    std::vector<double> pair_sum_;    // [level][pair][span]
    std::vector<std::uint32_t> pair_n_;
};

// Averaged conditional market correlation over the spans of a range.
WindowAverage average_over_windows(const PanelReturns& returns, double level, const WindowRange& windows);

// Points sorted by level; levels without samples are omitted and points
// below min_samples are flagged.
CorrelationCurve correlation_curve(const PanelReturns& returns, std::span<const double> levels,
                                   const WindowRange& windows, std::size_t min_samples = 1);

// Same pipeline with a single pair's correlation in place of the market one.
WindowAverage pair_conditional_correlation(const PanelReturns& returns, std::size_t x, std::size_t y, double level,
                                           const WindowRange& windows);

inline constexpr double kChiEpsilon = 1e-6;

// (c_minus - c_plus) / |c_plus|; empty when |c_plus| <= epsilon.
std::optional<double> relative_difference_chi(double c_minus, double c_plus, double epsilon = kChiEpsilon);

std::vector<TimeResolvedSample> time_resolved_correlation(const PanelReturns& returns, double level,
                                                          const WindowRange& windows);

} // namespace fearcorr
