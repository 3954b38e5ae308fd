#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fearcorr/conditional_correlation.hpp"
#include "fearcorr/core_timeseries.hpp"

namespace fearcorr {

// Minimal fear-factor market. Each step, with probability fear_probability
// every stock moves down by step_size together; otherwise each stock moves
// independently, up with probability q and down with 1 - q, where q keeps
// every stock's marginal up/down odds at exactly 1/2.
struct SimConfig {
    std::size_t n_stocks = 30;
    std::size_t n_steps = 100000;
    double fear_probability = 0.05;
    double step_size = 0.01;
    std::uint64_t seed = 1;
    double initial_log_price = 0.0;

    void validate() const;
};

struct SimPanel {
    // n_stocks rows of n_steps + 1 log prices.
    std::vector<std::vector<double>> log_prices;
    // One flag per step (n_steps entries).
    std::vector<std::uint8_t> fear_steps;
    // ln of the equal-weight mean price.
    std::vector<double> index_log_price;

    std::size_t stock_count() const { return log_prices.size(); }
    std::size_t length() const { return index_log_price.size(); }
};

// q = 1 / (2 (1 - p)), the solution of p + (1 - p)(1 - q) = 1/2.
double derive_up_probability(double fear_probability);

SimPanel simulate_market(const SimConfig& config);

// ln of the arithmetic mean of exp(log price) across stocks at each time.
std::vector<double> build_index(const std::vector<std::vector<double>>& log_prices);

// Equal-weight mean of the member closes on the shared calendar.
PriceSeries build_index(const AlignedPanel& panel, const std::string& ticker = "INDEX");

// Prices on consecutive weekdays starting at first_day.
AlignedPanel to_aligned_panel(const SimPanel& sim, Date first_day = Date::from_ymd(2000, 1, 3));

PanelReturns to_panel_returns(const SimPanel& sim, int horizon = 1);

std::vector<std::string> sim_tickers(std::size_t n_stocks);

} // namespace fearcorr
