#include "fearcorr/fear_factor_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fearcorr/error.hpp"
#include "fearcorr/rng.hpp"

namespace fearcorr {

void SimConfig::validate() const {
    if (n_stocks < 1) throw validation_error("simulation needs at least one stock");
    if (n_steps < 1) throw validation_error("simulation needs at least one step");
    if (!(fear_probability >= 0.0 && fear_probability < 0.5)) {
        throw validation_error("fear probability must lie in [0, 0.5), got " + std::to_string(fear_probability));
    }
    if (!(step_size > 0.0) || !std::isfinite(step_size)) {
        throw validation_error("step size must be positive");
    }
    if (!std::isfinite(initial_log_price)) throw validation_error("initial log price must be finite");
}

double derive_up_probability(double fear_probability) {
    if (!(fear_probability >= 0.0 && fear_probability < 0.5)) {
        throw validation_error("fear probability must lie in [0, 0.5), got " + std::to_string(fear_probability));
    }
    return 1.0 / (2.0 * (1.0 - fear_probability));
}

SimPanel simulate_market(const SimConfig& config) {
    config.validate();
    const double q = derive_up_probability(config.fear_probability);
    Rng rng(config.seed);

    const std::size_t n = config.n_stocks;
    const std::size_t steps = config.n_steps;
    SimPanel panel;
    panel.fear_steps.assign(steps, 0);
    panel.log_prices.assign(n, std::vector<double>(steps + 1));

    // Integer positions keep the log prices exact multiples of the step.
    std::vector<long long> position(n, 0);
    for (std::size_t i = 0; i < n; ++i) panel.log_prices[i][0] = config.initial_log_price;
    for (std::size_t t = 0; t < steps; ++t) {
        if (rng.uniform01() < config.fear_probability) {
            panel.fear_steps[t] = 1;
            for (auto& p : position) --p;
        } else {
            for (auto& p : position) p += rng.uniform01() < q ? 1 : -1;
        }
        for (std::size_t i = 0; i < n; ++i) {
            panel.log_prices[i][t + 1] = config.initial_log_price + config.step_size * static_cast<double>(position[i]);
        }
    }
    panel.index_log_price = build_index(panel.log_prices);
    return panel;
}

std::vector<double> build_index(const std::vector<std::vector<double>>& log_prices) {
    if (log_prices.empty()) throw validation_error("index needs at least one stock");
    const std::size_t len = log_prices.front().size();
    for (const auto& s : log_prices) {
        if (s.size() != len) throw data_error("index members differ in length");
    }
    const double n = static_cast<double>(log_prices.size());
    std::vector<double> out(len);
    for (std::size_t t = 0; t < len; ++t) {
        double top = log_prices[0][t];
        for (const auto& s : log_prices) top = std::max(top, s[t]);
        double sum = 0.0;
        for (const auto& s : log_prices) sum += std::exp(s[t] - top);
        out[t] = top + std::log(sum / n);
    }
    return out;
}

PriceSeries build_index(const AlignedPanel& panel, const std::string& ticker) {
    if (panel.stocks.empty()) throw validation_error("index needs at least one stock");
    std::vector<double> closes(panel.length(), 0.0);
    for (const auto& s : panel.stocks) {
        for (std::size_t t = 0; t < closes.size(); ++t) closes[t] += s.closes()[t];
    }
    for (double& c : closes) c /= static_cast<double>(panel.stocks.size());
    return PriceSeries(ticker, panel.calendar, std::move(closes));
}

std::vector<std::string> sim_tickers(std::size_t n_stocks) {
    std::vector<std::string> out;
    out.reserve(n_stocks);
    for (std::size_t i = 0; i < n_stocks; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "SIM%03zu", i);
        out.emplace_back(buf);
    }
    return out;
}

AlignedPanel to_aligned_panel(const SimPanel& sim, Date first_day) {
    std::vector<Date> calendar;
    calendar.reserve(sim.length());
    Date d = first_day;
    while (calendar.size() < sim.length()) {
        if (d.weekday() < 5) calendar.push_back(d);
        d = Date(d.ordinal() + 1);
    }
    const auto tickers = sim_tickers(sim.stock_count());
    auto to_prices = [](const std::vector<double>& logs) {
        std::vector<double> p(logs.size());
        std::transform(logs.begin(), logs.end(), p.begin(), [](double v) { return std::exp(v); });
        return p;
    };
    AlignedPanel panel;
    panel.calendar = calendar;
    for (std::size_t i = 0; i < sim.stock_count(); ++i) {
        panel.stocks.emplace_back(tickers[i], calendar, to_prices(sim.log_prices[i]));
    }
    panel.index_series = PriceSeries("INDEX", calendar, to_prices(sim.index_log_price));
    return panel;
}

PanelReturns to_panel_returns(const SimPanel& sim, int horizon) {
    return PanelReturns(sim_tickers(sim.stock_count()), sim.log_prices, sim.index_log_price, horizon);
}

} // namespace fearcorr
