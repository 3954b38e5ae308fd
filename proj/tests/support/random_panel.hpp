#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fearcorr/conditional_correlation.hpp"
#include "naive_oracle.hpp"

// Small random panels with a shared market factor. Some stocks get flat
// stretches so that zero-volatility windows occur, and some index paths are
// built so that window returns land exactly on round levels.
inline constexpr double kLatticeStep = 1.0 / 64.0;

struct RandomPanel {
    oracle::Panel naive;
    fearcorr::PanelReturns returns;
};

inline RandomPanel make_random_panel(std::mt19937_64& gen, std::size_t stocks, std::size_t days, int horizon = 1) {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double beta = unit(gen);
    const double vol = 0.005 + 0.02 * unit(gen);

    std::vector<double> market(days, 0.0);
    for (auto& m : market) m = vol * noise(gen);

    std::vector<std::vector<double>> lp(stocks, std::vector<double>(days, 0.0));
    for (std::size_t i = 0; i < stocks; ++i) {
        lp[i][0] = std::log(10.0 + 90.0 * unit(gen));
        const bool flat = unit(gen) < 0.3;
        const std::size_t flat_from = static_cast<std::size_t>(unit(gen) * static_cast<double>(days));
        const std::size_t flat_len = 5 + static_cast<std::size_t>(unit(gen) * 25.0);
        for (std::size_t t = 1; t < days; ++t) {
            double step = beta * market[t] + vol * noise(gen);
            if (flat && t >= flat_from && t < flat_from + flat_len) step = 0.0;
            lp[i][t] = lp[i][t - 1] + step;
        }
    }

    std::vector<double> index(days);
    if (unit(gen) < 0.25) {
        // Lattice index on a binary grid: window returns are exact multiples
        // of 1/64, so levels on that grid are hit with equality.
        double level = 0.0;
        for (std::size_t t = 0; t < days; ++t) {
            index[t] = level;
            level += unit(gen) < 0.5 ? -kLatticeStep : kLatticeStep;
        }
    } else {
        for (std::size_t t = 0; t < days; ++t) {
            double top = lp[0][t];
            for (const auto& s : lp) top = std::max(top, s[t]);
            double sum = 0.0;
            for (const auto& s : lp) sum += std::exp(s[t] - top);
            index[t] = top + std::log(sum / static_cast<double>(stocks));
        }
    }

    std::vector<std::string> tickers;
    for (std::size_t i = 0; i < stocks; ++i) tickers.push_back("S" + std::to_string(i));
    oracle::Panel naive{lp, index, horizon};
    return RandomPanel{naive, fearcorr::PanelReturns(tickers, lp, index, horizon)};
}
