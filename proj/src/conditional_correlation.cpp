#include "fearcorr/conditional_correlation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <thread>

#include "fearcorr/error.hpp"

namespace fearcorr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr double kVolatilityFloor = 1e-14;
constexpr double kTwoPassRatio = 1e3;

void check_windows(const WindowRange& w) {
    if (w.first < 1 || w.last < w.first) {
        throw validation_error("window range [" + std::to_string(w.first) + ", " + std::to_string(w.last) +
                               "] must satisfy 1 <= first <= last");
    }
}

} // namespace

std::vector<StockPair> all_pairs(std::size_t n) {
    std::vector<StockPair> out;
    out.reserve(n * (n > 0 ? n - 1 : 0) / 2);
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = x + 1; y < n; ++y) out.push_back({x, y});
    }
    return out;
}

PanelReturns::PanelReturns(std::vector<std::string> tickers, const std::vector<std::vector<double>>& stock_log_prices,
                           std::vector<double> index_log_price, int horizon)
    : tickers_(std::move(tickers)), index_log_price_(std::move(index_log_price)), horizon_(horizon) {
    if (horizon < 1) throw validation_error("return horizon must be >= 1");
    if (stock_log_prices.size() < 2) throw validation_error("a panel needs at least 2 stocks");
    if (tickers_.size() != stock_log_prices.size()) {
        throw validation_error("ticker count does not match stock count");
    }
    const std::size_t prices = index_log_price_.size();
    if (prices <= static_cast<std::size_t>(horizon)) {
        throw data_error("panel of " + std::to_string(prices) + " days is too short for horizon " +
                         std::to_string(horizon));
    }
    return_count_ = prices - static_cast<std::size_t>(horizon);
    returns_.reserve(stock_log_prices.size());
    for (std::size_t i = 0; i < stock_log_prices.size(); ++i) {
        const auto& lp = stock_log_prices[i];
        if (lp.size() != prices) {
            throw data_error("stock '" + tickers_[i] + "' has " + std::to_string(lp.size()) +
                             " prices, index has " + std::to_string(prices));
        }
        std::vector<double> r(return_count_);
        for (std::size_t t = 0; t < return_count_; ++t) {
            r[t] = lp[t + static_cast<std::size_t>(horizon)] - lp[t];
            if (!std::isfinite(r[t])) throw data_error("non-finite return in stock '" + tickers_[i] + "'");
        }
        double mean = 0.0;
        for (double v : r) mean += v;
        mean /= static_cast<double>(r.size());
        double var = 0.0;
        for (double v : r) var += (v - mean) * (v - mean);
        var /= static_cast<double>(r.size());
        means_.push_back(mean);
        // Scale by the raw second moment so a stock that never moves still
        // gets a positive floor above the rounding noise of its windows.
        floors_.push_back(kVolatilityFloor * (var + mean * mean));
        returns_.push_back(std::move(r));
    }
}

PanelReturns PanelReturns::from_panel(const AlignedPanel& panel, int horizon) {
    std::vector<std::string> tickers;
    std::vector<std::vector<double>> logs;
    for (const auto& s : panel.stocks) {
        tickers.push_back(s.ticker());
        logs.push_back(s.log_prices());
    }
    return PanelReturns(std::move(tickers), logs, panel.index_series.log_prices(), horizon);
}

double PanelReturns::index_return(std::size_t t, int span) const {
    const std::size_t end = t + static_cast<std::size_t>(span);
    if (end >= index_log_price_.size()) {
        throw validation_error("index return window exceeds the panel");
    }
    return index_log_price_[end] - index_log_price_[t];
}

std::size_t PanelReturns::start_count(int span) const {
    const auto s = static_cast<std::size_t>(span);
    return return_count_ > s ? return_count_ - s : 0;
}

std::optional<double> pair_correlation(const PanelReturns& returns, std::size_t x, std::size_t y, std::size_t t,
                                       int span) {
    if (span < 1) throw validation_error("window span must be >= 1");
    if (x >= returns.stock_count() || y >= returns.stock_count()) {
        throw validation_error("stock index out of range");
    }
    if (t >= returns.start_count(span)) {
        throw validation_error("window [" + std::to_string(t) + ", " + std::to_string(t + static_cast<std::size_t>(span)) +
                               "] exceeds " + std::to_string(returns.return_count()) + " returns");
    }
    const std::size_t n = static_cast<std::size_t>(span) + 1;
    const auto rx = returns.returns(x).subspan(t, n);
    const auto ry = returns.returns(y).subspan(t, n);
    const double inv_n = 1.0 / static_cast<double>(n);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx *= inv_n;
    my *= inv_n;
    double vx = 0.0, vy = 0.0, cxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        vx += dx * dx;
        vy += dy * dy;
        cxy += dx * dy;
    }
    vx *= inv_n;
    vy *= inv_n;
    cxy *= inv_n;
    if (vx <= returns.variance_floor(x) || vy <= returns.variance_floor(y)) {
        return std::nullopt;
    }
    return cxy / (std::sqrt(vx) * std::sqrt(vy));
}

MarketPoint market_component_correlation(const PanelReturns& returns, std::size_t t, int span,
                                         std::span<const double> pair_weights) {
    const auto pairs = all_pairs(returns.stock_count());
    if (!pair_weights.empty() && pair_weights.size() != pairs.size()) {
        throw validation_error("expected one weight per stock pair");
    }
    double sum = 0.0;
    double weight_sum = 0.0;
    MarketPoint out;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto s = pair_correlation(returns, pairs[p].x, pairs[p].y, t, span);
        if (!s) continue;
        const double w = pair_weights.empty() ? 1.0 : pair_weights[p];
        sum += w * *s;
        weight_sum += w;
        ++out.pair_count;
    }
    if (out.pair_count > 0 && weight_sum > 0.0) out.value = sum / weight_sum;
    return out;
}

MarketCorrelationSeries market_correlation_series(const PanelReturns& returns, int span) {
    MarketCorrelationSeries out;
    out.window_span = span;
    out.horizon = returns.horizon();
    const std::size_t starts = returns.start_count(span);
    out.values.reserve(starts);
    out.pair_counts.reserve(starts);
    for (std::size_t t = 0; t < starts; ++t) {
        const auto m = market_component_correlation(returns, t, span);
        out.values.push_back(m.value);
        out.pair_counts.push_back(m.pair_count);
    }
    return out;
}

std::vector<double> index_return_series(const PanelReturns& returns, int span) {
    std::vector<double> out(returns.start_count(span));
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = returns.index_return(t, span);
    return out;
}

ConditionalSet conditional_select(std::span<const std::optional<double>> values, std::span<const double> index_returns,
                                  double level) {
    if (values.size() != index_returns.size()) {
        throw validation_error("correlation and index return series differ in length");
    }
    ConditionalSet out;
    out.level = level;
    for (std::size_t t = 0; t < values.size(); ++t) {
        if (values[t] && meets_level(index_returns[t], level)) {
            out.member_times.push_back(t);
            out.member_values.push_back(*values[t]);
        }
    }
    return out;
}

std::optional<ConditionalMean> conditional_mean(const ConditionalSet& set) {
    if (set.member_values.empty()) return std::nullopt;
    double sum = 0.0;
    for (double v : set.member_values) sum += v;
    return ConditionalMean{sum / static_cast<double>(set.member_values.size()), set.member_values.size()};
}

std::optional<ConditionalMean> conditional_market_correlation(const PanelReturns& returns, double level, int span) {
    const auto s0 = market_correlation_series(returns, span);
    const auto r = index_return_series(returns, span);
    return conditional_mean(conditional_select(s0.values, r, level));
}

WindowAverage average_window_values(std::span<const std::optional<ConditionalMean>> per_span) {
    WindowAverage out;
    double sum = 0.0;
    for (const auto& m : per_span) {
        if (!m) {
            ++out.windows_excluded;
            continue;
        }
        sum += m->value;
        out.sample_count += m->sample_count;
        ++out.windows_used;
    }
    if (out.windows_used > 0) out.value = sum / static_cast<double>(out.windows_used);
    return out;
}

// ---------------------------------------------------------------------------
// ConditionalScan

namespace {

// Work layout shared by all chunks of one scan.
struct ScanPlan {
    const PanelReturns* returns = nullptr;
    WindowRange windows;
    std::vector<StockPair> pairs;
    std::vector<double> weights;
    std::vector<double> levels;
    std::vector<std::vector<double>> centered;  // per stock, returns minus overall mean
    std::vector<double> floors;                 // per stock variance floor
    std::size_t starts = 0;
};

struct ChunkSums {
    std::vector<double> sum;
    std::vector<std::uint32_t> n;
};

// Fills the S0 cube rows [begin, end) and accumulates per-pair level sums.
void scan_chunk(const ScanPlan& plan, std::size_t begin, std::size_t end, std::vector<double>& s0,
                std::vector<std::uint32_t>& counts, std::vector<double>& index_ret, ChunkSums& sums) {
    const std::size_t K = plan.windows.count();
    const std::size_t first = static_cast<std::size_t>(plan.windows.first);
    const std::size_t N = plan.centered.size();
    const std::size_t P = plan.pairs.size();
    const std::size_t L = plan.levels.size();
    const std::size_t returns = plan.returns->return_count();

    std::vector<double> mean(N * K), inv_vol(N * K);
    std::vector<char> two_pass(N * K);
    std::vector<double> s0_sum(K), s0_w(K);
    std::vector<std::uint32_t> s0_n(K);
    std::vector<std::uint64_t> mask(K);

    for (std::size_t t = begin; t < end; ++t) {
        // Largest span whose window [t, t + span] still fits.
        const std::size_t max_span = std::min(static_cast<std::size_t>(plan.windows.last), returns - 1 - t);
        const std::size_t spans = max_span - first + 1;

        for (std::size_t k = 0; k < spans; ++k) {
            const double r = plan.returns->index_return(t, static_cast<int>(first + k));
            index_ret[t * K + k] = r;
            std::uint64_t m = 0;
            for (std::size_t l = 0; l < L; ++l) {
                if (meets_level(r, plan.levels[l])) m |= std::uint64_t{1} << l;
            }
            mask[k] = m;
        }

        for (std::size_t i = 0; i < N; ++i) {
            const double* c = plan.centered[i].data() + t;
            double sx = 0.0, sxx = 0.0;
            for (std::size_t j = 0; j < first; ++j) {
                sx += c[j];
                sxx += c[j] * c[j];
            }
            for (std::size_t k = 0; k < spans; ++k) {
                const double v = c[first + k];
                sx += v;
                sxx += v * v;
                const std::size_t n = first + k + 1;
                const double inv_n = 1.0 / static_cast<double>(n);
                double m = sx * inv_n;
                double var = sxx * inv_n - m * m;
                // Running sums lose about eps * E[c^2] / var of relative
                // precision; redo nearly flat windows with two passes.
                const bool redo = sxx * inv_n > kTwoPassRatio * var;
                if (redo) {
                    m = 0.0;
                    for (std::size_t j = 0; j < n; ++j) m += c[j];
                    m *= inv_n;
                    var = 0.0;
                    for (std::size_t j = 0; j < n; ++j) var += (c[j] - m) * (c[j] - m);
                    var *= inv_n;
                }
                mean[i * K + k] = m;
                inv_vol[i * K + k] = var > plan.floors[i] ? 1.0 / std::sqrt(var) : 0.0;
                two_pass[i * K + k] = redo;
            }
        }

        std::fill(s0_sum.begin(), s0_sum.end(), 0.0);
        std::fill(s0_w.begin(), s0_w.end(), 0.0);
        std::fill(s0_n.begin(), s0_n.end(), 0u);
        for (std::size_t p = 0; p < P; ++p) {
            const std::size_t x = plan.pairs[p].x;
            const std::size_t y = plan.pairs[p].y;
            const double* cx = plan.centered[x].data() + t;
            const double* cy = plan.centered[y].data() + t;
            const double* mx = &mean[x * K];
            const double* my = &mean[y * K];
            const double* ix = &inv_vol[x * K];
            const double* iy = &inv_vol[y * K];
            const double w = plan.weights.empty() ? 1.0 : plan.weights[p];
            double sxy = 0.0;
            for (std::size_t j = 0; j < first; ++j) sxy += cx[j] * cy[j];
            for (std::size_t k = 0; k < spans; ++k) {
                sxy += cx[first + k] * cy[first + k];
                if (ix[k] == 0.0 || iy[k] == 0.0) continue;
                const std::size_t n = first + k + 1;
                const double inv_n = 1.0 / static_cast<double>(n);
                double cov = sxy * inv_n - mx[k] * my[k];
                if (two_pass[x * K + k] || two_pass[y * K + k]) {
                    cov = 0.0;
                    for (std::size_t j = 0; j < n; ++j) cov += (cx[j] - mx[k]) * (cy[j] - my[k]);
                    cov *= inv_n;
                }
                const double s = cov * ix[k] * iy[k];
                s0_sum[k] += w * s;
                s0_w[k] += w;
                ++s0_n[k];
                for (std::uint64_t m = mask[k]; m != 0; m &= m - 1) {
                    const auto l = static_cast<std::size_t>(std::countr_zero(m));
                    const std::size_t slot = (l * P + p) * K + k;
                    sums.sum[slot] += s;
                    ++sums.n[slot];
                }
            }
        }

        for (std::size_t k = 0; k < spans; ++k) {
            const bool defined = s0_n[k] > 0 && s0_w[k] > 0.0;
            s0[t * K + k] = defined ? s0_sum[k] / s0_w[k] : kNaN;
            counts[t * K + k] = s0_n[k];
        }
    }
}

} // namespace

ConditionalScan ConditionalScan::run(const PanelReturns& returns, ScanOptions options) {
    check_windows(options.windows);
    if (options.pairs.empty()) options.pairs = all_pairs(returns.stock_count());
    for (const auto& p : options.pairs) {
        if (p.x >= returns.stock_count() || p.y >= returns.stock_count()) {
            throw validation_error("stock pair index out of range");
        }
    }
    if (!options.pair_weights.empty() && options.pair_weights.size() != options.pairs.size()) {
        throw validation_error("expected one weight per stock pair");
    }
    if (options.pair_levels.size() > 64) {
        throw validation_error("at most 64 per-pair levels per scan");
    }

    ConditionalScan scan;
    scan.options_ = options;
    scan.horizon_ = returns.horizon();

    ScanPlan plan;
    plan.returns = &returns;
    plan.windows = options.windows;
    plan.pairs = options.pairs;
    plan.weights = options.pair_weights;
    plan.levels = options.pair_levels;
    plan.starts = returns.start_count(options.windows.first);
    for (std::size_t i = 0; i < returns.stock_count(); ++i) {
        const auto r = returns.returns(i);
        std::vector<double> c(r.size());
        for (std::size_t t = 0; t < r.size(); ++t) c[t] = r[t] - returns.mean_return(i);
        plan.centered.push_back(std::move(c));
        plan.floors.push_back(returns.variance_floor(i));
    }

    const std::size_t K = options.windows.count();
    const std::size_t P = plan.pairs.size();
    const std::size_t L = plan.levels.size();
    scan.starts_ = plan.starts;
    scan.s0_.assign(plan.starts * K, kNaN);
    scan.counts_.assign(plan.starts * K, 0);
    scan.index_ret_.assign(plan.starts * K, kNaN);
    scan.pair_sum_.assign(L * P * K, 0.0);
    scan.pair_n_.assign(L * P * K, 0);
    if (plan.starts == 0) return scan;

    // Chunk boundaries depend only on the input size, so the reduction order
    // of the per-pair sums is the same for any number of threads.
    const std::size_t chunk = std::max<std::size_t>(2048, (plan.starts + 63) / 64);
    const std::size_t chunks = (plan.starts + chunk - 1) / chunk;
    std::vector<ChunkSums> partial(chunks);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t c = next++; c < chunks; c = next++) {
            partial[c].sum.assign(L * P * K, 0.0);
            partial[c].n.assign(L * P * K, 0);
            scan_chunk(plan, c * chunk, std::min(plan.starts, (c + 1) * chunk), scan.s0_, scan.counts_,
                       scan.index_ret_, partial[c]);
        }
    };
    unsigned threads = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, chunks));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }

    for (const auto& part : partial) {
        for (std::size_t i = 0; i < part.sum.size(); ++i) {
            scan.pair_sum_[i] += part.sum[i];
            scan.pair_n_[i] += part.n[i];
        }
    }
    return scan;
}

bool ConditionalScan::covers(std::size_t t, int span) const {
    if (span < options_.windows.first || span > options_.windows.last || t >= starts_) return false;
    return !std::isnan(index_ret_[cell(t, span)]);
}

std::optional<double> ConditionalScan::market_correlation(std::size_t t, int span) const {
    if (!covers(t, span)) return std::nullopt;
    const double v = s0_[cell(t, span)];
    if (std::isnan(v)) return std::nullopt;
    return v;
}

std::size_t ConditionalScan::pair_count(std::size_t t, int span) const {
    return covers(t, span) ? counts_[cell(t, span)] : 0;
}

double ConditionalScan::index_return(std::size_t t, int span) const {
    if (!covers(t, span)) throw validation_error("window not covered by this scan");
    return index_ret_[cell(t, span)];
}

ConditionalSet ConditionalScan::select(double level, int span) const {
    ConditionalSet out;
    out.level = level;
    if (span < options_.windows.first || span > options_.windows.last) {
        throw validation_error("span " + std::to_string(span) + " outside the scanned range");
    }
    for (std::size_t t = 0; t < starts_; ++t) {
        const std::size_t c = cell(t, span);
        if (std::isnan(index_ret_[c])) break;  // covered spans form a prefix in t
        if (std::isnan(s0_[c]) || !meets_level(index_ret_[c], level)) continue;
        out.member_times.push_back(t);
        out.member_values.push_back(s0_[c]);
    }
    return out;
}

std::optional<ConditionalMean> ConditionalScan::conditional_mean(double level, int span) const {
    return fearcorr::conditional_mean(select(level, span));
}

WindowAverage ConditionalScan::window_average(double level) const {
    std::vector<std::optional<ConditionalMean>> per_span;
    for (int span = options_.windows.first; span <= options_.windows.last; ++span) {
        per_span.push_back(conditional_mean(level, span));
    }
    return average_window_values(per_span);
}

std::vector<TimeResolvedSample> ConditionalScan::time_resolved(double level) const {
    std::vector<TimeResolvedSample> out;
    const std::size_t K = options_.windows.count();
    for (std::size_t t = 0; t < starts_; ++t) {
        double sum = 0.0;
        std::size_t used = 0;
        for (std::size_t k = 0; k < K; ++k) {
            const std::size_t c = t * K + k;
            if (std::isnan(index_ret_[c]) || std::isnan(s0_[c]) || !meets_level(index_ret_[c], level)) continue;
            sum += s0_[c];
            ++used;
        }
        if (used > 0) out.push_back({t, sum / static_cast<double>(used), used});
    }
    return out;
}

CorrelationCurve ConditionalScan::curve(std::span<const double> levels, std::size_t min_samples) const {
    CorrelationCurve out;
    out.horizon = horizon_;
    out.windows = options_.windows;
    std::vector<double> sorted(levels.begin(), levels.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (double level : sorted) {
        const auto avg = window_average(level);
        if (!avg.value || avg.sample_count == 0) continue;
        out.points.push_back({level, *avg.value, avg.sample_count, avg.windows_excluded,
                              avg.sample_count < min_samples});
    }
    return out;
}

std::size_t ConditionalScan::level_slot(double level) const {
    const auto& lv = options_.pair_levels;
    const auto it = std::find(lv.begin(), lv.end(), level);
    if (it == lv.end()) {
        throw validation_error("level " + std::to_string(level) + " was not requested for per-pair sums");
    }
    return static_cast<std::size_t>(it - lv.begin());
}

WindowAverage ConditionalScan::pair_window_average(std::size_t pair_index, double level) const {
    if (pair_index >= options_.pairs.size()) throw validation_error("pair index out of range");
    const std::size_t l = level_slot(level);
    const std::size_t K = options_.windows.count();
    const std::size_t P = options_.pairs.size();
    std::vector<std::optional<ConditionalMean>> per_span(K);
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t slot = (l * P + pair_index) * K + k;
        if (pair_n_[slot] > 0) {
            per_span[k] = ConditionalMean{pair_sum_[slot] / static_cast<double>(pair_n_[slot]), pair_n_[slot]};
        }
    }
    return average_window_values(per_span);
}

WindowAverage average_over_windows(const PanelReturns& returns, double level, const WindowRange& windows) {
    ScanOptions options;
    options.windows = windows;
    return ConditionalScan::run(returns, options).window_average(level);
}

CorrelationCurve correlation_curve(const PanelReturns& returns, std::span<const double> levels,
                                   const WindowRange& windows, std::size_t min_samples) {
    ScanOptions options;
    options.windows = windows;
    return ConditionalScan::run(returns, options).curve(levels, min_samples);
}

WindowAverage pair_conditional_correlation(const PanelReturns& returns, std::size_t x, std::size_t y, double level,
                                           const WindowRange& windows) {
    ScanOptions options;
    options.windows = windows;
    options.pairs = {{x, y}};
    options.pair_levels = {level};
    return ConditionalScan::run(returns, options).pair_window_average(0, level);
}

std::optional<double> relative_difference_chi(double c_minus, double c_plus, double epsilon) {
    if (!(std::abs(c_plus) > epsilon)) return std::nullopt;
    return (c_minus - c_plus) / std::abs(c_plus);
}

std::vector<TimeResolvedSample> time_resolved_correlation(const PanelReturns& returns, double level,
                                                          const WindowRange& windows) {
    ScanOptions options;
    options.windows = windows;
    return ConditionalScan::run(returns, options).time_resolved(level);
}

} // namespace fearcorr
