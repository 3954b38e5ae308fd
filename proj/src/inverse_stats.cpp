#include "fearcorr/inverse_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fearcorr/error.hpp"

namespace fearcorr {

namespace {

// Max (or min) segment tree answering "first index >= from whose value
// reaches the threshold" in O(log n).
class ExtremumTree {
public:
    ExtremumTree(std::span<const double> values, bool track_max) : track_max_(track_max), n_(values.size()) {
        size_ = 1;
        while (size_ < n_) size_ <<= 1;
        const double fill = track_max_ ? -std::numeric_limits<double>::infinity()
                                       : std::numeric_limits<double>::infinity();
        tree_.assign(2 * size_, fill);
        std::copy(values.begin(), values.end(), tree_.begin() + static_cast<std::ptrdiff_t>(size_));
        for (std::size_t i = size_ - 1; i >= 1; --i) {
            tree_[i] = better(tree_[2 * i], tree_[2 * i + 1]);
        }
    }

    // Returns n when no such index exists.
    std::size_t first_reaching(std::size_t from, double threshold) const {
        if (from >= n_) return n_;
        return descend(1, 0, size_, from, threshold);
    }

private:
    double better(double a, double b) const { return track_max_ ? std::max(a, b) : std::min(a, b); }
    bool reaches(double v, double threshold) const { return track_max_ ? v >= threshold : v <= threshold; }

    std::size_t descend(std::size_t node, std::size_t lo, std::size_t hi, std::size_t from, double threshold) const {
        if (hi <= from || !reaches(tree_[node], threshold)) return n_;
        if (hi - lo == 1) return lo < n_ ? lo : n_;
        const std::size_t mid = lo + (hi - lo) / 2;
        const std::size_t left = descend(2 * node, lo, mid, from, threshold);
        if (left != n_) return left;
        return descend(2 * node + 1, mid, hi, from, threshold);
    }

    bool track_max_;
    std::size_t n_;
    std::size_t size_ = 1;
    std::vector<double> tree_;
};

} // namespace

FirstPassageResult first_passage_times(std::span<const double> series, double level) {
    if (level == 0.0 || !std::isfinite(level)) {
        throw validation_error("return level must be finite and non-zero");
    }
    if (series.size() < 2) {
        throw data_error("first-passage analysis needs at least 2 points");
    }
    const bool gain = level > 0.0;
    const ExtremumTree tree(series, gain);

    FirstPassageResult out;
    out.level = level;
    out.samples.reserve(series.size());
    for (std::size_t t0 = 0; t0 + 1 < series.size(); ++t0) {
        const double threshold = gain ? series[t0] + level - kLevelTolerance
                                      : series[t0] + level + kLevelTolerance;
        const std::size_t hit = tree.first_reaching(t0 + 1, threshold);
        if (hit == series.size()) {
            ++out.censored_count;
        } else {
            out.samples.push_back({t0, hit - t0, level});
        }
    }
    return out;
}

double WaitingTimeHistogram::bin_center(std::size_t i) const {
    if (kind == BinningKind::Linear) {
        return 0.5 * (bin_edges[i] + bin_edges[i + 1]);
    }
    // Geometric mean of the first and last whole day in the bin.
    const double first = std::ceil(bin_edges[i]);
    const double last = std::ceil(bin_edges[i + 1]) - 1.0;
    return std::sqrt(first * last);
}

std::vector<double> WaitingTimeHistogram::centers() const {
    std::vector<double> out(bin_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = bin_center(i);
    return out;
}

WaitingTimeHistogram waiting_time_histogram(std::span<const std::size_t> waiting_times, const Binning& binning,
                                            double level) {
    if (waiting_times.empty()) {
        throw statistics_error("no completed first passages to histogram");
    }
    const auto [min_it, max_it] = std::minmax_element(waiting_times.begin(), waiting_times.end());
    const double tau_min = static_cast<double>(*min_it);
    const double tau_max = static_cast<double>(*max_it);
    if (tau_min < 1.0) throw data_error("waiting times must be >= 1");

    WaitingTimeHistogram h;
    h.level = level;
    h.kind = binning.kind;
    if (binning.kind == BinningKind::Linear) {
        if (!(binning.width >= 1.0) || binning.width != std::floor(binning.width)) {
            throw validation_error("linear bin width must be a whole number of days >= 1");
        }
        double edge = tau_min - 0.5;
        h.bin_edges.push_back(edge);
        while (edge < tau_max + 0.5) {
            edge += binning.width;
            h.bin_edges.push_back(edge);
        }
    } else {
        if (!(binning.ratio > 1.0)) throw validation_error("logarithmic bin ratio must be > 1");
        double edge = 0.5;
        h.bin_edges.push_back(edge);
        while (edge < tau_max + 0.5) {
            edge = std::max(edge + 1.0, std::floor(edge * binning.ratio) + 0.5);
            h.bin_edges.push_back(edge);
        }
    }

    const std::size_t bins = h.bin_edges.size() - 1;
    h.counts.assign(bins, 0);
    for (std::size_t tau : waiting_times) {
        const double v = static_cast<double>(tau);
        auto it = std::upper_bound(h.bin_edges.begin(), h.bin_edges.end(), v);
        ++h.counts[static_cast<std::size_t>(it - h.bin_edges.begin()) - 1];
    }
    h.total_samples = waiting_times.size();
    h.densities.resize(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        h.densities[i] = static_cast<double>(h.counts[i]) /
                         (static_cast<double>(h.total_samples) * (h.bin_edges[i + 1] - h.bin_edges[i]));
    }
    return h;
}

WaitingTimeHistogram waiting_time_histogram(const FirstPassageResult& passages, const Binning& binning) {
    std::vector<std::size_t> taus;
    taus.reserve(passages.samples.size());
    for (const auto& s : passages.samples) taus.push_back(s.waiting_time);
    auto h = waiting_time_histogram(taus, binning, passages.level);
    h.censored_count = passages.censored_count;
    return h;
}

double histogram_mode(const WaitingTimeHistogram& hist) {
    if (hist.bin_count() == 0) throw statistics_error("mode of an empty histogram");
    const auto it = std::max_element(hist.densities.begin(), hist.densities.end());
    return hist.bin_center(static_cast<std::size_t>(it - hist.densities.begin()));
}

TailFit fit_tail_exponent(const WaitingTimeHistogram& hist, double tau_min, double tau_max) {
    if (!(tau_min < tau_max)) {
        throw validation_error("tail fit range must satisfy tau_min < tau_max");
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < hist.bin_count(); ++i) {
        const double c = hist.bin_center(i);
        if (c < tau_min || c > tau_max || !(hist.densities[i] > 0.0)) continue;
        xs.push_back(std::log(c));
        ys.push_back(std::log(hist.densities[i]));
    }
    const std::size_t n = xs.size();
    if (n < 4) {
        throw statistics_error("tail fit needs at least 4 nonzero bins in range, found " + std::to_string(n));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (my + slope * (xs[i] - mx));
        ssr += r * r;
    }
    TailFit fit;
    fit.exponent = -slope;
    fit.tau_min = tau_min;
    fit.tau_max = tau_max;
    fit.stderr_exponent = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    fit.bins_used = n;
    return fit;
}

TailFit fit_tail_exponent(const WaitingTimeHistogram& hist) {
    const double lo = 3.0 * histogram_mode(hist);
    double hi = 0.0;
    for (std::size_t i = hist.bin_count(); i-- > 0;) {
        if (hist.counts.size() == hist.bin_count() && hist.counts[i] >= 5) {
            hi = hist.bin_center(i);
            break;
        }
    }
    // Far-tail bins are fed by a few long, heavily overlapping excursions
    // and are depleted by end-of-series censoring.
    const double starts = static_cast<double>(hist.total_samples + hist.censored_count);
    hi = std::min(hi, starts / 10.0);
    if (!(hi > lo)) {
        throw statistics_error("histogram tail too short for a default fit range");
    }
    return fit_tail_exponent(hist, lo, hi);
}

std::vector<GainLossEntry> gain_loss_report(std::span<const double> series, std::span<const double> abs_levels,
                                            const Binning& binning) {
    std::vector<GainLossEntry> out;
    out.reserve(abs_levels.size());
    for (double level : abs_levels) {
        if (!(level > 0.0)) throw validation_error("gain-loss levels must be positive magnitudes");
        GainLossEntry e;
        e.abs_level = level;
        e.gain = waiting_time_histogram(first_passage_times(series, level), binning);
        e.loss = waiting_time_histogram(first_passage_times(series, -level), binning);
        e.gain_mode = histogram_mode(e.gain);
        e.loss_mode = histogram_mode(e.loss);
        e.asymmetry = e.gain_mode - e.loss_mode;
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace fearcorr
