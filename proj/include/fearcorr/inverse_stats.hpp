#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fearcorr {

// Slack applied to level crossings so that sums of identical increments
// (e.g. 30 steps of 0.01) reach the level they are meant to reach despite
// rounding in the accumulated series.
inline constexpr double kLevelTolerance = 1e-9;

struct WaitingTimeSample {
    std::size_t start_index = 0;
    std::size_t waiting_time = 0;
    double level = 0.0;
};

struct FirstPassageResult {
    double level = 0.0;
    std::vector<WaitingTimeSample> samples;
    // Starts whose level was never reached before the series ended.
    std::size_t censored_count = 0;
};

// For every start t0: the smallest k >= 1 with s(t0+k) - s(t0) >= level
// (level > 0) or <= level (level < 0).
FirstPassageResult first_passage_times(std::span<const double> series, double level);

enum class BinningKind { Linear, Logarithmic };

struct Binning {
    BinningKind kind = BinningKind::Logarithmic;
    // Linear bin width in trading days.
    double width = 1.0;
    // Growth factor between consecutive logarithmic bin widths.
    double ratio = 1.25;

    static Binning linear(double width = 1.0) { return {BinningKind::Linear, width, 1.25}; }
    static Binning logarithmic(double ratio = 1.25) { return {BinningKind::Logarithmic, 1.0, ratio}; }
};

struct WaitingTimeHistogram {
    double level = 0.0;
    BinningKind kind = BinningKind::Logarithmic;
    std::vector<double> bin_edges;
    std::vector<double> densities;
    std::vector<std::size_t> counts;
    std::size_t total_samples = 0;
    std::size_t censored_count = 0;

    std::size_t bin_count() const { return densities.size(); }
    // Arithmetic midpoint for linear bins, geometric for logarithmic ones.
    double bin_center(std::size_t i) const;
    std::vector<double> centers() const;
};

// Edges sit on half-integers so every bin covers at least one whole waiting
// time. Logarithmic widths grow by the ratio, rounded to whole days.
WaitingTimeHistogram waiting_time_histogram(const FirstPassageResult& passages, const Binning& binning);
WaitingTimeHistogram waiting_time_histogram(std::span<const std::size_t> waiting_times,
                                            const Binning& binning, double level = 0.0);

struct TailFit {
    double exponent = 0.0;
    double tau_min = 0.0;
    double tau_max = 0.0;
    double stderr_exponent = 0.0;
    std::size_t bins_used = 0;
};

// Least squares on (ln center, ln density) for nonzero bins with center in
// [tau_min, tau_max]; exponent is the negated slope.
TailFit fit_tail_exponent(const WaitingTimeHistogram& hist, double tau_min, double tau_max);

// Fit range from three times the mode to the last bin holding >= 5 counts,
// capped at a tenth of the number of first-passage starts.
TailFit fit_tail_exponent(const WaitingTimeHistogram& hist);

// Center of the densest bin; ties resolve to the earliest bin.
double histogram_mode(const WaitingTimeHistogram& hist);

struct GainLossEntry {
    double abs_level = 0.0;
    WaitingTimeHistogram gain;  // +|rho|
    WaitingTimeHistogram loss;  // -|rho|
    double gain_mode = 0.0;
    double loss_mode = 0.0;
    // mode(+) - mode(-); positive when losses are reached sooner.
    double asymmetry = 0.0;
};

std::vector<GainLossEntry> gain_loss_report(std::span<const double> series, std::span<const double> abs_levels,
                                            const Binning& binning = Binning::logarithmic());

} // namespace fearcorr
