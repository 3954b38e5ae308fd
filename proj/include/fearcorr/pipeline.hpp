#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fearcorr/conditional_correlation.hpp"
#include "fearcorr/fear_factor_sim.hpp"
#include "fearcorr/inverse_stats.hpp"
#include "fearcorr/io.hpp"
#include "fearcorr/stats_tests.hpp"

namespace fearcorr {

struct PairLevelRow {
    StockPair pair;
    std::optional<double> c_minus;
    std::optional<double> c_plus;
    std::optional<double> chi;
};

// Everything computed for one magnitude |rho| that appears with both signs
// in the grid.
struct LevelComparison {
    double abs_level = 0.0;
    std::vector<PairLevelRow> pairs;
    // Pairs lacking C at either sign, and pairs with |C(+)| <= epsilon.
    std::size_t pairs_undefined = 0;
    std::size_t chi_excluded = 0;
    // Tests take the +|rho| values as sample A, so z < 0 means the
    // -|rho| values are larger.
    std::optional<RankSumResult> pair_test;
    std::vector<TimeResolvedSample> ct_minus;
    std::vector<TimeResolvedSample> ct_plus;
    std::optional<RankSumResult> ct_test;
    std::size_t ct_test_size = 0;
    // Reason a test was skipped, empty when both ran.
    std::string note;
};

struct WindowPoint {
    double level = 0.0;
    int span = 0;
    std::optional<ConditionalMean> value;
};

struct CondcorrResult {
    CorrelationCurve curve;
    std::vector<WindowPoint> by_window;
    std::vector<LevelComparison> levels;
    std::vector<std::string> tickers;
    std::size_t stock_count = 0;
    std::size_t return_count = 0;
    std::size_t pair_count = 0;
};

// Pure analysis on prepared returns; does not touch the filesystem.
CondcorrResult analyze_condcorr(const PanelReturns& returns, const RunConfig& config);

// Magnitudes present with both signs in the grid, ascending.
std::vector<double> paired_magnitudes(const std::vector<double>& rho_grid);

void write_condcorr(const CondcorrResult& result, const RunConfig& config, const std::filesystem::path& out_dir,
                    const nlohmann::json& provenance);

CondcorrResult run_condcorr(const std::filesystem::path& manifest_path, const RunConfig& config,
                            const std::filesystem::path& out_dir);

struct InvstatsResult {
    std::string ticker;
    std::size_t series_length = 0;
    std::size_t detrend_offset = 0;
    std::vector<GainLossEntry> entries;
    // Default-range fit per entry and sign; empty when the tail is too short.
    std::vector<std::optional<TailFit>> gain_fits;
    std::vector<std::optional<TailFit>> loss_fits;
};

// The log-price series fed to first-passage analysis after detrending.
std::vector<double> invstats_series(const PriceSeries& series, const RunConfig& config, std::size_t* offset = nullptr);

InvstatsResult analyze_invstats(std::span<const double> log_series, const RunConfig& config,
                                const std::string& ticker = {});

void write_invstats(const InvstatsResult& result, const RunConfig& config, const std::filesystem::path& out_dir,
                    const nlohmann::json& provenance);

// Input is a manifest (its index series is used) or a single price CSV.
InvstatsResult run_invstats(const std::filesystem::path& input, const RunConfig& config,
                            const std::filesystem::path& out_dir, const std::string& price_column = "Adj Close");

// Writes SIM###.csv, INDEX.csv and manifest.json; returns the manifest path.
std::filesystem::path run_simulate(const SimConfig& config, const std::filesystem::path& out_dir);

// Creates the directory if needed; failure is a data (I/O) error.
void ensure_directory(const std::filesystem::path& dir);

} // namespace fearcorr
