#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fearcorr/core_timeseries.hpp"
#include "fearcorr/inverse_stats.hpp"

namespace fearcorr {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kCsvHeader = "Date,Open,High,Low,Close,Adj Close,Volume";

// Decimal text with 12 significant digits, as used in every output file.
std::string format_number(double value);

// Reads a daily OHLC CSV (header row required). Only the Date column and the
// chosen price column have to be present. Rows are sorted by date; duplicate
// dates, missing or non-positive prices and unparseable cells are rejected
// with the offending line number. The ticker defaults to the file stem.
PriceSeries ingest_csv(const std::filesystem::path& path, const std::string& price_column = "Adj Close",
                       const std::string& ticker = {});

// Writes the full CSV schema; every price column carries the close.
void write_price_csv(const std::filesystem::path& path, const PriceSeries& series);

struct StockFile {
    std::string ticker;
    std::filesystem::path path;
};

struct DatasetManifest {
    StockFile index;
    std::vector<StockFile> stocks;
    std::optional<std::pair<Date, Date>> date_range;
    std::string price_column = "Adj Close";
    // Tickers to leave out of the panel.
    std::vector<std::string> drop;

    void validate() const;
};

// Relative paths in the file resolve against the manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& path);
nlohmann::json manifest_to_json(const DatasetManifest& manifest);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

struct LoadedPanel {
    AlignedPanel panel;
    // (path, FNV-1a 64 hex digest) of every file read.
    std::vector<std::pair<std::string, std::string>> input_hashes;
};

LoadedPanel load_panel(const DatasetManifest& manifest, std::size_t min_calendar = 2);

std::string file_hash(const std::filesystem::path& path);

enum class DetrendChoice { Centered, Trailing, None };

struct RunConfig {
    int delta_t = 1;
    int dt1 = 10;
    int dt2 = 35;
    std::vector<double> rho_grid{-0.15, -0.10, -0.07, -0.05, -0.03, -0.02, -0.01, -0.005,
                                 0.005, 0.01,  0.02,  0.03,  0.05,  0.07,  0.10,  0.15};
    int detrend_window = 251;
    DetrendChoice detrend = DetrendChoice::Centered;
    BinningKind binning = BinningKind::Logarithmic;
    double bin_ratio = 1.25;
    double bin_width = 1.0;
    std::size_t hist_bins = 40;
    std::uint64_t seed = 20090101;
    std::size_t min_samples = 100;
    double chi_epsilon = 1e-6;
    unsigned threads = 0;

    void validate() const;
    Binning waiting_time_binning() const;
};

nlohmann::json to_json(const RunConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

std::string to_string(DetrendChoice choice);
DetrendChoice parse_detrend_choice(const std::string& text);

} // namespace fearcorr
