#include "fearcorr/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "fearcorr/error.hpp"

namespace fearcorr {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '"')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '"')) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
    return v;
}

std::string where(const fs::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line) + ": ";
}

} // namespace

PriceSeries ingest_csv(const fs::path& path, const std::string& price_column, const std::string& ticker) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw data_error(path.string() + ": empty file, header row expected");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split_csv(line);
    const auto find_col = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw data_error(path.string() + ": schema error, missing column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t date_col = find_col("Date");
    const std::size_t price_col = find_col(price_column);

    std::vector<std::pair<Date, double>> rows;
    std::vector<std::size_t> row_lines;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) {
            throw data_error(where(path, line_no) + "expected " + std::to_string(header.size()) + " fields, found " +
                             std::to_string(cells.size()));
        }
        const auto date = Date::parse_iso(cells[date_col]);
        if (!date) throw data_error(where(path, line_no) + "unparseable date '" + cells[date_col] + "'");
        if (cells[price_col].empty()) throw data_error(where(path, line_no) + "missing price");
        const auto price = parse_double(cells[price_col]);
        if (!price) throw data_error(where(path, line_no) + "unparseable price '" + cells[price_col] + "'");
        if (!(*price > 0.0) || !std::isfinite(*price)) {
            throw data_error(where(path, line_no) + "non-positive price " + cells[price_col]);
        }
        rows.emplace_back(*date, *price);
        row_lines.push_back(line_no);
    }
    if (rows.empty()) throw data_error(path.string() + ": no data rows");

    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rows[a].first < rows[b].first; });

    std::vector<Date> dates;
    std::vector<double> closes;
    dates.reserve(rows.size());
    closes.reserve(rows.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& [d, p] = rows[order[k]];
        if (!dates.empty() && dates.back() == d) {
            throw data_error(where(path, row_lines[order[k]]) + "duplicate date " + d.iso() + " (first seen on line " +
                             std::to_string(row_lines[order[k - 1]]) + ")");
        }
        dates.push_back(d);
        closes.push_back(p);
    }
    return PriceSeries(ticker.empty() ? path.stem().string() : ticker, std::move(dates), std::move(closes));
}

void write_price_csv(const fs::path& path, const PriceSeries& series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("I/O error: cannot write '" + path.string() + "'");
    out << kCsvHeader << '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        const std::string p = format_number(series.closes()[i]);
        out << series.dates()[i].iso() << ',' << p << ',' << p << ',' << p << ',' << p << ',' << p << ",0\n";
    }
    if (!out) throw data_error("I/O error: failed writing '" + path.string() + "'");
}

void DatasetManifest::validate() const {
    if (stocks.size() < 2) throw validation_error("manifest must list at least 2 stock files");
    std::set<std::string> seen;
    for (const auto& s : stocks) {
        if (s.ticker.empty()) throw validation_error("manifest stock entry without a ticker");
        if (!seen.insert(s.ticker).second) throw validation_error("duplicate ticker '" + s.ticker + "' in manifest");
    }
    if (date_range && date_range->second < date_range->first) {
        throw validation_error("manifest date_range ends before it starts");
    }
    if (price_column.empty()) throw validation_error("manifest price_column is empty");
}

namespace {

StockFile stock_file_from_json(const json& j, const fs::path& base) {
    StockFile f;
    f.path = j.at("path").get<std::string>();
    if (f.path.is_relative()) f.path = base / f.path;
    f.ticker = j.contains("ticker") ? j.at("ticker").get<std::string>() : f.path.stem().string();
    return f;
}

Date date_from_json(const json& j) {
    const auto d = Date::parse_iso(j.get<std::string>());
    if (!d) throw validation_error("invalid date '" + j.get<std::string>() + "' in manifest");
    return *d;
}

} // namespace

DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open manifest '" + path.string() + "'");
    DatasetManifest m;
    try {
        const json j = json::parse(in);
        const fs::path base = path.parent_path();
        m.index = stock_file_from_json(j.at("index"), base);
        for (const auto& s : j.at("stocks")) m.stocks.push_back(stock_file_from_json(s, base));
        if (j.contains("date_range") && !j.at("date_range").is_null()) {
            const auto& r = j.at("date_range");
            if (!r.is_array() || r.size() != 2) throw validation_error("manifest date_range must be [start, end]");
            m.date_range = std::make_pair(date_from_json(r[0]), date_from_json(r[1]));
        }
        if (j.contains("price_column")) m.price_column = j.at("price_column").get<std::string>();
        if (j.contains("drop")) m.drop = j.at("drop").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw validation_error("manifest '" + path.string() + "': " + e.what());
    }
    m.validate();
    return m;
}

json manifest_to_json(const DatasetManifest& m) {
    json j;
    j["index"] = {{"ticker", m.index.ticker}, {"path", m.index.path.generic_string()}};
    j["stocks"] = json::array();
    for (const auto& s : m.stocks) j["stocks"].push_back({{"ticker", s.ticker}, {"path", s.path.generic_string()}});
    if (m.date_range) {
        j["date_range"] = {m.date_range->first.iso(), m.date_range->second.iso()};
    }
    j["price_column"] = m.price_column;
    if (!m.drop.empty()) j["drop"] = m.drop;
    return j;
}

void save_manifest(const fs::path& path, const DatasetManifest& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("I/O error: cannot write '" + path.string() + "'");
    out << manifest_to_json(manifest).dump(2) << '\n';
}

std::string file_hash(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path.string() + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 15];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

LoadedPanel load_panel(const DatasetManifest& manifest, std::size_t min_calendar) {
    manifest.validate();
    LoadedPanel out;
    auto read = [&](const StockFile& f) {
        auto s = ingest_csv(f.path, manifest.price_column, f.ticker);
        out.input_hashes.emplace_back(f.path.generic_string(), file_hash(f.path));
        if (!manifest.date_range) return s;
        std::vector<Date> dates;
        std::vector<double> closes;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const Date d = s.dates()[i];
            if (d < manifest.date_range->first || manifest.date_range->second < d) continue;
            dates.push_back(d);
            closes.push_back(s.closes()[i]);
        }
        return PriceSeries(s.ticker(), std::move(dates), std::move(closes));
    };
    std::vector<PriceSeries> stocks;
    for (const auto& f : manifest.stocks) {
        if (std::find(manifest.drop.begin(), manifest.drop.end(), f.ticker) != manifest.drop.end()) continue;
        stocks.push_back(read(f));
    }
    const auto index = read(manifest.index);
    out.panel = align_panel(stocks, index, min_calendar);
    return out;
}

std::string to_string(DetrendChoice choice) {
    switch (choice) {
    case DetrendChoice::Centered: return "centered";
    case DetrendChoice::Trailing: return "trailing";
    case DetrendChoice::None: return "none";
    }
    return "centered";
}

DetrendChoice parse_detrend_choice(const std::string& text) {
    if (text == "centered") return DetrendChoice::Centered;
    if (text == "trailing") return DetrendChoice::Trailing;
    if (text == "none") return DetrendChoice::None;
    throw validation_error("detrend mode must be centered, trailing or none, got '" + text + "'");
}

void RunConfig::validate() const {
    if (delta_t < 1) throw validation_error("delta_t must be >= 1");
    if (dt1 < 1) throw validation_error("dt1 must be >= 1");
    if (!(dt1 < dt2)) {
        throw validation_error("dt1 must be smaller than dt2 (got " + std::to_string(dt1) + " and " +
                               std::to_string(dt2) + ")");
    }
    if (rho_grid.empty()) throw validation_error("rho_grid must not be empty");
    for (double r : rho_grid) {
        if (!std::isfinite(r)) throw validation_error("rho_grid holds a non-finite level");
    }
    if (detrend != DetrendChoice::None) {
        if (detrend_window < 3) throw validation_error("detrend_window must be >= 3");
        if (detrend == DetrendChoice::Centered && detrend_window % 2 == 0) {
            throw validation_error("centered detrend_window must be odd");
        }
    }
    if (binning == BinningKind::Logarithmic && !(bin_ratio > 1.0)) throw validation_error("bin_ratio must be > 1");
    if (binning == BinningKind::Linear && !(bin_width >= 1.0)) throw validation_error("bin_width must be >= 1");
    if (hist_bins < 1) throw validation_error("hist_bins must be >= 1");
    if (!(chi_epsilon >= 0.0)) throw validation_error("chi_epsilon must be >= 0");
}

Binning RunConfig::waiting_time_binning() const {
    return binning == BinningKind::Linear ? Binning::linear(bin_width) : Binning::logarithmic(bin_ratio);
}

json to_json(const RunConfig& c) {
    return json{{"delta_t", c.delta_t},
                {"dt1", c.dt1},
                {"dt2", c.dt2},
                {"rho_grid", c.rho_grid},
                {"detrend_window", c.detrend_window},
                {"detrend_mode", to_string(c.detrend)},
                {"binning", c.binning == BinningKind::Linear ? "linear" : "log"},
                {"bin_ratio", c.bin_ratio},
                {"bin_width", c.bin_width},
                {"hist_bins", c.hist_bins},
                {"seed", c.seed},
                {"min_samples", c.min_samples},
                {"chi_epsilon", c.chi_epsilon},
                {"threads", c.threads}};
}

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) throw validation_error("run config must be a JSON object");
    RunConfig c;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "delta_t") c.delta_t = value.get<int>();
            else if (key == "dt1") c.dt1 = value.get<int>();
            else if (key == "dt2") c.dt2 = value.get<int>();
            else if (key == "rho_grid") c.rho_grid = value.get<std::vector<double>>();
            else if (key == "detrend_window") c.detrend_window = value.get<int>();
            else if (key == "detrend_mode") c.detrend = parse_detrend_choice(value.get<std::string>());
            else if (key == "binning") {
                const auto b = value.get<std::string>();
                if (b == "log") c.binning = BinningKind::Logarithmic;
                else if (b == "linear") c.binning = BinningKind::Linear;
                else throw validation_error("binning must be 'log' or 'linear'");
            }
            else if (key == "bin_ratio") c.bin_ratio = value.get<double>();
            else if (key == "bin_width") c.bin_width = value.get<double>();
            else if (key == "hist_bins") c.hist_bins = value.get<std::size_t>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "min_samples") c.min_samples = value.get<std::size_t>();
            else if (key == "chi_epsilon") c.chi_epsilon = value.get<double>();
            else if (key == "threads") c.threads = value.get<unsigned>();
            else throw validation_error("unknown run config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw validation_error(std::string("run config: ") + e.what());
    }
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open run config '" + path.string() + "'");
    try {
        return run_config_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw validation_error("run config '" + path.string() + "': " + e.what());
    }
}

} // namespace fearcorr
