#include "fearcorr/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <set>

#include "fearcorr/error.hpp"
#include "fearcorr/rng.hpp"

namespace fearcorr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string na_or(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

class TsvWriter {
public:
    TsvWriter(const fs::path& path, const std::string& header) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw data_error("I/O error: cannot write '" + path.string() + "'");
        out_ << header << '\n';
    }
    ~TsvWriter() = default;

    template <typename... Cells>
    void row(const Cells&... cells) {
        std::size_t i = 0;
        ((out_ << (i++ ? "\t" : "") << cell(cells)), ...);
        out_ << '\n';
    }

    void close() {
        out_.close();
        if (!out_) throw data_error("I/O error: failed writing '" + path_.string() + "'");
    }

private:
    static std::string cell(double v) { return format_number(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }

    fs::path path_;
    std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("I/O error: cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw data_error("I/O error: failed writing '" + path.string() + "'");
}

std::optional<RankSumResult> try_rank_sum(std::span<const double> a, std::span<const double> b, std::string& note,
                                          const std::string& what) {
    if (a.empty() || b.empty() || a.size() + b.size() < 4) {
        note += what + ": too few samples; ";
        return std::nullopt;
    }
    try {
        return wilcoxon_rank_sum(a, b);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientStatistics) throw;
        note += what + ": " + e.what() + "; ";
        return std::nullopt;
    }
}

json rank_sum_json(const std::optional<RankSumResult>& r) {
    if (!r) return nullptr;
    return json{{"z", r->z},
                {"log10_p", r->log10_p},
                {"p_is_upper_bound", r->p_is_upper_bound},
                {"n_a", r->n_a},
                {"n_b", r->n_b},
                {"tie_groups", r->tie_groups}};
}

// Density of two samples on shared equal-width edges.
void write_paired_histogram(const fs::path& path, const std::string& value_name, std::span<const double> minus,
                            std::span<const double> plus, std::size_t bins) {
    if (minus.empty() && plus.empty()) return;
    std::vector<double> all(minus.begin(), minus.end());
    all.insert(all.end(), plus.begin(), plus.end());
    const auto joint = distribution_histogram(all, bins);
    TsvWriter w(path, value_name + "_center\tdensity_minus\tdensity_plus");
    const auto dm = minus.empty() ? DistributionHistogram{} : distribution_histogram(minus, joint.bin_edges);
    const auto dp = plus.empty() ? DistributionHistogram{} : distribution_histogram(plus, joint.bin_edges);
    for (std::size_t i = 0; i < joint.bin_count(); ++i) {
        w.row(joint.bin_center(i), minus.empty() ? 0.0 : dm.densities[i], plus.empty() ? 0.0 : dp.densities[i]);
    }
    w.close();
}

std::vector<double> values_of(const std::vector<TimeResolvedSample>& samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.value);
    return out;
}

} // namespace

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw data_error("I/O error: cannot create output directory '" + dir.string() + "'" +
                         (ec ? ": " + ec.message() : std::string()));
    }
}

std::vector<double> paired_magnitudes(const std::vector<double>& rho_grid) {
    std::set<double> pos;
    std::set<double> neg;
    for (double r : rho_grid) {
        if (r > 0.0) pos.insert(r);
        if (r < 0.0) neg.insert(-r);
    }
    std::vector<double> out;
    std::set_intersection(pos.begin(), pos.end(), neg.begin(), neg.end(), std::back_inserter(out));
    return out;
}

CondcorrResult analyze_condcorr(const PanelReturns& returns, const RunConfig& config) {
    config.validate();
    if (returns.horizon() != config.delta_t) {
        throw validation_error("returns were built with horizon " + std::to_string(returns.horizon()) +
                               " but delta_t is " + std::to_string(config.delta_t));
    }
    const auto mags = paired_magnitudes(config.rho_grid);
    if (mags.size() > 32) throw validation_error("at most 32 magnitudes may appear with both signs in rho_grid");

    ScanOptions opts;
    opts.windows = {config.dt1, config.dt2};
    opts.threads = config.threads;
    for (double m : mags) {
        opts.pair_levels.push_back(-m);
        opts.pair_levels.push_back(m);
    }
    const auto scan = ConditionalScan::run(returns, opts);

    CondcorrResult out;
    for (std::size_t i = 0; i < returns.stock_count(); ++i) out.tickers.push_back(returns.ticker(i));
    out.stock_count = returns.stock_count();
    out.return_count = returns.return_count();
    out.pair_count = scan.pairs().size();
    out.curve = scan.curve(config.rho_grid, config.min_samples);

    std::vector<double> grid = config.rho_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (double level : grid) {
        for (int span = config.dt1; span <= config.dt2; ++span) {
            out.by_window.push_back({level, span, scan.conditional_mean(level, span)});
        }
    }

    for (std::size_t k = 0; k < mags.size(); ++k) {
        const double m = mags[k];
        LevelComparison lc;
        lc.abs_level = m;
        std::vector<double> minus_vals;
        std::vector<double> plus_vals;
        for (std::size_t p = 0; p < scan.pairs().size(); ++p) {
            PairLevelRow row;
            row.pair = scan.pairs()[p];
            row.c_minus = scan.pair_window_average(p, -m).value;
            row.c_plus = scan.pair_window_average(p, m).value;
            if (row.c_minus && row.c_plus) {
                minus_vals.push_back(*row.c_minus);
                plus_vals.push_back(*row.c_plus);
                row.chi = relative_difference_chi(*row.c_minus, *row.c_plus, config.chi_epsilon);
                if (!row.chi) ++lc.chi_excluded;
            } else {
                ++lc.pairs_undefined;
            }
            lc.pairs.push_back(row);
        }
        lc.pair_test = try_rank_sum(plus_vals, minus_vals, lc.note, "pair test");

        lc.ct_minus = scan.time_resolved(-m);
        lc.ct_plus = scan.time_resolved(m);
        auto ct_m = values_of(lc.ct_minus);
        auto ct_p = values_of(lc.ct_plus);
        const std::size_t target = std::min(ct_m.size(), ct_p.size());
        // Stream keyed on the level itself so adding a level to the grid does
        // not change the subsample of another.
        Rng rng(config.seed ^ (std::bit_cast<std::uint64_t>(m) * 0x9E3779B97F4A7C15ULL));
        if (ct_m.size() > target) ct_m = equal_size_subsample(ct_m, target, rng);
        if (ct_p.size() > target) ct_p = equal_size_subsample(ct_p, target, rng);
        lc.ct_test_size = target;
        lc.ct_test = try_rank_sum(ct_p, ct_m, lc.note, "C_t test");
        out.levels.push_back(std::move(lc));
    }
    return out;
}

void write_condcorr(const CondcorrResult& result, const RunConfig& config, const fs::path& out_dir,
                    const json& provenance) {
    ensure_directory(out_dir);
    {
        TsvWriter w(out_dir / "curve.tsv", "rho\tC\tn_samples\tn_excluded");
        for (const auto& p : result.curve.points) w.row(p.level, p.value, p.sample_count, p.windows_excluded);
        w.close();
    }
    {
        TsvWriter w(out_dir / "c0_by_window.tsv", "rho\tdt\tC0\tn_samples");
        for (const auto& p : result.by_window) {
            if (p.value) w.row(p.level, p.span, p.value->value, p.value->sample_count);
        }
        w.close();
    }
    TsvWriter wp(out_dir / "wilcoxon_pairs.tsv", "rho\tz\tlog10_p\tn");
    TsvWriter wc(out_dir / "wilcoxon_ct.tsv", "rho\tz\tlog10_p\tn");
    json levels = json::array();
    for (const auto& lc : result.levels) {
        const std::string tag = format_number(lc.abs_level);
        std::vector<double> cm, cp, chi;
        {
            TsvWriter w(out_dir / ("pairs_" + tag + ".tsv"), "x\ty\tC_minus\tC_plus\tchi");
            for (const auto& r : lc.pairs) {
                w.row(result.tickers.at(r.pair.x), result.tickers.at(r.pair.y), na_or(r.c_minus), na_or(r.c_plus),
                      na_or(r.chi));
                if (r.c_minus && r.c_plus) {
                    cm.push_back(*r.c_minus);
                    cp.push_back(*r.c_plus);
                }
                if (r.chi) chi.push_back(*r.chi);
            }
            w.close();
        }
        write_paired_histogram(out_dir / ("pair_hist_" + tag + ".tsv"), "C", cm, cp, config.hist_bins);
        if (!chi.empty()) {
            const auto h = distribution_histogram(chi, config.hist_bins);
            TsvWriter w(out_dir / ("chi_hist_" + tag + ".tsv"), "chi_center\tdensity");
            for (std::size_t i = 0; i < h.bin_count(); ++i) w.row(h.bin_center(i), h.densities[i]);
            w.close();
        }
        for (const auto* side : {&lc.ct_minus, &lc.ct_plus}) {
            const std::string name = side == &lc.ct_minus ? "ct_minus_" : "ct_plus_";
            TsvWriter w(out_dir / (name + tag + ".tsv"), "t\tC_t\twindows");
            for (const auto& s : *side) w.row(s.t, s.value, s.windows);
            w.close();
        }
        write_paired_histogram(out_dir / ("ct_hist_" + tag + ".tsv"), "C_t", values_of(lc.ct_minus),
                               values_of(lc.ct_plus), config.hist_bins);
        if (lc.pair_test) wp.row(lc.abs_level, lc.pair_test->z, lc.pair_test->log10_p, lc.pair_test->n_a);
        if (lc.ct_test) wc.row(lc.abs_level, lc.ct_test->z, lc.ct_test->log10_p, lc.ct_test_size);

        levels.push_back({{"abs_rho", lc.abs_level},
                          {"pairs_undefined", lc.pairs_undefined},
                          {"chi_excluded", lc.chi_excluded},
                          {"pair_test", rank_sum_json(lc.pair_test)},
                          {"ct_minus_count", lc.ct_minus.size()},
                          {"ct_plus_count", lc.ct_plus.size()},
                          {"ct_test_size", lc.ct_test_size},
                          {"ct_test", rank_sum_json(lc.ct_test)},
                          {"note", lc.note}});
    }
    wp.close();
    wc.close();

    json curve = json::array();
    for (const auto& p : result.curve.points) {
        curve.push_back({{"rho", p.level},
                         {"C", p.value},
                         {"n_samples", p.sample_count},
                         {"windows_excluded", p.windows_excluded},
                         {"poor_statistics", p.poor_statistics}});
    }
    json summary = provenance;
    summary["command"] = "condcorr";
    summary["version"] = kVersion;
    summary["config"] = to_json(config);
    summary["counts"] = {{"stocks", result.stock_count},
                         {"returns_per_stock", result.return_count},
                         {"pairs", result.pair_count},
                         {"curve_points", result.curve.points.size()}};
    summary["curve"] = curve;
    summary["levels"] = levels;
    write_json(out_dir / "summary.json", summary);
}

CondcorrResult run_condcorr(const fs::path& manifest_path, const RunConfig& config, const fs::path& out_dir) {
    config.validate();
    const auto manifest = load_manifest(manifest_path);
    const auto loaded = load_panel(manifest, static_cast<std::size_t>(config.delta_t + config.dt1 + 1));
    const auto returns = PanelReturns::from_panel(loaded.panel, config.delta_t);
    auto result = analyze_condcorr(returns, config);

    json prov;
    prov["manifest"] = manifest_to_json(manifest);
    prov["inputs"] = json::array();
    for (const auto& [path, hash] : loaded.input_hashes) prov["inputs"].push_back({{"path", path}, {"fnv1a64", hash}});
    prov["calendar"] = {{"days", loaded.panel.length()},
                        {"first", loaded.panel.calendar.front().iso()},
                        {"last", loaded.panel.calendar.back().iso()}};
    write_condcorr(result, config, out_dir, prov);
    return result;
}

std::vector<double> invstats_series(const PriceSeries& series, const RunConfig& config, std::size_t* offset) {
    if (offset) *offset = 0;
    if (config.detrend == DetrendChoice::None) return series.log_prices();
    const auto mode = config.detrend == DetrendChoice::Centered ? DetrendMode::Centered : DetrendMode::Trailing;
    auto d = detrend_log_price(series, config.detrend_window, mode);
    if (offset) *offset = d.source_offset;
    return std::move(d.values);
}

InvstatsResult analyze_invstats(std::span<const double> log_series, const RunConfig& config,
                                const std::string& ticker) {
    config.validate();
    std::set<double> mags;
    for (double r : config.rho_grid) {
        if (r == 0.0) throw validation_error("rho_grid must not contain 0 for inverse statistics");
        mags.insert(std::fabs(r));
    }
    const std::vector<double> levels(mags.begin(), mags.end());
    InvstatsResult out;
    out.ticker = ticker;
    out.series_length = log_series.size();
    out.entries = gain_loss_report(log_series, levels, config.waiting_time_binning());
    auto fit = [](const WaitingTimeHistogram& h) -> std::optional<TailFit> {
        try {
            return fit_tail_exponent(h);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::InsufficientStatistics) throw;
            return std::nullopt;
        }
    };
    for (const auto& e : out.entries) {
        out.gain_fits.push_back(fit(e.gain));
        out.loss_fits.push_back(fit(e.loss));
    }
    return out;
}

namespace {

json fit_json(const std::optional<TailFit>& f) {
    if (!f) return nullptr;
    return json{{"alpha", f->exponent},
                {"stderr", f->stderr_exponent},
                {"tau_min", f->tau_min},
                {"tau_max", f->tau_max},
                {"bins", f->bins_used}};
}

void write_waiting_histogram(const fs::path& path, const WaitingTimeHistogram& h) {
    TsvWriter w(path, "tau_center\tdensity");
    for (std::size_t i = 0; i < h.bin_count(); ++i) w.row(h.bin_center(i), h.densities[i]);
    w.close();
}

} // namespace

void write_invstats(const InvstatsResult& result, const RunConfig& config, const fs::path& out_dir,
                    const json& provenance) {
    ensure_directory(out_dir);
    TsvWriter s(out_dir / "invstats_summary.tsv",
                "abs_rho\tmode_plus\tmode_minus\tasymmetry\talpha_plus\talpha_minus\tn_plus\tn_minus\tcensored_plus\t"
                "censored_minus");
    json entries = json::array();
    for (std::size_t i = 0; i < result.entries.size(); ++i) {
        const auto& e = result.entries[i];
        const std::string tag = format_number(e.abs_level);
        write_waiting_histogram(out_dir / ("hist_plus_" + tag + ".tsv"), e.gain);
        write_waiting_histogram(out_dir / ("hist_minus_" + tag + ".tsv"), e.loss);
        const auto& gf = result.gain_fits[i];
        const auto& lf = result.loss_fits[i];
        s.row(e.abs_level, e.gain_mode, e.loss_mode, e.asymmetry, gf ? format_number(gf->exponent) : "NA",
              lf ? format_number(lf->exponent) : "NA", e.gain.total_samples, e.loss.total_samples,
              e.gain.censored_count, e.loss.censored_count);
        entries.push_back({{"abs_rho", e.abs_level},
                           {"mode_plus", e.gain_mode},
                           {"mode_minus", e.loss_mode},
                           {"asymmetry", e.asymmetry},
                           {"n_plus", e.gain.total_samples},
                           {"n_minus", e.loss.total_samples},
                           {"censored_plus", e.gain.censored_count},
                           {"censored_minus", e.loss.censored_count},
                           {"fit_plus", fit_json(gf)},
                           {"fit_minus", fit_json(lf)}});
    }
    s.close();
    json summary = provenance;
    summary["command"] = "invstats";
    summary["version"] = kVersion;
    summary["config"] = to_json(config);
    summary["series"] = {{"ticker", result.ticker},
                         {"length", result.series_length},
                         {"detrend_offset", result.detrend_offset}};
    summary["levels"] = entries;
    write_json(out_dir / "summary.json", summary);
}

InvstatsResult run_invstats(const fs::path& input, const RunConfig& config, const fs::path& out_dir,
                            const std::string& price_column) {
    config.validate();
    json prov;
    std::optional<PriceSeries> series;
    fs::path source;
    if (input.extension() == ".json") {
        const auto manifest = load_manifest(input);
        source = manifest.index.path;
        auto s = ingest_csv(source, manifest.price_column, manifest.index.ticker);
        if (manifest.date_range) {
            std::vector<Date> dates;
            std::vector<double> closes;
            for (std::size_t i = 0; i < s.size(); ++i) {
                const Date d = s.dates()[i];
                if (d < manifest.date_range->first || manifest.date_range->second < d) continue;
                dates.push_back(d);
                closes.push_back(s.closes()[i]);
            }
            s = PriceSeries(s.ticker(), std::move(dates), std::move(closes));
        }
        series = std::move(s);
        prov["manifest"] = manifest_to_json(manifest);
    } else {
        source = input;
        series = ingest_csv(input, price_column);
    }
    prov["inputs"] = json::array({{{"path", source.generic_string()}, {"fnv1a64", file_hash(source)}}});

    std::size_t offset = 0;
    const auto values = invstats_series(*series, config, &offset);
    auto result = analyze_invstats(values, config, series->ticker());
    result.detrend_offset = offset;
    write_invstats(result, config, out_dir, prov);
    return result;
}

fs::path run_simulate(const SimConfig& config, const fs::path& out_dir) {
    config.validate();
    if (config.n_stocks < 2) throw validation_error("a simulated panel needs at least 2 stocks");
    ensure_directory(out_dir);
    const auto sim = simulate_market(config);
    const auto panel = to_aligned_panel(sim);

    DatasetManifest manifest;
    for (const auto& s : panel.stocks) {
        const std::string file = s.ticker() + ".csv";
        write_price_csv(out_dir / file, s);
        manifest.stocks.push_back({s.ticker(), file});
    }
    write_price_csv(out_dir / "INDEX.csv", panel.index_series);
    manifest.index = {"INDEX", "INDEX.csv"};
    const fs::path manifest_path = out_dir / "manifest.json";
    save_manifest(manifest_path, manifest);

    std::size_t fear = 0;
    for (auto f : sim.fear_steps) fear += f;
    write_json(out_dir / "simulation.json", json{{"command", "simulate"},
                                                 {"version", kVersion},
                                                 {"n_stocks", config.n_stocks},
                                                 {"n_steps", config.n_steps},
                                                 {"fear_probability", config.fear_probability},
                                                 {"step_size", config.step_size},
                                                 {"seed", config.seed},
                                                 {"fear_steps", fear},
                                                 {"generator", "mt19937_64"}});
    return manifest_path;
}

} // namespace fearcorr
