#include "fearcorr/cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fearcorr/error.hpp"
#include "fearcorr/pipeline.hpp"

namespace fearcorr {

namespace fs = std::filesystem;

namespace {

// Flags shared by the analysis commands. Each one overrides the field of the
// same name from --config.
struct ConfigFlags {
    std::string config_path;
    std::optional<int> delta_t, dt1, dt2, detrend_window;
    std::vector<double> rho_grid;
    std::optional<std::string> detrend_mode, binning;
    std::optional<double> bin_ratio, bin_width, chi_epsilon;
    std::optional<std::size_t> hist_bins, min_samples;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "Run config JSON")->check(CLI::ExistingFile);
        app->add_option("--delta-t", delta_t, "Return horizon in days");
        app->add_option("--dt1", dt1, "Shortest correlation window");
        app->add_option("--dt2", dt2, "Longest correlation window");
        app->add_option("--rho-grid", rho_grid, "Signed return levels, comma separated")->delimiter(',');
        app->add_option("--detrend-window", detrend_window, "Detrending window in days");
        app->add_option("--detrend-mode", detrend_mode, "centered, trailing or none");
        app->add_option("--binning", binning, "log or linear waiting-time bins");
        app->add_option("--bin-ratio", bin_ratio, "Growth of logarithmic bin widths");
        app->add_option("--bin-width", bin_width, "Linear bin width in days");
        app->add_option("--hist-bins", hist_bins, "Bins of the distribution histograms");
        app->add_option("--seed", seed, "Seed for subsampling");
        app->add_option("--min-samples", min_samples, "Samples below which a curve point is flagged");
        app->add_option("--chi-epsilon", chi_epsilon, "Guard on |C(+)| for chi");
        app->add_option("--threads", threads, "Worker threads, 0 = all cores");
    }

    RunConfig resolve() const {
        RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (delta_t) c.delta_t = *delta_t;
        if (dt1) c.dt1 = *dt1;
        if (dt2) c.dt2 = *dt2;
        if (!rho_grid.empty()) c.rho_grid = rho_grid;
        if (detrend_window) c.detrend_window = *detrend_window;
        if (detrend_mode) c.detrend = parse_detrend_choice(*detrend_mode);
        if (binning) {
            if (*binning == "log") c.binning = BinningKind::Logarithmic;
            else if (*binning == "linear") c.binning = BinningKind::Linear;
            else throw validation_error("--binning must be log or linear");
        }
        if (bin_ratio) c.bin_ratio = *bin_ratio;
        if (bin_width) c.bin_width = *bin_width;
        if (hist_bins) c.hist_bins = *hist_bins;
        if (seed) c.seed = *seed;
        if (min_samples) c.min_samples = *min_samples;
        if (chi_epsilon) c.chi_epsilon = *chi_epsilon;
        if (threads) c.threads = *threads;
        c.validate();
        return c;
    }
};

struct Row {
    std::size_t line = 0;
    std::vector<std::string> cells;
};

// Whitespace or tab separated rows; blank lines and '#' comments skipped.
std::vector<Row> read_rows(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path.string() + "'");
    std::vector<Row> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        Row r{line_no, {}};
        std::istringstream cells(line);
        for (std::string c; cells >> c;) r.cells.push_back(c);
        if (!r.cells.empty()) rows.push_back(std::move(r));
    }
    return rows;
}

// "NA" reads as empty. A first row that does not parse is a header.
std::optional<double> cell_value(const fs::path& path, const Row& row, std::size_t column, bool& header) {
    header = false;
    if (row.cells.size() < column) {
        throw data_error(path.string() + ":" + std::to_string(row.line) + ": missing column " + std::to_string(column));
    }
    const std::string& cell = row.cells[column - 1];
    if (cell == "NA") return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        if (row.line == 1) {
            header = true;
            return std::nullopt;
        }
        throw data_error(path.string() + ":" + std::to_string(row.line) + ": not a number '" + cell + "'");
    }
    return v;
}

std::vector<double> read_column(const fs::path& path, std::size_t column) {
    std::vector<double> out;
    bool header = false;
    for (const auto& row : read_rows(path)) {
        if (const auto v = cell_value(path, row, column, header)) out.push_back(*v);
    }
    return out;
}

int cmd_ingest_check(const std::vector<std::string>& files, const std::string& manifest_path,
                     const std::string& price_column, std::ostream& out) {
    if (!manifest_path.empty()) {
        const auto manifest = load_manifest(manifest_path);
        const auto loaded = load_panel(manifest);
        out << "stocks\t" << loaded.panel.stocks.size() << '\n'
            << "calendar\t" << loaded.panel.length() << '\n'
            << "first\t" << loaded.panel.calendar.front().iso() << '\n'
            << "last\t" << loaded.panel.calendar.back().iso() << '\n';
        return 0;
    }
    if (files.empty()) throw validation_error("ingest-check needs CSV files or --manifest");
    out << "ticker\trows\tfirst\tlast\tfnv1a64\n";
    for (const auto& f : files) {
        const auto s = ingest_csv(f, price_column);
        out << s.ticker() << '\t' << s.size() << '\t' << s.dates().front().iso() << '\t' << s.dates().back().iso()
            << '\t' << file_hash(f) << '\n';
    }
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Conditional correlation and gain-loss asymmetry analysis of daily price panels", "fearcorr"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    auto* ingest = app.add_subcommand("ingest-check", "Validate price CSV files or a manifest");
    std::vector<std::string> ingest_files;
    std::string ingest_manifest;
    std::string ingest_column = "Adj Close";
    ingest->add_option("files", ingest_files, "CSV files");
    ingest->add_option("--manifest", ingest_manifest, "Dataset manifest JSON");
    ingest->add_option("--price-column", ingest_column, "Price column")->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "Write a synthetic fear-factor panel");
    SimConfig sim;
    std::string sim_out;
    simulate->add_option("--out", sim_out, "Output directory")->required();
    simulate->add_option("--n-stocks", sim.n_stocks)->capture_default_str();
    simulate->add_option("--n-steps", sim.n_steps)->capture_default_str();
    simulate->add_option("--fear-probability", sim.fear_probability)->capture_default_str();
    simulate->add_option("--step-size", sim.step_size)->capture_default_str();
    simulate->add_option("--seed", sim.seed)->capture_default_str();

    auto* invstats = app.add_subcommand("invstats", "Waiting-time histograms for +/- return levels");
    std::string inv_input;
    std::string inv_out;
    std::string inv_column = "Adj Close";
    ConfigFlags inv_flags;
    invstats->add_option("input", inv_input, "Manifest (.json, index series used) or price CSV")->required();
    invstats->add_option("--out", inv_out, "Output directory")->required();
    invstats->add_option("--price-column", inv_column, "Price column for a CSV input")->capture_default_str();
    inv_flags.attach(invstats);

    auto* condcorr = app.add_subcommand("condcorr", "Conditional market component correlation");
    std::string cc_manifest;
    std::string cc_out;
    ConfigFlags cc_flags;
    condcorr->add_option("manifest", cc_manifest, "Dataset manifest JSON")->required();
    condcorr->add_option("--out", cc_out, "Output directory")->required();
    cc_flags.attach(condcorr);

    auto* wilcoxon = app.add_subcommand("wilcoxon", "Rank-sum test between two files of numbers");
    std::string wa, wb;
    std::size_t wcol = 1;
    wilcoxon->add_option("sample_a", wa, "First sample")->required();
    wilcoxon->add_option("sample_b", wb, "Second sample")->required();
    wilcoxon->add_option("--column", wcol, "1-based column to read")->capture_default_str()->check(CLI::PositiveNumber);

    auto* chi = app.add_subcommand("chi", "Relative difference (C- - C+)/|C+|");
    std::optional<double> c_minus, c_plus;
    std::string chi_pairs;
    std::string chi_out;
    double chi_eps = kChiEpsilon;
    std::size_t chi_bins = 40;
    chi->add_option("--c-minus", c_minus);
    chi->add_option("--c-plus", c_plus);
    chi->add_option("--pairs", chi_pairs, "pairs TSV with C_minus and C_plus columns");
    chi->add_option("--out", chi_out, "Histogram TSV for --pairs");
    chi->add_option("--epsilon", chi_eps)->capture_default_str();
    chi->add_option("--hist-bins", chi_bins)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (ingest->parsed()) return cmd_ingest_check(ingest_files, ingest_manifest, ingest_column, out);

        if (simulate->parsed()) {
            const auto manifest = run_simulate(sim, sim_out);
            out << manifest.string() << '\n';
            return 0;
        }

        if (invstats->parsed()) {
            const auto config = inv_flags.resolve();
            const auto r = run_invstats(inv_input, config, inv_out, inv_column);
            out << "abs_rho\tmode_plus\tmode_minus\tasymmetry\n";
            for (const auto& e : r.entries) {
                out << format_number(e.abs_level) << '\t' << format_number(e.gain_mode) << '\t'
                    << format_number(e.loss_mode) << '\t' << format_number(e.asymmetry) << '\n';
            }
            return 0;
        }

        if (condcorr->parsed()) {
            const auto config = cc_flags.resolve();
            const auto r = run_condcorr(cc_manifest, config, cc_out);
            out << "rho\tC\tn_samples\tn_excluded\n";
            for (const auto& p : r.curve.points) {
                out << format_number(p.level) << '\t' << format_number(p.value) << '\t' << p.sample_count << '\t'
                    << p.windows_excluded << (p.poor_statistics ? "\tpoor" : "") << '\n';
            }
            return 0;
        }

        if (wilcoxon->parsed()) {
            const auto a = read_column(wa, wcol);
            const auto b = read_column(wb, wcol);
            const auto r = wilcoxon_rank_sum(a, b);
            out << "z\tlog10_p\tn_a\tn_b\n"
                << format_number(r.z) << '\t' << format_number(r.log10_p) << '\t' << r.n_a << '\t' << r.n_b << '\n';
            return 0;
        }

        if (chi->parsed()) {
            if (!chi_pairs.empty()) {
                std::vector<double> values;
                std::size_t excluded = 0;
                bool header = false;
                for (const auto& row : read_rows(chi_pairs)) {
                    const auto cm = cell_value(chi_pairs, row, 3, header);
                    if (header) continue;
                    const auto cp = cell_value(chi_pairs, row, 4, header);
                    if (!cm || !cp) continue;
                    const auto v = relative_difference_chi(*cm, *cp, chi_eps);
                    if (v) values.push_back(*v);
                    else ++excluded;
                }
                if (values.empty()) throw statistics_error("no pair has |C(+)| above epsilon");
                const auto h = distribution_histogram(values, chi_bins);
                std::ofstream file;
                if (!chi_out.empty()) {
                    file.open(chi_out, std::ios::binary);
                    if (!file) throw data_error("I/O error: cannot write '" + chi_out + "'");
                }
                std::ostream& dst = chi_out.empty() ? out : file;
                dst << "chi_center\tdensity\n";
                for (std::size_t i = 0; i < h.bin_count(); ++i) {
                    dst << format_number(h.bin_center(i)) << '\t' << format_number(h.densities[i]) << '\n';
                }
                err << "chi: " << values.size() << " pairs, " << excluded << " excluded\n";
                return 0;
            }
            if (!c_minus || !c_plus) throw validation_error("chi needs --c-minus and --c-plus, or --pairs");
            const auto v = relative_difference_chi(*c_minus, *c_plus, chi_eps);
            if (!v) throw statistics_error("|C(+)| is not above epsilon; chi undefined");
            out << format_number(*v) << '\n';
            return 0;
        }
    } catch (const Error& e) {
        err << "fearcorr: error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "fearcorr: I/O error: " << e.what() << '\n';
        return exit_code(ErrorKind::Data);
    } catch (const std::bad_alloc&) {
        err << "fearcorr: error: out of memory\n";
        return exit_code(ErrorKind::Data);
    }
    return 2;
}

} // namespace fearcorr
