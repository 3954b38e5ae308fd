// End-to-end acceptance checks. Prints one PASS/FAIL/SKIP line per
// criterion and exits non-zero if any criterion fails.
//
//   acceptance            run everything
//   acceptance 3 5        run the listed criteria only

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fearcorr/conditional_correlation.hpp"
#include "fearcorr/core_timeseries.hpp"
#include "fearcorr/fear_factor_sim.hpp"
#include "fearcorr/inverse_stats.hpp"
#include "fearcorr/io.hpp"
#include "fearcorr/pipeline.hpp"
#include "fearcorr/stats_tests.hpp"
#include "naive_oracle.hpp"
#include "random_panel.hpp"

using namespace fearcorr;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
    Outcome outcome = Outcome::Fail;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

RunConfig control_config() {
    RunConfig c;
    c.rho_grid = {-0.10, -0.05, -0.03, 0.03, 0.05, 0.10};
    return c;
}

SimConfig control_sim(double p, std::uint64_t seed) {
    SimConfig s;
    s.n_stocks = 30;
    s.n_steps = 100000;
    s.fear_probability = p;
    s.step_size = 0.01;
    s.seed = seed;
    return s;
}

const CurvePoint* point_at(const CorrelationCurve& curve, double level) {
    for (const auto& p : curve.points) {
        if (p.level == level) return &p;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------

Verdict oracle_equivalence() {
    const auto start = Clock::now();
    std::mt19937_64 gen(20090101);
    const int panels = 120;
    double worst = 0.0;
    std::string worst_what;
    std::size_t compared = 0;
    std::vector<std::string> problems;
    auto compare = [&](std::optional<double> got, std::optional<double> want, const std::string& what) {
        if (got.has_value() != want.has_value()) {
            problems.push_back(what + " defined mismatch");
            return;
        }
        if (!got) return;
        ++compared;
        if (std::fabs(*got - *want) > worst) {
            worst = std::fabs(*got - *want);
            worst_what = what;
        }
    };
    auto same_count = [&](std::size_t got, std::size_t want, const std::string& what) {
        if (got != want) problems.push_back(what + " count " + std::to_string(got) + " vs " + std::to_string(want));
    };

    for (int k = 0; k < panels; ++k) {
        const std::size_t stocks = 2 + static_cast<std::size_t>(k % 3);
        const std::size_t days = 25 + static_cast<std::size_t>(gen() % 36);
        const int horizon = 1 + static_cast<int>(gen() % 3);
        auto rp = make_random_panel(gen, stocks, days, horizon);

        RunConfig cfg;
        cfg.delta_t = horizon;
        if (k % 4 == 0) {
            cfg.dt1 = 10;
            cfg.dt2 = 35;
        } else {
            cfg.dt1 = 1 + static_cast<int>(gen() % 8);
            cfg.dt2 = cfg.dt1 + 1 + static_cast<int>(gen() % 20);
        }
        cfg.rho_grid = {-kLatticeStep, kLatticeStep, -2 * kLatticeStep, 2 * kLatticeStep, 0.0, -0.01, 0.01};
        cfg.min_samples = 1;
        cfg.threads = 1 + static_cast<unsigned>(k % 3);
        const auto result = analyze_condcorr(rp.returns, cfg);
        const std::string tag = "panel " + std::to_string(k);

        // Curve points against the brute-force window average.
        std::set<double> levels(cfg.rho_grid.begin(), cfg.rho_grid.end());
        std::size_t expected_points = 0;
        for (double level : levels) {
            const auto want = oracle::c_avg(rp.naive, level, cfg.dt1, cfg.dt2);
            const auto* got = point_at(result.curve, level);
            if (!want.value || want.samples == 0) {
                if (got) problems.push_back(tag + " unexpected curve point");
                continue;
            }
            ++expected_points;
            if (!got) {
                problems.push_back(tag + " missing curve point");
                continue;
            }
            compare(got->value, want.value, tag + " C");
            same_count(got->sample_count, want.samples, tag + " C samples");
            same_count(got->windows_excluded, want.excluded, tag + " C excluded");
        }
        same_count(result.curve.points.size(), expected_points, tag + " curve points");

        for (const auto& w : result.by_window) {
            const auto want = oracle::c0(rp.naive, w.level, w.span);
            compare(w.value ? std::optional<double>(w.value->value) : std::nullopt,
                    want ? std::optional<double>(want->value) : std::nullopt, tag + " C0");
            if (w.value && want) same_count(w.value->sample_count, want->count, tag + " C0 samples");
        }

        for (const auto& lc : result.levels) {
            for (const auto& row : lc.pairs) {
                const auto x = static_cast<long>(row.pair.x);
                const auto y = static_cast<long>(row.pair.y);
                const auto cm = oracle::c_avg(rp.naive, -lc.abs_level, cfg.dt1, cfg.dt2, x, y).value;
                const auto cp = oracle::c_avg(rp.naive, lc.abs_level, cfg.dt1, cfg.dt2, x, y).value;
                compare(row.c_minus, cm, tag + " C_xy(-)");
                compare(row.c_plus, cp, tag + " C_xy(+)");
                std::optional<double> chi;
                if (cm && cp && std::fabs(*cp) > cfg.chi_epsilon) chi = (*cm - *cp) / std::fabs(*cp);
                // chi amplifies the C error by 1/|C(+)|; compare it relative
                // to that scale.
                if (chi.has_value() != row.chi.has_value()) {
                    problems.push_back(tag + " chi defined mismatch");
                } else if (chi) {
                    ++compared;
                    const double err = std::fabs(*row.chi - *chi) * std::fabs(*cp) / (1.0 + std::fabs(*chi));
                    if (err > worst) {
                        worst = err;
                        worst_what = tag + " chi";
                    }
                }
            }
            for (const auto* side : {&lc.ct_minus, &lc.ct_plus}) {
                const double level = side == &lc.ct_minus ? -lc.abs_level : lc.abs_level;
                const auto want = oracle::c_t(rp.naive, level, cfg.dt1, cfg.dt2);
                same_count(side->size(), want.size(), tag + " C_t");
                for (std::size_t i = 0; i < std::min(side->size(), want.size()); ++i) {
                    if ((*side)[i].t != want[i].t || (*side)[i].windows != want[i].windows) {
                        problems.push_back(tag + " C_t membership");
                        break;
                    }
                    compare((*side)[i].value, want[i].value, tag + " C_t");
                }
            }
        }
    }
    const double secs = seconds_since(start);
    std::ostringstream d;
    d << panels << " panels, " << compared << " values, max |diff| " << fmt("%.3g", worst) << " (" << worst_what << "), "
      << fmt("%.2f", secs) << " s";
    if (!problems.empty()) d << "; first problem: " << problems.front() << " (" << problems.size() << " total)";
    const bool ok = problems.empty() && worst <= 1e-10 && secs < 10.0 && panels >= 100;
    return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

// ---------------------------------------------------------------------------

Verdict wilcoxon_correctness() {
    std::size_t cases = 0;
    double worst = 0.0;
    bool antisymmetric = true;
    for (int na = 1; na <= 8; ++na) {
        for (int nb = 1; nb <= 8; ++nb) {
            const int n = na + nb;
            if (n < 4) continue;
            // Null mean and variance of the rank sum by full enumeration.
            std::vector<int> pick(static_cast<std::size_t>(n), 0);
            std::fill(pick.end() - na, pick.end(), 1);
            std::vector<int> sums;
            do {
                int w = 0;
                for (int i = 0; i < n; ++i) w += pick[static_cast<std::size_t>(i)] ? i + 1 : 0;
                sums.push_back(w);
            } while (std::next_permutation(pick.begin(), pick.end()));
            double mean = 0.0;
            for (int w : sums) mean += w;
            mean /= static_cast<double>(sums.size());
            double var = 0.0;
            for (int w : sums) var += (w - mean) * (w - mean);
            var /= static_cast<double>(sums.size());

            // Every split of the ranks 1..n, i.e. every tie-free case.
            std::fill(pick.begin(), pick.end(), 0);
            std::fill(pick.end() - na, pick.end(), 1);
            do {
                std::vector<double> a, b;
                int w = 0;
                for (int i = 0; i < n; ++i) {
                    if (pick[static_cast<std::size_t>(i)]) {
                        a.push_back(i + 1);
                        w += i + 1;
                    } else {
                        b.push_back(i + 1);
                    }
                }
                const auto r = wilcoxon_rank_sum(a, b);
                worst = std::max(worst, std::fabs(r.z - (w - mean) / std::sqrt(var)));
                if (wilcoxon_rank_sum(b, a).z != -r.z) antisymmetric = false;
                ++cases;
            } while (std::next_permutation(pick.begin(), pick.end()));
        }
    }
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> b{4, 5, 6};
    const double z = wilcoxon_rank_sum(a, b).z;
    const bool example = std::fabs(z - (-1.9640)) <= 1e-4;
    std::ostringstream d;
    d << cases << " tie-free splits, max |z - exact| " << fmt("%.3g", worst) << ", z([1,2,3],[4,5,6]) = "
      << fmt("%.6f", z) << ", antisymmetry " << (antisymmetric ? "exact" : "BROKEN");
    return {worst < 1e-12 && example && antisymmetric ? Outcome::Pass : Outcome::Fail, d.str()};
}

// ---------------------------------------------------------------------------

Verdict fear_positive_control() {
    const auto start = Clock::now();
    const auto cfg = control_config();
    const auto sim = simulate_market(control_sim(0.05, 1));
    const auto returns = to_panel_returns(sim, cfg.delta_t);
    const auto result = analyze_condcorr(returns, cfg);

    std::ostringstream d;
    bool ok = true;
    for (double m : {0.03, 0.05, 0.10}) {
        const auto* minus = point_at(result.curve, -m);
        const auto* plus = point_at(result.curve, m);
        if (!minus || !plus) {
            ok = false;
            d << "|rho|=" << m << " missing; ";
            continue;
        }
        const bool enough = minus->sample_count >= cfg.min_samples && plus->sample_count >= cfg.min_samples;
        const bool bigger = minus->value > plus->value;
        ok = ok && enough && bigger;
        d << "C(-" << m << ")=" << fmt("%.4f", minus->value) << " n=" << minus->sample_count << " vs C(+" << m
          << ")=" << fmt("%.4f", plus->value) << " n=" << plus->sample_count << "; ";
    }
    for (const auto& lc : result.levels) {
        if (!lc.pair_test) {
            ok = false;
            d << "no pair test at " << lc.abs_level << "; ";
            continue;
        }
        ok = ok && lc.pair_test->z < -3.0;
        d << "z(" << lc.abs_level << ")=" << fmt("%.2f", lc.pair_test->z) << "; ";
    }

    RunConfig inv = cfg;
    inv.rho_grid = {0.05};
    const auto detrended = detrend_log_values(sim.index_log_price, inv.detrend_window);
    const auto gl = analyze_invstats(detrended, inv);
    const bool asym = gl.entries[0].loss_mode < gl.entries[0].gain_mode;
    ok = ok && asym;
    d << "index mode(-0.05)=" << fmt("%.1f", gl.entries[0].loss_mode) << " < mode(+0.05)="
      << fmt("%.1f", gl.entries[0].gain_mode) << (asym ? "" : " FAILED") << "; ";

    // Same seed again with a different thread count must agree bit for bit.
    RunConfig again = cfg;
    again.threads = 3;
    const auto repeat = analyze_condcorr(to_panel_returns(simulate_market(control_sim(0.05, 1)), 1), again);
    bool same = repeat.curve.points.size() == result.curve.points.size();
    for (std::size_t i = 0; same && i < repeat.curve.points.size(); ++i) {
        same = repeat.curve.points[i].value == result.curve.points[i].value;
    }
    for (std::size_t i = 0; same && i < repeat.levels.size(); ++i) {
        same = repeat.levels[i].pair_test->z == result.levels[i].pair_test->z &&
               repeat.levels[i].ct_test->z == result.levels[i].ct_test->z;
    }
    const double secs = seconds_since(start);
    ok = ok && same && secs < 120.0;
    d << (same ? "deterministic" : "NOT deterministic") << ", " << fmt("%.1f", secs) << " s";
    return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

// ---------------------------------------------------------------------------

Verdict null_control() {
    const auto start = Clock::now();
    const auto cfg = control_config();
    const std::vector<double> mags{0.03, 0.05, 0.10};
    const int seeds = 20;
    int quiet_runs = 0;
    double max_abs_z = 0.0;
    // Per magnitude and sign: the 20 per-seed curve values.
    std::vector<std::vector<double>> minus(mags.size()), plus(mags.size());
    for (int s = 1; s <= seeds; ++s) {
        const auto sim = simulate_market(control_sim(0.0, static_cast<std::uint64_t>(s)));
        const auto result = analyze_condcorr(to_panel_returns(sim, cfg.delta_t), cfg);
        bool quiet = true;
        for (const auto& lc : result.levels) {
            if (!lc.pair_test) {
                quiet = false;
                continue;
            }
            max_abs_z = std::max(max_abs_z, std::fabs(lc.pair_test->z));
            if (std::fabs(lc.pair_test->z) >= 3.0) quiet = false;
        }
        quiet_runs += quiet;
        for (std::size_t i = 0; i < mags.size(); ++i) {
            if (const auto* p = point_at(result.curve, -mags[i])) minus[i].push_back(p->value);
            if (const auto* p = point_at(result.curve, mags[i])) plus[i].push_back(p->value);
        }
    }
    auto mean_se = [](const std::vector<double>& v) {
        const double n = static_cast<double>(v.size());
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        return std::make_pair(m, std::sqrt(ss / (n - 1)) / std::sqrt(n));
    };
    std::ostringstream d;
    bool overlap = true;
    d << quiet_runs << "/" << seeds << " runs with all |z| < 3 (max |z| " << fmt("%.2f", max_abs_z) << "); ";
    for (std::size_t i = 0; i < mags.size(); ++i) {
        if (minus[i].size() != static_cast<std::size_t>(seeds) || plus[i].size() != static_cast<std::size_t>(seeds)) {
            overlap = false;
            d << "|rho|=" << mags[i] << " missing points; ";
            continue;
        }
        const auto [mm, sm] = mean_se(minus[i]);
        const auto [mp, sp] = mean_se(plus[i]);
        const bool ok = std::fabs(mm - mp) <= 2.0 * (sm + sp);
        overlap = overlap && ok;
        d << "|rho|=" << mags[i] << " C(-)=" << fmt("%.4f", mm) << "+-" << fmt("%.4f", sm) << " C(+)="
          << fmt("%.4f", mp) << "+-" << fmt("%.4f", sp) << (ok ? "" : " NO OVERLAP") << "; ";
    }
    d << fmt("%.1f", seconds_since(start)) << " s";
    return {quiet_runs >= 18 && overlap ? Outcome::Pass : Outcome::Fail, d.str()};
}

// ---------------------------------------------------------------------------

Verdict tail_exponent() {
    const auto start = Clock::now();
    SimConfig s;
    s.n_stocks = 1;
    s.n_steps = 1000000;
    s.fear_probability = 0.0;
    s.step_size = 0.01;
    s.seed = 5;
    const auto walk = simulate_market(s).log_prices[0];
    const double level = 30 * s.step_size;
    bool ok = true;
    std::ostringstream d;
    for (double sign : {1.0, -1.0}) {
        const auto h = waiting_time_histogram(first_passage_times(walk, sign * level), Binning::logarithmic());
        const auto fit = fit_tail_exponent(h);
        const bool in = fit.exponent >= 1.3 && fit.exponent <= 1.7;
        ok = ok && in;
        d << "alpha(" << (sign > 0 ? "+" : "-") << level << ")=" << fmt("%.3f", fit.exponent) << " +- "
          << fmt("%.3f", fit.stderr_exponent) << " over tau in [" << fmt("%.0f", fit.tau_min) << ", "
          << fmt("%.0f", fit.tau_max) << "]; ";
    }
    const double secs = seconds_since(start);
    d << fmt("%.2f", secs) << " s";
    return {ok && secs < 60.0 ? Outcome::Pass : Outcome::Fail, d.str()};
}

// ---------------------------------------------------------------------------

Verdict invariant_suites() {
    std::mt19937_64 gen(77);
    std::vector<std::string> broken;
    std::size_t checks = 0;

    // Correlation bounds, symmetry and affine invariance.
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 3);
        auto rp = make_random_panel(gen, n, 20 + static_cast<std::size_t>(gen() % 41));
        const int span = 1 + static_cast<int>(gen() % 15);
        const double k = 0.05 + 20.0 * static_cast<double>(gen() % 1000) / 1000.0;
        const double c = 0.001 * (static_cast<double>(gen() % 200) - 100.0);
        auto lp = rp.naive.log_prices;
        for (std::size_t t = 0; t < lp[1].size(); ++t) lp[1][t] = k * lp[1][t] + c * static_cast<double>(t);
        std::vector<std::string> tickers;
        for (std::size_t i = 0; i < n; ++i) tickers.push_back("S" + std::to_string(i));
        const PanelReturns moved(tickers, lp, rp.naive.index_log_price, 1);
        for (std::size_t t = 0; t < rp.returns.start_count(span); ++t) {
            for (std::size_t x = 0; x < n; ++x) {
                for (std::size_t y = x + 1; y < n; ++y) {
                    const auto a = pair_correlation(rp.returns, x, y, t, span);
                    const auto b = pair_correlation(rp.returns, y, x, t, span);
                    ++checks;
                    if (a.has_value() != b.has_value() || (a && *a != *b)) broken.push_back("symmetry");
                    if (a && (*a > 1.0 + 1e-9 || *a < -1.0 - 1e-9)) broken.push_back("bounds");
                }
            }
            const auto a = pair_correlation(rp.returns, 0, 1, t, span);
            const auto b = pair_correlation(moved, 0, 1, t, span);
            if (a && b && std::fabs(*a - *b) > 1e-9) broken.push_back("affine invariance");
        }
    }

    // First-passage minimality by brute force, and histogram normalization.
    for (int trial = 0; trial < 100; ++trial) {
        std::normal_distribution<double> step(0.0, 0.01);
        std::vector<double> s{0.0};
        for (int i = 0; i < 300; ++i) s.push_back(s.back() + step(gen));
        const double level = (trial % 2 ? -1.0 : 1.0) * (0.002 + 0.001 * (trial % 40));
        const auto r = first_passage_times(s, level);
        std::size_t k = 0;
        for (std::size_t t0 = 0; t0 + 1 < s.size(); ++t0) {
            std::size_t tau = 0;
            for (std::size_t t = t0 + 1; t < s.size() && tau == 0; ++t) {
                const double dlt = s[t] - s[t0];
                if (level > 0 ? dlt >= level - kLevelTolerance : dlt <= level + kLevelTolerance) tau = t - t0;
            }
            if (tau == 0) continue;
            ++checks;
            if (k >= r.samples.size() || r.samples[k].start_index != t0 || r.samples[k].waiting_time != tau) {
                broken.push_back("first-passage minimality");
                break;
            }
            ++k;
        }
        if (r.samples.empty()) continue;
        for (const auto& b : {Binning::logarithmic(1.25), Binning::linear(1), Binning::linear(4)}) {
            const auto h = waiting_time_histogram(r, b);
            double total = 0.0;
            for (std::size_t i = 0; i < h.bin_count(); ++i) total += h.densities[i] * (h.bin_edges[i + 1] - h.bin_edges[i]);
            ++checks;
            if (std::fabs(total - 1.0) > 1e-9) broken.push_back("histogram normalization");
        }
    }

    // Simulator marginal symmetry and determinism.
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        SimConfig c;
        c.n_stocks = 3;
        c.n_steps = 200000;
        c.fear_probability = 0.08 * static_cast<double>(seed - 1);
        c.seed = seed;
        const auto a = simulate_market(c);
        const auto b = simulate_market(c);
        ++checks;
        if (a.log_prices != b.log_prices || a.fear_steps != b.fear_steps) broken.push_back("simulator determinism");
        for (const auto& lp : a.log_prices) {
            std::size_t down = 0;
            for (std::size_t t = 1; t < lp.size(); ++t) down += lp[t] < lp[t - 1];
            const double frac = static_cast<double>(down) / static_cast<double>(c.n_steps);
            ++checks;
            if (std::fabs(frac - 0.5) > 4.0 * 0.5 / std::sqrt(static_cast<double>(c.n_steps))) {
                broken.push_back("marginal symmetry");
            }
        }
    }
    std::ostringstream d;
    d << checks << " randomized checks";
    if (!broken.empty()) d << ", " << broken.size() << " violations, first: " << broken.front();
    return {broken.empty() ? Outcome::Pass : Outcome::Fail, d.str()};
}

// ---------------------------------------------------------------------------

Verdict djia_reproduction() {
    const char* manifest = std::getenv("FEARCORR_DJIA_MANIFEST");
    if (!manifest || !*manifest) {
        return {Outcome::Skip, "set FEARCORR_DJIA_MANIFEST to a DJIA 1991-2008 manifest to run"};
    }
    RunConfig cfg;
    cfg.min_samples = 1;
    const auto loaded = load_panel(load_manifest(manifest), static_cast<std::size_t>(cfg.dt2 + 2));
    const auto result = analyze_condcorr(PanelReturns::from_panel(loaded.panel, cfg.delta_t), cfg);
    std::ostringstream d;
    bool ok = true;
    for (double m : paired_magnitudes(cfg.rho_grid)) {
        const auto* minus = point_at(result.curve, -m);
        const auto* plus = point_at(result.curve, m);
        if (!minus || !plus || !(minus->value > plus->value)) {
            ok = false;
            d << "C(-" << m << ") > C(+" << m << ") fails; ";
        }
    }
    const double smallest = paired_magnitudes(cfg.rho_grid).front();
    const double gap = point_at(result.curve, -smallest)->value - point_at(result.curve, smallest)->value;
    ok = ok && std::fabs(gap - 0.07) <= 0.03;
    d << "gap at |rho|=" << smallest << ": " << fmt("%.4f", gap) << "; ";
    for (const auto& lc : result.levels) {
        if (lc.abs_level != 0.03 && lc.abs_level != 0.05 && lc.abs_level != 0.10) continue;
        const bool neg = lc.pair_test && lc.pair_test->z < 0 && lc.ct_test && lc.ct_test->z < 0;
        ok = ok && neg;
        d << "z(" << lc.abs_level << ") pairs " << (lc.pair_test ? fmt("%.2f", lc.pair_test->z) : "NA") << ", C_t "
          << (lc.ct_test ? fmt("%.2f", lc.ct_test->z) : "NA") << "; ";
    }
    return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"oracle equivalence on random panels", oracle_equivalence},
        {"rank-sum test against exact enumeration", wilcoxon_correctness},
        {"fear-factor positive control", fear_positive_control},
        {"null control over 20 seeds", null_control},
        {"waiting-time tail exponent", tail_exponent},
        {"invariant suites", invariant_suites},
        {"DJIA conditional correlation reproduction", djia_reproduction},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {Outcome::Fail, std::string("threw: ") + e.what()};
        }
        const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Skip ? "SKIP" : "FAIL";
        std::printf("[%s] criterion %d: %s -- %s\n", tag, id, criteria[i].first, v.detail.c_str());
        std::fflush(stdout);
        failures += v.outcome == Outcome::Fail;
    }
    return failures == 0 ? 0 : 1;
}
