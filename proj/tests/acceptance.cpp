// Acceptance gate: one PASS/FAIL line per criterion.
//
//   tsbubble_acceptance [--criterion N] [--data-dir DIR] [--cache-dir DIR] [--threads K]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "oracles.hpp"
#include "tsbubble/adf_stats.hpp"
#include "tsbubble/cli.hpp"
#include "tsbubble/dgp.hpp"
#include "tsbubble/inference.hpp"
#include "tsbubble/montecarlo.hpp"
#include "tsbubble/variance_profile.hpp"

using namespace tsbubble;
namespace fs = std::filesystem;

namespace {

struct Context {
    fs::path data_dir;
    fs::path cache_dir;
    int threads = 0;
};

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    std::function<Outcome(const Context&)> run;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

double diff_se(const RejectionCell& a, const RejectionCell& b) {
    auto var = [](const RejectionCell& c) {
        return c.frequency * (1.0 - c.frequency) / static_cast<double>(std::max<std::size_t>(c.valid, 1));
    };
    return std::sqrt(var(a) + var(b));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> scaled(std::span<const double> y, double c) {
    std::vector<double> out(y.begin(), y.end());
    for (double& v : out) v *= c;
    return out;
}

ExperimentConfig size_power_config(const Context& ctx) {
    ExperimentConfig c;
    c.T_list = {200};
    c.delta1_grid = {0.0, 0.1};
    c.vol_specs = {VolatilitySpec{},
                   VolatilitySpec{VolatilityKind::SingleShift, 1.0, 3.0, 0.5},
                   VolatilitySpec{VolatilityKind::SingleShift, 1.0, 1.0 / 3.0, 0.5}};
    c.tests = {TestKind::SADF, TestKind::STADF};
    c.replications = 1000;
    c.null_sadf = {2000, 100000, 20240101, ctx.threads};
    c.cache_dir = ctx.cache_dir;
    c.threads = ctx.threads;
    return c;
}

Outcome critical_values(const Context& ctx) {
    cli::CritvalsCommandOptions o;
    o.family = NullFamily::SadfGls;
    o.r0 = 0.1;
    o.sim = {2000, 100000, 20240101, ctx.threads};
    o.force = true;
    o.cache_dir = ctx.cache_dir;
    std::ostringstream log;
    const auto t0 = std::chrono::steady_clock::now();
    const CachedNull c = cli::cmd_critvals(o, log);
    const double secs = seconds_since(t0);
    const double q[3] = {c.dist.critical_value(0.10), c.dist.critical_value(0.05), c.dist.critical_value(0.01)};
    const double ref[3] = {2.319, 2.626, 3.223};
    bool pass = secs < 120.0;
    for (int i = 0; i < 3; ++i) pass = pass && within(q[i], ref[i], 0.05);
    return {pass, fmt::format("10/5/1% = {:.3f}/{:.3f}/{:.3f} vs {}/{}/{} (tol 0.05), runtime {:.1f} s (limit 120 s)",
                              q[0], q[1], q[2], ref[0], ref[1], ref[2], secs)};
}

Outcome homoskedastic_size(const Context& ctx) {
    const ExperimentConfig c = size_power_config(ctx);
    ExperimentConfig run = c;
    run.vol_specs = {c.vol_specs[0]};
    run.delta1_grid = {0.0};
    const RejectionTable t = run_experiment(run);
    const double stadf_f = t.at(0, 0.0, 200, TestKind::STADF, run).frequency;
    const double sadf_f = t.at(0, 0.0, 200, TestKind::SADF, run).frequency;
    return {within(stadf_f, 0.049, 0.02) && within(sadf_f, 0.033, 0.02),
            fmt::format("T=200, 1000 reps: STADF {:.3f} (0.049 +/- 0.02), SADF {:.3f} (0.033 +/- 0.02)", stadf_f,
                        sadf_f)};
}

Outcome robustness_headline(const Context& ctx) {
    ExperimentConfig run = size_power_config(ctx);
    run.vol_specs = {run.vol_specs[1]};
    run.delta1_grid = {0.0};
    const RejectionTable t = run_experiment(run);
    const double sadf_f = t.at(0, 0.0, 200, TestKind::SADF, run).frequency;
    const double stadf_f = t.at(0, 0.0, 200, TestKind::STADF, run).frequency;
    return {within(sadf_f, 0.366, 0.04) && within(stadf_f, 0.063, 0.02),
            fmt::format("single shift x3, T=200, 1000 reps: SADF {:.3f} (0.366 +/- 0.04), STADF {:.3f} "
                        "(0.063 +/- 0.02)",
                        sadf_f, stadf_f)};
}

Outcome power_cell(const Context& ctx) {
    ExperimentConfig run = size_power_config(ctx);
    run.vol_specs = {run.vol_specs[2]};
    run.delta1_grid = {0.1};
    run.tests = {TestKind::STADF};
    const RejectionTable t = run_experiment(run);
    const double f = t.at(0, 0.1, 200, TestKind::STADF, run).frequency;
    return {within(f, 0.968, 0.02),
            fmt::format("single shift x1/3, delta1=0.1, T=200, 1000 reps: STADF {:.3f} (0.968 +/- 0.02)", f)};
}

Outcome monotonicity_consistency(const Context& ctx) {
    ExperimentConfig c;
    c.T_list = {100, 200};
    c.delta1_grid = {0.0, 0.02, 0.04, 0.06, 0.08, 0.10};
    c.vol_specs = {VolatilitySpec{VolatilityKind::SingleShift, 1.0, 3.0, 0.5},
                   VolatilitySpec{VolatilityKind::DoubleShift, 1.0, 3.0, 0.5},
                   VolatilitySpec{VolatilityKind::LogisticTransition, 1.0, 1.0 / 3.0, 0.5},
                   VolatilitySpec{VolatilityKind::Trending, 1.0, 3.0, 0.5}};
    c.tests = {TestKind::SADF, TestKind::SADF_b, TestKind::STADF};
    c.replications = 500;
    c.bootstrap_B = 199;
    c.null_sadf = {2000, 100000, 20240101, ctx.threads};
    c.cache_dir = ctx.cache_dir;
    c.threads = ctx.threads;
    const RejectionTable t = run_experiment(c);

    std::size_t checks = 0, violations = 0, invalid = 0;
    std::string first;
    for (const auto& cell : t.cells) invalid += cell.invalid ? 1 : 0;
    for (std::size_t v = 0; v < c.vol_specs.size(); ++v) {
        for (TestKind k : c.tests) {
            for (std::size_t T : c.T_list) {
                for (std::size_t i = 0; i < c.delta1_grid.size(); ++i) {
                    for (std::size_t j = i + 1; j < c.delta1_grid.size(); ++j) {
                        const auto& lo = t.at(v, c.delta1_grid[i], T, k, c);
                        const auto& hi = t.at(v, c.delta1_grid[j], T, k, c);
                        ++checks;
                        if (hi.frequency < lo.frequency - 2.0 * diff_se(lo, hi)) {
                            if (violations++ == 0) {
                                first = fmt::format("; first: {} {} T={} delta {} -> {}: {:.3f} -> {:.3f}",
                                                    c.vol_specs[v].label(), to_string(k), T, lo.delta1, hi.delta1,
                                                    lo.frequency, hi.frequency);
                            }
                        }
                    }
                }
            }
            const auto& small = t.at(v, 0.1, 100, k, c);
            const auto& large = t.at(v, 0.1, 200, k, c);
            ++checks;
            if (large.frequency < small.frequency - 2.0 * diff_se(small, large)) {
                if (violations++ == 0) {
                    first = fmt::format("; first: {} {} delta 0.1 T=100 -> 200: {:.3f} -> {:.3f}",
                                        c.vol_specs[v].label(), to_string(k), small.frequency, large.frequency);
                }
            }
        }
    }
    return {violations == 0 && invalid == 0,
            fmt::format("4 volatility models x 3 tests, 500 reps: {} of {} monotonicity/consistency checks violated, "
                        "{} invalid cells{}",
                        violations, checks, invalid, first)};
}

Outcome exact_identities(const Context&) {
    const double eps = std::numeric_limits<double>::epsilon();
    std::size_t checks = 0, failures = 0;
    std::vector<std::string> failed;
    auto check = [&](bool ok, const std::string& what) {
        ++checks;
        if (!ok) {
            ++failures;
            if (std::find(failed.begin(), failed.end(), what) == failed.end()) failed.push_back(what);
        }
    };

    // Telescoping: sum (y_{t-1} - y_0) dy_t = ((y_b - y_0)^2 - (y_a - y_0)^2 - sum dy_t^2) / 2.
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto y = oracle::random_walk(80, seed + 900, 1.0 + static_cast<double>(seed));
        const std::size_t a = seed % 30, b = 40 + seed % 41;
        double lhs = 0.0, sq = 0.0, mag = 0.0;
        for (std::size_t t = a + 1; t <= b; ++t) {
            const double x = y[t - 1] - y[0], d = y[t] - y[t - 1];
            lhs += x * d;
            sq += d * d;
            mag += std::abs(x * d) + d * d;
        }
        const double ya = y[a] - y[0], yb = y[b] - y[0];
        mag += ya * ya + yb * yb;
        check(std::abs(lhs - 0.5 * (yb * yb - ya * ya - sq)) <= 64 * eps * mag, "telescoping");
    }

    // Scale invariance of TADF and of the full STADF pipeline.
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto y = oracle::random_walk(60, seed + 4);
        std::vector<double> yt(y.size());
        for (std::size_t t = 0; t < y.size(); ++t) yt[t] = y[t] - y[0];
        for (double c : {0.5, 16.0}) {
            const auto yc = scaled(yt, c);
            check(tadf_window_indices(yc, c * c * 1.7, 5, 50) == tadf_window_indices(yt, 1.7, 5, 50), "tadf scale");
            check(sup_tadf(yc, c * c * 1.3, 0.1, true).statistic == sup_tadf(yt, 1.3, 0.1, true).statistic,
                  "sup_tadf scale");
        }
        DgpSpec spec;
        spec.length = 120;
        spec.seed = seed + 12;
        spec.vol = VolatilitySpec{VolatilityKind::SingleShift, 1.0, 3.0, 0.5};
        const auto path = simulate(spec);
        const double base = stadf(path, 0.1).statistic;
        for (double c : {0.25, 32.0}) check(stadf(scaled(path, c), 0.1).statistic == base, "stadf scale");
    }

    // Identity profile reduces the transform to y_t - y_0.
    {
        const auto y = oracle::random_walk(50, 3);
        const auto p = VarianceProfile::from_residuals(std::vector<double>(50, 2.5));
        const TransformedSeries tr = transform(y, p);
        for (std::size_t t = 0; t < y.size(); ++t) {
            check(tr.index_map[t] == t && tr.values[t] == y[t] - y[0], "identity transform");
        }
    }

    // Galois property of the profile and its inverse.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed + 100);
        std::vector<double> e(41);
        for (double& v : e) v = rng.uniform() < 0.25 ? 0.0 : rng.normal();
        e.front() = 1.0;
        const auto p = VarianceProfile::from_residuals(e);
        for (int i = 0; i <= 997; ++i) {
            const double s = i / 997.0;
            check(p.eta(p.inverse(s)) >= s - 1e-14, "galois eta(ghat(s)) >= s");
        }
        const auto knots = p.knots();
        for (std::size_t t = 0; t < knots.size(); ++t) {
            if (knots[t].second == 1.0) continue;
            const double back = p.inverse(knots[t].second);
            check(back <= knots[t].first + 1e-14, "galois ghat(eta(s)) <= s");
            if (t > 0 && knots[t].second > knots[t - 1].second) {
                check(std::abs(back - knots[t].first) <= 1e-14, "galois equality where increasing");
            }
        }
    }

    // Hand-computed profile for residuals (1, 1, 2, 2).
    {
        const auto p = VarianceProfile::from_residuals(std::vector<double>{1, 1, 2, 2});
        const double s[] = {0.0, 0.25, 0.5, 0.75, 1.0, 0.375};
        const double eta[] = {0.0, 0.1, 0.2, 0.6, 1.0, 0.15};
        for (int i = 0; i < 6; ++i) check(std::abs(p.eta(s[i]) - eta[i]) <= 4 * eps, "hand eta");
        check(p.omega_bar_sq() == 2.5, "hand omega_bar_sq");
        check(std::abs(p.inverse(0.2) - 0.5) <= 4 * eps, "hand inverse");
    }

    std::string detail = fmt::format("{} checks, {} failures", checks, failures);
    for (const auto& f : failed) detail += " [" + f + "]";
    return {failures == 0, detail};
}

Outcome oracle_equivalence(const Context&) {
    const double tol = 1e-10;
    double worst = 0.0;
    std::size_t checks = 0, failures = 0;
    std::string first;
    auto compare = [&](double got, double want, bool same_window, const std::string& what) {
        ++checks;
        const double d = oracle::rel_diff(got, want);
        worst = std::max(worst, d);
        if (d > tol || !same_window) {
            if (failures++ == 0) first = fmt::format("; first: {} {} vs {}", what, got, want);
        }
    };
    for (std::uint64_t i = 0; i < 20; ++i) {
        const std::size_t T = 30 + (i * 7) % 31;
        const auto y = oracle::random_walk(T, 5000 + i, 0.5 + static_cast<double>(i % 4));
        const double r0 = 0.2;
        const std::string tag = fmt::format("series {} (T={})", i, T);

        for (std::size_t m1 : {std::size_t{0}, T / 4}) {
            for (std::size_t m2 : {T / 2 + 3, T}) {
                for (bool ols : {true, false}) {
                    const auto want = oracle::adf(y, m1, m2, ols);
                    if (!want) continue;
                    compare(adf_window_indices(y, m1, m2, ols ? Demeaning::OLS : Demeaning::GLS), *want, true,
                            tag + " adf_window");
                }
            }
        }
        for (bool generalized : {false, true}) {
            for (bool ols : {true, false}) {
                const auto want = oracle::sup_adf(y, r0, ols, generalized);
                const Demeaning dm = ols ? Demeaning::OLS : Demeaning::GLS;
                const TestResult got = generalized ? gsadf(y, r0, dm) : sadf(y, r0, dm);
                compare(got.statistic, want.value, got.start_index == want.m1 && got.end_index == want.m2,
                        tag + (generalized ? " gsadf" : " sadf"));
            }
            const auto want = oracle::stadf(y, r0, generalized);
            const TestResult got = generalized ? gstadf(y, r0) : stadf(y, r0);
            compare(got.statistic, want.value, got.start_index == want.m1 && got.end_index == want.m2,
                    tag + (generalized ? " gstadf" : " stadf"));
        }
    }
    return {failures == 0, fmt::format("20 series, T in [30, 60]: {} comparisons, {} failures, max rel diff {:.2e} "
                                       "(tol 1e-10){}",
                                       checks, failures, worst, first)};
}

Outcome timing_ordering(const Context&) {
    const std::size_t B = 199;
    const auto rows = run_timing({100, 200, 400}, {TestKind::SADF, TestKind::STADF, TestKind::SADF_b}, 25, B);
    bool pass = true;
    std::string detail;
    for (std::size_t T : {100u, 200u, 400u}) {
        double s = 0, st = 0, sb = 0;
        for (const auto& r : rows) {
            if (r.T != T) continue;
            (r.test == TestKind::SADF ? s : r.test == TestKind::STADF ? st : sb) = r.median_seconds;
        }
        pass = pass && s <= st && st < sb;
        detail += fmt::format("{}T={}: SADF {:.2e} s, STADF {:.2e} s, SADF_b {:.2e} s (SADF_b/SADF {:.0f}, B+1 = {})",
                              detail.empty() ? "" : "; ", T, s, st, sb, sb / s, B + 1);
    }
    return {pass, detail};
}

Outcome golden_determinism(const Context& ctx) {
    const fs::path fixture = ctx.data_dir / "fixture_series.csv";
    const fs::path golden = ctx.data_dir / "golden";
    const fs::path work = fs::temp_directory_path() / "tsbubble_acceptance_golden";
    fs::remove_all(work);
    auto run = [&](const std::string& out) {
        std::vector<std::string> args{"tsbubble",
                                      "test",
                                      "--input",
                                      fixture.string(),
                                      "--date-col",
                                      "date",
                                      "--tests",
                                      "sadf,sadf_b,stadf,gsadf,gstadf",
                                      "--r0",
                                      "0.1",
                                      "--B",
                                      "99",
                                      "--seed",
                                      "42",
                                      "--null-steps",
                                      "500",
                                      "--null-reps",
                                      "2000",
                                      "--gsadf-null-steps",
                                      "200",
                                      "--gsadf-null-reps",
                                      "1000",
                                      "--format",
                                      "csv,json",
                                      "--cache-dir",
                                      (work / "cache").string(),
                                      "--out",
                                      (work / out).string()};
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        std::ostringstream sink;
        return cli::run(static_cast<int>(argv.size()), argv.data(), sink, sink);
    };
    // The first run simulates the null distributions, the second reads them back.
    const int c1 = run("first");
    const int c2 = run("second");
    if (c1 != 0 || c2 != 0) return {false, fmt::format("cli exit codes {} and {}", c1, c2)};
    std::size_t mismatches = 0;
    std::string which;
    for (const char* f : {"report.csv", "summary.csv", "profile.csv", "report.json"}) {
        const std::string a = slurp(work / "first" / f);
        const std::string b = slurp(work / "second" / f);
        const std::string g = slurp(golden / f);
        if (a != b || a != g || g.empty()) {
            ++mismatches;
            which += std::string(" ") + f;
        }
    }
    return {mismatches == 0,
            fmt::format("historical btc window not shipped; golden-file check on fixture_series.csv: 4 files, "
                        "{} mismatching{}",
                        mismatches, which)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    int only = 0;
    Context ctx;
    ctx.data_dir = fs::path(TSBUBBLE_TEST_DATA_DIR);
    std::string cache_dir = (fs::temp_directory_path() / "tsbubble_acceptance_cache").string();
    app.add_option("--criterion", only, "Run a single criterion (1-9)");
    app.add_option("--data-dir", ctx.data_dir, "Directory with fixture_series.csv and golden/");
    app.add_option("--cache-dir", cache_dir, "Null-distribution cache");
    app.add_option("--threads", ctx.threads, "Worker threads (0: default)");
    CLI11_PARSE(app, argc, argv);
    ctx.cache_dir = cache_dir;

    const std::vector<Criterion> criteria{
        {1, "critical values", critical_values},
        {2, "homoskedastic size", homoskedastic_size},
        {3, "robustness headline", robustness_headline},
        {4, "power cell", power_cell},
        {5, "power monotonicity and T-consistency", monotonicity_consistency},
        {6, "exact identities", exact_identities},
        {7, "oracle equivalence", oracle_equivalence},
        {8, "timing ordering", timing_ordering},
        {9, "golden-file determinism", golden_determinism},
    };
    bool all = true;
    bool ran = false;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        ran = true;
        Outcome o;
        try {
            o = c.run(ctx);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::cout << fmt::format("criterion {} ({}): {} | {}", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail)
                  << std::endl;
    }
    if (!ran) {
        std::cerr << "unknown criterion " << only << "\n";
        return 2;
    }
    return all ? 0 : 1;
}
