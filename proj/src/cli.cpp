#include "tsbubble/cli.hpp"

#include <cmath>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "tsbubble/adf_stats.hpp"
#include "tsbubble/errors.hpp"
#include "tsbubble/io.hpp"

namespace tsbubble::cli {

namespace {

constexpr std::size_t kMinObservations = 21;

const NullDistribution& null_for(std::optional<CachedNull>& slot, const TestCommandOptions& options, NullFamily family,
                                 std::ostream& log) {
    if (!slot) {
        const bool generalized = family == NullFamily::GsadfGls || family == NullFamily::GsadfOls;
        NullSimulationOptions sim = generalized ? options.null_gsadf : options.null_sadf;
        sim.threads = options.threads;
        slot = load_or_simulate_null(options.cache_dir, family, options.r0, sim, options.force);
        log << fmt::format("null distribution {} (r0={:g}, N={}, R={}): {}\n", to_string(family), options.r0,
                           sim.steps, sim.replications, slot->from_cache ? "cache" : "simulated");
    }
    return slot->dist;
}

}  // namespace

TestReport cmd_test(const TestCommandOptions& options, std::ostream& log) {
    if (options.tests.empty()) throw InvalidSpecError("no tests selected");
    TimeSeries series = read_csv_series(options.input, options.date_col, options.value_col);
    if (options.log_levels) {
        for (double& v : series.values) {
            if (!(v > 0.0)) throw InvalidSpecError("--log requires strictly positive values");
            v = std::log(v);
        }
    }
    if (series.values.size() < kMinObservations) {
        throw LengthError(fmt::format("series has {} observations; at least {} are required", series.values.size(),
                                      kMinObservations));
    }
    const std::span<const double> y = series.values;
    const std::size_t T = y.size() - 1;

    TestReport report;
    report.series = series.name;
    report.observations = y.size();
    report.r0 = options.r0;

    StadfOptions stadf_options;
    stadf_options.fit.kernel = options.kernel;
    std::optional<TimeTransform> tt;
    auto transform_once = [&]() -> const TimeTransform& {
        if (!tt) tt = time_transform(y, stadf_options);
        return *tt;
    };

    std::optional<CachedNull> nulls[4];
    auto dist_for = [&](NullFamily f) -> const NullDistribution& {
        return null_for(nulls[static_cast<int>(f)], options, f, log);
    };

    for (TestKind kind : options.tests) {
        ReportRow row;
        row.test = kind;
        TestResult res;
        std::span<const std::size_t> index_map;
        switch (kind) {
            case TestKind::SADF:
                res = sadf(y, options.r0, Demeaning::OLS);
                row.p_value = p_value(dist_for(NullFamily::SadfOls), res.statistic);
                break;
            case TestKind::GSADF:
                res = gsadf(y, options.r0, Demeaning::OLS);
                row.p_value = p_value(dist_for(NullFamily::GsadfOls), res.statistic);
                break;
            case TestKind::SADF_b: {
                res = sadf(y, options.r0, Demeaning::OLS);
                const BootstrapResult b = wild_bootstrap_sadf(y, options.r0, options.B, options.seed);
                row.p_value = b.p_value;
                break;
            }
            case TestKind::STADF:
            case TestKind::GSTADF: {
                const TimeTransform& t = transform_once();
                const bool generalized = kind == TestKind::GSTADF;
                res = sup_tadf(t.transformed.values, t.omega_bar_sq, options.r0, generalized);
                row.p_value =
                    p_value(dist_for(generalized ? NullFamily::GsadfGls : NullFamily::SadfGls), res.statistic);
                index_map = t.transformed.index_map;
                break;
            }
        }
        row.statistic = res.statistic;
        row.r1 = res.r1;
        row.r2 = res.r2;
        // The window covers observations start+1..end; transformed windows
        // are mapped back to source observations.
        const std::size_t first = std::min(T, res.start_index + 1);
        const std::size_t last = res.end_index;
        row.window_start = series.label(index_map.empty() ? first : index_map[first]);
        row.window_end = series.label(index_map.empty() ? last : index_map[last]);
        report.rows.push_back(row);
    }

    // report.csv
    std::string csv = "series,test,statistic,p_value,window_start,window_end,r1,r2,r0,observations\n";
    for (const auto& r : report.rows) {
        csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", report.series, to_string(r.test),
                           format_double(r.statistic), format_double(r.p_value), r.window_start, r.window_end,
                           format_double(r.r1), format_double(r.r2), format_double(options.r0), report.observations);
    }
    std::string summary = "series";
    for (const auto& r : report.rows) summary += "," + to_string(r.test);
    summary += "\n" + report.series;
    for (const auto& r : report.rows) summary += fmt::format(",{:.3f}", r.p_value);
    summary += "\n";

    const auto& out = options.out;
    auto emit = [&](const std::string& name, const std::string& content) {
        write_text_file(out / name, content);
        report.files.push_back(out / name);
    };
    if (options.formats.count("csv")) {
        emit("report.csv", csv);
        emit("summary.csv", summary);
    }

    std::optional<VarianceProfile> profile;
    try {
        profile = transform_once().profile;
    } catch (const DegenerateError& e) {
        log << "variance profile unavailable: " << e.what() << "\n";
    }
    if (profile && options.formats.count("csv")) {
        std::string pcsv = "s,eta\n";
        for (const auto& [s, eta] : profile->knots()) pcsv += format_double(s) + "," + format_double(eta) + "\n";
        emit("profile.csv", pcsv);
    }

    if (options.formats.count("json")) {
        nlohmann::json j;
        j["series"] = report.series;
        j["observations"] = report.observations;
        j["r0"] = options.r0;
        for (const auto& r : report.rows) {
            j["tests"].push_back({{"test", to_string(r.test)},
                                  {"statistic", r.statistic},
                                  {"p_value", r.p_value},
                                  {"window_start", r.window_start},
                                  {"window_end", r.window_end},
                                  {"r1", r.r1},
                                  {"r2", r.r2}});
        }
        if (profile) {
            j["omega_bar_sq"] = transform_once().omega_bar_sq;
        }
        emit("report.json", j.dump(2) + "\n");
    }

    if (options.formats.count("svg")) {
        std::vector<double> idx(y.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i);
        emit("series.svg", line_chart_svg(idx, y, report.series, "observation", "value"));
        if (profile) {
            std::vector<double> s, eta;
            for (const auto& [a, b] : profile->knots()) {
                s.push_back(a);
                eta.push_back(b);
            }
            emit("profile.svg", line_chart_svg(s, eta, report.series + ": estimated variance profile", "s", "eta(s)"));
        }
    }

    log << fmt::format("{} ({} observations, r0 = {:g})\n", report.series, report.observations, options.r0);
    log << fmt::format("{:<8}{:>14}{:>10}  {}\n", "test", "statistic", "p-value", "window");
    for (const auto& r : report.rows) {
        log << fmt::format("{:<8}{:>14.4f}{:>10.3f}  {} .. {}\n", to_string(r.test), r.statistic, r.p_value,
                           r.window_start, r.window_end);
    }
    return report;
}

std::vector<std::filesystem::path> cmd_simulate(const SimulateCommandOptions& options, std::ostream& log) {
    ExperimentConfig config = read_experiment_config(options.config);
    if (options.full_scale) config.replications = 1000;
    config.threads = options.threads;
    config.cache_dir = options.cache_dir;

    std::vector<std::filesystem::path> files;
    if (options.timing) {
        const auto rows = run_timing(config.T_list, config.tests, options.timing_repetitions, config.bootstrap_B,
                                     config.master_seed);
        const std::string csv = timing_csv(rows);
        write_text_file(options.out / "timing.csv", csv);
        files.push_back(options.out / "timing.csv");
        log << csv;
        return files;
    }
    const RejectionTable table = run_experiment(config);
    write_text_file(options.out / "rejections.csv", rejection_csv(table));
    const std::string text = rejection_text(table, config);
    write_text_file(options.out / "rejections.txt", text);
    files = {options.out / "rejections.csv", options.out / "rejections.txt"};
    log << text << fmt::format("runtime: {:.1f} s\n", table.runtime_seconds);
    return files;
}

CachedNull cmd_critvals(const CritvalsCommandOptions& options, std::ostream& log) {
    CachedNull c = load_or_simulate_null(options.cache_dir, options.family, options.r0, options.sim, options.force);
    log << fmt::format("family {} r0={:g} N={} R={} seed={} ({})\n", to_string(options.family), options.r0,
                       options.sim.steps, options.sim.replications, options.sim.seed,
                       c.from_cache ? "loaded from cache" : "simulated");
    log << fmt::format("10%: {:.3f}\n5%: {:.3f}\n1%: {:.3f}\n", c.dist.critical_value(0.10),
                       c.dist.critical_value(0.05), c.dist.critical_value(0.01));
    log << "cache: " << c.path.string() << "\n";
    return c;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Explosive-episode tests under non-stationary volatility"};
    app.require_subcommand(1);

    TestCommandOptions test_opts;
    std::vector<std::string> test_names{"sadf", "sadf_b", "stadf"};
    std::vector<std::string> formats{"csv"};
    std::string kernel_name = "uniform";
    std::string cache_dir = default_cache_dir().string();
    auto* test_cmd = app.add_subcommand("test", "Run bubble tests on a CSV series");
    test_cmd->add_option("--input", test_opts.input, "CSV file with a header row")->required();
    test_cmd->add_option("--date-col", test_opts.date_col, "Date column name");
    test_cmd->add_option("--value-col", test_opts.value_col, "Value column name (default: last column)");
    test_cmd->add_option("--tests", test_names, "Comma-separated: sadf,sadf_b,stadf,gsadf,gstadf")->delimiter(',');
    test_cmd->add_option("--r0", test_opts.r0, "Minimum window fraction");
    test_cmd->add_option("--B", test_opts.B, "Bootstrap replications");
    test_cmd->add_option("--seed", test_opts.seed, "Bootstrap seed");
    test_cmd->add_option("--threads", test_opts.threads, "Worker threads (0: default)");
    test_cmd->add_option("--out", test_opts.out, "Output directory");
    test_cmd->add_option("--format", formats, "Comma-separated: csv,json,svg")->delimiter(',');
    test_cmd->add_flag("--force", test_opts.force, "Re-simulate null distributions");
    test_cmd->add_flag("--log", test_opts.log_levels, "Test log levels");
    test_cmd->add_option("--kernel", kernel_name, "uniform or gaussian");
    test_cmd->add_option("--null-steps", test_opts.null_sadf.steps, "Steps per simulated SADF-family null path");
    test_cmd->add_option("--null-reps", test_opts.null_sadf.replications, "SADF-family null replications");
    test_cmd->add_option("--gsadf-null-steps", test_opts.null_gsadf.steps, "Steps per GSADF-family null path");
    test_cmd->add_option("--gsadf-null-reps", test_opts.null_gsadf.replications, "GSADF-family null replications");
    test_cmd->add_option("--cache-dir", cache_dir, "Null-distribution cache (default $TSBUBBLE_CACHE_DIR)");

    SimulateCommandOptions sim_opts;
    auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo experiment from a config file");
    sim_cmd->add_option("--config", sim_opts.config, "JSON experiment config")->required();
    sim_cmd->add_option("--out", sim_opts.out, "Output directory");
    sim_cmd->add_flag("--timing", sim_opts.timing, "Time the tests instead of computing rejection rates");
    sim_cmd->add_option("--timing-reps", sim_opts.timing_repetitions, "Repetitions per timing cell");
    sim_cmd->add_flag("--full-scale", sim_opts.full_scale, "Use 1000 replications");
    sim_cmd->add_option("--threads", sim_opts.threads, "Worker threads (0: default)");
    sim_cmd->add_option("--cache-dir", cache_dir, "Null-distribution cache (default $TSBUBBLE_CACHE_DIR)");

    CritvalsCommandOptions cv_opts;
    std::string family_name = "sadf_gls";
    auto* cv_cmd = app.add_subcommand("critvals", "Simulate asymptotic critical values");
    cv_cmd->add_option("--family", family_name, "sadf_gls, gsadf_gls, sadf_ols or gsadf_ols");
    cv_cmd->add_option("--r0", cv_opts.r0, "Minimum window fraction");
    cv_cmd->add_option("--N,--steps", cv_opts.sim.steps, "Random-walk steps per path");
    cv_cmd->add_option("--R,--reps", cv_opts.sim.replications, "Replications");
    cv_cmd->add_option("--seed", cv_opts.sim.seed, "Master seed");
    cv_cmd->add_option("--threads", cv_opts.sim.threads, "Worker threads (0: default)");
    cv_cmd->add_flag("--force", cv_opts.force, "Ignore an existing cache file");
    cv_cmd->add_option("--cache-dir", cache_dir, "Null-distribution cache (default $TSBUBBLE_CACHE_DIR)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*test_cmd) {
            test_opts.tests.clear();
            for (const auto& n : test_names) test_opts.tests.push_back(test_kind_from_string(n));
            test_opts.formats = std::set<std::string>(formats.begin(), formats.end());
            for (const auto& f : test_opts.formats) {
                if (f != "csv" && f != "json" && f != "svg") throw InvalidSpecError("unknown format '" + f + "'");
            }
            test_opts.kernel = kernel_from_string(kernel_name);
            test_opts.cache_dir = cache_dir;
            cmd_test(test_opts, out);
        } else if (*sim_cmd) {
            sim_opts.cache_dir = cache_dir;
            cmd_simulate(sim_opts, out);
        } else if (*cv_cmd) {
            cv_opts.family = null_family_from_string(family_name);
            cv_opts.cache_dir = cache_dir;
            cmd_critvals(cv_opts, out);
        }
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kParse;
    } catch (const LengthError& e) {
        err << "precondition failed: " << e.what() << "\n";
        return kPrecondition;
    } catch (const InvalidSpecError& e) {
        err << "invalid input: " << e.what() << "\n";
        return kUsage;
    } catch (const DegenerateError& e) {
        err << "degenerate statistic: " << e.what() << "\n";
        return kDegenerate;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInternal;
    }
    return kOk;
}

}  // namespace tsbubble::cli
