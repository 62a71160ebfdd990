#include "tsbubble/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include <fmt/format.h>

#include "tsbubble/adf_stats.hpp"
#include "tsbubble/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tsbubble {

namespace {

constexpr std::uint64_t kBootstrapStream = 0xb0075712a9ULL;

enum class Outcome : unsigned char { Accept, Reject, Failed };

int thread_count(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

bool is_bootstrap(TestKind k) { return k == TestKind::SADF_b; }

std::pair<TestFamily, Demeaning> family_of(TestKind k) {
    switch (k) {
        case TestKind::SADF:
        case TestKind::SADF_b: return {TestFamily::SADF, Demeaning::OLS};
        case TestKind::GSADF: return {TestFamily::GSADF, Demeaning::OLS};
        case TestKind::STADF: return {TestFamily::STADF, Demeaning::GLS};
        case TestKind::GSTADF: return {TestFamily::GSTADF, Demeaning::GLS};
    }
    return {TestFamily::SADF, Demeaning::OLS};
}

double statistic_of(TestKind k, std::span<const double> y, double r0, const StadfOptions& stadf_options) {
    switch (k) {
        case TestKind::SADF:
        case TestKind::SADF_b: return sadf(y, r0, Demeaning::OLS).statistic;
        case TestKind::GSADF: return gsadf(y, r0, Demeaning::OLS).statistic;
        case TestKind::STADF: return stadf(y, r0, stadf_options).statistic;
        case TestKind::GSTADF: return gstadf(y, r0, stadf_options).statistic;
    }
    return 0.0;
}

std::vector<double> random_walk(std::size_t T, std::uint64_t seed) {
    DgpSpec spec;
    spec.length = T;
    spec.seed = seed;
    return simulate(spec);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string to_string(TestKind kind) {
    switch (kind) {
        case TestKind::SADF: return "SADF";
        case TestKind::SADF_b: return "SADF_b";
        case TestKind::STADF: return "STADF";
        case TestKind::GSADF: return "GSADF";
        case TestKind::GSTADF: return "GSTADF";
    }
    return "unknown";
}

TestKind test_kind_from_string(const std::string& name) {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "sadf") return TestKind::SADF;
    if (s == "sadf_b") return TestKind::SADF_b;
    if (s == "stadf") return TestKind::STADF;
    if (s == "gsadf") return TestKind::GSADF;
    if (s == "gstadf") return TestKind::GSTADF;
    throw InvalidSpecError("unknown test '" + name + "'");
}

double ExperimentConfig::r0_for(std::size_t T) const { return r0_fixed ? *r0_fixed : default_r0(T); }

void ExperimentConfig::validate() const {
    if (T_list.empty()) throw InvalidSpecError("experiment needs at least one sample size");
    if (delta1_grid.empty()) throw InvalidSpecError("experiment needs at least one bubble magnitude");
    if (vol_specs.empty()) throw InvalidSpecError("experiment needs at least one volatility model");
    if (tests.empty()) throw InvalidSpecError("experiment needs at least one test");
    if (replications < 100) throw InvalidSpecError("experiment needs at least 100 replications");
    if (!(level > 0.0 && level < 1.0)) throw InvalidSpecError("level must lie in (0, 1)");
    for (std::size_t T : T_list) {
        if (T < 20) throw InvalidSpecError("sample sizes must be at least 20");
        (void)min_window(r0_for(T), T);
    }
    for (const auto& v : vol_specs) v.validate();
    for (double d : delta1_grid) {
        BubbleSpec b{tau1, tau2, tau2, d, 0.0, 0.0};
        b.validate();
    }
    if (bootstrap_B < 1) throw InvalidSpecError("bootstrap needs at least one replication");
}

const RejectionCell& RejectionTable::at(std::size_t vol_index, double delta1, std::size_t T, TestKind test,
                                        const ExperimentConfig& config) const {
    const auto di = std::find(config.delta1_grid.begin(), config.delta1_grid.end(), delta1);
    const auto ti = std::find(config.T_list.begin(), config.T_list.end(), T);
    const auto ki = std::find(config.tests.begin(), config.tests.end(), test);
    if (di == config.delta1_grid.end() || ti == config.T_list.end() || ki == config.tests.end() ||
        vol_index >= config.vol_specs.size()) {
        throw InvalidSpecError("cell not in the experiment grid");
    }
    const std::size_t nd = config.delta1_grid.size();
    const std::size_t nt = config.T_list.size();
    const std::size_t nk = config.tests.size();
    const auto d = static_cast<std::size_t>(di - config.delta1_grid.begin());
    const auto t = static_cast<std::size_t>(ti - config.T_list.begin());
    const auto k = static_cast<std::size_t>(ki - config.tests.begin());
    return cells.at(((vol_index * nd + d) * nt + t) * nk + k);
}

std::uint64_t path_seed(const ExperimentConfig& config, const VolatilitySpec& vol, double delta1, std::size_t T,
                        std::size_t replication) {
    const std::string descriptor =
        fmt::format("{}|{:.17g}|{:.17g}|{:.17g}|{:.17g}|{}|{:.17g}|{:.17g}", to_string(vol.kind), vol.sigma0,
                    vol.sigma1, vol.tau_sigma, delta1, T, config.tau1, config.tau2);
    return derive_seed(derive_seed(config.master_seed, stable_hash(descriptor)), replication);
}

RejectionTable run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();

    // Critical values per (test, T).
    std::map<std::pair<TestKind, std::size_t>, double> critical;
    for (TestKind k : config.tests) {
        if (is_bootstrap(k)) continue;
        const auto [family, demeaning] = family_of(k);
        const NullFamily nf = null_family_for(family, demeaning);
        const bool generalized = nf == NullFamily::GsadfGls || nf == NullFamily::GsadfOls;
        NullSimulationOptions opts = generalized ? config.null_gsadf : config.null_sadf;
        opts.threads = config.threads;
        for (std::size_t T : config.T_list) {
            const double r0 = config.r0_for(T);
            const NullDistribution dist = config.cache_dir.empty()
                                              ? simulate_null(nf, r0, opts)
                                              : load_or_simulate_null(config.cache_dir, nf, r0, opts).dist;
            critical[{k, T}] = dist.critical_value(config.level);
        }
    }

    StadfOptions stadf_options;
    stadf_options.fit.kernel = config.kernel;

    RejectionTable table;
    table.replications = config.replications;
    table.master_seed = config.master_seed;
    table.level = config.level;

    [[maybe_unused]] const int threads = thread_count(config.threads);
    const std::size_t nk = config.tests.size();
    const std::size_t reps = config.replications;
    std::vector<Outcome> outcomes(reps * nk);

    for (const VolatilitySpec& vol : config.vol_specs) {
        for (double delta1 : config.delta1_grid) {
            for (std::size_t T : config.T_list) {
                const double r0 = config.r0_for(T);
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
                for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(reps); ++r) {
                    DgpSpec spec;
                    spec.bubble = BubbleSpec{config.tau1, config.tau2, config.tau2, delta1, 0.0, 0.0};
                    spec.vol = vol;
                    spec.length = T;
                    spec.seed = path_seed(config, vol, delta1, T, static_cast<std::size_t>(r));
                    const std::vector<double> y = simulate(spec);
                    for (std::size_t k = 0; k < nk; ++k) {
                        const TestKind kind = config.tests[k];
                        Outcome o = Outcome::Failed;
                        try {
                            if (is_bootstrap(kind)) {
                                const BootstrapResult b = wild_bootstrap_sadf(
                                    y, r0, config.bootstrap_B, derive_seed(spec.seed, kBootstrapStream));
                                if (!b.degenerate) o = b.p_value <= config.level ? Outcome::Reject : Outcome::Accept;
                            } else {
                                const double s = statistic_of(kind, y, r0, stadf_options);
                                o = s > critical.at({kind, T}) ? Outcome::Reject : Outcome::Accept;
                            }
                        } catch (const std::exception&) {
                            o = Outcome::Failed;
                        }
                        outcomes[static_cast<std::size_t>(r) * nk + k] = o;
                    }
                }
                for (std::size_t k = 0; k < nk; ++k) {
                    RejectionCell cell;
                    cell.vol = vol;
                    cell.delta1 = delta1;
                    cell.T = T;
                    cell.test = config.tests[k];
                    cell.critical_value = is_bootstrap(cell.test) ? std::numeric_limits<double>::quiet_NaN()
                                                                  : critical.at({cell.test, T});
                    for (std::size_t r = 0; r < reps; ++r) {
                        switch (outcomes[r * nk + k]) {
                            case Outcome::Reject: ++cell.rejections; ++cell.valid; break;
                            case Outcome::Accept: ++cell.valid; break;
                            case Outcome::Failed: ++cell.failures; break;
                        }
                    }
                    cell.invalid = cell.failures * 100 >= reps || cell.valid == 0;
                    cell.frequency = cell.valid ? static_cast<double>(cell.rejections) / static_cast<double>(cell.valid)
                                                : std::numeric_limits<double>::quiet_NaN();
                    table.cells.push_back(cell);
                }
            }
        }
    }
    table.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return table;
}

std::string rejection_csv(const RejectionTable& table) {
    std::string out = "volatility,sigma0,sigma1,ratio,tau_sigma,delta1,T,test,replications,valid,failures,rejections,"
                      "frequency,critical_value,invalid\n";
    for (const auto& c : table.cells) {
        out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{},{},{},{},{:.17g},{:.17g},{}\n",
                           to_string(c.vol.kind), c.vol.sigma0, c.vol.sigma1, c.vol.ratio(), c.vol.tau_sigma,
                           c.delta1, c.T, to_string(c.test), table.replications, c.valid, c.failures, c.rejections,
                           c.frequency, c.critical_value, c.invalid ? 1 : 0);
    }
    return out;
}

std::string rejection_text(const RejectionTable& table, const ExperimentConfig& config) {
    std::string out = fmt::format("Rejection frequencies at nominal level {:g} ({} replications)\n", table.level,
                                  table.replications);
    std::string header = fmt::format("{:<14}{:>8}{:>8} ", "volatility", "s1/s0", "delta1");
    for (std::size_t T : config.T_list) {
        header += fmt::format("| T={:<5}", T);
        for (std::size_t k = 1; k < config.tests.size(); ++k) header += fmt::format("{:>8}", "");
        header += " ";
    }
    out += header + "\n";
    std::string sub = fmt::format("{:<30} ", "");
    for (std::size_t i = 0; i < config.T_list.size(); ++i) {
        sub += "|";
        for (TestKind k : config.tests) sub += fmt::format("{:>8}", to_string(k));
        sub += " ";
    }
    out += sub + "\n";
    for (std::size_t v = 0; v < config.vol_specs.size(); ++v) {
        const auto& vol = config.vol_specs[v];
        for (double d : config.delta1_grid) {
            std::string line = fmt::format("{:<14}{:>8.3f}{:>8.2f} ", vol.label(), vol.ratio(), d);
            for (std::size_t T : config.T_list) {
                line += "|";
                for (TestKind k : config.tests) {
                    const auto& c = table.at(v, d, T, k, config);
                    line += c.invalid ? fmt::format("{:>8}", "n/a") : fmt::format("{:>8.3f}", c.frequency);
                }
                line += " ";
            }
            out += line + "\n";
        }
    }
    return out;
}

std::vector<TimingRow> run_timing(const std::vector<std::size_t>& T_list, const std::vector<TestKind>& tests,
                                  std::size_t repetitions, std::size_t bootstrap_B, std::uint64_t seed) {
    if (repetitions < 1) throw InvalidSpecError("timing needs at least one repetition");
    std::vector<TimingRow> rows;
    const StadfOptions stadf_options;
    for (std::size_t T : T_list) {
        const double r0 = default_r0(T);
        for (TestKind kind : tests) {
            std::vector<double> seconds;
            seconds.reserve(repetitions);
            for (std::size_t i = 0; i < repetitions; ++i) {
                const std::vector<double> y = random_walk(T, derive_seed(seed, T * 1000003ULL + i));
                const auto t0 = std::chrono::steady_clock::now();
                volatile double sink = 0.0;
                if (is_bootstrap(kind)) {
                    sink = wild_bootstrap_sadf(y, r0, bootstrap_B, derive_seed(seed, i)).p_value;
                } else {
                    sink = statistic_of(kind, y, r0, stadf_options);
                }
                (void)sink;
                seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            }
            rows.push_back(TimingRow{T, kind, repetitions, median(std::move(seconds))});
        }
    }
    return rows;
}

std::string timing_csv(const std::vector<TimingRow>& rows) {
    std::string out = "T,test,repetitions,median_seconds\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{:.9g}\n", r.T, to_string(r.test), r.repetitions, r.median_seconds);
    }
    return out;
}

}  // namespace tsbubble
