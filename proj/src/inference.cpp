#include "tsbubble/inference.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "tsbubble/errors.hpp"
#include "tsbubble/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tsbubble {

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'S', 'B', 'N', 'U', 'L', 'L', '1'};

bool is_generalized(NullFamily f) { return f == NullFamily::GsadfGls || f == NullFamily::GsadfOls; }
bool is_gls(NullFamily f) { return f == NullFamily::SadfGls || f == NullFamily::GsadfGls; }

int thread_count(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(sizeof(T) == 4 || sizeof(T) == 8);
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    auto bits = std::bit_cast<U>(value);
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffU);
    }
    out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    std::array<unsigned char, sizeof(T)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in) throw ParseError("truncated null-distribution cache file", 0);
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
    return std::bit_cast<T>(bits);
}

double bootstrap_statistic(std::span<const double> y, double r0, Demeaning demeaning) {
    try {
        return sadf(y, r0, demeaning).statistic;
    } catch (const DegenerateError&) {
        return -std::numeric_limits<double>::infinity();
    }
}

}  // namespace

std::string to_string(NullFamily family) {
    switch (family) {
        case NullFamily::SadfGls: return "sadf_gls";
        case NullFamily::GsadfGls: return "gsadf_gls";
        case NullFamily::SadfOls: return "sadf_ols";
        case NullFamily::GsadfOls: return "gsadf_ols";
    }
    return "unknown";
}

NullFamily null_family_from_string(const std::string& name) {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "sadf_gls" || s == "gls") return NullFamily::SadfGls;
    if (s == "gsadf_gls") return NullFamily::GsadfGls;
    if (s == "sadf_ols" || s == "ols") return NullFamily::SadfOls;
    if (s == "gsadf_ols") return NullFamily::GsadfOls;
    throw InvalidSpecError("unknown null family '" + name + "'");
}

double NullDistribution::quantile(double q) const {
    if (draws.empty()) throw LengthError("empty null distribution");
    if (!(q > 0.0 && q < 1.0)) throw InvalidSpecError(fmt::format("quantile level must lie in (0, 1), got {}", q));
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(draws.size()) - 1e-9));
    return draws[std::clamp<std::size_t>(rank, 1, draws.size()) - 1];
}

NullDistribution simulate_null(NullFamily family, double r0, const NullSimulationOptions& options) {
    if (options.steps < 2) throw InvalidSpecError("null simulation needs at least two steps");
    if (options.replications < 1) throw InvalidSpecError("null simulation needs at least one replication");
    (void)min_window(r0, options.steps);

    NullDistribution dist;
    dist.family = family;
    dist.r0 = r0;
    dist.steps = options.steps;
    dist.replications = options.replications;
    dist.seed = options.seed;
    dist.draws.assign(options.replications, std::numeric_limits<double>::quiet_NaN());

    const bool generalized = is_generalized(family);
    const bool gls = is_gls(family);
    const auto reps = static_cast<std::ptrdiff_t>(options.replications);
    [[maybe_unused]] const int threads = thread_count(options.threads);

#pragma omp parallel num_threads(threads)
    {
        std::vector<double> walk(options.steps + 1);
#pragma omp for schedule(dynamic, 64)
        for (std::ptrdiff_t r = 0; r < reps; ++r) {
            Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(r)));
            walk[0] = 0.0;
            for (std::size_t j = 1; j <= options.steps; ++j) walk[j] = walk[j - 1] + rng.normal();
            try {
                dist.draws[static_cast<std::size_t>(r)] =
                    gls ? sup_tadf(walk, 1.0, r0, generalized).statistic
                        : (generalized ? gsadf(walk, r0, Demeaning::OLS) : sadf(walk, r0, Demeaning::OLS)).statistic;
            } catch (const std::exception&) {
                // left as NaN and reported below
            }
        }
    }
    if (std::any_of(dist.draws.begin(), dist.draws.end(), [](double v) { return std::isnan(v); })) {
        throw DegenerateError("null simulation produced a degenerate replication");
    }
    std::sort(dist.draws.begin(), dist.draws.end());
    return dist;
}

double p_value(const NullDistribution& dist, double statistic) {
    if (dist.draws.empty()) throw LengthError("empty null distribution");
    const auto it = std::lower_bound(dist.draws.begin(), dist.draws.end(), statistic);
    return static_cast<double>(dist.draws.end() - it) / static_cast<double>(dist.draws.size());
}

NullFamily null_family_for(TestFamily family, Demeaning demeaning) {
    switch (family) {
        case TestFamily::STADF: return NullFamily::SadfGls;
        case TestFamily::GSTADF: return NullFamily::GsadfGls;
        case TestFamily::SADF: return demeaning == Demeaning::GLS ? NullFamily::SadfGls : NullFamily::SadfOls;
        case TestFamily::GSADF: return demeaning == Demeaning::GLS ? NullFamily::GsadfGls : NullFamily::GsadfOls;
    }
    return NullFamily::SadfGls;
}

void write_null_cache(const std::filesystem::path& path, const NullDistribution& dist) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write cache file " + tmp.string());
        out.write(kMagic.data(), kMagic.size());
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dist.family));
        put_le<double>(out, dist.r0);
        put_le<std::uint64_t>(out, dist.steps);
        put_le<std::uint64_t>(out, dist.replications);
        put_le<std::uint64_t>(out, dist.seed);
        for (double v : dist.draws) put_le<double>(out, v);
        if (!out) throw std::runtime_error("failed writing cache file " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

NullDistribution read_null_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open cache file " + path.string(), 0);
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw ParseError("not a null-distribution cache file: " + path.string(), 0);
    NullDistribution dist;
    const auto family = get_le<std::uint32_t>(in);
    if (family > static_cast<std::uint32_t>(NullFamily::GsadfOls)) throw ParseError("unknown family in cache", 0);
    dist.family = static_cast<NullFamily>(family);
    dist.r0 = get_le<double>(in);
    dist.steps = get_le<std::uint64_t>(in);
    dist.replications = get_le<std::uint64_t>(in);
    dist.seed = get_le<std::uint64_t>(in);
    dist.draws.resize(dist.replications);
    for (double& v : dist.draws) v = get_le<double>(in);
    return dist;
}

std::filesystem::path null_cache_path(const std::filesystem::path& dir, NullFamily family, double r0,
                                      const NullSimulationOptions& options) {
    return dir / fmt::format("null_{}_r0-{:.12g}_N{}_R{}_seed{}.bin", to_string(family), r0, options.steps,
                             options.replications, options.seed);
}

std::filesystem::path default_cache_dir() {
    if (const char* env = std::getenv("TSBUBBLE_CACHE_DIR"); env && *env) return env;
    return ".tsbubble_cache";
}

CachedNull load_or_simulate_null(const std::filesystem::path& dir, NullFamily family, double r0,
                                 const NullSimulationOptions& options, bool force) {
    CachedNull out;
    out.path = null_cache_path(dir, family, r0, options);
    if (!force && std::filesystem::exists(out.path)) {
        try {
            NullDistribution cached = read_null_cache(out.path);
            if (cached.family == family && cached.r0 == r0 && cached.steps == options.steps &&
                cached.replications == options.replications && cached.seed == options.seed) {
                out.dist = std::move(cached);
                out.from_cache = true;
                return out;
            }
        } catch (const ParseError&) {
            // unreadable file: fall through and overwrite
        }
    }
    out.dist = simulate_null(family, r0, options);
    write_null_cache(out.path, out.dist);
    return out;
}

BootstrapResult wild_bootstrap_sadf(std::span<const double> y, double r0, std::size_t B, std::uint64_t seed,
                                    Demeaning demeaning) {
    if (B < 1) throw InvalidSpecError("bootstrap needs at least one replication");
    if (y.size() < 3) throw LengthError("bootstrap needs at least three observations");
    BootstrapResult res;
    try {
        res.observed = sadf(y, r0, demeaning).statistic;
    } catch (const DegenerateError& e) {
        res.degenerate = true;
        res.observed = -std::numeric_limits<double>::infinity();
        res.p_value = 1.0;
        res.diagnostic = e.what();
        return res;
    }

    const std::size_t T = y.size() - 1;
    std::vector<double> dy(T);
    for (std::size_t t = 1; t <= T; ++t) dy[t - 1] = y[t] - y[t - 1];

    res.bootstrap_draws.resize(B);
    const auto reps = static_cast<std::ptrdiff_t>(B);
#pragma omp parallel if (!omp_in_parallel())
    {
        std::vector<double> ystar(T + 1);
#pragma omp for schedule(static)
        for (std::ptrdiff_t b = 0; b < reps; ++b) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
            ystar[0] = 0.0;
            for (std::size_t t = 1; t <= T; ++t) ystar[t] = ystar[t - 1] + rng.normal() * dy[t - 1];
            res.bootstrap_draws[static_cast<std::size_t>(b)] = bootstrap_statistic(ystar, r0, demeaning);
        }
    }
    const auto exceed = std::count_if(res.bootstrap_draws.begin(), res.bootstrap_draws.end(),
                                      [&](double d) { return d >= res.observed; });
    res.p_value = static_cast<double>(1 + exceed) / static_cast<double>(B + 1);
    return res;
}

}  // namespace tsbubble
