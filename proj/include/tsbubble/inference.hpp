#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsbubble/adf_stats.hpp"

namespace tsbubble {

enum class NullFamily { SadfGls, GsadfGls, SadfOls, GsadfOls };

std::string to_string(NullFamily family);
NullFamily null_family_from_string(const std::string& name);

/// Simulated draws of a homoskedastic sup-functional, sorted ascending.
struct NullDistribution {
    NullFamily family = NullFamily::SadfGls;
    double r0 = 0.1;
    std::size_t steps = 0;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    std::vector<double> draws;

    /// Empirical q-quantile: the ceil(q R)-th smallest draw, q in (0, 1).
    [[nodiscard]] double quantile(double q) const;

    /// Right-tail critical value at significance level alpha.
    [[nodiscard]] double critical_value(double alpha) const { return quantile(1.0 - alpha); }
};

struct NullSimulationOptions {
    std::size_t steps = 2000;
    std::size_t replications = 100000;
    std::uint64_t seed = 20240101;
    int threads = 0;  ///< 0: library default
};

/**
 * @brief Simulate the null distribution of a sup-statistic.
 *
 * Replication r draws a standard random walk of `steps` increments from the
 * stream derive_seed(seed, r). GLS families evaluate the discretized
 * homoskedastic limit functional
 *
 *   (W(r2)^2 - W(r1)^2 - (r2 - r1)) / (2 sqrt(int_{r1}^{r2} W(r)^2 dr))
 *
 * on the window grid at resolution 1/steps; OLS families run the
 * finite-sample intercept-demeaned SADF/GSADF on the walk. Results do not
 * depend on the thread count.
 */
[[nodiscard]] NullDistribution simulate_null(NullFamily family, double r0, const NullSimulationOptions& options);

/// Right-tail p-value #{draws >= statistic} / R.
[[nodiscard]] double p_value(const NullDistribution& dist, double statistic);

/// Null family that supplies critical values for a test.
[[nodiscard]] NullFamily null_family_for(TestFamily family, Demeaning demeaning);

// Cache files: 8-byte magic "TSBNULL1", then little-endian
// u32 family, f64 r0, u64 steps, u64 replications, u64 seed, and the sorted
// draws as f64.

void write_null_cache(const std::filesystem::path& path, const NullDistribution& dist);
[[nodiscard]] NullDistribution read_null_cache(const std::filesystem::path& path);

/// File name keyed on (family, r0, steps, replications, seed).
[[nodiscard]] std::filesystem::path null_cache_path(const std::filesystem::path& dir, NullFamily family, double r0,
                                                    const NullSimulationOptions& options);

/// $TSBUBBLE_CACHE_DIR if set, otherwise ".tsbubble_cache" in the working directory.
[[nodiscard]] std::filesystem::path default_cache_dir();

struct CachedNull {
    NullDistribution dist;
    bool from_cache = false;
    std::filesystem::path path;
};

/// Load the distribution from `dir` or simulate and store it. `force` ignores
/// an existing file. A file whose header disagrees with the request is
/// re-simulated.
[[nodiscard]] CachedNull load_or_simulate_null(const std::filesystem::path& dir, NullFamily family, double r0,
                                               const NullSimulationOptions& options, bool force = false);

struct BootstrapResult {
    double observed = 0.0;
    std::vector<double> bootstrap_draws;
    double p_value = 1.0;
    bool degenerate = false;
    std::string diagnostic;
};

/**
 * Wild-bootstrap SADF: y*_0 = 0, y*_t = y*_{t-1} + w_t dy_t with w_t i.i.d.
 * N(0, 1), bootstrap b drawn from derive_seed(seed, b). The p-value is
 * (1 + #{draws >= observed}) / (B + 1). A series with no usable window
 * (e.g. constant) yields p = 1 and degenerate = true.
 */
[[nodiscard]] BootstrapResult wild_bootstrap_sadf(std::span<const double> y, double r0, std::size_t B,
                                                  std::uint64_t seed, Demeaning demeaning = Demeaning::OLS);

}  // namespace tsbubble
