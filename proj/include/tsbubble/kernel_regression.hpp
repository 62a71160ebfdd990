#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tsbubble {

/// Kernels supported on [-1, 1]. The truncated Gaussian is left unnormalized;
/// the constant cancels in every ratio it enters.
enum class Kernel { Uniform, TruncatedGaussian };

[[nodiscard]] double kernel_weight(Kernel kernel, double u) noexcept;

std::string to_string(Kernel kernel);
Kernel kernel_from_string(const std::string& name);

/// Local estimates of the time-varying AR deviation. Element j belongs to
/// observation t = j + 1, so both vectors have length T.
struct LocalDelta {
    std::vector<double> delta;
    std::vector<std::size_t> degenerate;  ///< observations whose window had zero denominator
};

/**
 * Kernel local least squares estimate of delta_t in dy_t = delta_t y_{t-1} + e_t
 * for t = 1..T, weighting observation i by G((i - t) / (T h)). The regression
 * has no intercept, so callers pass the initial-value-demeaned series
 * y_i - y_0. Degenerate windows get delta_t = 0 and are listed.
 */
[[nodiscard]] LocalDelta local_delta(std::span<const double> y, Kernel kernel, double h);

struct BandwidthSelection {
    double h = 0.0;
    std::vector<double> grid;
    std::vector<double> criteria;  ///< leave-one-out SSR per grid point; +inf if degenerate
    bool all_degenerate = false;
};

/// Log-spaced candidate bandwidths between T^lo_exponent and T^hi_exponent.
[[nodiscard]] std::vector<double> bandwidth_grid(std::size_t T, std::size_t grid_size,
                                                 double lo_exponent = -0.5, double hi_exponent = -0.3);

/**
 * Leave-one-out cross-validated bandwidth. Ties (within 1e-12 of the total
 * sum of squared differences) go to the smaller bandwidth. If every candidate
 * is degenerate the largest grid value is returned and flagged.
 */
[[nodiscard]] BandwidthSelection select_bandwidth(std::span<const double> y, Kernel kernel,
                                                  std::size_t grid_size = 15, double lo_exponent = -0.5,
                                                  double hi_exponent = -0.3);

/// Leave-one-out residual sum of squares at one bandwidth (+inf if degenerate).
[[nodiscard]] double loo_criterion(std::span<const double> y, Kernel kernel, double h);

struct TruncationThreshold {
    double psi = 0.0;
    double sigma_bar = 0.0;
    bool single_window = false;  ///< T < 20: whole-sample standard deviation used
};

/**
 * psi_T = sigma_bar * T^psi_exponent, with sigma_bar the largest sample
 * standard deviation of the residuals over windows t = s..s+floor(0.1T),
 * s = 1..T-floor(0.1T). Throws DegenerateError if sigma_bar is zero.
 */
[[nodiscard]] TruncationThreshold truncation_threshold(std::span<const double> residuals,
                                                       double psi_exponent = 1.0 / 7.0);

struct FitOptions {
    Kernel kernel = Kernel::Uniform;
    std::size_t grid_size = 15;
    double h_lo_exponent = -0.5;
    double h_hi_exponent = -0.3;
    double psi_exponent = 1.0 / 7.0;
    std::optional<double> bandwidth;  ///< skip cross-validation when set
};

struct LocalFitResult {
    std::vector<double> delta_hat;            ///< length T
    std::vector<double> residuals;            ///< dy_t - delta_hat_t y_{t-1}
    std::vector<double> truncated_residuals;  ///< residuals zeroed where |residual| >= psi
    double bandwidth = 0.0;
    double psi = 0.0;
    double sigma_bar = 0.0;
    std::size_t truncated_count = 0;
    std::vector<std::size_t> degenerate_windows;
    bool bandwidth_fallback = false;
    bool threshold_fallback = false;
};

/// Bandwidth selection, local fit, residuals and truncation in one pass on a
/// series already demeaned by its initial value. Needs T >= 10. An exact fit
/// (every residual zero) returns psi = 0 and all-zero truncated residuals.
[[nodiscard]] LocalFitResult fit(std::span<const double> y, const FitOptions& options = {});

}  // namespace tsbubble
