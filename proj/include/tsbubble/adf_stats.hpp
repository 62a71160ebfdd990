#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsbubble/kernel_regression.hpp"
#include "tsbubble/variance_profile.hpp"

namespace tsbubble {

/// OLS: regression with an intercept. GLS: subtract y_0 and drop the intercept.
enum class Demeaning { OLS, GLS };

enum class TestFamily { SADF, GSADF, STADF, GSTADF };

std::string to_string(Demeaning d);
std::string to_string(TestFamily f);

/**
 * @brief Outcome of a sup-type test.
 *
 * The window attaining the supremum covers observations
 * start_index + 1 .. end_index of y_0..y_T, i.e. r1 = start_index / T and
 * r2 = end_index / T.
 */
struct TestResult {
    TestFamily family = TestFamily::SADF;
    Demeaning demeaning = Demeaning::OLS;
    double statistic = 0.0;
    std::size_t start_index = 0;
    std::size_t end_index = 0;
    double r1 = 0.0;
    double r2 = 0.0;
    double r0 = 0.0;
    std::size_t evaluated_windows = 0;
    std::size_t skipped_windows = 0;  ///< degenerate windows excluded from the sup
    std::optional<double> p_value;
    std::vector<std::pair<double, bool>> decisions;  ///< (level, rejected)
};

/// Minimum window in observations, floor(r0 T). Throws unless it is >= 1.
[[nodiscard]] std::size_t min_window(double r0, std::size_t T);

/// r0 = 0.01 + 1.8 / sqrt(T), the simulation-design default.
[[nodiscard]] double default_r0(std::size_t T);

/**
 * ADF t-ratio of delta over t = m1+1..m2 (observation indices into y_0..y_T).
 *
 * OLS: dy_t = mu + delta y_{t-1} + sum_j b_j dy_{t-j} + e_t.
 * GLS: the same on y_t - y_0 without mu. With lags the first `lags` rows of
 * the window supply only lagged differences. Throws DegenerateError when the
 * design is singular or the residual variance vanishes.
 */
[[nodiscard]] double adf_window_indices(std::span<const double> y, std::size_t m1, std::size_t m2,
                                        Demeaning demeaning, std::size_t lags = 0);

/// adf_window_indices at m1 = floor(r1 T), m2 = floor(r2 T).
[[nodiscard]] double adf_window(std::span<const double> y, double r1, double r2, Demeaning demeaning,
                                std::size_t lags = 0);

/// sup over r2 in [r0, 1] of ADF_0^{r2}.
[[nodiscard]] TestResult sadf(std::span<const double> y, double r0, Demeaning demeaning = Demeaning::OLS,
                              std::size_t lags = 0);

/// sup over r2 in [r0, 1], r1 in [0, r2 - r0] of ADF_{r1}^{r2}.
[[nodiscard]] TestResult gsadf(std::span<const double> y, double r0, Demeaning demeaning = Demeaning::OLS,
                               std::size_t lags = 0);

/**
 * Time-transformed ADF statistic over (m1, m2]:
 *
 *   (yt_{m2}^2 - yt_{m1}^2 - w2 (m2 - m1)) / (2 sqrt(w2) sqrt(sum_{t=m1+1}^{m2} yt_{t-1}^2))
 *
 * with w2 the average innovation variance, estimated once for the whole sample.
 */
[[nodiscard]] double tadf_window_indices(std::span<const double> ytilde, double omega_bar_sq, std::size_t m1,
                                         std::size_t m2);

[[nodiscard]] double tadf_window(const TransformedSeries& transformed, double omega_bar_sq, double r1, double r2);

/// sup of TADF over the SADF (generalized = false) or GSADF window grid.
[[nodiscard]] TestResult sup_tadf(std::span<const double> ytilde, double omega_bar_sq, double r0, bool generalized);

struct StadfOptions {
    FitOptions fit;
    /// Known variance profile; bypasses the kernel fit entirely.
    std::optional<VarianceProfile> known_profile;
    /// Overrides the average innovation variance (estimated or known).
    std::optional<double> omega_bar_sq;
};

/// Every intermediate of the feasible time deformation.
struct TimeTransform {
    std::optional<LocalFitResult> fit;  ///< empty in known-profile mode
    VarianceProfile profile;
    TransformedSeries transformed;
    double omega_bar_sq = 0.0;
};

/// GLS-demean, fit the local regression, estimate the profile and deform time.
[[nodiscard]] TimeTransform time_transform(std::span<const double> y, const StadfOptions& options = {});

[[nodiscard]] TestResult stadf(std::span<const double> y, double r0, const StadfOptions& options = {});
[[nodiscard]] TestResult gstadf(std::span<const double> y, double r0, const StadfOptions& options = {});

}  // namespace tsbubble
