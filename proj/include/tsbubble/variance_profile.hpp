#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "tsbubble/dgp.hpp"
#include "tsbubble/kernel_regression.hpp"

namespace tsbubble {

/**
 * @brief Piecewise-linear variance profile on the knots s = t/T.
 *
 * Built from squared increments v_1..v_T: the knot value at t/T is the
 * cumulative share sum_{i<=t} v_i / sum_i v_i, and eta is linear between
 * knots. The average innovation variance is sum_i v_i / T. Immutable.
 */
class VarianceProfile {
public:
    /// Profile from (truncated) residuals, squaring each. Throws
    /// DegenerateError if every residual is zero.
    [[nodiscard]] static VarianceProfile from_residuals(std::span<const double> residuals);

    /// Profile from nonnegative squared increments.
    [[nodiscard]] static VarianceProfile from_squared_increments(std::vector<double> increments);

    /// Known profile of a deterministic volatility function, discretized on
    /// the same knots with increments omega(t/T)^2.
    [[nodiscard]] static VarianceProfile from_volatility(const VolatilitySpec& vol, std::size_t T);

    [[nodiscard]] std::size_t length() const noexcept { return increments_.size(); }
    [[nodiscard]] double omega_bar_sq() const noexcept { return total_ / static_cast<double>(length()); }

    /// eta(s) for s in [0, 1].
    [[nodiscard]] double eta(double s) const;

    /// Generalized inverse inf{u : eta(u) >= s}. Flat segments invert to
    /// their left endpoint, except that inverse(1) = 1 always.
    [[nodiscard]] double inverse(double s) const;

    /// floor(T * inverse(t/T)) for t = 0..T, computed on the cumulative
    /// scale so identity profiles map t to t exactly.
    [[nodiscard]] std::size_t inverse_index(std::size_t t) const;

    /// (s, eta(s)) at all T + 1 knots.
    [[nodiscard]] std::vector<std::pair<double, double>> knots() const;

private:
    explicit VarianceProfile(std::vector<double> increments);

    // T * inverse(s) where the target cumulative mass is `target`.
    [[nodiscard]] double inverse_scaled(double target) const;

    std::vector<double> increments_;
    std::vector<double> cumulative_;  // cumulative_[t] = sum_{i<=t} v_i, cumulative_[0] = 0
    double total_ = 0.0;
};

/// Time-deformed series ytilde_t = y_{index_map[t]} - y_0, t = 0..T.
struct TransformedSeries {
    std::vector<double> values;
    std::vector<std::size_t> index_map;
};

/// Variance profile estimated from a local fit's truncated residuals.
[[nodiscard]] VarianceProfile estimate_profile(const LocalFitResult& fit);

/// Free-function form of VarianceProfile::inverse.
[[nodiscard]] double inverse_profile(const VarianceProfile& profile, double s);

/// Resample y_0..y_T at floor(ghat(t/T) T). The profile must have length T.
[[nodiscard]] TransformedSeries transform(std::span<const double> y, const VarianceProfile& profile);

}  // namespace tsbubble
