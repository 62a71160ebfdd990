#include "tsbubble/adf_stats.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "tsbubble/errors.hpp"

namespace tsbubble {

namespace {

// Residual sums of squares below this share of the total variation are
// treated as an exact fit.
constexpr double kExactFit = 1e-13;

constexpr double kNotAvailable = std::numeric_limits<double>::quiet_NaN();

std::size_t to_index(double r, std::size_t T) {
    if (!(r >= 0.0 && r <= 1.0)) {
        throw InvalidSpecError(fmt::format("window fraction outside [0, 1]: {}", r));
    }
    return static_cast<std::size_t>(std::floor(r * static_cast<double>(T) + 1e-9));
}

// Streaming DF regression without lags for windows sharing a start point.
// `value()` returns NaN when the current window is degenerate.
class OlsAccumulator {
public:
    void add(double x, double d) {
        ++n_;
        const double dx = x - mx_;
        mx_ += dx / n_;
        const double dd = d - md_;
        md_ += dd / n_;
        cxx_ += dx * (x - mx_);
        cxy_ += dx * (d - md_);
        cdd_ += dd * (d - md_);
    }

    [[nodiscard]] double value() const {
        if (n_ < 3.0 || !(cxx_ > 0.0)) return kNotAvailable;
        const double ssr = cdd_ - cxy_ * cxy_ / cxx_;
        if (!(ssr > kExactFit * cdd_)) return kNotAvailable;
        const double sigma2 = ssr / (n_ - 2.0);
        return cxy_ / std::sqrt(sigma2 * cxx_);
    }

private:
    double n_ = 0.0, mx_ = 0.0, md_ = 0.0, cxx_ = 0.0, cxy_ = 0.0, cdd_ = 0.0;
};

class GlsAccumulator {
public:
    void add(double x, double d) {
        ++n_;
        sxx_ += x * x;
        sxy_ += x * d;
        sdd_ += d * d;
    }

    [[nodiscard]] double value() const {
        if (n_ < 2.0 || !(sxx_ > 0.0)) return kNotAvailable;
        const double ssr = sdd_ - sxy_ * sxy_ / sxx_;
        if (!(ssr > kExactFit * sdd_)) return kNotAvailable;
        const double sigma2 = ssr / (n_ - 1.0);
        return sxy_ / std::sqrt(sigma2 * sxx_);
    }

private:
    double n_ = 0.0, sxx_ = 0.0, sxy_ = 0.0, sdd_ = 0.0;
};

// General ADF regression with lagged differences. NaN when degenerate.
double adf_regression(std::span<const double> y, std::size_t m1, std::size_t m2, Demeaning demeaning,
                      std::size_t lags) {
    const bool intercept = demeaning == Demeaning::OLS;
    if (m2 <= m1 + lags) return kNotAvailable;
    const std::size_t first = m1 + lags + 1;
    const auto rows = static_cast<Eigen::Index>(m2 - first + 1);
    const auto cols = static_cast<Eigen::Index>(lags + 1 + (intercept ? 1 : 0));
    if (rows <= cols) return kNotAvailable;

    const double origin = intercept ? 0.0 : y[0];
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd d(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = first + static_cast<std::size_t>(r);
        d(r) = y[t] - y[t - 1];
        Eigen::Index c = 0;
        X(r, c++) = y[t - 1] - origin;
        if (intercept) X(r, c++) = 1.0;
        for (std::size_t j = 1; j <= lags; ++j) {
            X(r, c++) = y[t - j] - y[t - j - 1];
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < cols) return kNotAvailable;
    const Eigen::VectorXd beta = qr.solve(d);
    const double ssr = (d - X * beta).squaredNorm();
    double tss = d.squaredNorm();
    if (intercept) tss = (d.array() - d.mean()).square().sum();
    if (!(ssr > kExactFit * tss)) return kNotAvailable;
    const double sigma2 = ssr / static_cast<double>(rows - cols);
    const Eigen::MatrixXd xtx_inv = (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(cols, cols));
    return beta(0) / std::sqrt(sigma2 * xtx_inv(0, 0));
}

// Evaluates every window (m1, m2] with m2 - m1 >= min_obs for a fixed m1,
// calling visit(m2, value).
template <typename Visit>
void scan_adf(std::span<const double> y, std::size_t m1, std::size_t min_obs, Demeaning demeaning,
              std::size_t lags, Visit&& visit) {
    const std::size_t T = y.size() - 1;
    if (lags > 0) {
        for (std::size_t m2 = m1 + min_obs; m2 <= T; ++m2) {
            visit(m2, adf_regression(y, m1, m2, demeaning, lags));
        }
        return;
    }
    auto run = [&](auto acc, double origin) {
        for (std::size_t t = m1 + 1; t <= T; ++t) {
            acc.add(y[t - 1] - origin, y[t] - y[t - 1]);
            if (t >= m1 + min_obs) visit(t, acc.value());
        }
    };
    if (demeaning == Demeaning::OLS) {
        run(OlsAccumulator{}, 0.0);
    } else {
        run(GlsAccumulator{}, y[0]);
    }
}

template <typename Visit>
void scan_tadf(std::span<const double> ytilde, double omega_bar_sq, std::size_t m1, std::size_t min_obs,
               Visit&& visit) {
    const std::size_t T = ytilde.size() - 1;
    const double omega = std::sqrt(omega_bar_sq);
    const double base = ytilde[m1] * ytilde[m1];
    double sum_sq = 0.0;
    for (std::size_t t = m1 + 1; t <= T; ++t) {
        sum_sq += ytilde[t - 1] * ytilde[t - 1];
        if (t < m1 + min_obs) continue;
        if (!(sum_sq > 0.0)) {
            visit(t, kNotAvailable);
            continue;
        }
        const double num = ytilde[t] * ytilde[t] - base - omega_bar_sq * static_cast<double>(t - m1);
        visit(t, num / (2.0 * omega * std::sqrt(sum_sq)));
    }
}

void require_series(std::span<const double> y, std::size_t min_points) {
    if (y.size() < min_points) {
        throw LengthError(fmt::format("series has {} points, need at least {}", y.size(), min_points));
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw InvalidSpecError("series contains non-finite values");
    }
}

void require_omega(double omega_bar_sq) {
    if (!(omega_bar_sq > 0.0) || !std::isfinite(omega_bar_sq)) {
        throw InvalidSpecError(fmt::format("average innovation variance must be positive, got {}", omega_bar_sq));
    }
}

// Runs the sup over the (G)SADF grid. `scan(m1, min_obs, visit)` evaluates
// windows starting at m1.
template <typename Scan>
TestResult sup_over_grid(std::size_t T, double r0, bool generalized, Scan&& scan) {
    const std::size_t min_obs = min_window(r0, T);
    if (min_obs > T) {
        throw LengthError("minimum window exceeds the sample");
    }
    TestResult res;
    res.r0 = r0;
    res.statistic = -std::numeric_limits<double>::infinity();
    bool found = false;
    const std::size_t last_start = generalized ? T - min_obs : 0;
    for (std::size_t m1 = 0; m1 <= last_start; ++m1) {
        scan(m1, min_obs, [&](std::size_t m2, double v) {
            if (std::isnan(v)) {
                ++res.skipped_windows;
                return;
            }
            ++res.evaluated_windows;
            if (!found || v > res.statistic) {
                found = true;
                res.statistic = v;
                res.start_index = m1;
                res.end_index = m2;
            }
        });
    }
    if (!found) {
        throw DegenerateError("every window in the grid is degenerate");
    }
    res.r1 = static_cast<double>(res.start_index) / static_cast<double>(T);
    res.r2 = static_cast<double>(res.end_index) / static_cast<double>(T);
    return res;
}

TestResult sup_adf(std::span<const double> y, double r0, Demeaning demeaning, std::size_t lags, bool generalized) {
    require_series(y, 3);
    const std::size_t T = y.size() - 1;
    if (min_window(r0, T) < lags + 3) {
        throw LengthError(fmt::format("minimum window floor(r0 T) = {} is below lags + 3 = {}", min_window(r0, T),
                                      lags + 3));
    }
    TestResult res = sup_over_grid(T, r0, generalized, [&](std::size_t m1, std::size_t min_obs, auto&& visit) {
        scan_adf(y, m1, min_obs, demeaning, lags, visit);
    });
    res.family = generalized ? TestFamily::GSADF : TestFamily::SADF;
    res.demeaning = demeaning;
    return res;
}

}  // namespace

std::string to_string(Demeaning d) { return d == Demeaning::OLS ? "OLS" : "GLS"; }

std::string to_string(TestFamily f) {
    switch (f) {
        case TestFamily::SADF: return "SADF";
        case TestFamily::GSADF: return "GSADF";
        case TestFamily::STADF: return "STADF";
        case TestFamily::GSTADF: return "GSTADF";
    }
    return "unknown";
}

std::size_t min_window(double r0, std::size_t T) {
    if (!(r0 > 0.0 && r0 <= 1.0)) {
        throw InvalidSpecError(fmt::format("minimum window fraction must lie in (0, 1], got {}", r0));
    }
    const std::size_t m = to_index(r0, T);
    if (m < 1) {
        throw LengthError(fmt::format("r0 = {} gives an empty minimum window for T = {}", r0, T));
    }
    return m;
}

double default_r0(std::size_t T) { return 0.01 + 1.8 / std::sqrt(static_cast<double>(T)); }

double adf_window_indices(std::span<const double> y, std::size_t m1, std::size_t m2, Demeaning demeaning,
                          std::size_t lags) {
    require_series(y, 3);
    const std::size_t T = y.size() - 1;
    if (m2 > T || m1 >= m2) {
        throw InvalidSpecError(fmt::format("invalid window ({}, {}] for T = {}", m1, m2, T));
    }
    if (m2 - m1 < lags + 3) {
        throw LengthError(fmt::format("window of {} observations is too short for {} lags", m2 - m1, lags));
    }
    double v = kNotAvailable;
    if (lags == 0) {
        scan_adf(y.first(m2 + 1), m1, m2 - m1, demeaning, 0, [&](std::size_t, double value) { v = value; });
    } else {
        v = adf_regression(y, m1, m2, demeaning, lags);
    }
    if (std::isnan(v)) {
        throw DegenerateError(fmt::format("degenerate ADF regression on window ({}, {}]", m1, m2));
    }
    return v;
}

double adf_window(std::span<const double> y, double r1, double r2, Demeaning demeaning, std::size_t lags) {
    require_series(y, 3);
    const std::size_t T = y.size() - 1;
    return adf_window_indices(y, to_index(r1, T), to_index(r2, T), demeaning, lags);
}

TestResult sadf(std::span<const double> y, double r0, Demeaning demeaning, std::size_t lags) {
    return sup_adf(y, r0, demeaning, lags, false);
}

TestResult gsadf(std::span<const double> y, double r0, Demeaning demeaning, std::size_t lags) {
    return sup_adf(y, r0, demeaning, lags, true);
}

double tadf_window_indices(std::span<const double> ytilde, double omega_bar_sq, std::size_t m1, std::size_t m2) {
    require_series(ytilde, 2);
    require_omega(omega_bar_sq);
    const std::size_t T = ytilde.size() - 1;
    if (m2 > T || m1 >= m2) {
        throw InvalidSpecError(fmt::format("invalid window ({}, {}] for T = {}", m1, m2, T));
    }
    double v = kNotAvailable;
    scan_tadf(ytilde.first(m2 + 1), omega_bar_sq, m1, m2 - m1, [&](std::size_t, double value) { v = value; });
    if (std::isnan(v)) {
        throw DegenerateError(fmt::format("zero denominator in TADF on window ({}, {}]", m1, m2));
    }
    return v;
}

double tadf_window(const TransformedSeries& transformed, double omega_bar_sq, double r1, double r2) {
    const std::size_t T = transformed.values.size() - 1;
    return tadf_window_indices(transformed.values, omega_bar_sq, to_index(r1, T), to_index(r2, T));
}

TestResult sup_tadf(std::span<const double> ytilde, double omega_bar_sq, double r0, bool generalized) {
    require_series(ytilde, 2);
    require_omega(omega_bar_sq);
    const std::size_t T = ytilde.size() - 1;
    TestResult res = sup_over_grid(T, r0, generalized, [&](std::size_t m1, std::size_t min_obs, auto&& visit) {
        scan_tadf(ytilde, omega_bar_sq, m1, min_obs, visit);
    });
    res.family = generalized ? TestFamily::GSTADF : TestFamily::STADF;
    res.demeaning = Demeaning::GLS;
    return res;
}

TimeTransform time_transform(std::span<const double> y, const StadfOptions& options) {
    require_series(y, 2);
    if (options.known_profile) {
        TimeTransform out{std::nullopt, *options.known_profile, transform(y, *options.known_profile),
                          options.omega_bar_sq.value_or(options.known_profile->omega_bar_sq())};
        return out;
    }
    std::vector<double> demeaned(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) demeaned[t] = y[t] - y[0];
    LocalFitResult local = fit(demeaned, options.fit);
    VarianceProfile profile = estimate_profile(local);
    TransformedSeries transformed = transform(y, profile);
    const double w2 = options.omega_bar_sq.value_or(profile.omega_bar_sq());
    return TimeTransform{std::move(local), std::move(profile), std::move(transformed), w2};
}

TestResult stadf(std::span<const double> y, double r0, const StadfOptions& options) {
    if (y.size() < 21 && !options.known_profile) {
        throw LengthError("STADF needs T >= 20");
    }
    const TimeTransform tt = time_transform(y, options);
    return sup_tadf(tt.transformed.values, tt.omega_bar_sq, r0, false);
}

TestResult gstadf(std::span<const double> y, double r0, const StadfOptions& options) {
    if (y.size() < 21 && !options.known_profile) {
        throw LengthError("GSTADF needs T >= 20");
    }
    const TimeTransform tt = time_transform(y, options);
    return sup_tadf(tt.transformed.values, tt.omega_bar_sq, r0, true);
}

}  // namespace tsbubble
