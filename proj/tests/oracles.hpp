#pragma once

// Independent brute-force reference implementations used as test oracles.
// Everything here is written from the defining formulas with explicit loops
// and long double accumulation; nothing is shared with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using Real = long double;

inline std::vector<double> random_walk(std::size_t T, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(0.0, scale);
    std::vector<double> y(T + 1);
    y[0] = n(gen);
    for (std::size_t t = 1; t <= T; ++t) y[t] = y[t - 1] + n(gen);
    return y;
}

// Solves A b = c by Gauss-Jordan elimination with partial pivoting.
inline std::optional<std::vector<Real>> solve(std::vector<std::vector<Real>> A, std::vector<Real> c) {
    const std::size_t n = c.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
        }
        if (std::fabs(A[piv][col]) < 1e-300L) return std::nullopt;
        std::swap(A[piv], A[col]);
        std::swap(c[piv], c[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const Real f = A[r][col] / A[col][col];
            for (std::size_t k = col; k < n; ++k) A[r][k] -= f * A[col][k];
            c[r] -= f * c[col];
        }
    }
    for (std::size_t r = 0; r < n; ++r) c[r] /= A[r][r];
    return c;
}

inline std::optional<std::vector<std::vector<Real>>> invert(const std::vector<std::vector<Real>>& A) {
    const std::size_t n = A.size();
    std::vector<std::vector<Real>> inv(n, std::vector<Real>(n));
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<Real> e(n, 0.0L);
        e[j] = 1.0L;
        auto col = solve(A, e);
        if (!col) return std::nullopt;
        for (std::size_t i = 0; i < n; ++i) inv[i][j] = (*col)[i];
    }
    return inv;
}

/// t-ratio of the lagged level in dy_t on [y_{t-1} - origin, (1), dy_{t-1..t-k}]
/// over t = m1+k+1..m2, via the normal equations. Empty when the fit is exact.
inline std::optional<double> adf(const std::vector<double>& y, std::size_t m1, std::size_t m2, bool intercept,
                                 std::size_t lags = 0) {
    const Real origin = intercept ? 0.0L : static_cast<Real>(y[0]);
    std::vector<std::vector<Real>> rows;
    std::vector<Real> d;
    for (std::size_t t = m1 + lags + 1; t <= m2; ++t) {
        std::vector<Real> row;
        row.push_back(static_cast<Real>(y[t - 1]) - origin);
        if (intercept) row.push_back(1.0L);
        for (std::size_t j = 1; j <= lags; ++j) row.push_back(static_cast<Real>(y[t - j]) - y[t - j - 1]);
        rows.push_back(row);
        d.push_back(static_cast<Real>(y[t]) - y[t - 1]);
    }
    const std::size_t p = rows.front().size();
    const std::size_t n = rows.size();
    if (n <= p) return std::nullopt;
    std::vector<std::vector<Real>> xtx(p, std::vector<Real>(p, 0.0L));
    std::vector<Real> xtd(p, 0.0L);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < p; ++i) {
            xtd[i] += rows[r][i] * d[r];
            for (std::size_t j = 0; j < p; ++j) xtx[i][j] += rows[r][i] * rows[r][j];
        }
    }
    auto inv = invert(xtx);
    if (!inv) return std::nullopt;
    std::vector<Real> beta(p, 0.0L);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) beta[i] += (*inv)[i][j] * xtd[j];
    }
    Real ssr = 0.0L;
    for (std::size_t r = 0; r < n; ++r) {
        Real fitted = 0.0L;
        for (std::size_t i = 0; i < p; ++i) fitted += rows[r][i] * beta[i];
        ssr += (d[r] - fitted) * (d[r] - fitted);
    }
    if (!(ssr > 0.0L)) return std::nullopt;
    const Real sigma2 = ssr / static_cast<Real>(n - p);
    return static_cast<double>(beta[0] / std::sqrt(sigma2 * (*inv)[0][0]));
}

inline Real tadf(const std::vector<double>& yt, double w2, std::size_t m1, std::size_t m2) {
    Real den = 0.0L;
    for (std::size_t t = m1 + 1; t <= m2; ++t) den += static_cast<Real>(yt[t - 1]) * yt[t - 1];
    const Real num = static_cast<Real>(yt[m2]) * yt[m2] - static_cast<Real>(yt[m1]) * yt[m1] -
                     static_cast<Real>(w2) * static_cast<Real>(m2 - m1);
    return num / (2.0L * std::sqrt(static_cast<Real>(w2)) * std::sqrt(den));
}

struct Sup {
    double value = -std::numeric_limits<double>::infinity();
    std::size_t m1 = 0;
    std::size_t m2 = 0;
};

/// Exhaustive enumeration of windows (m1, m2] with m2 - m1 >= floor(r0 T),
/// m1 = 0 only unless `generalized`. First maximum in (m1, m2) order wins.
template <typename Stat>
Sup enumerate(std::size_t T, double r0, bool generalized, Stat&& stat) {
    const auto w = static_cast<std::size_t>(std::floor(r0 * static_cast<double>(T) + 1e-9));
    Sup best;
    bool found = false;
    for (std::size_t m1 = 0; m1 + w <= T; ++m1) {
        if (!generalized && m1 > 0) break;
        for (std::size_t m2 = m1 + w; m2 <= T; ++m2) {
            const std::optional<double> v = stat(m1, m2);
            if (!v) continue;
            if (!found || *v > best.value) {
                found = true;
                best = {*v, m1, m2};
            }
        }
    }
    return best;
}

inline Sup sup_adf(const std::vector<double>& y, double r0, bool intercept, bool generalized) {
    return enumerate(y.size() - 1, r0, generalized,
                     [&](std::size_t a, std::size_t b) { return adf(y, a, b, intercept); });
}

// ---------------------------------------------------------------------------
// Time-transformed pipeline, written directly from its definitions.

inline Real uniform_or_gauss(bool gaussian, Real u) {
    if (std::fabs(u) > 1.0L + 1e-12L) return 0.0L;
    u = std::clamp(u, -1.0L, 1.0L);
    return gaussian ? std::exp(-0.5L * u * u) : 1.0L;
}

/// delta_t for t = 1..T with observation `skip` (1-based, 0 = none) removed.
inline Real local_delta_at(const std::vector<Real>& yc, std::size_t t, Real h, bool gaussian,
                           std::size_t skip = 0) {
    const std::size_t T = yc.size() - 1;
    Real num = 0.0L, den = 0.0L;
    for (std::size_t i = 1; i <= T; ++i) {
        if (i == skip) continue;
        const Real w = uniform_or_gauss(gaussian, (static_cast<Real>(i) - static_cast<Real>(t)) /
                                                      (static_cast<Real>(T) * h));
        num += w * yc[i - 1] * (yc[i] - yc[i - 1]);
        den += w * yc[i - 1] * yc[i - 1];
    }
    return den > 0.0L ? num / den : 0.0L;
}

inline Real loo(const std::vector<Real>& yc, Real h, bool gaussian) {
    const std::size_t T = yc.size() - 1;
    Real ssr = 0.0L;
    for (std::size_t t = 1; t <= T; ++t) {
        const Real e = (yc[t] - yc[t - 1]) - local_delta_at(yc, t, h, gaussian, t) * yc[t - 1];
        ssr += e * e;
    }
    return ssr;
}

struct PipelineTrace {
    Real h = 0.0L;
    Real psi = 0.0L;
    std::vector<Real> truncated;
    std::vector<std::size_t> index_map;
    std::vector<double> ytilde;
    double omega_bar_sq = 0.0;
};

inline PipelineTrace time_transform(const std::vector<double>& y, bool gaussian = false) {
    const std::size_t T = y.size() - 1;
    PipelineTrace out;
    std::vector<Real> yc(T + 1);
    for (std::size_t t = 0; t <= T; ++t) yc[t] = static_cast<Real>(y[t]) - y[0];

    // Bandwidth: 15 log-spaced points between T^-0.5 and T^-0.3, smallest wins ties.
    const Real logT = std::log(static_cast<Real>(T));
    Real best = std::numeric_limits<Real>::infinity();
    for (int j = 0; j < 15; ++j) {
        const Real h = std::exp(logT * (-0.5L + 0.2L * static_cast<Real>(j) / 14.0L));
        const Real c = loo(yc, h, gaussian);
        if (c < best * (1.0L - 1e-9L)) {
            best = c;
            out.h = h;
        }
    }

    std::vector<Real> resid(T);
    for (std::size_t t = 1; t <= T; ++t) {
        resid[t - 1] = (yc[t] - yc[t - 1]) - local_delta_at(yc, t, out.h, gaussian) * yc[t - 1];
    }

    // Largest rolling standard deviation over windows of floor(0.1 T) + 1 residuals.
    const std::size_t w = T / 10;
    Real sigma_bar = 0.0L;
    for (std::size_t s = 0; s + w < T; ++s) {
        Real mean = 0.0L;
        for (std::size_t i = s; i <= s + w; ++i) mean += resid[i];
        mean /= static_cast<Real>(w + 1);
        Real ss = 0.0L;
        for (std::size_t i = s; i <= s + w; ++i) ss += (resid[i] - mean) * (resid[i] - mean);
        sigma_bar = std::max(sigma_bar, std::sqrt(ss / static_cast<Real>(w)));
    }
    out.psi = sigma_bar * std::pow(static_cast<Real>(T), 1.0L / 7.0L);
    out.truncated.resize(T);
    for (std::size_t t = 0; t < T; ++t) out.truncated[t] = std::fabs(resid[t]) < out.psi ? resid[t] : 0.0L;

    // eta at knots and its generalized inverse by linear search.
    std::vector<Real> cum(T + 1, 0.0L);
    for (std::size_t t = 1; t <= T; ++t) cum[t] = cum[t - 1] + out.truncated[t - 1] * out.truncated[t - 1];
    const Real total = cum[T];
    out.omega_bar_sq = static_cast<double>(total / static_cast<Real>(T));
    out.index_map.resize(T + 1);
    out.ytilde.resize(T + 1);
    for (std::size_t t = 0; t <= T; ++t) {
        const Real target = total * static_cast<Real>(t) / static_cast<Real>(T);
        Real u = 0.0L;
        if (t == T) {
            u = static_cast<Real>(T);
        } else if (t > 0) {
            std::size_t k = 1;
            while (cum[k] < target * (1.0L - 1e-15L)) ++k;
            u = static_cast<Real>(k - 1) + std::clamp((target - cum[k - 1]) / (cum[k] - cum[k - 1]), 0.0L, 1.0L);
            if (std::fabs(cum[k] - target) <= 1e-15L * total) u = static_cast<Real>(k);
        }
        out.index_map[t] = static_cast<std::size_t>(std::floor(u));
        out.ytilde[t] = y[out.index_map[t]] - y[0];
    }
    return out;
}

inline Sup stadf(const std::vector<double>& y, double r0, bool generalized) {
    const PipelineTrace tr = time_transform(y);
    return enumerate(y.size() - 1, r0, generalized, [&](std::size_t a, std::size_t b) -> std::optional<double> {
        Real den = 0.0L;
        for (std::size_t t = a + 1; t <= b; ++t) den += static_cast<Real>(tr.ytilde[t - 1]) * tr.ytilde[t - 1];
        if (!(den > 0.0L)) return std::nullopt;
        return static_cast<double>(tadf(tr.ytilde, tr.omega_bar_sq, a, b));
    });
}

inline double rel_diff(double a, double b) {
    return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-300});
}

}  // namespace oracle
