#include "tsbubble/kernel_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "tsbubble/errors.hpp"

namespace tsbubble {

namespace {

// Lagged levels x_t = y_{t-1} and differences dy_t, t = 1..T (stored at
// index t - 1).
struct Regressors {
    std::vector<double> x;
    std::vector<double> dy;
};

Regressors make_regressors(std::span<const double> y) {
    const std::size_t T = y.size() - 1;
    Regressors r;
    r.x.resize(T);
    r.dy.resize(T);
    for (std::size_t t = 1; t <= T; ++t) {
        r.x[t - 1] = y[t - 1];
        r.dy[t - 1] = y[t] - y[t - 1];
    }
    return r;
}

constexpr double kBoundaryTolerance = 1e-12;

std::size_t window_radius(std::size_t T, double h) {
    const double radius = std::ceil(h * static_cast<double>(T));
    if (radius >= static_cast<double>(T)) return T;
    return static_cast<std::size_t>(radius);
}

// Kernel-weighted sums sum_i G((i - t)/(T h)) x_i^2 and x_i dy_i for each t.
template <typename Visit>
void weighted_sums(const Regressors& r, Kernel kernel, double h, Visit&& visit) {
    const std::size_t T = r.x.size();
    const std::size_t radius = window_radius(T, h);
    const double scale = static_cast<double>(T) * h;
    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t lo = t > radius ? t - radius : 0;
        const std::size_t hi = std::min(T - 1, t + radius);
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = lo; i <= hi; ++i) {
            const double dist = static_cast<double>(i > t ? i - t : t - i);
            // A lag on the support boundary up to rounding (T h integral) counts as inside.
            const double u = dist / scale;
            const double w = kernel_weight(kernel, u > 1.0 && u <= 1.0 + kBoundaryTolerance ? 1.0 : u);
            if (w == 0.0) continue;
            num += w * r.x[i] * r.dy[i];
            den += w * r.x[i] * r.x[i];
        }
        visit(t, num, den);
    }
}

void require_bandwidth(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw InvalidSpecError(fmt::format("bandwidth must be positive, got {}", h));
    }
}

double sample_sd(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double e : v) mean += e;
    mean /= n;
    double ss = 0.0;
    for (double e : v) ss += (e - mean) * (e - mean);
    return std::sqrt(ss / (n - 1.0));
}

}  // namespace

double kernel_weight(Kernel kernel, double u) noexcept {
    if (!(u >= -1.0 && u <= 1.0)) return 0.0;
    switch (kernel) {
        case Kernel::Uniform:
            return 1.0;
        case Kernel::TruncatedGaussian:
            return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    }
    return 0.0;
}

std::string to_string(Kernel kernel) {
    return kernel == Kernel::Uniform ? "uniform" : "gaussian";
}

Kernel kernel_from_string(const std::string& name) {
    if (name == "uniform") return Kernel::Uniform;
    if (name == "gaussian" || name == "truncated_gaussian") return Kernel::TruncatedGaussian;
    throw InvalidSpecError("unknown kernel '" + name + "'");
}

LocalDelta local_delta(std::span<const double> y, Kernel kernel, double h) {
    if (y.size() < 4) {
        throw LengthError("local regression needs T >= 3");
    }
    require_bandwidth(h);
    const Regressors r = make_regressors(y);
    LocalDelta out;
    out.delta.resize(r.x.size());
    weighted_sums(r, kernel, h, [&](std::size_t t, double num, double den) {
        if (den > 0.0) {
            out.delta[t] = num / den;
        } else {
            out.delta[t] = 0.0;
            out.degenerate.push_back(t + 1);
        }
    });
    return out;
}

std::vector<double> bandwidth_grid(std::size_t T, std::size_t grid_size, double lo_exponent,
                                   double hi_exponent) {
    if (grid_size == 0) {
        throw InvalidSpecError("bandwidth grid must be nonempty");
    }
    const double n = static_cast<double>(T);
    const double lo = std::log(n) * lo_exponent;
    const double hi = std::log(n) * hi_exponent;
    std::vector<double> grid(grid_size);
    for (std::size_t j = 0; j < grid_size; ++j) {
        const double frac = grid_size == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(grid_size - 1);
        grid[j] = std::exp(lo + frac * (hi - lo));
    }
    return grid;
}

double loo_criterion(std::span<const double> y, Kernel kernel, double h) {
    require_bandwidth(h);
    const Regressors r = make_regressors(y);
    const double self_weight = kernel_weight(kernel, 0.0);
    double ssr = 0.0;
    bool degenerate = false;
    weighted_sums(r, kernel, h, [&](std::size_t t, double num, double den) {
        const double x = r.x[t];
        const double den_loo = den - self_weight * x * x;
        const double num_loo = num - self_weight * x * r.dy[t];
        if (!(den_loo > 1e-12 * den)) {
            // Only observation t carries information in its own window.
            if (x != 0.0) degenerate = true;
            ssr += r.dy[t] * r.dy[t];
            return;
        }
        const double e = r.dy[t] - (num_loo / den_loo) * x;
        ssr += e * e;
    });
    return degenerate ? std::numeric_limits<double>::infinity() : ssr;
}

BandwidthSelection select_bandwidth(std::span<const double> y, Kernel kernel, std::size_t grid_size,
                                    double lo_exponent, double hi_exponent) {
    if (y.size() < 11) {
        throw LengthError("bandwidth selection needs T >= 10");
    }
    const std::size_t T = y.size() - 1;
    BandwidthSelection sel;
    sel.grid = bandwidth_grid(T, grid_size, lo_exponent, hi_exponent);
    sel.criteria.reserve(sel.grid.size());

    double scale = 0.0;
    for (std::size_t t = 1; t <= T; ++t) scale += (y[t] - y[t - 1]) * (y[t] - y[t - 1]);
    const double tie = 1e-12 * scale;

    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = sel.grid.size();
    for (std::size_t j = 0; j < sel.grid.size(); ++j) {
        const double c = loo_criterion(y, kernel, sel.grid[j]);
        sel.criteria.push_back(c);
        if (std::isfinite(c) && (best_index == sel.grid.size() || c < best - tie)) {
            best = c;
            best_index = j;
        }
    }
    if (best_index == sel.grid.size()) {
        sel.all_degenerate = true;
        sel.h = sel.grid.back();
    } else {
        sel.h = sel.grid[best_index];
    }
    return sel;
}

TruncationThreshold truncation_threshold(std::span<const double> residuals, double psi_exponent) {
    const std::size_t T = residuals.size();
    if (T < 2) {
        throw LengthError("truncation threshold needs at least two residuals");
    }
    TruncationThreshold out;
    if (T < 20) {
        out.single_window = true;
        out.sigma_bar = sample_sd(residuals);
    } else {
        const std::size_t w = T / 10;
        for (std::size_t s = 0; s + w < T; ++s) {
            out.sigma_bar = std::max(out.sigma_bar, sample_sd(residuals.subspan(s, w + 1)));
        }
    }
    if (!(out.sigma_bar > 0.0)) {
        throw DegenerateError("residual standard deviation is zero in every window; truncation threshold undefined");
    }
    out.psi = out.sigma_bar * std::pow(static_cast<double>(T), psi_exponent);
    return out;
}

LocalFitResult fit(std::span<const double> y, const FitOptions& options) {
    if (y.size() < 11) {
        throw LengthError("local fit needs T >= 10");
    }
    LocalFitResult out;
    if (options.bandwidth) {
        require_bandwidth(*options.bandwidth);
        out.bandwidth = *options.bandwidth;
    } else {
        const BandwidthSelection sel = select_bandwidth(y, options.kernel, options.grid_size,
                                                        options.h_lo_exponent, options.h_hi_exponent);
        out.bandwidth = sel.h;
        out.bandwidth_fallback = sel.all_degenerate;
    }

    LocalDelta ld = local_delta(y, options.kernel, out.bandwidth);
    out.delta_hat = std::move(ld.delta);
    out.degenerate_windows = std::move(ld.degenerate);

    const std::size_t T = y.size() - 1;
    out.residuals.resize(T);
    for (std::size_t t = 1; t <= T; ++t) {
        out.residuals[t - 1] = (y[t] - y[t - 1]) - out.delta_hat[t - 1] * y[t - 1];
    }

    const bool exact_fit = std::all_of(out.residuals.begin(), out.residuals.end(),
                                       [](double e) { return e == 0.0; });
    if (exact_fit) {
        // Nothing to truncate; the all-zero residuals surface later as a
        // degenerate variance profile.
        out.truncated_residuals.assign(T, 0.0);
        return out;
    }
    const TruncationThreshold thr = truncation_threshold(out.residuals, options.psi_exponent);
    out.psi = thr.psi;
    out.sigma_bar = thr.sigma_bar;
    out.threshold_fallback = thr.single_window;

    out.truncated_residuals.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        const double e = out.residuals[t];
        if (std::abs(e) < out.psi) {
            out.truncated_residuals[t] = e;
        } else {
            out.truncated_residuals[t] = 0.0;
            ++out.truncated_count;
        }
    }
    return out;
}

}  // namespace tsbubble
