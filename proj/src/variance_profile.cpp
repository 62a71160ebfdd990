#include "tsbubble/variance_profile.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "tsbubble/errors.hpp"

namespace tsbubble {

namespace {

// Cumulative masses within this relative distance of a target count as equal,
// so that floating-point noise in running sums cannot push an exact knot hit
// into the preceding segment.
constexpr double kKnotTolerance = 1e-12;

void require_fraction(double s) {
    if (!(s >= 0.0 && s <= 1.0)) {
        throw InvalidSpecError(fmt::format("fraction outside [0, 1]: {}", s));
    }
}

}  // namespace

VarianceProfile::VarianceProfile(std::vector<double> increments) : increments_(std::move(increments)) {
    if (increments_.empty()) {
        throw LengthError("variance profile needs at least one increment");
    }
    cumulative_.resize(increments_.size() + 1);
    cumulative_[0] = 0.0;
    for (std::size_t t = 0; t < increments_.size(); ++t) {
        if (!(increments_[t] >= 0.0) || !std::isfinite(increments_[t])) {
            throw InvalidSpecError("variance profile increments must be finite and nonnegative");
        }
        cumulative_[t + 1] = cumulative_[t] + increments_[t];
    }
    total_ = cumulative_.back();
    if (!(total_ > 0.0)) {
        throw DegenerateError("variance profile is degenerate: all increments are zero");
    }
}

VarianceProfile VarianceProfile::from_residuals(std::span<const double> residuals) {
    std::vector<double> sq(residuals.size());
    std::transform(residuals.begin(), residuals.end(), sq.begin(), [](double e) { return e * e; });
    return VarianceProfile(std::move(sq));
}

VarianceProfile VarianceProfile::from_squared_increments(std::vector<double> increments) {
    return VarianceProfile(std::move(increments));
}

VarianceProfile VarianceProfile::from_volatility(const VolatilitySpec& vol, std::size_t T) {
    std::vector<double> sq(T);
    for (std::size_t t = 1; t <= T; ++t) {
        const double w = volatility_at(vol, static_cast<double>(t) / static_cast<double>(T));
        sq[t - 1] = w * w;
    }
    return VarianceProfile(std::move(sq));
}

double VarianceProfile::eta(double s) const {
    require_fraction(s);
    const double n = static_cast<double>(length());
    const double st = s * n;
    const auto k = static_cast<std::size_t>(std::floor(st));
    if (k >= length()) return 1.0;
    const double mass = cumulative_[k] + (st - static_cast<double>(k)) * increments_[k];
    return mass / total_;
}

double VarianceProfile::inverse_scaled(double target) const {
    if (target <= 0.0) return 0.0;
    const double tol = kKnotTolerance * total_;
    // Smallest knot k with cumulative_[k] >= target - tol.
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target - tol);
    if (it == cumulative_.end()) return static_cast<double>(length());
    const auto k = static_cast<std::size_t>(it - cumulative_.begin());
    if (std::abs(cumulative_[k] - target) <= tol || k == 0) {
        return static_cast<double>(k);
    }
    // target lies strictly inside segment (k-1, k], whose increment is positive.
    const double frac = (target - cumulative_[k - 1]) / increments_[k - 1];
    return static_cast<double>(k - 1) + std::clamp(frac, 0.0, 1.0);
}

double VarianceProfile::inverse(double s) const {
    require_fraction(s);
    if (s == 1.0) return 1.0;
    return inverse_scaled(s * total_) / static_cast<double>(length());
}

std::size_t VarianceProfile::inverse_index(std::size_t t) const {
    const std::size_t T = length();
    if (t > T) {
        throw InvalidSpecError("inverse index beyond the profile length");
    }
    if (t == T) return T;
    const double target = total_ * static_cast<double>(t) / static_cast<double>(T);
    const double scaled = inverse_scaled(target);
    return std::min(T, static_cast<std::size_t>(std::floor(scaled)));
}

std::vector<std::pair<double, double>> VarianceProfile::knots() const {
    const std::size_t T = length();
    std::vector<std::pair<double, double>> out(T + 1);
    for (std::size_t t = 0; t <= T; ++t) {
        out[t] = {static_cast<double>(t) / static_cast<double>(T), cumulative_[t] / total_};
    }
    out.back().second = 1.0;
    return out;
}

VarianceProfile estimate_profile(const LocalFitResult& fit) {
    return VarianceProfile::from_residuals(fit.truncated_residuals);
}

double inverse_profile(const VarianceProfile& profile, double s) { return profile.inverse(s); }

TransformedSeries transform(std::span<const double> y, const VarianceProfile& profile) {
    const std::size_t T = profile.length();
    if (y.size() != T + 1) {
        throw LengthError(fmt::format("profile built for T = {} applied to a series of {} points", T, y.size()));
    }
    TransformedSeries out;
    out.values.resize(T + 1);
    out.index_map.resize(T + 1);
    for (std::size_t t = 0; t <= T; ++t) {
        const std::size_t src = profile.inverse_index(t);
        out.index_map[t] = src;
        out.values[t] = y[src] - y[0];
    }
    return out;
}

}  // namespace tsbubble
