#include "tsbubble/dgp.hpp"

#include <cmath>

#include <fmt/format.h>

#include "tsbubble/errors.hpp"

namespace tsbubble {

namespace {

std::size_t regime_index(double tau, std::size_t length) {
    return static_cast<std::size_t>(std::floor(tau * static_cast<double>(length)));
}

}  // namespace

void BubbleSpec::validate() const {
    if (!(delta1 >= 0.0) || !(delta2 >= 0.0)) {
        throw InvalidSpecError("bubble increments must be nonnegative");
    }
    if (delta1 > 0.0 && !(0.0 <= tau1 && tau1 < tau2 && tau2 <= tau3 && tau3 <= 1.0)) {
        throw InvalidSpecError("bubble dates must satisfy 0 <= tau1 < tau2 <= tau3 <= 1");
    }
    if (!std::isfinite(mu)) {
        throw InvalidSpecError("drift must be finite");
    }
}

void VolatilitySpec::validate() const {
    if (!(sigma0 > 0.0) || !(sigma1 > 0.0) || !std::isfinite(sigma0) || !std::isfinite(sigma1)) {
        throw InvalidSpecError("volatility levels must be positive and finite");
    }
    if (kind == VolatilityKind::SingleShift && !(tau_sigma >= 0.0 && tau_sigma <= 1.0)) {
        throw InvalidSpecError("volatility break date must lie in [0, 1]");
    }
}

std::string VolatilitySpec::label() const {
    if (kind == VolatilityKind::SingleShift) {
        return fmt::format("single({:g})", tau_sigma);
    }
    return to_string(kind);
}

void DgpSpec::validate() const {
    bubble.validate();
    vol.validate();
    if (length < 1) {
        throw InvalidSpecError("series length must be positive");
    }
}

double volatility_at(const VolatilitySpec& vol, double s) {
    vol.validate();
    if (!(s >= 0.0 && s <= 1.0)) {
        throw InvalidSpecError(fmt::format("volatility evaluated outside [0, 1]: {}", s));
    }
    const double jump = vol.sigma1 - vol.sigma0;
    switch (vol.kind) {
        case VolatilityKind::Constant:
            return vol.sigma0;
        case VolatilityKind::SingleShift:
            return vol.sigma0 + jump * (s > vol.tau_sigma ? 1.0 : 0.0);
        case VolatilityKind::DoubleShift:
            return vol.sigma0 + jump * ((s > 0.4 && s <= 0.6) ? 1.0 : 0.0);
        case VolatilityKind::LogisticTransition:
            return vol.sigma0 + jump / (1.0 + std::exp(-50.0 * (s - 0.5)));
        case VolatilityKind::Trending:
            return vol.sigma0 + jump * s;
    }
    throw InvalidSpecError("unknown volatility kind");
}

double ar_coefficient(const BubbleSpec& bubble, std::size_t t, std::size_t length) {
    if (bubble.is_null()) {
        return 1.0;
    }
    const std::size_t t1 = regime_index(bubble.tau1, length);
    const std::size_t t2 = regime_index(bubble.tau2, length);
    const std::size_t t3 = regime_index(bubble.tau3, length);
    if (t <= t1) return 1.0;
    if (t <= t2) return 1.0 + bubble.delta1;
    if (t <= t3) return 1.0 - bubble.delta2;
    return 1.0;
}

SimulatedPath simulate_with_innovations(const DgpSpec& spec, const InnovationSampler& sampler) {
    spec.validate();
    Rng rng(spec.seed);
    auto draw = [&]() { return sampler ? sampler(rng) : rng.normal(); };

    const std::size_t T = spec.length;
    SimulatedPath path;
    path.y.resize(T + 1);
    path.eps.resize(T + 1);

    double u = draw();
    path.eps[0] = u;
    path.y[0] = spec.bubble.mu + u;
    for (std::size_t t = 1; t <= T; ++t) {
        const double sigma = volatility_at(spec.vol, static_cast<double>(t) / static_cast<double>(T));
        const double eps = sigma * draw();
        const double phi = ar_coefficient(spec.bubble, t, T);
        u = (phi == 1.0) ? u + eps : phi * u + eps;
        path.eps[t] = eps;
        path.y[t] = spec.bubble.mu + u;
    }
    return path;
}

std::vector<double> simulate(const DgpSpec& spec) { return simulate_with_innovations(spec).y; }

std::string to_string(VolatilityKind kind) {
    switch (kind) {
        case VolatilityKind::Constant: return "constant";
        case VolatilityKind::SingleShift: return "single";
        case VolatilityKind::DoubleShift: return "double";
        case VolatilityKind::LogisticTransition: return "logistic";
        case VolatilityKind::Trending: return "trending";
    }
    return "unknown";
}

VolatilityKind volatility_kind_from_string(const std::string& name) {
    if (name == "constant") return VolatilityKind::Constant;
    if (name == "single") return VolatilityKind::SingleShift;
    if (name == "double") return VolatilityKind::DoubleShift;
    if (name == "logistic") return VolatilityKind::LogisticTransition;
    if (name == "trending") return VolatilityKind::Trending;
    throw InvalidSpecError("unknown volatility kind '" + name + "'");
}

}  // namespace tsbubble
