#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tsbubble/rng.hpp"

namespace tsbubble {

/// Explosive episode followed by an optional collapse. delta1 = delta2 = 0
/// encodes the null of a pure (possibly heteroskedastic) random walk.
struct BubbleSpec {
    double tau1 = 0.4;    ///< explosive regime starts after floor(tau1 T)
    double tau2 = 0.6;    ///< collapse starts after floor(tau2 T)
    double tau3 = 0.6;    ///< collapse ends at floor(tau3 T)
    double delta1 = 0.0;  ///< explosive increment, AR coefficient 1 + delta1
    double delta2 = 0.0;  ///< collapse increment, AR coefficient 1 - delta2
    double mu = 0.0;      ///< level shift added to every observation

    [[nodiscard]] bool is_null() const noexcept { return delta1 == 0.0 && delta2 == 0.0; }
    void validate() const;
};

enum class VolatilityKind { Constant, SingleShift, DoubleShift, LogisticTransition, Trending };

/// Deterministic volatility function omega(s) on [0, 1].
struct VolatilitySpec {
    VolatilityKind kind = VolatilityKind::Constant;
    double sigma0 = 1.0;
    double sigma1 = 1.0;
    double tau_sigma = 0.5;  ///< break date, SingleShift only

    [[nodiscard]] double ratio() const noexcept { return sigma1 / sigma0; }
    void validate() const;
    /// Short human-readable descriptor, e.g. "single(0.5)".
    [[nodiscard]] std::string label() const;
};

struct DgpSpec {
    BubbleSpec bubble;
    VolatilitySpec vol;
    std::size_t length = 100;  ///< T; the generated path has T + 1 points
    std::uint64_t seed = 0;

    void validate() const;
};

/// Draws one innovation e_t. The default sampler is standard normal.
using InnovationSampler = std::function<double(Rng&)>;

/// Path together with its innovations, for checking the recursion.
struct SimulatedPath {
    std::vector<double> y;    ///< y_0 .. y_T
    std::vector<double> eps;  ///< eps_0 .. eps_T; eps_0 = u_0 = e_0
};

/// omega(s). Throws InvalidSpecError for non-positive sigmas or s outside [0, 1].
[[nodiscard]] double volatility_at(const VolatilitySpec& vol, double s);

/// AR coefficient in force at observation t (1-based) of a length-T path.
[[nodiscard]] double ar_coefficient(const BubbleSpec& bubble, std::size_t t, std::size_t length);

/**
 * @brief Generate y_0, ..., y_T from the four-regime bubble recursion.
 *
 * u_0 = e_0 is drawn first from the stream seeded by spec.seed, then for
 * t = 1..T, u_t = phi_t u_{t-1} + omega(t/T) e_t and y_t = mu + u_t.
 */
[[nodiscard]] std::vector<double> simulate(const DgpSpec& spec);

[[nodiscard]] SimulatedPath simulate_with_innovations(const DgpSpec& spec,
                                                      const InnovationSampler& sampler = {});

std::string to_string(VolatilityKind kind);
VolatilityKind volatility_kind_from_string(const std::string& name);

}  // namespace tsbubble
