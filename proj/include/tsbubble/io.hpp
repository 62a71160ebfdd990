#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tsbubble/dgp.hpp"
#include "tsbubble/montecarlo.hpp"

namespace tsbubble {

/// Observations with optional date labels (empty when the input had none).
struct TimeSeries {
    std::string name;
    std::vector<double> values;
    std::vector<std::string> dates;

    /// Label of observation i: its date, or the index when there are no dates.
    [[nodiscard]] std::string label(std::size_t i) const;
};

/**
 * Read one numeric column from a comma-separated file with a header row.
 * Without `value_col` the last column is used. Decimal points only; blank
 * lines are skipped. Throws ParseError with the offending line number.
 */
[[nodiscard]] TimeSeries read_csv_series(const std::filesystem::path& path,
                                         const std::optional<std::string>& date_col = std::nullopt,
                                         const std::optional<std::string>& value_col = std::nullopt);

/// Shortest representation that parses back to the same double (17 significant digits).
[[nodiscard]] std::string format_double(double v);

[[nodiscard]] nlohmann::json to_json(const VolatilitySpec& vol);
[[nodiscard]] nlohmann::json to_json(const DgpSpec& spec);
[[nodiscard]] DgpSpec dgp_spec_from_json(const nlohmann::json& j);
[[nodiscard]] VolatilitySpec volatility_from_json(const nlohmann::json& j);

/**
 * Experiment configuration from JSON (comments allowed). Keys:
 *   T, delta1, volatility, tests, replications, level, r0 ("formula" or a
 *   number), master_seed, bootstrap_B, tau1, tau2, kernel, null_steps,
 *   null_replications, null_seed, gsadf_null_steps, gsadf_null_replications,
 *   gsadf_null_seed.
 * Each volatility entry has kind, sigma0, sigma1 or ratio/ratios, tau_sigma.
 * Unknown keys raise InvalidSpecError listing all of them.
 */
[[nodiscard]] ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
[[nodiscard]] ExperimentConfig read_experiment_config(const std::filesystem::path& path);

/// Minimal static SVG line chart.
[[nodiscard]] std::string line_chart_svg(std::span<const double> x, std::span<const double> y,
                                         const std::string& title, const std::string& x_label,
                                         const std::string& y_label);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace tsbubble
