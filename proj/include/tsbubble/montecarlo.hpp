#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tsbubble/dgp.hpp"
#include "tsbubble/inference.hpp"
#include "tsbubble/kernel_regression.hpp"

namespace tsbubble {

/// Tests the harness can run. SADF and GSADF are intercept-demeaned;
/// SADF_b is the wild-bootstrap SADF.
enum class TestKind { SADF, SADF_b, STADF, GSADF, GSTADF };

std::string to_string(TestKind kind);
TestKind test_kind_from_string(const std::string& name);

struct ExperimentConfig {
    std::vector<std::size_t> T_list{100, 200};
    std::vector<double> delta1_grid{0.0, 0.02, 0.04, 0.06, 0.08, 0.10};
    std::vector<VolatilitySpec> vol_specs{VolatilitySpec{}};
    std::vector<TestKind> tests{TestKind::SADF, TestKind::SADF_b, TestKind::STADF};
    std::size_t replications = 500;
    double level = 0.05;
    std::optional<double> r0_fixed;  ///< empty: r0 = 0.01 + 1.8 / sqrt(T)
    std::uint64_t master_seed = 1;
    std::size_t bootstrap_B = 199;
    double tau1 = 0.4;
    double tau2 = 0.6;
    Kernel kernel = Kernel::Uniform;
    NullSimulationOptions null_sadf{2000, 100000, 20240101, 0};
    NullSimulationOptions null_gsadf{400, 5000, 20240102, 0};
    std::filesystem::path cache_dir;  ///< empty: keep null distributions in memory only
    int threads = 0;

    [[nodiscard]] double r0_for(std::size_t T) const;
    void validate() const;
};

struct RejectionCell {
    VolatilitySpec vol;
    double delta1 = 0.0;
    std::size_t T = 0;
    TestKind test = TestKind::SADF;
    std::size_t rejections = 0;
    std::size_t valid = 0;     ///< replications where the test produced a decision
    std::size_t failures = 0;  ///< degenerate paths
    bool invalid = false;      ///< failures reached 1% of replications
    double frequency = 0.0;    ///< rejections / valid
    double critical_value = 0.0;  ///< NaN for bootstrap tests
};

struct RejectionTable {
    std::vector<RejectionCell> cells;  ///< grid order: vol, delta1, T, test
    std::size_t replications = 0;
    std::uint64_t master_seed = 0;
    double level = 0.05;
    double runtime_seconds = 0.0;

    [[nodiscard]] const RejectionCell& at(std::size_t vol_index, double delta1, std::size_t T, TestKind test,
                                          const ExperimentConfig& config) const;
};

/// Seed of replication r in the cell (vol, delta1, T). Independent of which
/// other cells or tests the experiment contains.
[[nodiscard]] std::uint64_t path_seed(const ExperimentConfig& config, const VolatilitySpec& vol, double delta1,
                                      std::size_t T, std::size_t replication);

/**
 * @brief Rejection frequencies over the full grid.
 *
 * Every test in a cell sees the same simulated paths. Asymptotic tests use
 * homoskedastic null quantiles at r0(T); SADF_b rejects when its bootstrap
 * p-value is below the level.
 */
[[nodiscard]] RejectionTable run_experiment(const ExperimentConfig& config);

/// One row per cell; no runtime field, so identical configs give identical text.
[[nodiscard]] std::string rejection_csv(const RejectionTable& table);

/// Rows (vol, ratio, delta1), column blocks per T, one column per test.
[[nodiscard]] std::string rejection_text(const RejectionTable& table, const ExperimentConfig& config);

struct TimingRow {
    std::size_t T = 0;
    TestKind test = TestKind::SADF;
    std::size_t repetitions = 0;
    double median_seconds = 0.0;
};

/// Median wall-clock time of each test on pure random walks.
[[nodiscard]] std::vector<TimingRow> run_timing(const std::vector<std::size_t>& T_list,
                                                const std::vector<TestKind>& tests, std::size_t repetitions,
                                                std::size_t bootstrap_B = 199, std::uint64_t seed = 7);

[[nodiscard]] std::string timing_csv(const std::vector<TimingRow>& rows);

}  // namespace tsbubble
