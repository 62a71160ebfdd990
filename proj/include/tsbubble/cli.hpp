#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tsbubble/inference.hpp"
#include "tsbubble/montecarlo.hpp"

namespace tsbubble::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,         ///< bad flags, invalid or unknown config keys
    kParse = 3,         ///< malformed input file
    kPrecondition = 4,  ///< too-short series and similar
    kDegenerate = 5,    ///< a statistic could not be formed
};

struct TestCommandOptions {
    std::filesystem::path input;
    std::optional<std::string> date_col;
    std::optional<std::string> value_col;
    std::vector<TestKind> tests{TestKind::SADF, TestKind::SADF_b, TestKind::STADF};
    double r0 = 0.1;
    std::size_t B = 999;
    std::uint64_t seed = 42;
    int threads = 0;
    std::filesystem::path out = "tsbubble_out";
    std::set<std::string> formats{"csv"};
    bool force = false;
    bool log_levels = false;
    Kernel kernel = Kernel::Uniform;
    NullSimulationOptions null_sadf{2000, 100000, 20240101, 0};
    NullSimulationOptions null_gsadf{400, 5000, 20240102, 0};
    std::filesystem::path cache_dir = default_cache_dir();
};

struct ReportRow {
    TestKind test = TestKind::SADF;
    double statistic = 0.0;
    double p_value = 1.0;
    std::string window_start;  ///< label of the first observation in the argmax window
    std::string window_end;
    double r1 = 0.0;
    double r2 = 0.0;
};

struct TestReport {
    std::string series;
    std::size_t observations = 0;
    double r0 = 0.0;
    std::vector<ReportRow> rows;
    std::vector<std::filesystem::path> files;
};

/// Run the selected tests on a CSV series and write the report files into
/// options.out: report.csv, summary.csv, profile.csv and, on request,
/// report.json and series.svg / profile.svg.
TestReport cmd_test(const TestCommandOptions& options, std::ostream& log);

struct SimulateCommandOptions {
    std::filesystem::path config;
    std::filesystem::path out = "tsbubble_out";
    bool timing = false;
    bool full_scale = false;  ///< 1000 replications
    std::size_t timing_repetitions = 25;
    int threads = 0;
    std::filesystem::path cache_dir = default_cache_dir();
};

/// Rejection table (rejections.csv, rejections.txt) or, with `timing`,
/// timing.csv for the config's T grid and tests.
std::vector<std::filesystem::path> cmd_simulate(const SimulateCommandOptions& options, std::ostream& log);

struct CritvalsCommandOptions {
    NullFamily family = NullFamily::SadfGls;
    double r0 = 0.1;
    NullSimulationOptions sim{2000, 100000, 20240101, 0};
    bool force = false;
    std::filesystem::path cache_dir = default_cache_dir();
};

/// Simulate (or load) a null distribution and print its 10/5/1% critical values.
CachedNull cmd_critvals(const CritvalsCommandOptions& options, std::ostream& log);

/// Parse argv, dispatch, and map exceptions to exit codes.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace tsbubble::cli
