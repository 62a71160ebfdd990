#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tsbubble/adf_stats.hpp"
#include "tsbubble/dgp.hpp"
#include "tsbubble/errors.hpp"
#include "tsbubble/inference.hpp"
#include "tsbubble/io.hpp"
#include "tsbubble/kernel_regression.hpp"
#include "tsbubble/montecarlo.hpp"
#include "tsbubble/variance_profile.hpp"

namespace py = pybind11;
using namespace tsbubble;

PYBIND11_MODULE(_tsbubble, m) {
    m.doc() = "Sup-ADF bubble tests robust to non-stationary volatility";

    py::register_exception<InvalidSpecError>(m, "InvalidSpecError", PyExc_ValueError);
    py::register_exception<LengthError>(m, "LengthError", PyExc_ValueError);
    py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_ArithmeticError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    py::enum_<VolatilityKind>(m, "VolatilityKind")
        .value("Constant", VolatilityKind::Constant)
        .value("SingleShift", VolatilityKind::SingleShift)
        .value("DoubleShift", VolatilityKind::DoubleShift)
        .value("LogisticTransition", VolatilityKind::LogisticTransition)
        .value("Trending", VolatilityKind::Trending);

    py::enum_<Demeaning>(m, "Demeaning").value("OLS", Demeaning::OLS).value("GLS", Demeaning::GLS);
    py::enum_<Kernel>(m, "Kernel")
        .value("Uniform", Kernel::Uniform)
        .value("TruncatedGaussian", Kernel::TruncatedGaussian);
    py::enum_<NullFamily>(m, "NullFamily")
        .value("SadfGls", NullFamily::SadfGls)
        .value("GsadfGls", NullFamily::GsadfGls)
        .value("SadfOls", NullFamily::SadfOls)
        .value("GsadfOls", NullFamily::GsadfOls);
    py::enum_<TestKind>(m, "TestKind")
        .value("SADF", TestKind::SADF)
        .value("SADF_b", TestKind::SADF_b)
        .value("STADF", TestKind::STADF)
        .value("GSADF", TestKind::GSADF)
        .value("GSTADF", TestKind::GSTADF);

    py::class_<VolatilitySpec>(m, "VolatilitySpec")
        .def(py::init([](VolatilityKind kind, double sigma0, double sigma1, double tau_sigma) {
                 VolatilitySpec v{kind, sigma0, sigma1, tau_sigma};
                 v.validate();
                 return v;
             }),
             py::arg("kind") = VolatilityKind::Constant, py::arg("sigma0") = 1.0, py::arg("sigma1") = 1.0,
             py::arg("tau_sigma") = 0.5)
        .def_readwrite("kind", &VolatilitySpec::kind)
        .def_readwrite("sigma0", &VolatilitySpec::sigma0)
        .def_readwrite("sigma1", &VolatilitySpec::sigma1)
        .def_readwrite("tau_sigma", &VolatilitySpec::tau_sigma)
        .def("omega", &volatility_at, py::arg("s"))
        .def_property_readonly("ratio", &VolatilitySpec::ratio)
        .def("__repr__", &VolatilitySpec::label);

    py::class_<BubbleSpec>(m, "BubbleSpec")
        .def(py::init<>())
        .def_readwrite("tau1", &BubbleSpec::tau1)
        .def_readwrite("tau2", &BubbleSpec::tau2)
        .def_readwrite("tau3", &BubbleSpec::tau3)
        .def_readwrite("delta1", &BubbleSpec::delta1)
        .def_readwrite("delta2", &BubbleSpec::delta2)
        .def_readwrite("mu", &BubbleSpec::mu);

    py::class_<DgpSpec>(m, "DgpSpec")
        .def(py::init<>())
        .def_readwrite("bubble", &DgpSpec::bubble)
        .def_readwrite("vol", &DgpSpec::vol)
        .def_readwrite("length", &DgpSpec::length)
        .def_readwrite("seed", &DgpSpec::seed);

    m.def("simulate", &simulate, py::arg("spec"), "Simulate y_0..y_T.");

    py::class_<TestResult>(m, "TestResult")
        .def_readonly("statistic", &TestResult::statistic)
        .def_readonly("start_index", &TestResult::start_index)
        .def_readonly("end_index", &TestResult::end_index)
        .def_readonly("r1", &TestResult::r1)
        .def_readonly("r2", &TestResult::r2)
        .def_readonly("r0", &TestResult::r0)
        .def_readonly("evaluated_windows", &TestResult::evaluated_windows)
        .def_readonly("skipped_windows", &TestResult::skipped_windows)
        .def("__repr__", [](const TestResult& r) {
            return "TestResult(" + to_string(r.family) + ", statistic=" + format_double(r.statistic) + ")";
        });

    m.def(
        "adf_window",
        [](const std::vector<double>& y, std::size_t m1, std::size_t m2, Demeaning d, std::size_t lags) {
            return adf_window_indices(y, m1, m2, d, lags);
        },
        py::arg("y"), py::arg("m1"), py::arg("m2"),
          py::arg("demeaning") = Demeaning::OLS, py::arg("lags") = 0);
    m.def(
        "sadf",
        [](const std::vector<double>& y, double r0, Demeaning d, std::size_t lags) { return sadf(y, r0, d, lags); },
        py::arg("y"), py::arg("r0"), py::arg("demeaning") = Demeaning::OLS, py::arg("lags") = 0);
    m.def(
        "gsadf",
        [](const std::vector<double>& y, double r0, Demeaning d, std::size_t lags) { return gsadf(y, r0, d, lags); },
        py::arg("y"), py::arg("r0"), py::arg("demeaning") = Demeaning::OLS, py::arg("lags") = 0);
    m.def("default_r0", &default_r0, py::arg("T"));
    m.def(
        "stadf",
        [](const std::vector<double>& y, double r0, Kernel kernel) {
            StadfOptions o;
            o.fit.kernel = kernel;
            return stadf(y, r0, o);
        },
        py::arg("y"), py::arg("r0"), py::arg("kernel") = Kernel::Uniform);
    m.def(
        "gstadf",
        [](const std::vector<double>& y, double r0, Kernel kernel) {
            StadfOptions o;
            o.fit.kernel = kernel;
            return gstadf(y, r0, o);
        },
        py::arg("y"), py::arg("r0"), py::arg("kernel") = Kernel::Uniform);

    py::class_<VarianceProfile>(m, "VarianceProfile")
        .def_static("from_residuals",
                    [](const std::vector<double>& e) { return VarianceProfile::from_residuals(e); })
        .def_static("from_volatility", &VarianceProfile::from_volatility, py::arg("vol"), py::arg("T"))
        .def_property_readonly("length", &VarianceProfile::length)
        .def_property_readonly("omega_bar_sq", &VarianceProfile::omega_bar_sq)
        .def("eta", &VarianceProfile::eta, py::arg("s"))
        .def("inverse", &VarianceProfile::inverse, py::arg("s"))
        .def("knots", &VarianceProfile::knots);

    m.def(
        "variance_profile",
        [](const std::vector<double>& y) { return time_transform(y).profile; }, py::arg("y"),
        "Estimated variance profile of a series.");
    m.def(
        "transformed_series",
        [](const std::vector<double>& y) {
            const TimeTransform tt = time_transform(y);
            return py::make_tuple(tt.transformed.values, tt.transformed.index_map, tt.omega_bar_sq);
        },
        py::arg("y"), "(ytilde, index_map, omega_bar_sq) of the feasible time deformation.");

    py::class_<NullSimulationOptions>(m, "NullSimulationOptions")
        .def(py::init([](std::size_t steps, std::size_t replications, std::uint64_t seed, int threads) {
                 return NullSimulationOptions{steps, replications, seed, threads};
             }),
             py::arg("steps") = 2000, py::arg("replications") = 100000, py::arg("seed") = 20240101,
             py::arg("threads") = 0)
        .def_readwrite("steps", &NullSimulationOptions::steps)
        .def_readwrite("replications", &NullSimulationOptions::replications)
        .def_readwrite("seed", &NullSimulationOptions::seed)
        .def_readwrite("threads", &NullSimulationOptions::threads);

    py::class_<NullDistribution>(m, "NullDistribution")
        .def_readonly("draws", &NullDistribution::draws)
        .def_readonly("r0", &NullDistribution::r0)
        .def("quantile", &NullDistribution::quantile, py::arg("q"))
        .def("critical_value", &NullDistribution::critical_value, py::arg("alpha"))
        .def("p_value", [](const NullDistribution& d, double s) { return p_value(d, s); }, py::arg("statistic"));

    m.def("simulate_null", &simulate_null, py::arg("family"), py::arg("r0"),
          py::arg("options") = NullSimulationOptions{}, py::call_guard<py::gil_scoped_release>());

    py::class_<BootstrapResult>(m, "BootstrapResult")
        .def_readonly("observed", &BootstrapResult::observed)
        .def_readonly("p_value", &BootstrapResult::p_value)
        .def_readonly("degenerate", &BootstrapResult::degenerate)
        .def_readonly("bootstrap_draws", &BootstrapResult::bootstrap_draws);

    m.def(
        "wild_bootstrap_sadf",
        [](const std::vector<double>& y, double r0, std::size_t B, std::uint64_t seed, Demeaning d) {
            return wild_bootstrap_sadf(y, r0, B, seed, d);
        },
        py::arg("y"), py::arg("r0"), py::arg("B") = 199,
          py::arg("seed") = 42, py::arg("demeaning") = Demeaning::OLS, py::call_guard<py::gil_scoped_release>());

    m.def(
        "run_experiment_json",
        [](const std::string& config_json) {
            const ExperimentConfig c = experiment_config_from_json(nlohmann::json::parse(config_json, nullptr, true, true));
            py::gil_scoped_release release;
            return rejection_csv(run_experiment(c));
        },
        py::arg("config_json"), "Run a Monte Carlo experiment from a JSON config; returns the rejection CSV.");
}
