// Python bindings for the weighted-quantile estimators, variance formulas
// and the Monte Carlo driver.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <vector>

#include "dimed/distributions.hpp"
#include "dimed/errors.hpp"
#include "dimed/frame.hpp"
#include "dimed/quantile.hpp"
#include "dimed/simulation.hpp"
#include "dimed/variance.hpp"
#include "dimed/version.hpp"

namespace py = pybind11;
using namespace dimed;

namespace {

WeightedSample make_sample(std::vector<double> values, std::vector<double> weights) {
    WeightedSample s;
    s.values = std::move(values);
    s.weights = std::move(weights);
    return s;
}

PopulationFrame make_frame(const std::vector<double>& x,
                           const std::vector<std::optional<double>>& pi,
                           const std::vector<bool>& alpha, const std::vector<bool>& delta,
                           std::optional<std::int64_t> n) {
    PopulationFrame frame;
    const std::size_t rows = x.size();
    if (pi.size() != rows || alpha.size() != rows || delta.size() != rows) {
        throw InvalidInput("make_frame: x, pi, alpha and delta must have equal lengths");
    }
    frame.units.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        UnitRecord unit;
        unit.x = x[i];
        unit.pi = pi[i];
        unit.alpha = alpha[i];
        unit.delta = delta[i];
        frame.units.push_back(unit);
    }
    frame.n = n.value_or(static_cast<std::int64_t>(rows));
    frame.validate();
    return frame;
}

}  // namespace

PYBIND11_MODULE(_dimed, m) {
    m.doc() = "Design-based weighted quantile estimation integrating big data and survey data";
    m.attr("__version__") = kVersion;

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<Unavailable>(m, "Unavailable", PyExc_RuntimeError);

    py::class_<OrderedIndices>(m, "OrderedIndices")
        .def_readonly("l", &OrderedIndices::l)
        .def_readonly("u", &OrderedIndices::u)
        .def_readonly("L", &OrderedIndices::L);

    py::class_<QuantileEstimate>(m, "QuantileEstimate")
        .def_readonly("indices", &QuantileEstimate::indices)
        .def_readonly("value", &QuantileEstimate::value)
        .def_readonly("lower_value", &QuantileEstimate::lower_value)
        .def_readonly("upper_value", &QuantileEstimate::upper_value)
        .def_readonly("total_weight", &QuantileEstimate::total_weight)
        .def("__repr__", [](const QuantileEstimate& e) {
            return "<QuantileEstimate value=" + std::to_string(e.value) + ">";
        });

    m.def(
        "weighted_quantile",
        [](std::vector<double> values, std::vector<double> weights, double p, double gamma) {
            return weighted_quantile(make_sample(std::move(values), std::move(weights)),
                                     {p, gamma});
        },
        py::arg("values"), py::arg("weights"), py::arg("p") = 0.5, py::arg("gamma") = 0.5);
    m.def(
        "weighted_cdf",
        [](std::vector<double> values, std::vector<double> weights, double t) {
            return weighted_cdf(make_sample(std::move(values), std::move(weights)), t);
        },
        py::arg("values"), py::arg("weights"), py::arg("t"));
    m.def("check_loss", &check_loss, py::arg("y"), py::arg("w"), py::arg("theta"), py::arg("p"));
    m.def(
        "objective",
        [](std::vector<double> values, std::vector<double> weights, double theta, double p) {
            return objective(make_sample(std::move(values), std::move(weights)), theta, p);
        },
        py::arg("values"), py::arg("weights"), py::arg("theta"), py::arg("p"));
    m.def(
        "argmax_objective",
        [](std::vector<double> values, std::vector<double> weights, double p) {
            return argmax_objective(make_sample(std::move(values), std::move(weights)), p);
        },
        py::arg("values"), py::arg("weights"), py::arg("p"));
    m.def(
        "suboptimality_gap",
        [](std::vector<double> values, std::vector<double> weights, double p, double gamma) {
            return suboptimality_gap(make_sample(std::move(values), std::move(weights)),
                                     {p, gamma});
        },
        py::arg("values"), py::arg("weights"), py::arg("p") = 0.5, py::arg("gamma") = 0.5);

    py::class_<UnitRecord>(m, "UnitRecord")
        .def(py::init<>())
        .def_readwrite("x", &UnitRecord::x)
        .def_readwrite("pi", &UnitRecord::pi)
        .def_readwrite("alpha", &UnitRecord::alpha)
        .def_readwrite("delta", &UnitRecord::delta);

    py::class_<PopulationFrame>(m, "PopulationFrame")
        .def(py::init<>())
        .def_readwrite("units", &PopulationFrame::units)
        .def_readwrite("n", &PopulationFrame::n)
        .def("validate", &PopulationFrame::validate);

    m.def("make_frame", &make_frame, py::arg("x"), py::arg("pi"), py::arg("alpha"),
          py::arg("delta"), py::arg("n") = std::nullopt,
          "Build a population frame from per-unit columns; pi entries may be None.");

    py::enum_<EstimatorKind>(m, "EstimatorKind")
        .value("POPULATION", EstimatorKind::Population)
        .value("SURVEY", EstimatorKind::Survey)
        .value("INTEGRATED", EstimatorKind::Integrated);

    m.def("survey_weight", &survey_weight, py::arg("unit"));
    m.def("integrated_weight", &integrated_weight, py::arg("unit"));
    m.def(
        "estimate",
        [](const PopulationFrame& frame, EstimatorKind kind, double p, double gamma) {
            return estimate(frame, kind, {p, gamma});
        },
        py::arg("frame"), py::arg("kind") = EstimatorKind::Integrated, py::arg("p") = 0.5,
        py::arg("gamma") = 0.5);

    py::class_<VarianceInputs>(m, "VarianceInputs")
        .def(py::init<>())
        .def_readwrite("p", &VarianceInputs::p)
        .def_readwrite("density_at_quantile", &VarianceInputs::density_at_quantile)
        .def_readwrite("m_le_A", &VarianceInputs::m_le_A)
        .def_readwrite("m_gt_A", &VarianceInputs::m_gt_A)
        .def_readwrite("m_le_DI", &VarianceInputs::m_le_DI)
        .def_readwrite("m_gt_DI", &VarianceInputs::m_gt_DI);

    py::enum_<VarianceSource>(m, "VarianceSource")
        .value("ANALYTIC", VarianceSource::Analytic)
        .value("PLUG_IN", VarianceSource::PlugIn);

    py::class_<AsymptoticVariance>(m, "AsymptoticVariance")
        .def_readonly("p", &AsymptoticVariance::p)
        .def_readonly("density", &AsymptoticVariance::density)
        .def_readonly("V", &AsymptoticVariance::V)
        .def_readonly("delta_A", &AsymptoticVariance::delta_A)
        .def_readonly("V_A", &AsymptoticVariance::V_A)
        .def_readonly("delta_DI", &AsymptoticVariance::delta_DI)
        .def_readonly("V_DI", &AsymptoticVariance::V_DI)
        .def_readonly("di_gap", &AsymptoticVariance::di_gap)
        .def_readonly("bandwidth", &AsymptoticVariance::bandwidth)
        .def_readonly("source", &AsymptoticVariance::source);

    m.def("theoretical_variances", &theoretical_variances, py::arg("inputs"));
    m.def(
        "kde_density_at",
        [](std::vector<double> values, std::vector<double> weights, double point,
           std::optional<double> bandwidth) {
            KdeOptions options;
            options.bandwidth = bandwidth;
            return kde_density_at(make_sample(std::move(values), std::move(weights)), point,
                                  options);
        },
        py::arg("values"), py::arg("weights"), py::arg("point"),
        py::arg("bandwidth") = std::nullopt);
    py::enum_<DensityWeighting>(m, "DensityWeighting")
        .value("POPULATION", DensityWeighting::Population)
        .value("SURVEY", DensityWeighting::Survey)
        .value("INTEGRATED", DensityWeighting::Integrated);

    m.def(
        "plug_in_variances",
        [](const PopulationFrame& frame, double theta_hat, double p,
           std::optional<double> bandwidth, DensityWeighting weighting) {
            PlugInOptions options;
            options.bandwidth = bandwidth;
            options.density_weighting = weighting;
            return plug_in_variances(frame, theta_hat, p, options);
        },
        py::arg("frame"), py::arg("theta_hat"), py::arg("p") = 0.5,
        py::arg("bandwidth") = std::nullopt,
        py::arg("weighting") = DensityWeighting::Integrated);
    m.def("confidence_interval", &confidence_interval, py::arg("theta_hat"), py::arg("variance"),
          py::arg("n"), py::arg("level") = 0.95);

    py::class_<MomentTriple>(m, "MomentTriple")
        .def_readonly("population", &MomentTriple::population)
        .def_readonly("survey", &MomentTriple::survey)
        .def_readonly("integrated", &MomentTriple::integrated);
    m.def("weighted_moment_triple", &weighted_moment_triple, py::arg("frame"), py::arg("y"));

    py::class_<NormalDist>(m, "Normal")
        .def(py::init<double, double>(), py::arg("mu") = 0.0, py::arg("sigma") = 1.0)
        .def_readwrite("mu", &NormalDist::mu)
        .def_readwrite("sigma", &NormalDist::sigma);
    py::class_<LogNormalDist>(m, "LogNormal")
        .def(py::init<double, double>(), py::arg("mu") = 0.0, py::arg("sigma") = 1.0)
        .def_readwrite("mu", &LogNormalDist::mu)
        .def_readwrite("sigma", &LogNormalDist::sigma);
    py::class_<ExponentialDist>(m, "Exponential")
        .def(py::init<double>(), py::arg("rate") = 1.0)
        .def_readwrite("rate", &ExponentialDist::rate);
    py::class_<UniformDist>(m, "Uniform")
        .def(py::init<double, double>(), py::arg("a") = 0.0, py::arg("b") = 1.0)
        .def_readwrite("a", &UniformDist::a)
        .def_readwrite("b", &UniformDist::b);
    py::class_<BernoulliDist>(m, "Bernoulli")
        .def(py::init<double>(), py::arg("q") = 0.5)
        .def_readwrite("q", &BernoulliDist::q);

    m.def("true_quantile", &true_quantile, py::arg("superpopulation"), py::arg("p"));
    m.def("density", &density, py::arg("superpopulation"), py::arg("x"));

    py::class_<ConstantPi>(m, "ConstantPi")
        .def(py::init<double>(), py::arg("value") = 0.5)
        .def_readwrite("value", &ConstantPi::value);
    py::class_<LogisticPi>(m, "LogisticPi")
        .def(py::init<double, double>(), py::arg("a") = 0.0, py::arg("b") = 0.0)
        .def_readwrite("a", &LogisticPi::a)
        .def_readwrite("b", &LogisticPi::b);
    py::class_<ConstantDelta>(m, "ConstantDelta")
        .def(py::init<double>(), py::arg("value") = 0.5)
        .def_readwrite("value", &ConstantDelta::value);
    py::class_<LogisticDelta>(m, "LogisticDelta")
        .def(py::init<double, double>(), py::arg("a") = 0.0, py::arg("b") = 0.0)
        .def_readwrite("a", &LogisticDelta::a)
        .def_readwrite("b", &LogisticDelta::b);

    py::class_<DesignSpec>(m, "DesignSpec")
        .def(py::init<>())
        .def_readwrite("pi_model", &DesignSpec::pi_model)
        .def_readwrite("delta_model", &DesignSpec::delta_model)
        .def_readwrite("pi_min", &DesignSpec::pi_min)
        .def_readwrite("known_linkage_rate", &DesignSpec::known_linkage_rate)
        .def("informative", &DesignSpec::informative)
        .def("pi_at", &DesignSpec::pi_at, py::arg("x"))
        .def("delta_probability_at", &DesignSpec::delta_probability_at, py::arg("x"));

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("superpopulation", &SimConfig::superpopulation)
        .def_readwrite("design", &SimConfig::design)
        .def_readwrite("n", &SimConfig::n)
        .def_readwrite("replications", &SimConfig::replications)
        .def_readwrite("p", &SimConfig::p)
        .def_readwrite("gamma", &SimConfig::gamma)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("confidence_level", &SimConfig::confidence_level)
        .def_readwrite("compute_ci", &SimConfig::compute_ci)
        .def_readwrite("compute_gap", &SimConfig::compute_gap);

    py::class_<EstimatorSummary>(m, "EstimatorSummary")
        .def_readonly("mean_estimate", &EstimatorSummary::mean_estimate)
        .def_readonly("mean_scaled_error", &EstimatorSummary::mean_scaled_error)
        .def_readonly("var_scaled_error", &EstimatorSummary::var_scaled_error)
        .def_readonly("coverage", &EstimatorSummary::coverage);

    py::class_<SimResult>(m, "SimResult")
        .def_readonly("theta0", &SimResult::theta0)
        .def_readonly("n", &SimResult::n)
        .def_readonly("replications", &SimResult::replications)
        .def_readonly("seed", &SimResult::seed)
        .def_readonly("theoretical", &SimResult::theoretical)
        .def_readonly("theoretical_gap", &SimResult::theoretical_gap)
        .def_readonly("resampled", &SimResult::resampled)
        .def_readonly("di_gap_median", &SimResult::di_gap_median)
        .def("summary", [](const SimResult& r, EstimatorKind kind) {
            return r.by_kind[kind_index(kind)];
        }, py::arg("kind"));

    m.def("generate_frame", &generate_frame, py::arg("config"), py::arg("replication_index"),
          py::arg("attempt") = 0);
    m.def(
        "run_monte_carlo",
        [](const SimConfig& config, int threads) {
            py::gil_scoped_release release;
            return run_monte_carlo(config, threads);
        },
        py::arg("config"), py::arg("threads") = 0);
    m.def("design_variance_inputs", &design_variance_inputs, py::arg("superpopulation"),
          py::arg("design"), py::arg("p"));

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("n", &SweepRow::n)
        .def_readonly("median_abs_error", &SweepRow::median_abs_error)
        .def_readonly("median_survey_gap", &SweepRow::median_survey_gap)
        .def_readonly("median_integrated_gap", &SweepRow::median_integrated_gap)
        .def_readonly("resampled", &SweepRow::resampled);
    m.def(
        "consistency_sweep",
        [](const SimConfig& config, const std::vector<std::int64_t>& n_grid, int threads) {
            py::gil_scoped_release release;
            return consistency_sweep(config, n_grid, threads);
        },
        py::arg("config"), py::arg("n_grid"), py::arg("threads") = 0);
}
