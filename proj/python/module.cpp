// Python bindings for the coxlab core: parameter validation, environments,
// crossing-probability estimation, and the inequality verifiers.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coxlab/analysis.hpp"
#include "coxlab/environment.hpp"
#include "coxlab/error.hpp"
#include "coxlab/percolation.hpp"
#include "coxlab/sampler.hpp"
#include "coxlab/svg.hpp"

namespace py = pybind11;
using namespace coxlab;

PYBIND11_MODULE(_coxlab, m) {
    m.doc() = "Cox percolation on random street systems";

    py::register_exception<Error>(m, "CoxlabError");

    py::enum_<Variant>(m, "Variant")
        .value("DEL", Variant::DEL)
        .value("DEL_GRID", Variant::DEL_GRID)
        .value("WIDTH", Variant::WIDTH)
        .value("CAPPED", Variant::CAPPED);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("M", &ModelParams::M)
        .def_readwrite("b_inv", &ModelParams::b_inv)
        .def_readwrite("lambda_", &ModelParams::lambda)
        .def_readwrite("lambda_del", &ModelParams::lambda_del)
        .def_readwrite("L", &ModelParams::L)
        .def_readwrite("rho", &ModelParams::rho)
        .def_readwrite("w0", &ModelParams::w0)
        .def_readwrite("eta", &ModelParams::eta)
        .def_readwrite("variant", &ModelParams::variant)
        .def_readwrite("ball_radius", &ModelParams::ball_radius);

    py::class_<ValidatedParams>(m, "ValidatedParams")
        .def_property_readonly("M", &ValidatedParams::M)
        .def_property_readonly("b_inv", &ValidatedParams::b_inv)
        .def_property_readonly("lambda_", &ValidatedParams::lambda)
        .def_property_readonly("rho", &ValidatedParams::rho)
        .def_property_readonly("variant", &ValidatedParams::variant)
        .def_property_readonly("ball_radius", &ValidatedParams::ball_radius);

    m.def("validate_params", &validate_params, py::arg("params"));

    py::class_<BlockId>(m, "BlockId")
        .def(py::init([](std::int64_t x, std::int64_t y) { return BlockId{x, y}; }),
             py::arg("x"), py::arg("y"))
        .def_readwrite("x", &BlockId::x)
        .def_readwrite("y", &BlockId::y)
        .def("__repr__", [](const BlockId& z) {
            return "BlockId(" + std::to_string(z.x) + ", " + std::to_string(z.y) + ")";
        });

    py::class_<BlockWindow>(m, "BlockWindow")
        .def(py::init([](std::int64_t n) { return BlockWindow{n}; }), py::arg("n"))
        .def_readwrite("n", &BlockWindow::n);

    py::class_<Environment>(m, "Environment")
        .def(py::init<const ValidatedParams&, BlockWindow, std::uint64_t>(), py::arg("params"),
             py::arg("window"), py::arg("seed"));

    py::class_<ConditionReport>(m, "ConditionReport")
        .def_readonly("one_dependence", &ConditionReport::one_dependence)
        .def_readonly("bounded_intensity", &ConditionReport::bounded_intensity)
        .def_readonly("max_mass", &ConditionReport::max_mass)
        .def_readonly("coverage_estimate", &ConditionReport::coverage_estimate)
        .def_readonly("essential_connectedness", &ConditionReport::essential_connectedness)
        .def_readonly("max_circumradius_ratio", &ConditionReport::max_circumradius_ratio)
        .def("to_text", &ConditionReport::to_text);

    m.def("check_conditions", &check_conditions, py::arg("env"), py::arg("eta"), py::arg("q0"),
          py::arg("n_blocks"), py::arg("seed"));

    py::class_<Driver>(m, "Driver")
        .def(py::init<const ValidatedParams&, BlockWindow, std::uint64_t, double>(),
             py::arg("params"), py::arg("window"), py::arg("seed"), py::arg("lambda_max"));

    m.def("evaluate_f_n", &evaluate_f_n, py::arg("driver"), py::arg("env"), py::arg("lambda_"),
          py::arg("n"));

    py::class_<ThetaEstimate>(m, "ThetaEstimate")
        .def_readonly("lambda_", &ThetaEstimate::lambda)
        .def_readonly("n", &ThetaEstimate::n)
        .def_readonly("trials", &ThetaEstimate::trials)
        .def_readonly("hits", &ThetaEstimate::hits)
        .def_readonly("theta", &ThetaEstimate::theta)
        .def_readonly("ci_lo", &ThetaEstimate::ci_lo)
        .def_readonly("ci_hi", &ThetaEstimate::ci_hi)
        .def_readonly("seed", &ThetaEstimate::seed);

    m.def("estimate_theta", &estimate_theta, py::arg("params"), py::arg("lambda_"), py::arg("n"),
          py::arg("trials"), py::arg("seed"));
    m.def("theta_sweep", &theta_sweep, py::arg("params"), py::arg("lambda_list"), py::arg("n"),
          py::arg("trials"), py::arg("seed"));
    m.def("theta_table_csv", &theta_table_csv, py::arg("rows"));

    py::class_<LambdaCBracket>(m, "LambdaCBracket")
        .def_readonly("lo", &LambdaCBracket::lo)
        .def_readonly("hi", &LambdaCBracket::hi)
        .def_readonly("theta_lo", &LambdaCBracket::theta_lo)
        .def_readonly("theta_hi", &LambdaCBracket::theta_hi)
        .def_readonly("iterations", &LambdaCBracket::iterations)
        .def("midpoint", &LambdaCBracket::midpoint);

    m.def("estimate_lambda_c", &estimate_lambda_c, py::arg("params"), py::arg("n"),
          py::arg("trials"), py::arg("threshold"), py::arg("tol"), py::arg("lambda_lo"),
          py::arg("lambda_hi"), py::arg("seed"));

    py::class_<InfluenceEstimate>(m, "InfluenceEstimate")
        .def_readonly("inf_x", &InfluenceEstimate::inf_x)
        .def_readonly("inf_y", &InfluenceEstimate::inf_y)
        .def_readonly("inf_joint", &InfluenceEstimate::inf_joint)
        .def_readonly("piv_integral", &InfluenceEstimate::piv_integral);

    m.def("estimate_influences", &estimate_influences, py::arg("params"), py::arg("lambda_"),
          py::arg("n"), py::arg("z"), py::arg("trials"), py::arg("seed"));

    py::enum_<InequalityKind>(m, "InequalityKind")
        .value("OSSS", InequalityKind::OSSS)
        .value("EFRON_STEIN", InequalityKind::EfronStein)
        .value("RUSSO", InequalityKind::Russo)
        .value("PIV_LEMMA", InequalityKind::PivLemma)
        .value("INF_LEMMA", InequalityKind::InfLemma)
        .value("DIFFERENTIAL", InequalityKind::Differential);

    py::class_<InequalityReport>(m, "InequalityReport")
        .def_readonly("lhs", &InequalityReport::lhs)
        .def_readonly("rhs", &InequalityReport::rhs)
        .def_readonly("slack", &InequalityReport::slack)
        .def_readonly("pass_", &InequalityReport::pass)
        .def_readonly("notes", &InequalityReport::notes)
        .def("to_text", &InequalityReport::to_text);

    m.def("verify_inequality", &verify_inequality, py::arg("kind"), py::arg("params"),
          py::arg("lambda_"), py::arg("n"), py::arg("trials"), py::arg("seed"));

    m.def(
        "render_plot",
        [](const std::string& kind, const std::string& table_text, const std::string& comments) {
            return render_plot(plot_kind_from_name(kind), table_text, comments);
        },
        py::arg("kind"), py::arg("table_text"), py::arg("comments") = std::string());
}
