// Python bindings: problems go in as JSON text, reports come back as JSON
// text (decoded by the package) and solution values as numpy arrays.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "singbvp/report.hpp"

namespace py = pybind11;
using namespace singbvp;
using nlohmann::json;

namespace {

SolverConfig make_config(std::optional<double> x0, std::optional<double> x_inf, double tol,
                         std::optional<double> kappa, std::optional<double> beta) {
    SolverConfig c;
    c.x0 = x0;
    c.x_inf = x_inf;
    c.tol = tol;
    c.kappa = kappa;
    c.beta = beta;
    c.validate();
    return c;
}

Vector or_zero(const std::optional<Vector>& v, int n) { return v ? *v : Vector::Zero(n); }

py::dict solution_dict(const BvpSolution& sol) {
    const Eigen::Index n = sol.y.empty() ? 0 : sol.y.front().size();
    Matrix y(static_cast<Eigen::Index>(sol.y.size()), n);
    for (size_t i = 0; i < sol.y.size(); ++i) y.row(static_cast<Eigen::Index>(i)) = sol.y[i].transpose();
    py::dict d;
    d["x"] = Vector(Eigen::Map<const Vector>(sol.grid.data(), static_cast<Eigen::Index>(sol.grid.size())));
    d["y"] = y;
    d["report"] = solution_json(sol, false).dump();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Singular boundary value problems on the half-line";

    static py::exception<Error> base(m, "SolverError");
    static py::exception<Error> unsolvable(m, "UnsolvableError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const std::string msg = std::string(to_string(e.kind())) + ": " + e.what();
            if (e.kind() == ErrorKind::Unsolvable) unsolvable(msg.c_str());
            else base(msg.c_str());
        }
    });

    m.attr("REPORT_SCHEMA") = kReportSchema;

    m.def("normalize_problem", [](const std::string& text) { return serialize_problem(parse_problem(text)); },
          py::arg("text"));

    m.def("manufacture", [](const std::string& text) {
              const ManufactureInput in = parse_manufacture_input(text);
              return serialize_problem(manufacture(in.ystar, in.A, in.B));
          },
          py::arg("text"));

    m.def("classify",
          [](const std::string& text, std::optional<double> x0, double tol,
             std::optional<std::uint32_t> shuffle_seed) {
              LatticeOptions lo;
              lo.shuffle_seed = shuffle_seed;
              const auto an = analyze(parse_problem(text), make_config(x0, {}, tol, {}, {}), lo);
              json r = analysis_json(*an);
              r["adjoint"] = adjoint_json(adjoint_integrability_check(*an));
              return r.dump();
          },
          py::arg("text"), py::arg("x0") = py::none(), py::arg("tol") = 1e-8,
          py::arg("shuffle_seed") = py::none());

    m.def("solve",
          [](const std::string& text, std::optional<Vector> v1, std::optional<Vector> v2,
             std::optional<double> x0, std::optional<double> x_inf, double tol,
             std::optional<double> kappa, std::optional<double> beta) {
              const ProblemSpec spec = parse_problem(text);
              const auto an = analyze(spec, make_config(x0, x_inf, tol, kappa, beta));
              return solution_dict(solve_main(*an, or_zero(v1, spec.n), or_zero(v2, spec.n)));
          },
          py::arg("text"), py::arg("v1") = py::none(), py::arg("v2") = py::none(),
          py::arg("x0") = py::none(), py::arg("x_inf") = py::none(), py::arg("tol") = 1e-8,
          py::arg("kappa") = py::none(), py::arg("beta") = py::none());

    m.def("solvability",
          [](const std::string& text, std::optional<double> x0, double tol) {
              const auto an = analyze(parse_problem(text), make_config(x0, {}, tol, {}, {}));
              return solvability_json(orthogonality_residual(*an, an->spec.f)).dump();
          },
          py::arg("text"), py::arg("x0") = py::none(), py::arg("tol") = 1e-8);

    m.def("verify_green",
          [](const std::string& text, std::optional<double> x0, double tol, int probes) {
              const auto an = analyze(parse_problem(text), make_config(x0, {}, tol, {}, {}));
              GreenProbeOptions o;
              o.tol = tol;
              o.probes = probes;
              return green_json(verify_green(*an->green, o)).dump();
          },
          py::arg("text"), py::arg("x0") = py::none(), py::arg("tol") = 1e-8, py::arg("probes") = 3);

    m.def("reg_lower_gamma", &reg_lower_gamma, py::arg("s"), py::arg("t"));
    m.def("mat_exp", &mat_exp, py::arg("a"));
}
