#include "singbvp/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "singbvp/error.hpp"

namespace singbvp {

using nlohmann::json;

json to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json to_json(const Matrix& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vector(m.row(i).transpose())));
    return a;
}

json config_json(const SolverConfig& cfg) {
    json j;
    j["tol"] = cfg.tol;
    j["x0"] = cfg.x0 ? json(*cfg.x0) : json("auto");
    j["xinf"] = cfg.x_inf ? json(*cfg.x_inf) : json("auto");
    j["kappa"] = cfg.kappa ? json(*cfg.kappa) : json("auto");
    j["beta"] = cfg.beta ? json(*cfg.beta) : json("auto");
    j["split_tol"] = cfg.split_tol;
    j["strict"] = cfg.strict;
    return j;
}

json analysis_json(const Analysis& an) {
    json j;
    const NoetherIndex ni = noether_index(an.lattice);
    j["n"] = an.spec.n;
    j["dims"] = an.lattice.dims;
    j["kernel_dim"] = ni.n;
    j["cokernel_dim"] = ni.d;
    j["index"] = ni.index;
    j["alpha"] = an.alpha;
    j["gamma"] = an.dich.gamma;
    j["C_star"] = an.dich.C_star;
    j["x0"] = an.x0();
    j["xinf"] = an.x_inf();
    j["t0"] = an.fz.t0;
    j["q"] = an.fz.q;
    j["picard_iterations"] = an.fz.picard.iterations;
    j["picard_max_ratio"] = an.fz.picard.max_ratio;
    j["kappa"] = an.kappa;
    j["beta"] = an.beta;
    j["grid_points"] = an.grid->size();
    j["warnings"] = an.warnings;
    return j;
}

json solvability_json(const SolvabilityReport& r) {
    json j;
    j["residual_P5"] = to_json(r.residual_P5);
    j["residual_P6"] = to_json(r.residual_P6);
    j["residual_P6_norm"] = r.residual_P6.norm();
    j["scale"] = r.scale;
    j["threshold"] = r.threshold;
    j["solvable"] = r.solvable;
    return j;
}

json solution_json(const BvpSolution& sol, bool include_grid) {
    json j;
    j["v1"] = to_json(sol.v1);
    j["v2"] = to_json(sol.v2);
    j["w"] = to_json(sol.w);
    j["zeta"] = to_json(sol.zeta);
    j["eta"] = to_json(sol.eta);
    j["solvability"] = solvability_json(sol.solvability);
    const auto& d = sol.diagnostics;
    j["diagnostics"] = {{"ode_residual", d.ode_residual},
                        {"defect_at_infinity", d.defect_at_infinity},
                        {"defect_at_zero", d.defect_at_zero},
                        {"zeta_kernel_defect", d.zeta_kernel_defect},
                        {"zeta_formula_gap", d.zeta_formula_gap},
                        {"orthogonality", d.orthogonality},
                        {"sup_particular", d.sup_particular},
                        {"sup_forcing", d.sup_forcing},
                        {"warnings", d.warnings}};
    if (include_grid) {
        j["x"] = sol.grid;
        json ys = json::array();
        for (const auto& y : sol.y) ys.push_back(to_json(y));
        j["y"] = ys;
    }
    return j;
}

json green_json(const GreenReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks) {
        json j = {{"name", c.name}, {"value", c.value}, {"status", c.status}, {"probes", c.probes}};
        j["threshold"] = std::isfinite(c.threshold) ? json(c.threshold) : json("finite");
        checks.push_back(j);
    }
    return {{"checks", checks}, {"ok", r.ok()}};
}

json adjoint_json(const AdjointReport& r) {
    json dirs = json::array();
    for (const auto& d : r.directions)
        dirs.push_back({{"part", d.part},
                        {"index", d.index},
                        {"near_exponent", d.near_exponent},
                        {"far_rate", d.far_rate},
                        {"near_partials", d.near_partials},
                        {"far_partials", d.far_partials},
                        {"integrable", d.integrable},
                        {"routes_agree", d.routes_agree},
                        {"expected", d.expected}});
    return {{"directions", dirs}, {"pairing_defect", r.pairing_defect}, {"ok", r.ok()}};
}

std::string solution_csv(const std::vector<double>& x, const std::vector<Vector>& y) {
    if (x.size() != y.size()) throw Error(ErrorKind::Dimension, "grid and values differ in length");
    std::ostringstream os;
    os << "x";
    const Eigen::Index n = y.empty() ? 0 : y.front().size();
    for (Eigen::Index k = 0; k < n; ++k) os << ",y" << k + 1;
    os << "\n";
    char buf[40];
    for (size_t i = 0; i < x.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", x[i]);
        os << buf;
        for (Eigen::Index k = 0; k < n; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", y[i](k));
            os << "," << buf;
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace singbvp
