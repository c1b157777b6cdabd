#include "singbvp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "singbvp/error.hpp"

namespace singbvp {

double near_cutoff(const Matrix& A, double alpha, double tol, double x0) {
    double span = (std::log(1.0 / tol) + 10.0) / std::max(alpha, 1e-3);
    double lam = 0.0;
    for (const auto& l : eigenvalues(A)) lam = std::max(lam, std::abs(l.real()));
    if (lam > 0.0) span = std::min(span, 600.0 / lam - std::abs(std::log(x0)));
    span = std::clamp(span, 2.0, 80.0);
    return x0 * std::exp(-span);
}

std::unique_ptr<Analysis> analyze(const ProblemSpec& spec, const SolverConfig& cfg,
                                  const LatticeOptions& lopts) {
    cfg.validate();
    auto an = std::make_unique<Analysis>();
    an->spec = spec;
    an->cfg = cfg;
    an->alpha = validate_condition_A(spec.A, cfg.split_tol);
    dichotomy_rate(spec, cfg.split_tol);
    an->fz = solve_U(spec, cfg);
    const double x0 = an->fz.x0;
    an->theta = compute_theta(spec, x0, cfg.tol);
    an->dich = compute_dichotomy(spec, cfg, x0);
    an->warnings = an->dich.warnings;
    an->lattice = build_lattice(compute_V_plus(an->fz, cfg.split_tol), compute_V_minus0(an->theta),
                                an->dich, an->alpha, lopts);
    an->modes = std::make_unique<ModeSet>(an->lattice, an->fz, an->dich, cfg.split_tol);
    an->grid = std::make_unique<TwoGrid>(near_cutoff(spec.A, an->alpha, cfg.tol, x0), x0,
                                         *an->dich.field);
    an->samples = sample_modes(*an->modes, *an->grid);
    an->kappa = cfg.kappa.value_or(auto_kappa(an->dich.gamma));
    an->beta = cfg.beta.value_or(auto_beta(spec.A));
    an->green = std::make_unique<GreenAssembly>(an->spec, an->lattice, *an->modes, *an->grid,
                                                an->samples, an->kappa, an->beta);
    return an;
}

namespace {

using VecFn = std::function<Vector(double)>;

// Per-part integrals of D_j Y^{-1}(s; x0) g(s) arranged as in G(x, s):
// part 1 from x0, parts 2, 3 from 0, parts 4-6 from infinity (negated).
struct PartIntegrals {
    std::array<std::vector<Matrix>, 6> c;
    std::array<Vector, 6> total;  // int_0^inf for parts 4-6
};

Vector tail_rhs(const Analysis& an, const VecFn& g) {
    const double xi = an.x_inf();
    const Matrix M = an.dich.field->coefficient(xi);
    const double h = 1e-3 * std::max(1.0, xi);
    const Vector g0 = g(xi);
    const Vector dg = (g(xi + h) - g(xi - h)) / (2 * h);
    const Matrix Pu = spectral_projector(M, [](std::complex<double> l) { return l.real() > 0.0; });
    Eigen::PartialPivLU<Matrix> lu(M);
    return Pu * (lu.solve(g0) + lu.solve(lu.solve(dg)));
}

PartIntegrals part_integrals(const Analysis& an, const std::vector<Vector>& gv, const VecFn& g) {
    const TwoGrid& grid = *an.grid;
    const int P = static_cast<int>(grid.panels().size());
    const int i0 = grid.x0_index();
    const int np = grid.near_panels();
    const Vector tail = tail_rhs(an, g);
    PartIntegrals out;
    for (int j = 1; j <= 6; ++j) {
        const size_t k = static_cast<size_t>(j - 1);
        const int d = an.lattice.dims[k];
        if (d == 0) continue;
        std::vector<Matrix> f;
        f.reserve(gv.size());
        for (size_t i = 0; i < gv.size(); ++i) f.push_back(an.samples.Z[k][i] * gv[i]);
        auto& c = out.c[k];
        if (j == 1) {
            const auto fw = grid.forward(f, np);
            const auto bw = grid.backward(f, np);
            c.resize(f.size());
            for (size_t i = 0; i < f.size(); ++i)
                c[i] = static_cast<int>(i) >= i0 ? fw[i] : Matrix(-bw[i]);
        } else if (j <= 3) {
            c = grid.forward(f, 0);
        } else {
            const Vector t = an.samples.Z[k].back() * tail;
            c = grid.backward(f, P);
            for (auto& m : c) m = -(m + t);
            out.total[k] = -c.front().col(0);
        }
    }
    return out;
}

std::vector<Vector> sample(const TwoGrid& grid, const VecFn& g) {
    std::vector<Vector> v;
    v.reserve(grid.x().size());
    for (double x : grid.x()) v.push_back(g(x));
    return v;
}

SolvabilityReport solvability(const Analysis& an, const std::vector<Vector>& gv,
                              const PartIntegrals& pi) {
    const int n = an.spec.n;
    SolvabilityReport r;
    r.residual_P5 = Vector::Zero(n);
    r.residual_P6 = Vector::Zero(n);
    if (an.lattice.dims[4] > 0) r.residual_P5 = an.lattice.B(5) * pi.total[4];
    if (an.lattice.dims[5] > 0) r.residual_P6 = an.lattice.B(6) * pi.total[5];
    const auto& w = an.grid->weights();
    for (size_t i = 0; i < gv.size(); ++i) {
        Matrix piy = Matrix::Zero(n, n);
        for (int j = 5; j <= 6; ++j)
            if (an.lattice.dims[static_cast<size_t>(j - 1)] > 0)
                piy += an.lattice.B(j) * an.samples.Z[static_cast<size_t>(j - 1)][i];
        r.scale += w[i] * gv[i].norm() * opnorm(piy);
    }
    r.threshold = std::max(1e-12, 1e-6 * r.scale);
    r.solvable = r.residual_P6.norm() <= r.threshold;
    return r;
}

}  // namespace

SolvabilityReport orthogonality_residual(const Analysis& an, const std::vector<TermSum>& g) {
    if (static_cast<int>(g.size()) != an.spec.n)
        throw Error(ErrorKind::Dimension, "forcing has the wrong number of components");
    const VecFn gf = [&](double x) { return eval(g, x); };
    const auto gv = sample(*an.grid, gf);
    return solvability(an, gv, part_integrals(an, gv, gf));
}

namespace {

Vector project_with_warning(const Matrix& P, const Vector& v, const char* name,
                            std::vector<std::string>& warnings) {
    const Vector p = P * v;
    if ((v - p).norm() > 1e-8 * std::max(1.0, v.norm())) {
        std::ostringstream os;
        os << name << " is not in its lattice part; projected (dropped norm " << (v - p).norm() << ")";
        warnings.push_back(os.str());
    }
    return p;
}

// y_i = offset + sum_j Y_j(x_i) (D_j v + c_j(i)) at every node.
std::vector<Vector> assemble(const Analysis& an, const Vector& v, const Vector& offset,
                             const PartIntegrals& pi) {
    const size_t G = an.grid->x().size();
    std::vector<Vector> y(G, offset);
    for (int j = 1; j <= 6; ++j) {
        const size_t k = static_cast<size_t>(j - 1);
        if (an.lattice.dims[k] == 0) continue;
        const Vector dv = an.lattice.D(j) * v;
        for (size_t i = 0; i < G; ++i) {
            Vector coef = dv;
            if (!pi.c[k].empty()) coef += pi.c[k][i].col(0);
            y[i] += an.samples.Y[k][i] * coef;
        }
    }
    return y;
}

// `forced` is the problem whose equation the solution should satisfy.
void fill_diagnostics(const Analysis& an, const ProblemSpec& forced, BvpSolution& sol,
                      const std::vector<Vector>& gv) {
    auto& d = sol.diagnostics;
    d.defect_at_infinity = sol.y.back().norm();
    d.defect_at_zero = (sol.y[1] - sol.y[0]).norm();
    d.zeta_kernel_defect = (an.spec.A * sol.zeta).norm();
    for (const auto& g : gv) d.sup_forcing = std::max(d.sup_forcing, g.norm());
    d.ode_residual = ode_residual(sol, forced, *an.grid);
}

}  // namespace

BvpSolution solve_main(const Analysis& an, const Vector& v1, const Vector& v2) {
    const ProblemSpec& spec = an.spec;
    const int n = spec.n;
    if (v1.size() != n || v2.size() != n) throw Error(ErrorKind::Dimension, "v1, v2 must have n components");
    validate_main_problem(spec);
    BvpSolution sol;
    auto& warn = sol.diagnostics.warnings;
    sol.eta = validate_condition_C(spec.A, spec.a, an.cfg.split_tol);
    sol.v1 = project_with_warning(an.lattice.P[0], v1, "v1", warn);
    sol.v2 = project_with_warning(an.lattice.P[1], v2, "v2", warn);

    const Vector eta = sol.eta;
    const VecFn gbar = [&](double x) { return Vector(spec.f_at(x) + spec.B_at(x) * eta); };
    const auto gv = sample(*an.grid, gbar);
    const PartIntegrals pi = part_integrals(an, gv, gbar);
    sol.solvability = solvability(an, gv, pi);
    if (!sol.solvability.solvable) {
        std::ostringstream os;
        os.precision(10);
        os << "orthogonality condition violated: ||int P6 Y^{-1}(f + B eta)|| = "
           << sol.solvability.residual_P6.norm() << " (threshold " << sol.solvability.threshold << ")";
        throw Error(ErrorKind::Unsolvable, os.str());
    }
    sol.w = -sol.solvability.residual_P5;

    const Vector v = sol.v1 + sol.v2;
    const auto ys = assemble(an, v, eta, pi);
    const ModeSet& modes = *an.modes;
    sol.zeta = modes.P_zero() * (modes.near_normaliser() * (sol.v2 + sol.w));
    {
        const Matrix E = Matrix::Identity(n, n);
        const double x0 = an.x0();
        const Vector zf = (E + an.fz.U(x0)).partialPivLu().solve(sol.v2) +
                          (E + an.theta.Theta(x0)).partialPivLu().solve(sol.w);
        sol.diagnostics.zeta_formula_gap = (zf - sol.zeta).norm();
    }
    sol.grid.push_back(0.0);
    sol.y.push_back(eta + sol.zeta);
    for (size_t i = 0; i < ys.size(); ++i) {
        sol.grid.push_back(an.grid->x()[i]);
        sol.y.push_back(ys[i]);
        sol.diagnostics.sup_particular =
            std::max(sol.diagnostics.sup_particular, (ys[i] - eta - modes.solution(v, an.grid->x()[i])).norm());
    }
    fill_diagnostics(an, an.spec, sol, gv);
    return sol;
}

BvpSolution solve_homogeneous_bc(const Analysis& an, const std::vector<TermSum>& g, const Vector& v) {
    const int n = an.spec.n;
    if (static_cast<int>(g.size()) != n || v.size() != n)
        throw Error(ErrorKind::Dimension, "g and v must have n components");
    BvpSolution sol;
    sol.v1 = project_with_warning(an.lattice.P[0], v, "v", sol.diagnostics.warnings);
    sol.v2 = sol.w = sol.zeta = sol.eta = Vector::Zero(n);

    const VecFn gf = [&](double x) { return eval(g, x); };
    const auto gv = sample(*an.grid, gf);
    PartIntegrals pi = part_integrals(an, gv, gf);
    sol.solvability = solvability(an, gv, pi);
    if (!sol.solvability.solvable) {
        std::ostringstream os;
        os.precision(10);
        os << "orthogonality condition violated: ||int Pi Y^{-1} g|| = "
           << sol.solvability.residual_P6.norm() << " (threshold " << sol.solvability.threshold << ")";
        throw Error(ErrorKind::Unsolvable, os.str());
    }
    const TwoGrid& grid = *an.grid;
    const GreenAssembly& green = *an.green;
    // N(x) Pi Y^{-1} term of the generalized Green function
    for (int j = 5; j <= 6; ++j) {
        const size_t k = static_cast<size_t>(j - 1);
        if (an.lattice.dims[k] == 0) continue;
        for (size_t i = 0; i < pi.c[k].size(); ++i)
            pi.c[k][i] += (1.0 - reg_lower_gamma(1.0 + an.beta, an.kappa * grid.x()[i])) * pi.total[k];
    }
    // Y(x) P1 M(s) term
    if (an.lattice.dims[0] > 0) {
        std::vector<Matrix> mg;
        for (size_t i = 0; i < gv.size(); ++i) mg.push_back(green.M_coeff(grid.x()[i]) * gv[i]);
        const Matrix m = grid.integral(mg);
        for (auto& c : pi.c[0]) c += m;
    }
    const auto ys = assemble(an, sol.v1, Vector::Zero(n), pi);
    sol.grid.push_back(0.0);
    sol.y.push_back(Vector::Zero(n));
    std::vector<Matrix> orth;
    for (size_t i = 0; i < ys.size(); ++i) {
        sol.grid.push_back(grid.x()[i]);
        sol.y.push_back(ys[i]);
        const Vector part = ys[i] - an.modes->solution(sol.v1, grid.x()[i]);
        sol.diagnostics.sup_particular = std::max(sol.diagnostics.sup_particular, part.norm());
        if (an.lattice.dims[0] > 0) orth.push_back(an.samples.Y[0][i].transpose() * part);
    }
    if (!orth.empty()) sol.diagnostics.orthogonality = grid.integral(orth).norm();
    ProblemSpec forced = an.spec;
    forced.f = g;
    forced.a.setZero();
    fill_diagnostics(an, forced, sol, gv);
    return sol;
}

double ode_residual(const BvpSolution& sol, const ProblemSpec& spec, const TwoGrid& grid) {
    const int n = spec.n;
    const size_t G = grid.x().size();
    if (sol.y.size() != G + 1) throw Error(ErrorKind::Dimension, "solution does not match the grid");
    std::vector<Matrix> ym;
    ym.reserve(G);
    for (size_t i = 0; i < G; ++i) ym.push_back(sol.y[i + 1]);
    const Vector y0 = sol.y[0];
    const Vector c0 = spec.A * y0 + spec.a;
    const double floor = 1e-6 * grid.x0();
    double worst = 0.0;
    for (size_t i = 0; i < G; ++i) {
        const double x = grid.x()[i];
        if (x < floor) continue;
        const Vector dy = grid.derivative(ym, static_cast<int>(i)).col(0);
        const Vector r = dy - spec.B_at(x) * ym[i] - spec.A * (ym[i] - y0) / x - spec.f_at(x) - c0 / x;
        worst = std::max(worst, r.norm());
    }
    (void)n;
    return worst;
}

bool AdjointReport::ok() const {
    for (const auto& d : directions)
        if (d.integrable != d.expected || !d.routes_agree) return false;
    return true;
}

namespace {

// Ratio of the last two increments of a sequence of partial integrals.
bool increments_shrink(const std::vector<double>& partials) {
    const size_t m = partials.size();
    if (m < 3) return true;
    const double d1 = partials[m - 2] - partials[m - 3];
    const double d2 = partials[m - 1] - partials[m - 2];
    return d2 < 0.9 * d1;
}

}  // namespace

AdjointReport adjoint_integrability_check(const Analysis& an) {
    AdjointReport rep;
    const TwoGrid& grid = *an.grid;
    const ModeSet& modes = *an.modes;
    const double x0 = an.x0();
    const int np = grid.near_panels();
    const int n = an.spec.n;
    const auto& xs = grid.x();

    auto nearest = [&](double x) {
        return static_cast<size_t>(std::lower_bound(xs.begin(), xs.end(), x) - xs.begin());
    };
    const Vector ones = Vector::Ones(n);
    const VecFn test = [&](double x) { return Vector(std::exp(-x) * ones); };
    const auto tv = sample(grid, test);
    const PartIntegrals pi = part_integrals(an, tv, test);

    for (int j = 1; j <= 6; ++j) {
        const size_t k = static_cast<size_t>(j - 1);
        for (int m = 0; m < an.lattice.dims[k]; ++m) {
            AdjointDirection d;
            d.part = j;
            d.index = m;
            d.expected = j >= 5;
            auto eta = [&](double x) { return modes.Z(j, x).row(m).norm(); };
            d.near_exponent = std::log(eta(1e-6 * x0) / eta(1e-8 * x0)) / std::log(100.0);
            const size_t last = xs.size() - 1;
            const size_t back = nearest(xs.back() - std::min(5.0, 0.5 * (xs.back() - x0)));
            d.far_rate = std::log(an.samples.Z[k][last].row(m).norm() / an.samples.Z[k][back].row(m).norm()) /
                         (xs[last] - xs[back]);

            std::vector<Matrix> f;
            for (size_t i = 0; i < xs.size(); ++i) {
                Matrix v(1, 1);
                v(0, 0) = an.samples.Z[k][i].row(m).norm();
                f.push_back(v);
            }
            const auto bw = grid.backward(f, np);
            const auto fw = grid.forward(f, np);
            for (double e : {1e-2, 1e-4, 1e-6, 1e-8})
                if (e * x0 >= grid.x_min()) d.near_partials.push_back(bw[nearest(e * x0)](0, 0));
            for (int q = 1; q <= 4; ++q) {
                const size_t i = std::min(last, nearest(x0 + (xs.back() - x0) * q / 4.0));
                d.far_partials.push_back(fw[i](0, 0));
            }
            const bool by_partials = increments_shrink(d.near_partials) && increments_shrink(d.far_partials);
            const bool by_exponents = d.near_exponent > -1.0 && d.far_rate < 0.0;
            d.integrable = by_partials;
            d.routes_agree = by_partials == by_exponents;
            rep.directions.push_back(d);

            if (j >= 5) {
                auto fn = [&](double x) {
                    Matrix r(1, 1);
                    r(0, 0) = modes.Z(j, x).row(m).dot(test(x));
                    return r;
                };
                const double direct = integrate_composite(fn, grid.x_min(), an.x_inf(), x0, {}, Matrix::Zero(1, 1))(0, 0) +
                                      an.samples.Z[k].back().row(m).dot(tail_rhs(an, test));
                rep.pairing_defect = std::max(rep.pairing_defect, std::abs(direct - pi.total[k](m)));
            }
        }
    }
    return rep;
}

}  // namespace singbvp
