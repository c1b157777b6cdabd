#pragma once

// Behaviour near the singular point: Y(x) = (E + U(x)) x^A, continuously
// differentiable solutions through ker A, and the map Theta. Everything is
// computed in t = -ln x by Picard iteration on v' = Av + e^{-t}(Hv + h).

#include <functional>
#include <vector>

#include "singbvp/linalg.hpp"
#include "singbvp/problem.hpp"

namespace singbvp {

/// Two-branch kernel: -e^{op tau} P1 for tau <= 0, e^{op tau}(P2 + P3) for
/// tau > 0, with the split taken at Re = -1.
struct KernelG {
    Matrix op;
    SpectralSplit split;  // below = P3, on = P2, above = P1
    double gamma1 = 0.0;
    double gamma2 = -2.0;
    double K_A = 1.0;
    double C_A = 1.0;
    int r = 0;
    // e^{op tau} P = V e^{R tau} L on each branch, with R the restriction of
    // op to ran P, so that no full exponential of op is formed.
    Matrix V_neg, R_neg, L_neg;
    Matrix V_pos, R_pos, L_pos;

    const Matrix& P1() const { return split.above; }
    const Matrix& P2() const { return split.on; }
    const Matrix& P3() const { return split.below; }

    Matrix operator()(double tau) const;
    /// Envelope the invariant promises for ||kernel(tau)||.
    double envelope(double tau) const;
};

KernelG build_kernel(const Matrix& op, double split_tol = kDefaultSplitTol);

struct T0Choice {
    double t0 = 0.0;
    double q = 0.0;
};

T0Choice choose_t0(double C_A, double M, int r);

/// Vector-valued function of t on uniform cells, Gauss nodes per cell,
/// evaluated by per-cell Lagrange interpolation.
struct TGridFunction {
    double t_lo = 0.0;
    double h = 0.0;
    int cells = 0;
    int order = 6;
    int dim = 0;
    std::vector<Vector> values;  // cells * order, cell-major

    double t_hi() const { return t_lo + h * cells; }
    double node(int cell, int i) const;
    /// Values beyond t_hi are zero; before t_lo the first cell is extrapolated.
    Vector operator()(double t) const;
};

struct PicardReport {
    int iterations = 0;
    std::vector<double> ratios;  // successive distance ratios (weighted norm)
    double max_ratio = 0.0;
    double final_distance = 0.0;
};

/// Solves v(t) = int_{t0}^{t_cut} G(t - s) e^{-s} (H(s) v(s) + h(s)) ds.
using PicardOperator = std::function<Vector(double t, const Vector& v)>;
using PicardForcing = std::function<Vector(double t)>;
TGridFunction picard_solve(const KernelG& kernel, double t0, double t_cut, double q,
                           const PicardOperator& H, const PicardForcing& h, double tol,
                           double cell_width, PicardReport* report);

struct FundamentalNearZero {
    Matrix A;
    double x0 = 0.0;       // normalisation point of Y(x; x0)
    double t0 = 0.0;       // Picard start, x_p = e^{-t0} <= x0
    double q = 0.0;
    double C_ball = 0.0;
    double C_A = 0.0;
    double K_A = 0.0;
    double M = 0.0;
    int r = 0;
    double t_cut = 0.0;
    TGridFunction U_t;     // vec(U), column-major, Picard part over [t0, t_cut]
    TGridFunction U_cont;  // vec(U) over [-ln x0, t0] when x0 > e^{-t0}
    PicardReport picard;

    Matrix U(double x) const;
    /// (E + U(x)) x^A, not normalised at x0.
    Matrix Y(double x) const;
    /// Decreasing x samples at which U is represented.
    std::vector<double> grid() const;
    /// dU/dt - (UA - AU) + e^{-t} B (E + U) by central differences.
    double fundamental_residual(const ProblemSpec& spec, double t) const;
};

FundamentalNearZero solve_U(const ProblemSpec& spec, const SolverConfig& cfg);

/// C^1 solution y = zeta + zeta1 x + z(x) of y' = (A/x + B) y + g on (0, x0].
struct C1Solution {
    Vector zeta;
    Vector zeta1;
    double x0 = 0.0;
    double t0 = 0.0;
    TGridFunction z_t;     // Picard part over [t0, t_cut]
    TGridFunction z_cont;  // continuation over [-ln x0, t0]
    PicardReport picard;

    Vector operator()(double x) const;
    /// z(x) = y - zeta - zeta1 x.
    Vector z(double x) const;
};

C1Solution c1_solution_near_zero(const ProblemSpec& spec, double x0, const Vector& zeta,
                                 const std::vector<TermSum>& g, double tol);

struct ThetaMap {
    double x0 = 0.0;
    Matrix kernel_basis;  // orthonormal basis of ker A (n x k)
    std::vector<C1Solution> columns;
    Matrix Theta_x0;

    bool empty() const { return columns.empty(); }
    /// Theta(x) acting on ker A (zero on its orthogonal complement).
    Matrix Theta(double x) const;
};

ThetaMap compute_theta(const ProblemSpec& spec, double x0, double tol);

}  // namespace singbvp
