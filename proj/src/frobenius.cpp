#include "singbvp/frobenius.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "singbvp/ode.hpp"
#include "singbvp/quadrature.hpp"

namespace singbvp {

namespace {

constexpr double kCellWidth = 1.0 / 12.0;
constexpr int kCellOrder = 6;

double norm_of(const Matrix& m) { return m.rows() <= 36 ? opnorm(m) : m.norm(); }

Vector lagrange_on(const std::vector<double>& nodes, double u) {
    const int m = static_cast<int>(nodes.size());
    Vector l(m);
    for (int j = 0; j < m; ++j) {
        double v = 1.0;
        for (int k = 0; k < m; ++k)
            if (k != j) v *= (u - nodes[k]) / (nodes[j] - nodes[k]);
        l(j) = v;
    }
    return l;
}

void restrict_to(const Matrix& op, const Matrix& P, Matrix& V, Matrix& R, Matrix& L) {
    V = SubspaceBasis::span(P).columns;
    R = V.transpose() * op * V;
    L = V.transpose() * P;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, int n) { return Eigen::Map<const Matrix>(v.data(), n, n); }

}  // namespace

// ---- kernel -----------------------------------------------------------------

Matrix KernelG::operator()(double tau) const {
    if (tau <= 0.0) return -(V_neg * mat_exp(R_neg * tau) * L_neg);
    return V_pos * mat_exp(R_pos * tau) * L_pos;
}

double KernelG::envelope(double tau) const {
    if (tau <= 0.0) return K_A * std::exp(gamma1 * tau);
    return K_A * (1.0 + std::pow(tau, std::max(r - 1, 0))) * std::exp(-tau) +
           K_A * std::exp(gamma2 * tau);
}

KernelG build_kernel(const Matrix& op, double split_tol) {
    KernelG k;
    k.op = op;
    k.split = spectral_split(op, -1.0, split_tol, false);
    k.r = k.split.r_on;
    restrict_to(op, k.P1(), k.V_neg, k.R_neg, k.L_neg);
    restrict_to(op, k.P2() + k.P3(), k.V_pos, k.R_pos, k.L_pos);

    double min_above = INFINITY, max_below = -INFINITY;
    for (const auto& lam : eigenvalues(op)) {
        if (lam.real() > -1.0 + split_tol) min_above = std::min(min_above, lam.real());
        if (lam.real() < -1.0 - split_tol) max_below = std::max(max_below, lam.real());
    }
    k.gamma1 = std::isfinite(min_above) ? -1.0 + 0.9 * (min_above + 1.0) : 0.0;
    k.gamma2 = std::isfinite(max_below) ? -1.0 + 0.9 * (max_below + 1.0) : -2.0;

    // Dense sampling of the three projected exponentials on [-40, 40]; each
    // step is re-projected so rounding cannot feed the opposite branch.
    const int N = static_cast<int>(op.rows());
    const double step = N > 64 ? 0.05 : 0.02;
    const int steps = static_cast<int>(std::lround(40.0 / step));
    const Matrix fwd = mat_exp(op * step);
    const Matrix bwd = mat_exp(-op * step);

    double K = 0.0;
    // tau <= 0: -e^{op tau} P1
    Matrix e1 = k.P1();
    std::vector<double> neg(static_cast<size_t>(steps + 1));
    for (int i = 0; i <= steps; ++i) {
        const double tau = -i * step;
        const double nrm = norm_of(e1);
        neg[static_cast<size_t>(i)] = nrm * std::exp(tau);
        K = std::max(K, nrm * std::exp(-k.gamma1 * tau));
        e1 = k.P1() * (bwd * e1);
    }
    // tau >= 0
    Matrix e2 = k.P2(), e3 = k.P3();
    std::vector<double> pos(static_cast<size_t>(steps + 1));
    for (int i = 0; i <= steps; ++i) {
        const double tau = i * step;
        const double n2 = norm_of(e2), n3 = norm_of(e3);
        pos[static_cast<size_t>(i)] = norm_of(e2 + e3) * std::exp(tau);
        K = std::max(K, n2 / ((1.0 + std::pow(tau, std::max(k.r - 1, 0))) * std::exp(-tau)));
        K = std::max(K, n3 * std::exp(-k.gamma2 * tau));
        e2 = k.P2() * (fwd * e2);
        e3 = k.P3() * (fwd * e3);
    }
    k.K_A = std::max(K, 1e-300);

    // C_A = sup_T int_{-inf}^T ||G(tau)|| e^tau dtau / (1 + T^r)
    double left = neg.back() / std::max(k.gamma1 + 1.0, 1e-3);
    for (int i = 0; i < steps; ++i)
        left += 0.5 * step * (neg[static_cast<size_t>(i)] + neg[static_cast<size_t>(i + 1)]);
    double acc = left, C = left;
    for (int i = 0; i < steps; ++i) {
        acc += 0.5 * step * (pos[static_cast<size_t>(i)] + pos[static_cast<size_t>(i + 1)]);
        const double T = (i + 1) * step;
        C = std::max(C, acc / (1.0 + std::pow(T, k.r)));
    }
    k.C_A = std::max(C, 1e-300);
    return k;
}

T0Choice choose_t0(double C_A, double M, int r) {
    if (C_A < 0.0 || M < 0.0 || r < 0) throw Error(ErrorKind::Domain, "choose_t0: bad constants");
    for (int k = 1;; ++k) {
        const double t0 = 0.5 * k;
        if (t0 <= r) continue;
        const double q = 2.0 * C_A * M * std::pow(t0, r) * std::exp(-t0);
        if (q <= 0.5) return {t0, q};
    }
}

// ---- grid functions ---------------------------------------------------------

double TGridFunction::node(int cell, int i) const {
    return t_lo + h * (cell + gauss_legendre(order).nodes[static_cast<size_t>(i)]);
}

Vector TGridFunction::operator()(double t) const {
    if (cells == 0 || t >= t_hi()) return Vector::Zero(dim);
    const auto& nodes = gauss_legendre(order).nodes;
    int c = static_cast<int>(std::floor((t - t_lo) / h));
    c = std::clamp(c, 0, cells - 1);
    const Vector l = lagrange_on(nodes, (t - t_lo) / h - c);
    Vector out = Vector::Zero(dim);
    for (int j = 0; j < order; ++j) out += l(j) * values[static_cast<size_t>(c * order + j)];
    return out;
}

// ---- Picard iteration -------------------------------------------------------

TGridFunction picard_solve(const KernelG& kernel, double t0, double t_cut, double q,
                           const PicardOperator& H, const PicardForcing& h, double tol,
                           double cell_width, PicardReport* report) {
    const Matrix& op = kernel.op;
    const int N = static_cast<int>(op.rows());
    TGridFunction v;
    v.order = kCellOrder;
    v.dim = N;
    v.t_lo = t0;
    v.cells = std::max(1, static_cast<int>(std::ceil((t_cut - t0) / cell_width - 1e-9)));
    v.h = (t_cut - t0) / v.cells;
    const int m = v.order;
    const double hc = v.h;
    const auto& u = gauss_legendre(m).nodes;
    const GaussRule& fine = gauss_legendre(20);

    // local stations: the m Gauss nodes, then the far endpoint of the sweep
    const Matrix Q = kernel.P2() + kernel.P3();
    const Matrix& P1 = kernel.P1();
    std::vector<Matrix> Ef(m + 1), Eb(m + 1);
    std::vector<std::vector<Matrix>> Kf(m + 1, std::vector<Matrix>(m)),
        Kb(m + 1, std::vector<Matrix>(m));
    for (int i = 0; i <= m; ++i) {
        const double ui = i < m ? u[i] : 1.0;   // forward station
        const double wi = i < m ? u[i] : 0.0;   // backward station
        Ef[i] = mat_exp(op * (hc * ui)) * Q;
        Eb[i] = mat_exp(op * (hc * (wi - 1.0))) * P1;
        for (int j = 0; j < m; ++j) {
            Kf[i][j] = Matrix::Zero(N, N);
            Kb[i][j] = Matrix::Zero(N, N);
        }
        for (size_t qd = 0; qd < fine.nodes.size(); ++qd) {
            const double sf = ui * fine.nodes[qd];
            const Matrix ef = mat_exp(op * (hc * (ui - sf)));
            const Vector lf = lagrange_on(u, sf);
            const double sb = wi + (1.0 - wi) * fine.nodes[qd];
            const Matrix eb = mat_exp(op * (hc * (wi - sb)));
            const Vector lb = lagrange_on(u, sb);
            for (int j = 0; j < m; ++j) {
                Kf[i][j] += (fine.weights[qd] * ui * hc * lf(j)) * ef;
                Kb[i][j] += (fine.weights[qd] * (1.0 - wi) * hc * lb(j)) * eb;
            }
        }
        for (int j = 0; j < m; ++j) {
            Kf[i][j] = Kf[i][j] * Q;
            Kb[i][j] = Kb[i][j] * P1;
        }
    }

    const int total = v.cells * m;
    std::vector<double> ts(static_cast<size_t>(total));
    std::vector<Vector> hv(static_cast<size_t>(total));
    for (int c = 0; c < v.cells; ++c)
        for (int i = 0; i < m; ++i) {
            const size_t idx = static_cast<size_t>(c * m + i);
            ts[idx] = v.node(c, i);
            hv[idx] = h(ts[idx]);
        }
    v.values.assign(static_cast<size_t>(total), Vector::Zero(N));

    auto weight = [&](double t) { return std::exp(t) / std::max(1.0, std::pow(t, kernel.r)); };
    const double unweight = 1.0 / weight(t0);
    const double target = 0.01 * tol * (1.0 - q);

    PicardReport rep;
    double prev = -1.0;
    int stalls = 0;
    std::vector<Vector> phi(static_cast<size_t>(total)), next(static_cast<size_t>(total));
    constexpr int kMaxIterations = 500;
    for (int it = 1; it <= kMaxIterations; ++it) {
        for (int k = 0; k < total; ++k) {
            const size_t idx = static_cast<size_t>(k);
            phi[idx] = std::exp(-ts[idx]) * (H(ts[idx], v.values[idx]) + hv[idx]);
        }
        Vector acc = Vector::Zero(N);
        for (int c = 0; c < v.cells; ++c) {
            const size_t base = static_cast<size_t>(c * m);
            for (int i = 0; i <= m; ++i) {
                Vector val = Ef[i] * acc;
                for (int j = 0; j < m; ++j) val += Kf[i][j] * phi[base + static_cast<size_t>(j)];
                if (i < m) next[base + static_cast<size_t>(i)] = val;
                else acc = val;
            }
        }
        acc.setZero();
        for (int c = v.cells - 1; c >= 0; --c) {
            const size_t base = static_cast<size_t>(c * m);
            for (int i = 0; i <= m; ++i) {
                Vector val = Eb[i] * acc;
                for (int j = 0; j < m; ++j) val += Kb[i][j] * phi[base + static_cast<size_t>(j)];
                if (i < m) next[base + static_cast<size_t>(i)] -= val;
                else acc = val;
            }
        }

        double dist = 0.0, size = 0.0;
        for (int k = 0; k < total; ++k) {
            const size_t idx = static_cast<size_t>(k);
            const double w = weight(ts[idx]);
            dist = std::max(dist, w * (next[idx] - v.values[idx]).norm());
            size = std::max(size, w * next[idx].norm());
        }
        v.values.swap(next);
        rep.iterations = it;
        rep.final_distance = dist * unweight;
        const bool above_floor = dist > 1e-12 * size;
        if (prev > 0.0 && above_floor) {
            const double ratio = dist / prev;
            rep.ratios.push_back(ratio);
            rep.max_ratio = std::max(rep.max_ratio, ratio);
            stalls = ratio > q + 0.1 ? stalls + 1 : 0;
            if (stalls >= 3) {
                std::ostringstream os;
                os << "Picard iteration stalled: distance ratio " << ratio << " exceeds q + 0.1 = "
                   << q + 0.1;
                throw Error(ErrorKind::NumericalFailure, os.str());
            }
        }
        if (dist * unweight <= target || !above_floor) break;
        if (it == kMaxIterations)
            throw Error(ErrorKind::NumericalFailure, "Picard iteration did not converge");
        prev = dist;
    }
    if (report) *report = rep;
    return v;
}

// ---- constructions on (0, x0] ---------------------------------------------

namespace {

struct Gate {
    KernelG kernel;
    double t_start = 0.0;
    double q = 0.0;
    double C_ball = 0.0;
    double t_cut = 0.0;
    double cell = kCellWidth;
};

// M bounds the perturbation operator, m the forcing.
Gate make_gate(const Matrix& op, double M, double m, double x0, double tol) {
    Gate g;
    g.kernel = build_kernel(op);
    const T0Choice c = choose_t0(g.kernel.C_A, M, g.kernel.r);
    g.t_start = std::max(c.t0, -std::log(x0));
    g.q = 2.0 * g.kernel.C_A * M * std::pow(g.t_start, g.kernel.r) * std::exp(-g.t_start);
    g.C_ball = 2.0 * g.kernel.C_A * m / (1.0 - g.q);
    double T = g.t_start + 1.0;
    const double lead = std::log(std::max(g.C_ball * g.kernel.K_A / (0.01 * tol), M_E));
    for (int round = 0; round < 3; ++round) T = g.t_start + lead + g.kernel.r * std::log(T);
    g.t_cut = std::clamp(T, g.t_start + 1.0, g.t_start + 60.0);
    double rho = 0.0;
    for (const auto& lam : eigenvalues(op)) rho = std::max(rho, std::abs(lam));
    g.cell = std::min(kCellWidth, 0.5 / std::max(1.0, rho));
    return g;
}

// Re-expresses the solution of z' = M(x) z + R(x) on [e^{-t_hi}, e^{-t_lo}] on
// t-cells, starting from z(e^{-t_hi}) = z_start.
TGridFunction continue_in_x(double t_lo, double t_hi, double cell, const Vector& z_start,
                            const CoefficientFn& m, const CoefficientFn& forcing) {
    TGridFunction out;
    out.order = kCellOrder;
    out.dim = static_cast<int>(z_start.size());
    if (!(t_hi > t_lo)) return out;
    out.t_lo = t_lo;
    out.cells = std::max(1, static_cast<int>(std::ceil((t_hi - t_lo) / cell - 1e-9)));
    out.h = (t_hi - t_lo) / out.cells;
    const int total = out.cells * out.order;
    std::vector<double> xs{std::exp(-t_hi)};
    for (int k = total - 1; k >= 0; --k) xs.push_back(std::exp(-out.node(k / out.order, k % out.order)));
    const auto zs = integrate_linear(m, z_start, xs, OdeTolerance{1e-12, 1e-15}, forcing);
    out.values.resize(static_cast<size_t>(total));
    for (int k = 0; k < total; ++k)
        out.values[static_cast<size_t>(k)] = zs[static_cast<size_t>(total - k)];
    return out;
}

double sampled_sup(const std::function<double(double)>& fn, double x_hi) {
    double sup = fn(0.0);
    for (int k = 0; k <= 200; ++k) sup = std::max(sup, fn(x_hi * std::pow(1e-8, k / 200.0)));
    return 1.05 * sup;
}

}  // namespace

Matrix FundamentalNearZero::U(double x) const {
    if (!(x > 0.0)) throw Error(ErrorKind::Domain, "U(x) requires x > 0");
    const double t = -std::log(x);
    const int n = static_cast<int>(A.rows());
    const Vector v = (t < t0 && U_cont.cells > 0) ? U_cont(t) : U_t(t);
    return unvec(v, n);
}

Matrix FundamentalNearZero::Y(double x) const {
    const int n = static_cast<int>(A.rows());
    return (Matrix::Identity(n, n) + U(x)) * mat_power(A, x);
}

std::vector<double> FundamentalNearZero::grid() const {
    std::vector<double> xs;
    for (const TGridFunction* g : {&U_cont, &U_t})
        for (int c = 0; c < g->cells; ++c)
            for (int i = 0; i < g->order; ++i) xs.push_back(std::exp(-g->node(c, i)));
    std::sort(xs.begin(), xs.end(), std::greater<>());
    return xs;
}

double FundamentalNearZero::fundamental_residual(const ProblemSpec& spec, double t) const {
    const double d = 0.25 * std::min(U_t.h, U_cont.cells > 0 ? U_cont.h : U_t.h);
    auto Ut = [&](double s) { return U(std::exp(-s)); };
    const Matrix dU = (-Ut(t + 2 * d) + 8.0 * Ut(t + d) - 8.0 * Ut(t - d) + Ut(t - 2 * d)) / (12.0 * d);
    const double x = std::exp(-t);
    const Matrix u = Ut(t);
    const int n = static_cast<int>(A.rows());
    const Matrix r = dU - (u * A - A * u) + x * spec.B_at(x) * (Matrix::Identity(n, n) + u);
    return opnorm(r);
}

FundamentalNearZero solve_U(const ProblemSpec& spec, const SolverConfig& cfg) {
    const int n = spec.n;
    validate_condition_A(spec.A, cfg.split_tol);
    FundamentalNearZero f;
    f.A = spec.A;
    f.M = spec.B_sup();
    const double m = std::sqrt(static_cast<double>(n)) * f.M;

    // the gate decides x_p; the caller's x0 only moves it further in
    const Matrix op = commutator_operator(spec.A);
    Gate gate = make_gate(op, f.M, m, cfg.x0.value_or(1e300), cfg.tol);
    f.x0 = cfg.x0.value_or(std::exp(-gate.t_start));
    f.t0 = gate.t_start;
    f.q = gate.q;
    f.C_ball = gate.C_ball;
    f.C_A = gate.kernel.C_A;
    f.K_A = gate.kernel.K_A;
    f.r = gate.kernel.r;
    f.t_cut = gate.t_cut;

    auto H = [&](double t, const Vector& v) -> Vector {
        return -vec(spec.B_at(std::exp(-t)) * unvec(v, n));
    };
    auto h = [&](double t) -> Vector { return -vec(spec.B_at(std::exp(-t))); };
    f.U_t = picard_solve(gate.kernel, gate.t_start, gate.t_cut, gate.q, H, h, cfg.tol, gate.cell,
                         &f.picard);

    const double t_x0 = -std::log(f.x0);
    if (t_x0 < gate.t_start) {
        const Matrix I = Matrix::Identity(n, n);
        auto mfn = [&](double x) -> Matrix {
            const Matrix ax = spec.A / x;
            // vec(P U - U ax) = (I kron P - ax^T kron I) vec U with P = A/x + B
            const Matrix p = ax + spec.B_at(x);
            Matrix out = Matrix::Zero(n * n, n * n);
            for (int j = 0; j < n; ++j) {
                out.block(j * n, j * n, n, n) += p;
                for (int k = 0; k < n; ++k) out.block(j * n, k * n, n, n) -= ax(k, j) * I;
            }
            return out;
        };
        auto forcing = [&](double x) -> Matrix { return vec(spec.B_at(x)); };
        f.U_cont = continue_in_x(t_x0, gate.t_start, gate.cell, f.U_t(gate.t_start), mfn, forcing);
    } else {
        f.U_cont.dim = n * n;
    }
    return f;
}

Vector C1Solution::z(double x) const {
    if (!(x >= 0.0)) throw Error(ErrorKind::Domain, "C1 solution requires x >= 0");
    if (x == 0.0) return Vector::Zero(zeta.size());
    const double t = -std::log(x);
    return (t < t0 && z_cont.cells > 0) ? z_cont(t) : z_t(t);
}

Vector C1Solution::operator()(double x) const { return zeta + zeta1 * x + z(x); }

C1Solution c1_solution_near_zero(const ProblemSpec& spec, double x0, const Vector& zeta,
                                 const std::vector<TermSum>& g, double tol) {
    const int n = spec.n;
    if (zeta.size() != n || static_cast<int>(g.size()) != n)
        throw Error(ErrorKind::Dimension, "c1_solution_near_zero: size mismatch");
    const double scale = std::max(1.0, opnorm(spec.A));
    if ((spec.A * zeta).norm() > 1e-8 * scale * std::max(1.0, zeta.norm()))
        throw Error(ErrorKind::Domain, "zeta is not in ker A");
    validate_condition_A(spec.A);

    C1Solution sol;
    sol.zeta = zeta;
    sol.x0 = x0;
    const Matrix I = Matrix::Identity(n, n);
    const Matrix B0 = spec.B_at(0.0);
    const Vector g0 = eval(g, 0.0);
    sol.zeta1 = (I - spec.A).partialPivLu().solve(B0 * zeta + g0);
    const Vector zeta1 = sol.zeta1;

    auto gt = [&](double x) -> Vector {
        return (spec.B_at(x) - B0) * zeta + eval(g, x) - g0 + x * spec.B_at(x) * zeta1;
    };
    const double M = spec.B_sup();
    const double m0 = sampled_sup([&](double x) { return gt(x).norm(); }, x0);
    Gate gate = make_gate(-spec.A, M, m0, x0, tol);
    sol.t0 = gate.t_start;

    auto H = [&](double t, const Vector& v) -> Vector { return -(spec.B_at(std::exp(-t)) * v); };
    auto h = [&](double t) -> Vector { return -gt(std::exp(-t)); };
    sol.z_t = picard_solve(gate.kernel, gate.t_start, gate.t_cut, gate.q, H, h, tol, gate.cell,
                           &sol.picard);

    const double t_x0 = -std::log(x0);
    if (t_x0 < gate.t_start) {
        // z' = (A/x + B) z + g~(x)
        auto mfn = [&](double x) -> Matrix { return spec.A / x + spec.B_at(x); };
        auto forcing = [&](double x) -> Matrix { return gt(x); };
        sol.z_cont = continue_in_x(t_x0, gate.t_start, gate.cell, sol.z_t(gate.t_start), mfn, forcing);
    } else {
        sol.z_cont.dim = n;
    }
    return sol;
}

Matrix ThetaMap::Theta(double x) const {
    const int n = static_cast<int>(kernel_basis.rows());
    Matrix th = Matrix::Zero(n, n);
    for (size_t k = 0; k < columns.size(); ++k) {
        const Vector zk = kernel_basis.col(static_cast<Eigen::Index>(k));
        th += (columns[k](x) - zk) * zk.transpose();
    }
    return th;
}

ThetaMap compute_theta(const ProblemSpec& spec, double x0, double tol) {
    ThetaMap map;
    map.x0 = x0;
    map.kernel_basis = null_space(spec.A).columns;
    const std::vector<TermSum> zero(static_cast<size_t>(spec.n));
    for (Eigen::Index k = 0; k < map.kernel_basis.cols(); ++k)
        map.columns.push_back(
            c1_solution_near_zero(spec, x0, map.kernel_basis.col(k), zero, tol));
    map.Theta_x0 = map.Theta(x0);
    return map;
}

}  // namespace singbvp
