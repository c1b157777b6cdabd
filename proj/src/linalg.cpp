#include "singbvp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>
#include <unsupported/Eigen/MatrixFunctions>

namespace singbvp {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Dimension: return "dimension";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Range: return "range";
        case ErrorKind::Resonance: return "resonance";
        case ErrorKind::Containment: return "containment";
        case ErrorKind::Decomposition: return "decomposition";
        case ErrorKind::Consistency: return "consistency";
        case ErrorKind::Syntax: return "syntax";
        case ErrorKind::Invariant: return "invariant";
        case ErrorKind::UnsupportedDerivative: return "unsupported-derivative";
        case ErrorKind::ConditionA: return "condition-A";
        case ErrorKind::ConditionB: return "condition-B";
        case ErrorKind::ConditionC: return "condition-C";
        case ErrorKind::Structural: return "structural";
        case ErrorKind::Degeneracy: return "degeneracy";
        case ErrorKind::NumericalFailure: return "numerical-failure";
        case ErrorKind::Accuracy: return "accuracy";
        case ErrorKind::Conditioning: return "conditioning";
        case ErrorKind::Unsolvable: return "unsolvable";
        case ErrorKind::DichotomyQuality: return "dichotomy-quality";
        case ErrorKind::Internal: return "internal";
    }
    return "unknown";
}

namespace {

void require_square(const Matrix& a, const char* what) {
    if (a.rows() != a.cols()) {
        std::ostringstream os;
        os << what << ": expected a square matrix, got " << a.rows() << "x" << a.cols();
        throw Error(ErrorKind::Dimension, os.str());
    }
}

std::string format_complex(std::complex<double> z) {
    std::ostringstream os;
    os.precision(12);
    os << z.real();
    if (z.imag() != 0.0) os << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
    return os.str();
}

// Swaps the adjacent diagonal entries k, k+1 of the upper-triangular t and
// accumulates the unitary similarity into u.
void swap_schur(CMatrix& t, CMatrix& u, Eigen::Index k) {
    const std::complex<double> a = t(k, k);
    const std::complex<double> b = t(k + 1, k + 1);
    const std::complex<double> c = t(k, k + 1);
    if (a == b) return;
    // eigenvector of the 2x2 block for b, becomes the first basis vector
    Eigen::Vector2cd v(c, b - a);
    v.normalize();
    Eigen::Matrix2cd z;
    z.col(0) = v;
    z.col(1) = Eigen::Vector2cd(-std::conj(v(1)), std::conj(v(0)));

    const Eigen::Index n = t.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        const std::complex<double> x = t(k, j), y = t(k + 1, j);
        t(k, j) = std::conj(z(0, 0)) * x + std::conj(z(1, 0)) * y;
        t(k + 1, j) = std::conj(z(0, 1)) * x + std::conj(z(1, 1)) * y;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::complex<double> x = t(i, k), y = t(i, k + 1);
        t(i, k) = x * z(0, 0) + y * z(1, 0);
        t(i, k + 1) = x * z(0, 1) + y * z(1, 1);
        const std::complex<double> p = u(i, k), q = u(i, k + 1);
        u(i, k) = p * z(0, 0) + q * z(1, 0);
        u(i, k + 1) = p * z(0, 1) + q * z(1, 1);
    }
    t(k + 1, k) = 0.0;
    t(k, k) = b;
    t(k + 1, k + 1) = a;
}

// Solves t11 r - r t22 = c for upper-triangular t11, t22.
CMatrix solve_triangular_sylvester(const CMatrix& t11, const CMatrix& t22, const CMatrix& c) {
    const Eigen::Index m = t11.rows(), p = t22.rows();
    CMatrix r = CMatrix::Zero(m, p);
    for (Eigen::Index i = m - 1; i >= 0; --i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            std::complex<double> rhs = c(i, j);
            for (Eigen::Index k = i + 1; k < m; ++k) rhs -= t11(i, k) * r(k, j);
            for (Eigen::Index l = 0; l < j; ++l) rhs += r(i, l) * t22(l, j);
            const std::complex<double> d = t11(i, i) - t22(j, j);
            if (std::abs(d) == 0.0) {
                throw Error(ErrorKind::Internal, "spectral projector: selected and rejected "
                                                 "eigenvalues coincide");
            }
            r(i, j) = rhs / d;
        }
    }
    return r;
}

}  // namespace

int SpectralSplit::rank_below() const { return static_cast<int>(std::lround(below.trace())); }
int SpectralSplit::rank_on() const { return static_cast<int>(std::lround(on.trace())); }
int SpectralSplit::rank_above() const { return static_cast<int>(std::lround(above.trace())); }

SubspaceBasis SubspaceBasis::whole(int n) { return SubspaceBasis(n, Matrix::Identity(n, n)); }

SubspaceBasis SubspaceBasis::span(const Matrix& m, double tol) {
    const int n = static_cast<int>(m.rows());
    if (m.cols() == 0) return SubspaceBasis(n);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) <= 1e-300) return SubspaceBasis(n);
    int rank = 0;
    while (rank < s.size() && s(rank) > tol * s(0)) ++rank;
    return SubspaceBasis(n, svd.matrixU().leftCols(rank));
}

Matrix mat_exp(const Matrix& a) {
    require_square(a, "mat_exp");
    if (a.size() == 0) return a;
    if (!a.allFinite()) throw Error(ErrorKind::Domain, "mat_exp: non-finite entries");
    Matrix e = a.exp();
    if (!e.allFinite()) {
        std::ostringstream os;
        os << "mat_exp: result overflows (||A||_1 = " << a.cwiseAbs().colwise().sum().maxCoeff()
           << ")";
        throw Error(ErrorKind::Range, os.str());
    }
    return e;
}

Matrix mat_power(const Matrix& a, double x) {
    require_square(a, "mat_power");
    if (!(x > 0.0)) {
        std::ostringstream os;
        os << "mat_power: base must be positive, got " << x;
        throw Error(ErrorKind::Domain, os.str());
    }
    if (x == 1.0) return Matrix::Identity(a.rows(), a.cols());
    const double lx = std::log(x);
    // exp overflows near 709.78; leave room for the polynomial factors of
    // non-trivial Jordan blocks.
    constexpr double kMaxExponent = 700.0;
    for (const auto& lam : eigenvalues(a)) {
        const double expo = lam.real() * lx;
        if (expo > kMaxExponent) {
            std::ostringstream os;
            os << "mat_power: exponent Re(lambda) ln x = " << expo << " for lambda = "
               << format_complex(lam) << " exceeds floating range";
            throw Error(ErrorKind::Range, os.str());
        }
    }
    return mat_exp(lx * a);
}

std::vector<std::complex<double>> eigenvalues(const Matrix& a) {
    require_square(a, "eigenvalues");
    std::vector<std::complex<double>> out;
    if (a.size() == 0) return out;
    Eigen::ComplexSchur<Matrix> schur(a, false);
    const auto& t = schur.matrixT();
    for (Eigen::Index i = 0; i < t.rows(); ++i) out.push_back(t(i, i));
    return out;
}

Matrix spectral_projector(const Matrix& a,
                          const std::function<bool(std::complex<double>)>& select) {
    require_square(a, "spectral_projector");
    const Eigen::Index n = a.rows();
    if (n == 0) return a;
    Eigen::ComplexSchur<Matrix> schur(a);
    CMatrix t = schur.matrixT();
    CMatrix u = schur.matrixU();

    std::vector<bool> flag(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) flag[static_cast<size_t>(i)] = select(t(i, i));
    // stable bubble of the selected eigenvalues to the leading block
    Eigen::Index m = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!flag[static_cast<size_t>(i)]) continue;
        for (Eigen::Index k = i - 1; k >= m; --k) {
            swap_schur(t, u, k);
            std::swap(flag[static_cast<size_t>(k)], flag[static_cast<size_t>(k + 1)]);
        }
        ++m;
    }
    if (m == 0) return Matrix::Zero(n, n);
    if (m == n) return Matrix::Identity(n, n);

    const CMatrix r = solve_triangular_sylvester(t.topLeftCorner(m, m),
                                                 t.bottomRightCorner(n - m, n - m),
                                                 t.topRightCorner(m, n - m));
    CMatrix p = CMatrix::Zero(n, n);
    p.topLeftCorner(m, m).setIdentity();
    p.topRightCorner(m, n - m) = r;
    return (u * p * u.adjoint()).real();
}

SpectralSplit spectral_split(const Matrix& a, double c, double tol, bool strict) {
    require_square(a, "spectral_split");
    if (!(tol > 0.0)) throw Error(ErrorKind::Domain, "spectral_split: tol must be positive");
    const auto n = a.rows();
    const auto eig = eigenvalues(a);
    if (strict) {
        for (const auto& lam : eig) {
            if (std::abs(lam.real() - c) <= tol) {
                std::ostringstream os;
                os << "eigenvalue " << format_complex(lam) << " lies on the line Re = " << c;
                throw Error(ErrorKind::Resonance, os.str());
            }
        }
    }

    SpectralSplit out;
    out.threshold = c;
    out.below = spectral_projector(a, [&](std::complex<double> z) { return z.real() < c - tol; });
    out.above = spectral_projector(a, [&](std::complex<double> z) { return z.real() > c + tol; });
    out.on = Matrix::Identity(n, n) - out.below - out.above;

    // Jordan structure on the line: nilpotency index of (A - lambda) on each
    // cluster of on-line eigenvalues.
    const double scale = std::max(1.0, opnorm(a));
    const double cluster = 1e-5 * scale;
    std::vector<std::complex<double>> centers;
    for (const auto& lam : eig) {
        if (std::abs(lam.real() - c) > tol) continue;
        bool seen = false;
        for (const auto& z : centers) seen = seen || std::abs(z - lam) <= cluster;
        if (!seen) centers.push_back(lam);
    }
    int r_on = 0;
    for (const auto& z : centers) {
        const Matrix pz = spectral_projector(
            a, [&](std::complex<double> w) { return std::abs(w - z) <= cluster; });
        const CMatrix shifted = a.cast<std::complex<double>>() -
                                z * CMatrix::Identity(n, n);
        CMatrix acc = pz.cast<std::complex<double>>();
        int k = 0;
        while (k < n) {
            acc = shifted * acc;
            ++k;
            if (acc.cwiseAbs().maxCoeff() <= 1e-6 * scale) break;
        }
        r_on = std::max(r_on, k);
    }
    out.r_on = r_on;
    return out;
}

SubspaceBasis subspace_sum(const SubspaceBasis& s1, const SubspaceBasis& s2, double tol) {
    if (s1.ambient_dim != s2.ambient_dim)
        throw Error(ErrorKind::Dimension, "subspace_sum: ambient dimensions differ");
    Matrix m(s1.ambient_dim, s1.dim() + s2.dim());
    m << s1.columns, s2.columns;
    return SubspaceBasis::span(m, tol);
}

SubspaceBasis subspace_intersect(const SubspaceBasis& s1, const SubspaceBasis& s2, double tol) {
    if (s1.ambient_dim != s2.ambient_dim)
        throw Error(ErrorKind::Dimension, "subspace_intersect: ambient dimensions differ");
    const int n = s1.ambient_dim;
    if (s1.empty() || s2.empty()) return SubspaceBasis(n);
    const SubspaceBasis q1 = SubspaceBasis::span(s1.columns, tol);
    const SubspaceBasis q2 = SubspaceBasis::span(s2.columns, tol);
    const Matrix resid = q1.columns - q2.columns * (q2.columns.transpose() * q1.columns);
    Eigen::JacobiSVD<Matrix> svd(resid, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const int k = q1.dim();
    std::vector<int> keep;
    for (int i = 0; i < k; ++i) {
        const double sigma = i < s.size() ? s(i) : 0.0;
        if (sigma <= tol) keep.push_back(i);
    }
    if (keep.empty()) return SubspaceBasis(n);
    Matrix v(k, static_cast<Eigen::Index>(keep.size()));
    for (size_t j = 0; j < keep.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = svd.matrixV().col(keep[j]);
    return SubspaceBasis::span(q1.columns * v, tol);
}

SubspaceBasis null_space(const Matrix& a, double tol) {
    const int n = static_cast<int>(a.cols());
    if (a.rows() == 0) return SubspaceBasis::whole(n);
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s.size() ? s(0) : 0.0;
    int rank = 0;
    if (smax > 1e-300)
        while (rank < s.size() && s(rank) > tol * std::max(1.0, smax)) ++rank;
    return SubspaceBasis(n, svd.matrixV().rightCols(n - rank));
}

bool contains(const SubspaceBasis& outer, const SubspaceBasis& inner, double tol) {
    if (inner.empty()) return true;
    if (outer.empty()) return inner.columns.norm() <= tol;
    const SubspaceBasis qo = SubspaceBasis::span(outer.columns);
    const Matrix resid = inner.columns - qo.columns * (qo.columns.transpose() * inner.columns);
    return opnorm(resid) <= tol * std::max(1.0, opnorm(inner.columns));
}

SubspaceBasis subspace_complement(const SubspaceBasis& inner, const SubspaceBasis& outer,
                                  const InnerProduct& metric, double tol) {
    if (inner.ambient_dim != outer.ambient_dim)
        throw Error(ErrorKind::Dimension, "subspace_complement: ambient dimensions differ");
    const int n = outer.ambient_dim;
    if (!contains(outer, inner, std::max(std::sqrt(tol), 1e-6))) {
        throw Error(ErrorKind::Containment,
                    "subspace_complement: inner subspace is not contained in outer");
    }
    const SubspaceBasis qo = SubspaceBasis::span(outer.columns, tol);
    if (inner.empty()) return qo;
    const Matrix constraint = inner.columns.transpose() * metric.W * qo.columns;
    const SubspaceBasis ker = null_space(constraint, tol);
    if (ker.empty()) return SubspaceBasis(n);
    return SubspaceBasis::span(qo.columns * ker.columns, tol);
}

double subspace_distance(const SubspaceBasis& s1, const SubspaceBasis& s2) {
    if (s1.dim() != s2.dim()) return 1.0;
    if (s1.empty()) return 0.0;
    const SubspaceBasis q1 = SubspaceBasis::span(s1.columns);
    const SubspaceBasis q2 = SubspaceBasis::span(s2.columns);
    if (q1.dim() != q2.dim()) return 1.0;
    return opnorm(q1.columns - q2.columns * (q2.columns.transpose() * q1.columns));
}

std::vector<Matrix> projectors_from_decomposition(const std::vector<SubspaceBasis>& parts,
                                                  double max_condition) {
    if (parts.empty()) throw Error(ErrorKind::Decomposition, "no parts given");
    const int n = parts.front().ambient_dim;
    int total = 0;
    for (const auto& p : parts) {
        if (p.ambient_dim != n)
            throw Error(ErrorKind::Dimension, "projectors_from_decomposition: ambient mismatch");
        total += p.dim();
    }
    if (total != n) {
        std::ostringstream os;
        os << "parts span " << total << " dimensions in R^" << n << " (not a direct sum)";
        throw Error(ErrorKind::Decomposition, os.str());
    }
    Matrix t(n, n);
    int col = 0;
    for (const auto& p : parts) {
        t.middleCols(col, p.dim()) = p.columns;
        col += p.dim();
    }
    Eigen::JacobiSVD<Matrix> svd(t);
    const auto& s = svd.singularValues();
    const double cond = s(n - 1) > 0.0 ? s(0) / s(n - 1) : INFINITY;
    if (!(cond <= max_condition)) {
        std::ostringstream os;
        os << "parts are not a direct sum (condition number " << cond << ")";
        throw Error(ErrorKind::Decomposition, os.str());
    }
    const Matrix tinv = t.inverse();
    std::vector<Matrix> out;
    col = 0;
    for (const auto& p : parts) {
        out.push_back(p.columns * tinv.middleRows(col, p.dim()));
        col += p.dim();
    }
    return out;
}

double reg_lower_gamma(double s, double t) {
    if (!(s > 0.0)) {
        std::ostringstream os;
        os << "reg_lower_gamma: shape must be positive, got " << s;
        throw Error(ErrorKind::Domain, os.str());
    }
    if (!(t >= 0.0)) throw Error(ErrorKind::Domain, "reg_lower_gamma: t must be non-negative");
    if (t == 0.0) return 0.0;
    return boost::math::gamma_p(s, t);
}

Vector min_norm_solve(const Matrix& a, const Vector& b, double tol) {
    if (a.rows() != b.size())
        throw Error(ErrorKind::Dimension, "min_norm_solve: right-hand side size mismatch");
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s.size() ? s(0) : 0.0;
    Vector x = Vector::Zero(a.cols());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (smax <= 0.0 || s(i) <= tol * smax) break;
        x += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(b) / s(i));
    }
    const double resid = (a * x - b).norm();
    if (resid > tol * std::max(1.0, b.norm())) {
        std::ostringstream os;
        os << "right-hand side is not in the range of the operator (residual " << resid << ")";
        throw Error(ErrorKind::Consistency, os.str());
    }
    return x;
}

Matrix commutator_operator(const Matrix& a) {
    require_square(a, "commutator_operator");
    const Eigen::Index n = a.rows();
    const Matrix id = Matrix::Identity(n, n);
    Matrix out = Matrix::Zero(n * n, n * n);
    // vec(V A) = (A^T kron I) vec V,  vec(A V) = (I kron A) vec V
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            out.block(i * n, j * n, n, n) += a(j, i) * id;
            if (i == j) out.block(i * n, j * n, n, n) -= a;
        }
    return out;
}

}  // namespace singbvp
