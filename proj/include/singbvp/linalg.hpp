#pragma once

// Dense small-dimension linear algebra used throughout the solver: matrix
// exponentials and powers, spectral projectors, subspace arithmetic and a
// few special functions.

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "singbvp/error.hpp"

namespace singbvp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kDefaultSplitTol = 1e-8;

/// Projectors onto the invariant subspaces of an operator whose eigenvalues
/// lie strictly below, on, and strictly above the line Re(lambda) = threshold.
struct SpectralSplit {
    double threshold = 0.0;
    Matrix below;
    Matrix on;
    Matrix above;
    int r_on = 0;  ///< largest Jordan block on the line (0 if none)

    int rank_below() const;
    int rank_on() const;
    int rank_above() const;
};

/// Columns form a basis of a subspace of R^n, orthonormal in the metric the
/// producer states (Euclidean unless noted).
struct SubspaceBasis {
    int ambient_dim = 0;
    Matrix columns;  // ambient_dim x dim

    SubspaceBasis() = default;
    explicit SubspaceBasis(int n) : ambient_dim(n), columns(n, 0) {}
    SubspaceBasis(int n, Matrix cols) : ambient_dim(n), columns(std::move(cols)) {}

    int dim() const { return static_cast<int>(columns.cols()); }
    bool empty() const { return columns.cols() == 0; }

    static SubspaceBasis whole(int n);
    static SubspaceBasis zero(int n) { return SubspaceBasis(n); }
    /// Orthonormalises the column span of `m` with rank threshold tol*sigma_max.
    static SubspaceBasis span(const Matrix& m, double tol = kDefaultSplitTol);
};

/// Symmetric positive definite metric <u, v> = u^T W v.
struct InnerProduct {
    Matrix W;

    static InnerProduct euclidean(int n) { return {Matrix::Identity(n, n)}; }
    double dot(const Vector& u, const Vector& v) const { return u.dot(W * v); }
};

// ---- matrix functions ---------------------------------------------------

Matrix mat_exp(const Matrix& a);
/// x^A := exp(ln(x) A), x > 0.
Matrix mat_power(const Matrix& a, double x);

// ---- spectral decomposition ---------------------------------------------

/// Spectral projector onto the invariant subspace of all eigenvalues for
/// which `select` is true (complex Schur form, reordered, Sylvester decoupled).
Matrix spectral_projector(const Matrix& a,
                          const std::function<bool(std::complex<double>)>& select);

SpectralSplit spectral_split(const Matrix& a, double c, double tol = kDefaultSplitTol,
                             bool strict = false);

std::vector<std::complex<double>> eigenvalues(const Matrix& a);

// ---- subspaces ------------------------------------------------------------

SubspaceBasis subspace_sum(const SubspaceBasis& s1, const SubspaceBasis& s2,
                           double tol = kDefaultSplitTol);
SubspaceBasis subspace_intersect(const SubspaceBasis& s1, const SubspaceBasis& s2,
                                 double tol = kDefaultSplitTol);
/// C with inner (+) C = outer and C orthogonal to inner in `metric`.
SubspaceBasis subspace_complement(const SubspaceBasis& inner, const SubspaceBasis& outer,
                                  const InnerProduct& metric, double tol = kDefaultSplitTol);
SubspaceBasis null_space(const Matrix& a, double tol = kDefaultSplitTol);
/// Largest principal-angle sine between two subspaces of equal dimension
/// (1 if the dimensions differ).
double subspace_distance(const SubspaceBasis& s1, const SubspaceBasis& s2);
bool contains(const SubspaceBasis& outer, const SubspaceBasis& inner, double tol);

std::vector<Matrix> projectors_from_decomposition(const std::vector<SubspaceBasis>& parts,
                                                  double max_condition = 1e12);

// ---- misc -----------------------------------------------------------------

/// Regularised lower incomplete gamma P(s, t).
double reg_lower_gamma(double s, double t);

/// Minimum-norm solution of A x = b; throws ErrorKind::Consistency when b is
/// not in the range of A within tol.
Vector min_norm_solve(const Matrix& a, const Vector& b, double tol = kDefaultSplitTol);

/// vec(V A - A V) as an n^2 x n^2 matrix acting on column-stacked V.
Matrix commutator_operator(const Matrix& a);

inline double opnorm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

}  // namespace singbvp
