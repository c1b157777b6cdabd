#pragma once

// Problem data y' = (A/x + B(x)) y + a/x + f(x) on [0, inf). Entries of B and
// f are finite sums of c * x^p * exp(-mu x) with p >= -1 and mu >= 0.

#include <optional>
#include <string>
#include <vector>

#include "singbvp/linalg.hpp"

namespace singbvp {

struct Term {
    double c = 0.0;
    int p = 0;
    double mu = 0.0;

    bool operator==(const Term&) const = default;
};

struct TermSum {
    std::vector<Term> terms;

    TermSum() = default;
    TermSum(std::initializer_list<Term> t) : terms(t) {}
    explicit TermSum(std::vector<Term> t) : terms(std::move(t)) {}

    bool empty() const { return terms.empty(); }
    bool operator==(const TermSum&) const = default;
};

/// Value at x >= 0; at x = 0 the analytic limit.
double eval(const TermSum& ts, double x);
/// Exact derivative; throws UnsupportedDerivative on p = -1 terms.
TermSum derivative(const TermSum& ts);
/// Merges terms with equal (p, mu) and drops cancelled coefficients.
TermSum combine(const TermSum& ts);
TermSum operator+(const TermSum& a, const TermSum& b);
TermSum operator*(const TermSum& a, const TermSum& b);
TermSum operator*(double s, const TermSum& a);
/// Limit as x -> inf (finite for valid entries).
double limit_at_infinity(const TermSum& ts);
bool vanishes_at_infinity(const TermSum& ts);
/// sum |c| x^p e^{-mu x}: pointwise majorant used for tail bounds.
double envelope(const TermSum& ts, double x);

/// Throws ErrorKind::Invariant, naming `where`, if the entry is discontinuous
/// at 0 or unbounded on [0, inf).
void validate_term_sum(const TermSum& ts, const std::string& where);

struct ProblemSpec {
    int n = 0;
    Matrix A;
    Vector a;
    std::vector<TermSum> B;  // row-major, n*n entries
    std::vector<TermSum> f;  // n entries

    static ProblemSpec zero(int n);

    const TermSum& b(int i, int j) const { return B[static_cast<size_t>(i * n + j)]; }
    TermSum& b(int i, int j) { return B[static_cast<size_t>(i * n + j)]; }

    Matrix B_at(double x) const;
    Vector f_at(double x) const;
    Matrix B_limit() const;
    /// Sampled sup of the spectral norm of B over [0, inf), inflated by 5%.
    double B_sup() const;
    bool operator==(const ProblemSpec&) const = default;
};

/// Vector of term sums evaluated at x.
Vector eval(const std::vector<TermSum>& g, double x);

ProblemSpec parse_problem(const std::string& text);
std::string serialize_problem(const ProblemSpec& spec);
/// Additionally requires f -> 0 at infinity (main boundary value problem).
void validate_main_problem(const ProblemSpec& spec);

/// Input of the manufacture command: n, A, B and the exact solution ystar.
struct ManufactureInput {
    int n = 0;
    Matrix A;
    std::vector<TermSum> B;
    std::vector<TermSum> ystar;
};
ManufactureInput parse_manufacture_input(const std::string& text);

/// Problem whose main boundary value problem has ystar as an exact solution.
ProblemSpec manufacture(const std::vector<TermSum>& ystar, const Matrix& A,
                        const std::vector<TermSum>& B);

/// alpha = min |Re lambda - 1| over the spectrum of A.
double validate_condition_A(const Matrix& A, double tol = kDefaultSplitTol);
/// eta in ran A^T with A eta + a = 0.
Vector validate_condition_C(const Matrix& A, const Vector& a, double tol = kDefaultSplitTol);

struct SolverConfig {
    std::optional<double> x0;
    std::optional<double> x_inf;
    double tol = 1e-8;
    std::optional<double> kappa;
    std::optional<double> beta;
    double split_tol = kDefaultSplitTol;
    bool strict = false;

    void validate() const;
};

/// AUTO rules for the Green-function parameters.
double auto_kappa(double gamma);
double auto_beta(const Matrix& A);

}  // namespace singbvp
