#pragma once

// Far field [x0, X_inf]: transfer matrices between checkpoints, orthonormal
// frames of the decaying and growing solution families, and mode factors
// Y(x; x0) B and D Y^{-1}(s; x0) that are propagated one projected step at a
// time so that no full fundamental matrix is ever formed.

#include <memory>
#include <string>
#include <vector>

#include "singbvp/linalg.hpp"
#include "singbvp/problem.hpp"
#include "singbvp/quadrature.hpp"

namespace singbvp {

/// Y(x; x0) B at checkpoints and D Y^{-1}(s; x0) at checkpoints.
struct ModeFactor {
    bool stable = true;  // propagated with P_- (else P_+)
    Matrix B;            // n x d
    Matrix D;            // d x n
    std::vector<Matrix> Y;
    std::vector<Matrix> Z;

    int dim() const { return static_cast<int>(B.cols()); }
};

class FarField {
public:
    FarField(const ProblemSpec& spec, double x0, double x_inf);

    double x0() const { return x0_; }
    double x_inf() const { return x_inf_; }
    const PanelGrid& grid() const { return grid_; }
    /// Checkpoints: panel endpoints and Gauss nodes, increasing, node (k, i)
    /// has global index k * (order + 1) + i.
    const std::vector<double>& points() const { return xs_; }
    int index(int panel, int i) const { return panel * (grid_.order + 1) + i; }
    Matrix coefficient(double x) const;

    const Matrix& stable_frame(int g) const { return S_[static_cast<size_t>(g)]; }
    const Matrix& unstable_frame(int g) const { return Uu_[static_cast<size_t>(g)]; }
    const Matrix& P_minus(int g) const { return Pm_[static_cast<size_t>(g)]; }
    Matrix P_plus(int g) const;

    int stable_dim() const { return static_cast<int>(S_.front().cols()); }
    /// Transports the given complement of the stable subspace at x0 and
    /// rebuilds the projectors at every checkpoint.
    void set_unstable(const SubspaceBasis& U_plus);

    ModeFactor propagate(const Matrix& B, const Matrix& D, bool stable) const;
    /// Evaluations between checkpoints by a short local integration.
    Matrix Y_at(const ModeFactor& f, double x) const;
    Matrix Z_at(const ModeFactor& f, double s) const;
    /// Index g with points()[g] <= x, or -1 if x is not in [x0, X_inf].
    int locate(double x) const;
    int match(double x) const;  // exact checkpoint index or -1

private:
    Matrix transfer(double to, double from) const;

    ProblemSpec spec_;
    double x0_, x_inf_;
    PanelGrid grid_;
    std::vector<double> xs_;
    std::vector<Matrix> T_;   // T_[g] maps x_g to x_{g+1}
    std::vector<Matrix> S_;   // decaying frames
    std::vector<Matrix> Uu_;  // growing frames
    std::vector<Matrix> Pm_;
};

enum class Mode { Stable, Unstable };

struct DichotomyData {
    SubspaceBasis U_minus;
    SubspaceBasis U_plus;
    double gamma = 0.0;
    double C_star = 1.0;
    Matrix B_inf;
    std::shared_ptr<FarField> field;
    ModeFactor stable;
    ModeFactor unstable;
    std::vector<std::string> warnings;

    double x_inf() const { return field->x_inf(); }
    /// Y(x; x0) P Y^{-1}(s; x0) for P = P_- (s <= x) or P_+ (x <= s).
    Matrix kernel_product(Mode mode, double x, double s) const;
    /// Re-chooses the complement U_plus and rebuilds the mode factors.
    void set_unstable(const SubspaceBasis& U_plus);
};

Matrix limit_B_at_infinity(const ProblemSpec& spec);

/// gamma = 0.9 min |Re lambda(B_inf)|; throws ConditionB if B_inf has an
/// eigenvalue on the imaginary axis.
double dichotomy_rate(const ProblemSpec& spec, double split_tol = kDefaultSplitTol);

/// Smallest truncation point with e^{-gamma (X - x0)} <= tol / 10 and the
/// envelope of f below tol.
double auto_x_inf(const ProblemSpec& spec, double x0, double gamma, double tol);

DichotomyData compute_dichotomy(const ProblemSpec& spec, const SolverConfig& cfg, double x0);

}  // namespace singbvp
