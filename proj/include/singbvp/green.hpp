#pragma once

// Green kernel G(x, s), the auxiliary F, N, M and the generalized Green
// function for y(+0) = 0, y(+inf) = 0, with the property battery.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "singbvp/lattice.hpp"
#include "singbvp/twogrid.hpp"

namespace singbvp {

/// Y(x; x0) B_j and D_j Y^{-1}(x; x0) at every grid node.
struct ModeSamples {
    std::array<std::vector<Matrix>, 6> Y, Z;
};

ModeSamples sample_modes(const ModeSet& modes, const TwoGrid& grid);

/// Sign of part j in G(x, s); `above` selects the side x > s when x == s.
double green_sign(int j, double x, double s, double x0, bool above);

class GreenAssembly {
public:
    /// All references must outlive the assembly.
    GreenAssembly(const ProblemSpec& spec, const SubspaceLattice& lattice, const ModeSet& modes,
                  const TwoGrid& grid, const ModeSamples& samples, double kappa, double beta);

    double kappa() const { return kappa_; }
    double beta() const { return beta_; }
    const Matrix& Pi() const { return Pi_; }
    const Matrix& gram_L1() const { return gram_; }

    Matrix G(double x, double s) const { return G_side(x, s, s <= x); }
    Matrix G_side(double x, double s, bool above) const;
    Matrix F(double x) const;
    Matrix N(double x) const;
    /// Pi Y^{-1}(s; x0).
    Matrix PiYinv(double s) const;
    /// Coefficients m(s) with Y(x; x0) P1 M(s) = Y(x; x0) B1 m(s).
    Matrix M_coeff(double s) const;
    Matrix M(double s) const;
    Matrix generalized(double x, double s) const { return generalized_side(x, s, s <= x); }
    Matrix generalized_side(double x, double s, bool above) const;
    /// Gaussian weight kappa^{1+beta} x^beta e^{-kappa x} / Gamma(1+beta).
    double weight(double x) const;

    const ProblemSpec& spec() const { return spec_; }
    const SubspaceLattice& lattice() const { return lat_; }
    const ModeSet& modes() const { return modes_; }
    const TwoGrid& grid() const { return grid_; }

private:
    const ProblemSpec& spec_;
    const SubspaceLattice& lat_;
    const ModeSet& modes_;
    const TwoGrid& grid_;
    double kappa_, beta_;
    Matrix Pi_, gram_, gram_inv_;
    int d1_ = 0;
    // cumulative integrals of Phi1^T Y_j: from x_min (fwd) and to X_inf (bwd)
    std::array<std::vector<Matrix>, 6> fwd_, bwd_;
    std::array<std::vector<Matrix>, 6> integrand_;
    std::array<Matrix, 6> n_term_;  // int Phi1^T (1 - P(1+beta, kappa x)) Y_j dx, j = 5, 6
};

/// Composite 15-point Gauss-Legendre on [a, b], panels of width 1/4 in ln x
/// below x0 and in x above it, with extra breakpoints at `cuts`.
Matrix integrate_composite(const std::function<Matrix(double)>& fn, double a, double b, double x0,
                           const std::vector<double>& cuts, const Matrix& zero);

/// Gram matrix of the L1 frame Y(x; x0) B1 in L^2(0, inf).
Matrix compute_gram_L1(const TwoGrid& grid, const ModeSamples& samples, double gamma);

struct GreenCheck {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string status;  // "pass", "fail", "skipped"
    std::vector<double> probes;
};

struct GreenReport {
    std::vector<GreenCheck> checks;
    bool ok() const;
};

struct GreenProbeOptions {
    double tol = 1e-8;
    int probes = 3;  // s probes spread over [x0 / 2, 2 x0]
};

GreenReport verify_green(const GreenAssembly& g, const GreenProbeOptions& opts = {});

}  // namespace singbvp
