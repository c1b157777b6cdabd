#pragma once

// Six-part decomposition of the initial values at x0 by behaviour at 0
// (x^{1+alpha} decay, limit in ker A, other) and at infinity (decay, growth),
// the adapted metric, and per-part solution factors on (0, X_inf].

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "singbvp/dichotomy.hpp"
#include "singbvp/frobenius.hpp"

namespace singbvp {

struct SubspaceLattice {
    std::array<SubspaceBasis, 6> L;
    std::array<Matrix, 6> P;
    Matrix Q_plus, Q_minus, P_minus, P_plus;
    InnerProduct W;
    double alpha = 0.0;
    double gamma = 0.0;
    std::array<int, 6> dims{};
    SubspaceBasis V_plus, V_minus0;
    Matrix basis;      // concatenated part bases T
    Matrix basis_inv;  // T^{-1}; rows of part j are D_j

    Matrix B(int j) const;  // basis of L_j (1-based j)
    Matrix D(int j) const;
    int offset(int j) const;
    Matrix Pi() const { return P[4] + P[5]; }
};

struct NoetherIndex {
    int n = 0;
    int d = 0;
    int index = 0;
};

SubspaceBasis compute_V_plus(const FundamentalNearZero& fz, double split_tol = kDefaultSplitTol);
SubspaceBasis compute_V_minus0(const ThetaMap& theta);
InnerProduct adapted_metric(const std::vector<SubspaceBasis>& parts);

struct LatticeOptions {
    double subspace_tol = 1e-7;
    /// When set, the free complements L2, L3, L4, L6 are mixed with a seeded
    /// random component of the subspace they complement.
    std::optional<std::uint32_t> shuffle_seed;
};

SubspaceLattice build_lattice(const SubspaceBasis& V_plus, const SubspaceBasis& V_minus0,
                              const DichotomyData& dich, double alpha,
                              const LatticeOptions& opts = {});

NoetherIndex noether_index(const SubspaceLattice& lattice);

/// Solution factors Y(x; x0) B_j and D_j Y^{-1}(s; x0) on (0, X_inf].
class ModeSet {
public:
    ModeSet(const SubspaceLattice& lattice, const FundamentalNearZero& fz, DichotomyData& dich,
            double split_tol = kDefaultSplitTol);

    double x0() const { return x0_; }
    double x_inf() const { return field_->x_inf(); }
    int dim(int j) const { return dims_[static_cast<size_t>(j - 1)]; }
    Matrix Y(int j, double x) const;
    Matrix Z(int j, double s) const;
    /// Y(x; x0) v for arbitrary v, assembled part by part.
    Vector solution(const Vector& v, double x) const;
    const FarField& field() const { return *field_; }
    const ModeFactor& far(int j) const { return far_[static_cast<size_t>(j - 1)]; }
    /// Y_F(x0)^{-1} with Y_F(x) = (E + U(x)) x^A.
    const Matrix& near_normaliser() const { return Cn_; }
    /// Coefficients c_j = Cn B_j after structural projection.
    const Matrix& near_coefficients(int j) const { return c_[static_cast<size_t>(j - 1)]; }
    const Matrix& P_zero() const { return P_zero_; }

private:
    const FundamentalNearZero* fz_;
    std::shared_ptr<FarField> field_;
    double x0_;
    std::array<int, 6> dims_{};
    std::array<ModeFactor, 6> far_;
    std::array<Matrix, 6> c_, r_, A_y_, A_z_, lattice_D_;
    Matrix Cn_, P_zero_;
};

struct TypeCertificate {
    int tag = 0;              // 1..6, or 0 for a mixed vector
    int predicted = 0;        // type implied by the sampled asymptotics
    double near_exponent = 0; // log-slope of ||y|| near 0
    double limit_norm = 0;    // ||y(eps)|| at the smallest sample
    double far_rate = 0;      // log-slope of ||y|| near X_inf
    std::string near_class;   // "decay", "kernel", "other"
    std::string far_class;    // "decay", "growth"
};

TypeCertificate classify_solution(const Vector& y0, const SubspaceLattice& lattice,
                                  const ModeSet& modes, const Matrix& A);

}  // namespace singbvp
