#include "singbvp/lattice.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "singbvp/error.hpp"

namespace singbvp {

namespace {

SubspaceBasis mixed_complement(const SubspaceBasis& inner, const SubspaceBasis& outer, double tol,
                               std::mt19937* rng) {
    const int n = outer.ambient_dim;
    SubspaceBasis c = subspace_complement(inner, outer, InnerProduct::euclidean(n), tol);
    if (!rng || inner.empty() || c.empty()) return c;
    std::normal_distribution<double> nd(0.0, 1.0);
    Matrix R(inner.dim(), c.dim());
    for (Eigen::Index i = 0; i < R.rows(); ++i)
        for (Eigen::Index j = 0; j < R.cols(); ++j) R(i, j) = nd(*rng);
    return SubspaceBasis::span(c.columns + inner.columns * R, tol);
}

SubspaceBasis sum_of(const std::array<SubspaceBasis, 6>& L, std::initializer_list<int> js,
                     double tol) {
    SubspaceBasis s = SubspaceBasis::zero(L[0].ambient_dim);
    for (int j : js) s = subspace_sum(s, L[static_cast<size_t>(j - 1)], tol);
    return s;
}

}  // namespace

int SubspaceLattice::offset(int j) const {
    int o = 0;
    for (int k = 1; k < j; ++k) o += dims[static_cast<size_t>(k - 1)];
    return o;
}

Matrix SubspaceLattice::B(int j) const { return basis.middleCols(offset(j), dims[j - 1]); }

Matrix SubspaceLattice::D(int j) const { return basis_inv.middleRows(offset(j), dims[j - 1]); }

SubspaceBasis compute_V_plus(const FundamentalNearZero& fz, double split_tol) {
    const int n = static_cast<int>(fz.A.rows());
    const SpectralSplit sp = spectral_split(fz.A, 1.0, split_tol);
    const SubspaceBasis ran = SubspaceBasis::span(sp.above, 1e-8);
    if (ran.empty()) return SubspaceBasis::zero(n);
    const Matrix E = Matrix::Identity(n, n);
    return SubspaceBasis::span((E + fz.U(fz.x0)) * ran.columns, 1e-10);
}

SubspaceBasis compute_V_minus0(const ThetaMap& theta) {
    const int n = static_cast<int>(theta.kernel_basis.rows());
    if (theta.empty()) return SubspaceBasis::zero(n);
    const Matrix E = Matrix::Identity(n, n);
    return SubspaceBasis::span((E + theta.Theta_x0) * theta.kernel_basis, 1e-10);
}

InnerProduct adapted_metric(const std::vector<SubspaceBasis>& parts) {
    const int n = parts.front().ambient_dim;
    Matrix T(n, n);
    int o = 0;
    for (const auto& p : parts) {
        if (o + p.dim() > n) throw Error(ErrorKind::Dimension, "parts exceed the ambient space");
        T.middleCols(o, p.dim()) = p.columns;
        o += p.dim();
    }
    if (o != n) throw Error(ErrorKind::Dimension, "parts do not span the ambient space");
    Eigen::FullPivLU<Matrix> lu(T);
    if (!lu.isInvertible()) throw Error(ErrorKind::Decomposition, "parts are not independent");
    const Matrix Ti = lu.inverse();
    Matrix W = Ti.transpose() * Ti;
    return {0.5 * (W + W.transpose())};
}

SubspaceLattice build_lattice(const SubspaceBasis& V_plus, const SubspaceBasis& V_minus0,
                              const DichotomyData& dich, double alpha,
                              const LatticeOptions& opts) {
    const double tol = opts.subspace_tol;
    const int n = V_plus.ambient_dim;
    const SubspaceBasis& Um = dich.U_minus;
    std::mt19937 rng(opts.shuffle_seed.value_or(0));
    std::mt19937* mix = opts.shuffle_seed ? &rng : nullptr;

    if (!subspace_intersect(V_plus, V_minus0, tol).empty())
        throw Error(ErrorKind::Structural, "V+ and V-0 intersect");
    const SubspaceBasis Vsum = subspace_sum(V_plus, V_minus0, tol);

    SubspaceLattice lat;
    lat.alpha = alpha;
    lat.gamma = dich.gamma;
    lat.V_plus = V_plus;
    lat.V_minus0 = V_minus0;
    auto& L = lat.L;
    L[0] = subspace_intersect(Um, V_plus, tol);
    const SubspaceBasis W1 = subspace_intersect(Um, Vsum, tol);
    L[1] = mixed_complement(L[0], W1, tol, mix);
    L[2] = mixed_complement(W1, Um, tol, mix);
    L[3] = mixed_complement(L[0], V_plus, tol, mix);
    const SubspaceBasis K = subspace_sum(W1, V_plus, tol);
    L[4] = mixed_complement(subspace_intersect(K, V_minus0, tol), V_minus0, tol, nullptr);
    L[5] = mixed_complement(sum_of(L, {1, 2, 3, 4, 5}, tol), SubspaceBasis::whole(n), tol, mix);

    if (L[1].dim() + L[4].dim() != V_minus0.dim()) {
        std::ostringstream os;
        os << "dim L2 + dim L5 = " << L[1].dim() + L[4].dim() << " but dim V-0 = "
           << V_minus0.dim();
        throw Error(ErrorKind::Internal, os.str());
    }
    int total = 0;
    for (int j = 0; j < 6; ++j) {
        lat.dims[static_cast<size_t>(j)] = L[static_cast<size_t>(j)].dim();
        total += L[static_cast<size_t>(j)].dim();
    }
    if (total != n) throw Error(ErrorKind::Internal, "lattice parts do not add up to n");

    const std::vector<SubspaceBasis> parts(L.begin(), L.end());
    const auto Ps = projectors_from_decomposition(parts);
    for (int j = 0; j < 6; ++j) lat.P[static_cast<size_t>(j)] = Ps[static_cast<size_t>(j)];
    lat.W = adapted_metric(parts);
    lat.basis = Matrix(n, n);
    int o = 0;
    for (const auto& p : parts) {
        lat.basis.middleCols(o, p.dim()) = p.columns;
        o += p.dim();
    }
    lat.basis_inv = lat.basis.inverse();
    lat.Q_plus = lat.P[0] + lat.P[3];
    lat.Q_minus = lat.P[1] + lat.P[2] + lat.P[4] + lat.P[5];
    lat.P_minus = lat.P[0] + lat.P[1] + lat.P[2];
    lat.P_plus = lat.P[3] + lat.P[4] + lat.P[5];

    if (subspace_distance(sum_of(L, {1, 2, 3}, tol), Um) > 1e-6 && Um.dim() > 0)
        throw Error(ErrorKind::Internal, "L1 + L2 + L3 differs from U-");
    if (subspace_distance(sum_of(L, {1, 4}, tol), V_plus) > 1e-6 && V_plus.dim() > 0)
        throw Error(ErrorKind::Internal, "L1 + L4 differs from V+");
    return lat;
}

NoetherIndex noether_index(const SubspaceLattice& lattice) {
    NoetherIndex ni;
    ni.n = lattice.dims[0];
    ni.d = lattice.dims[4] + lattice.dims[5];
    ni.index = ni.n - ni.d;
    return ni;
}

ModeSet::ModeSet(const SubspaceLattice& lat, const FundamentalNearZero& fz, DichotomyData& dich,
                 double split_tol)
    : fz_(&fz), field_(dich.field), x0_(fz.x0) {
    const int n = static_cast<int>(fz.A.rows());
    const Matrix E = Matrix::Identity(n, n);
    dich.set_unstable(sum_of(lat.L, {4, 5, 6}, 1e-10));
    field_ = dich.field;

    const Matrix& A = fz.A;
    const Matrix P_above = spectral_split(A, 1.0, split_tol).above;
    const double scale = std::max(1.0, opnorm(A));
    P_zero_ = spectral_projector(A, [&](std::complex<double> l) {
        return std::abs(l) <= split_tol * scale;
    });
    const Matrix P_az = P_above + P_zero_;

    const Matrix YF0 = fz.Y(x0_);
    Cn_ = YF0.inverse();
    for (int j = 1; j <= 6; ++j) {
        const size_t k = static_cast<size_t>(j - 1);
        dims_[k] = lat.dims[k];
        const Matrix Bj = lat.B(j);
        const Matrix Dj = lat.D(j);
        lattice_D_[k] = Dj;
        far_[k] = field_->propagate(Bj, Dj, j <= 3);
        Matrix c = Cn_ * Bj;
        if (j == 1 || j == 4) c = P_above * c;
        if (j == 2 || j == 5) c = P_az * c;
        c_[k] = c;
        Matrix r = Dj * YF0;
        if (j != 1 && j != 4) r = r * (E - P_above);
        r_[k] = r;
    }
    // Modes confined to an invariant subspace of A use x^A restricted to it,
    // which keeps tiny x from touching the other directions.
    A_y_ = {A * P_above, A * P_az, A, A * P_above, A * P_az, A};
    const Matrix Az = A * (E - P_above);
    A_z_ = {A, Az, Az, A, Az, Az};
}

Matrix ModeSet::Y(int j, double x) const {
    const size_t k = static_cast<size_t>(j - 1);
    const int n = static_cast<int>(fz_->A.rows());
    if (dims_[k] == 0) return Matrix(n, 0);
    if (x >= x0_) return field_->Y_at(far_[k], x);
    const Matrix E = Matrix::Identity(n, n);
    return (E + fz_->U(x)) * (mat_power(A_y_[k], x) * c_[k]);
}

Matrix ModeSet::Z(int j, double s) const {
    const size_t k = static_cast<size_t>(j - 1);
    const int n = static_cast<int>(fz_->A.rows());
    if (dims_[k] == 0) return Matrix(0, n);
    if (s >= x0_) return field_->Z_at(far_[k], s);
    const Matrix E = Matrix::Identity(n, n);
    const Matrix inv = (E + fz_->U(s)).inverse();
    return (r_[k] * mat_power(-A_z_[k], s)) * inv;
}

Vector ModeSet::solution(const Vector& v, double x) const {
    Vector y = Vector::Zero(v.size());
    for (int j = 1; j <= 6; ++j) {
        if (dim(j) == 0) continue;
        y += Y(j, x) * (lattice_D_[static_cast<size_t>(j - 1)] * v);
    }
    return y;
}

TypeCertificate classify_solution(const Vector& y0, const SubspaceLattice& lat,
                                  const ModeSet& modes, const Matrix& A) {
    TypeCertificate c;
    const double total = std::sqrt(std::max(0.0, lat.W.dot(y0, y0)));
    if (!(total > 0.0)) throw Error(ErrorKind::Domain, "cannot classify the zero vector");
    int dominant = 0;
    int active = 0;
    for (int j = 1; j <= 6; ++j) {
        const Vector p = lat.P[static_cast<size_t>(j - 1)] * y0;
        if (std::sqrt(std::max(0.0, lat.W.dot(p, p))) > 1e-6 * total) {
            ++active;
            dominant = j;
        }
    }
    c.tag = active == 1 ? dominant : 0;

    const double x0 = modes.x0();
    const double e1 = 1e-8 * x0, e2 = 1e-6 * x0;
    const Vector y1 = modes.solution(y0, e1);
    const Vector y2 = modes.solution(y0, e2);
    c.limit_norm = y1.norm();
    c.near_exponent = std::log(y2.norm() / y1.norm()) / std::log(e2 / e1);
    const double scale = std::max(1.0, opnorm(A));
    if (c.near_exponent >= 1.0 + 0.5 * lat.alpha)
        c.near_class = "decay";
    else if (c.near_exponent < 1.0 && (A * y1).norm() <= 1e-4 * scale * y1.norm())
        c.near_class = "kernel";
    else
        c.near_class = "other";

    const double xi = modes.x_inf();
    const double xa = std::max(x0, xi - std::min(5.0, 0.5 * (xi - x0)));
    c.far_rate = std::log(modes.solution(y0, xi).norm() / modes.solution(y0, xa).norm()) / (xi - xa);
    c.far_class = c.far_rate < 0.0 ? "decay" : "growth";

    const int base = c.near_class == "decay" ? 1 : c.near_class == "kernel" ? 2 : 3;
    c.predicted = base + (c.far_class == "growth" ? 3 : 0);
    return c;
}

}  // namespace singbvp
