#include <doctest.h>

#include <cmath>

#include "singbvp/linalg.hpp"
#include "test_util.hpp"

using namespace singbvp;
using namespace testutil;

TEST_SUITE("linalg") {

TEST_CASE("mat_exp closed forms") {
    CHECK((mat_exp(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)).norm() < 1e-15);
    const Matrix d = mat_exp(diag2(1, -1));
    CHECK(d(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(d(1, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    Matrix nil(2, 2);
    nil << 0, 1, 0, 0;
    Matrix expect(2, 2);
    expect << 1, 1, 0, 1;
    CHECK((mat_exp(nil) - expect).norm() < 1e-15);
}

TEST_CASE("mat_exp errors") {
    CHECK(thrown_kind([] { mat_exp(Matrix::Zero(2, 3)); }) == ErrorKind::Dimension);
    CHECK(thrown_kind([] { mat_exp(1000.0 * Matrix::Identity(2, 2)); }) == ErrorKind::Range);
}

TEST_CASE("mat_exp matches the eigen-decomposition of symmetric matrices") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix s0 = random_matrix(rng, 4, 20.0);
        const Matrix s = 0.5 * (s0 + s0.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(s);
        const Matrix oracle = es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
                              es.eigenvectors().transpose();
        CHECK((mat_exp(s) - oracle).norm() <= 1e-12 * oracle.norm());
    }
}

TEST_CASE("mat_power") {
    const Matrix p = mat_power(diag2(2, -1), 0.5);
    CHECK(p(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(p(1, 1) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK((mat_power(diag2(2, -1), 1.0) - Matrix::Identity(2, 2)).norm() < 1e-15);
    Matrix nil(2, 2);
    nil << 0, 1, 0, 0;
    Matrix expect(2, 2);
    expect << 1, 1, 0, 1;
    CHECK((mat_power(nil, std::exp(1.0)) - expect).norm() < 1e-14);
    CHECK(thrown_kind([] { mat_power(diag2(1, 1), 0.0); }) == ErrorKind::Domain);
    CHECK(thrown_kind([] { mat_power(diag2(1, 1), -2.0); }) == ErrorKind::Domain);
    CHECK(thrown_kind([] { mat_power(diag2(-800, 1), 1e-300); }) == ErrorKind::Range);
}

TEST_CASE("mat_power semigroup property") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(std::log(0.1), std::log(10.0));
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix a = random_matrix(rng, 4, 2.0);
        const double x = std::exp(u(rng)), y = std::exp(u(rng));
        const Matrix lhs = mat_power(a, x) * mat_power(a, y);
        CHECK((lhs - mat_power(a, x * y)).norm() <= 1e-10 * std::max(1.0, lhs.norm()));
    }
}

TEST_CASE("spectral_split examples") {
    const SpectralSplit s = spectral_split(diag2(2, -1), 1.0, 1e-8, true);
    CHECK((s.below - diag2(0, 1)).norm() < 1e-12);
    CHECK(s.on.norm() < 1e-12);
    CHECK((s.above - diag2(1, 0)).norm() < 1e-12);
    CHECK(s.r_on == 0);
    CHECK(thrown_kind([] { spectral_split(diag2(1, 0), 1.0, 1e-8, true); }) == ErrorKind::Resonance);

    const SpectralSplit k = spectral_split(commutator_operator(diag2(2, -1)), -1.0);
    CHECK(k.rank_below() == 1);
    CHECK(k.rank_on() == 0);
    CHECK(k.rank_above() == 3);
    CHECK(k.r_on == 0);
}

TEST_CASE("spectral_split reports the Jordan block size on the line") {
    Matrix j(3, 3);
    j << -1, 1, 0, 0, -1, 0, 0, 0, 2;
    const SpectralSplit s = spectral_split(j, -1.0);
    CHECK(s.rank_on() == 2);
    CHECK(s.r_on == 2);
    CHECK(s.rank_above() == 1);
}

TEST_CASE("spectral_split invariants on random matrices") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + trial % 5;
        const Matrix a = random_matrix(rng, n, 3.0 * std::sqrt(static_cast<double>(n)));
        const SpectralSplit s = spectral_split(a, 0.1);
        const Matrix E = Matrix::Identity(n, n);
        CHECK((s.below + s.on + s.above - E).norm() <= 1e-10);
        CHECK((s.below * s.above).norm() <= 1e-10);
        CHECK((s.above * s.below).norm() <= 1e-10);
        CHECK((s.below * s.below - s.below).norm() <= 1e-10);
        for (const Matrix* p : {&s.below, &s.on, &s.above})
            CHECK((a * *p - *p * a).norm() <= 1e-8 * a.norm());
        int below = 0;
        for (const auto& l : eigenvalues(a)) below += l.real() < 0.1 ? 1 : 0;
        CHECK(s.rank_below() == below);
    }
}

TEST_CASE("subspace intersections") {
    const Matrix E = Matrix::Identity(3, 3);
    const SubspaceBasis s12(3, E.leftCols(2)), s23(3, E.rightCols(2));
    const SubspaceBasis i = subspace_intersect(s12, s23);
    REQUIRE(i.dim() == 1);
    CHECK(std::abs(std::abs(i.columns(1, 0)) - 1.0) < 1e-12);
    CHECK(subspace_intersect(s12, s12).dim() == 2);
    CHECK(subspace_intersect(SubspaceBasis(3, E.col(0)), SubspaceBasis(3, E.col(1))).empty());
}

TEST_CASE("subspace intersection is covariant under orthogonal changes of basis") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 5;
        const Matrix common = random_matrix(rng, n).leftCols(2);
        Matrix a(n, 3), b(n, 3);
        a << common, random_matrix(rng, n).col(0);
        b << common, random_matrix(rng, n).col(0);
        const SubspaceBasis s1 = SubspaceBasis::span(a), s2 = SubspaceBasis::span(b);
        const Matrix Q = random_orthogonal(rng, n);
        const SubspaceBasis i = subspace_intersect(s1, s2);
        const SubspaceBasis qi = subspace_intersect(SubspaceBasis(n, Q * s1.columns), SubspaceBasis(n, Q * s2.columns));
        REQUIRE(i.dim() == 2);
        CHECK(subspace_distance(qi, SubspaceBasis(n, Q * i.columns)) <= 1e-10);
    }
}

TEST_CASE("subspace complements") {
    const Matrix E = Matrix::Identity(2, 2);
    const InnerProduct eu = InnerProduct::euclidean(2);
    const SubspaceBasis c = subspace_complement(SubspaceBasis(2, E.col(0)), SubspaceBasis::whole(2), eu);
    REQUIRE(c.dim() == 1);
    CHECK(std::abs(c.columns(0, 0)) < 1e-12);
    CHECK(subspace_complement(SubspaceBasis::whole(2), SubspaceBasis::whole(2), eu).empty());
    const SubspaceBasis diag(2, Matrix(Eigen::Vector2d(1, 1)));
    const SubspaceBasis d = subspace_complement(SubspaceBasis::zero(2), diag, eu);
    REQUIRE(d.dim() == 1);
    CHECK(std::abs(std::abs(d.columns(0, 0)) - 1 / std::sqrt(2.0)) < 1e-12);
    CHECK(thrown_kind([&] { subspace_complement(SubspaceBasis(2, E.col(0)), SubspaceBasis(2, E.col(1)), eu); }) ==
          ErrorKind::Containment);
}

TEST_CASE("projectors from a decomposition") {
    const Matrix E = Matrix::Identity(2, 2);
    auto p = projectors_from_decomposition({SubspaceBasis(2, E.col(0)), SubspaceBasis(2, E.col(1))});
    CHECK((p[0] - diag2(1, 0)).norm() < 1e-14);
    CHECK((p[1] - diag2(0, 1)).norm() < 1e-14);
    CHECK((projectors_from_decomposition({SubspaceBasis::whole(3)})[0] - Matrix::Identity(3, 3)).norm() < 1e-14);
    p = projectors_from_decomposition({SubspaceBasis(2, E.col(0)), SubspaceBasis::span(Matrix(Eigen::Vector2d(1, 1)))});
    Matrix p1(2, 2), p2(2, 2);
    p1 << 1, -1, 0, 0;
    p2 << 0, 1, 0, 1;
    CHECK((p[0] - p1).norm() < 1e-12);
    CHECK((p[1] - p2).norm() < 1e-12);
    CHECK(thrown_kind([&] {
              projectors_from_decomposition({SubspaceBasis(2, E.col(0)), SubspaceBasis(2, Matrix(Eigen::Vector2d(1, 1e-15)))});
          }) == ErrorKind::Decomposition);
}

namespace {

// Series P(s, t) = t^s e^{-t} sum_k t^k / Gamma(s + k + 1).
double gamma_series(double s, double t) {
    double term = 1.0 / std::tgamma(s + 1.0), sum = term;
    for (int k = 1; k < 400; ++k) {
        term *= t / (s + k);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return std::pow(t, s) * std::exp(-t) * sum;
}

}  // namespace

TEST_CASE("reg_lower_gamma") {
    CHECK(reg_lower_gamma(1.0, std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(reg_lower_gamma(2.0, 1.0) == doctest::Approx(1.0 - 2.0 / std::exp(1.0)).epsilon(1e-14));
    CHECK(reg_lower_gamma(3.0, 0.0) == 0.0);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> us(0.1, 6.0), ut(0.0, 12.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double s = us(rng), t = ut(rng);
        CHECK(reg_lower_gamma(s, t) == doctest::Approx(gamma_series(s, t)).epsilon(1e-11));
        CHECK(reg_lower_gamma(s, t + 0.5) >= reg_lower_gamma(s, t));
    }
    CHECK(reg_lower_gamma(2.5, 200.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("min_norm_solve") {
    Matrix a(2, 2);
    a << 1, 1, 0, 0;
    const Vector x = min_norm_solve(a, vec2(2, 0));
    CHECK((x - vec2(1, 1)).norm() < 1e-12);
    CHECK(thrown_kind([&] { min_norm_solve(a, vec2(0, 1)); }) == ErrorKind::Consistency);
    std::mt19937 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m = random_matrix(rng, 4);
        const Vector b = random_matrix(rng, 4).col(0);
        CHECK((m * min_norm_solve(m, b) - b).norm() <= 1e-9);
    }
}

}  // TEST_SUITE
