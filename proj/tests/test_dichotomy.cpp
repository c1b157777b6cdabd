#include <doctest.h>

#include <cmath>
#include <random>

#include "singbvp/dichotomy.hpp"
#include "test_util.hpp"

using namespace singbvp;
using namespace testutil;

namespace {

SolverConfig with_inf(double x_inf) {
    SolverConfig c;
    c.x_inf = x_inf;
    return c;
}

}  // namespace

TEST_SUITE("dichotomy") {

TEST_CASE("rates and truncation") {
    CHECK(dichotomy_rate(load("p1.json")) == doctest::Approx(0.9));
    CHECK(dichotomy_rate(load("scalar.json")) == doctest::Approx(0.45));
    ProblemSpec rot = ProblemSpec::zero(2);
    rot.b(0, 1) = TermSum{{1.0, 0, 0.0}};
    rot.b(1, 0) = TermSum{{-1.0, 0, 0.0}};
    CHECK(thrown_kind([&] { dichotomy_rate(rot); }) == ErrorKind::ConditionB);
    ProblemSpec decaying = ProblemSpec::zero(1);
    decaying.b(0, 0) = TermSum{{1.0, 0, 1.0}};
    CHECK(thrown_kind([&] { dichotomy_rate(decaying); }) == ErrorKind::ConditionB);

    const ProblemSpec p1 = load("p1.json");
    const double X = auto_x_inf(p1, 0.5, 0.9, 1e-8);
    CHECK(std::exp(-0.9 * (X - 0.5)) <= 1e-9 * (1.0 + 1e-9));
    CHECK(envelope(p1.f[1], X) <= 1e-8);
}

TEST_CASE("P1 kernel is diag((x/s)^2, s/x) e^{-(x - s)}") {
    const ProblemSpec p1 = load("p1.json");
    const DichotomyData d = compute_dichotomy(p1, with_inf(30.0), 0.5);
    CHECK(d.U_minus.dim() == 2);
    CHECK(d.U_plus.dim() == 0);
    for (auto [x, s] : {std::pair{1.0, 0.5}, {7.3, 2.2}, {29.0, 3.0}, {4.0, 4.0}}) {
        const Matrix k = d.kernel_product(Mode::Stable, x, s);
        const Matrix expect = diag2((x / s) * (x / s), s / x) * std::exp(-(x - s));
        CHECK((k - expect).norm() <= 1e-9 * std::max(1.0, expect.norm()));
    }
    CHECK(d.kernel_product(Mode::Unstable, 1.0, 2.0).norm() == 0.0);
    CHECK(thrown_kind([&] { d.kernel_product(Mode::Stable, 1.0, 2.0); }) == ErrorKind::Domain);
    CHECK(d.C_star >= 1.0);
}

TEST_CASE("P2 splits into a growing and a decaying solution") {
    const ProblemSpec p2 = load("p2_solvable.json");
    const DichotomyData d = compute_dichotomy(p2, with_inf(25.0), 0.5);
    REQUIRE(d.U_minus.dim() == 1);
    CHECK(std::abs(std::abs(d.U_minus.columns(1, 0)) - 1.0) < 1e-10);
    for (auto [x, s] : {std::pair{3.0, 1.0}, {20.0, 12.5}}) {
        const Matrix ks = d.kernel_product(Mode::Stable, x, s);
        CHECK((ks - diag2(0, (x / s) * (x / s) * std::exp(-(x - s)))).norm() <= 1e-9);
        const Matrix ku = d.kernel_product(Mode::Unstable, s, x);
        CHECK((ku - diag2(std::sqrt(s / x) * std::exp(s - x), 0)).norm() <= 1e-9);
    }
}

TEST_CASE("constant-coefficient kernels match matrix exponentials") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 3;
        const Matrix Q = random_matrix(rng, n, 1.5) + 1.5 * Matrix::Identity(n, n);
        const Eigen::Vector3d lam(trial % 2 ? 0.8 : -0.8, -1.3, 1.1);
        const Matrix B = Q * lam.asDiagonal() * Q.inverse();
        ProblemSpec s = ProblemSpec::zero(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s.b(i, j) = TermSum{{B(i, j), 0, 0.0}};
        const double x0 = 0.5;
        const DichotomyData d = compute_dichotomy(s, with_inf(12.0), x0);
        CHECK(d.U_minus.dim() == (trial % 2 ? 1 : 2));
        const auto P = projectors_from_decomposition({d.U_minus, d.U_plus});
        // Y(x) P Y(t)^{-1} entrywise in the eigenbasis, free of cancellation
        auto oracle = [&](const Matrix& proj, double x, double t) {
            Matrix m = Q.inverse() * proj * Q;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (std::abs(m(i, j)) < 1e-12) m(i, j) = 0.0;
                    else m(i, j) *= std::exp(lam(i) * (x - x0) - lam(j) * (t - x0));
            return Matrix(Q * m * Q.inverse());
        };
        std::uniform_real_distribution<double> ux(x0, 12.0);
        for (int k = 0; k < 5; ++k) {
            double x = ux(rng), t = ux(rng);
            if (x < t) std::swap(x, t);
            const Matrix ks = d.kernel_product(Mode::Stable, x, t);
            const Matrix oracle_s = oracle(P[0], x, t);
            CHECK((ks - oracle_s).norm() <= 1e-7 * (1.0 + oracle_s.norm()));
            const Matrix ku = d.kernel_product(Mode::Unstable, t, x);
            const Matrix oracle_u = oracle(P[1], t, x);
            CHECK((ku - oracle_u).norm() <= 1e-7 * (1.0 + oracle_u.norm()));
            CHECK(opnorm(ks) <= d.C_star * std::exp(-d.gamma * (x - t)) * (1.0 + 1e-6));
        }
        // U_minus is invariant: solutions through it decay
        const Matrix y = d.field->Y_at(d.stable, 12.0);
        CHECK(y.norm() <= 1e-3);
    }
}

TEST_CASE("mode factors are biorthogonal at every checkpoint") {
    const ProblemSpec p2 = load("p2_solvable.json");
    const DichotomyData d = compute_dichotomy(p2, with_inf(20.0), 0.5);
    const auto& xs = d.field->points();
    for (size_t g = 0; g < xs.size(); g += 7) {
        CHECK((d.stable.Z[g] * d.stable.Y[g] - d.stable.D * d.stable.B).norm() < 1e-9);
        CHECK((d.unstable.Z[g] * d.unstable.Y[g] - d.unstable.D * d.unstable.B).norm() < 1e-9);
        const Matrix pm = d.field->P_minus(static_cast<int>(g));
        CHECK((pm * pm - pm).norm() < 1e-9);
    }
    CHECK(d.field->locate(0.4) == -1);
    CHECK(d.field->locate(0.5) == 0);
    CHECK(d.field->match(xs[5]) == 5);
}

}  // TEST_SUITE
