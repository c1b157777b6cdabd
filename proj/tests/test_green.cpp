#include <doctest.h>

#include <cmath>
#include <random>

#include "singbvp/solver.hpp"
#include "test_util.hpp"

using namespace singbvp;
using namespace testutil;

TEST_SUITE("green") {

TEST_CASE("signs of the parts") {
    const double x0 = 1.0;
    CHECK(green_sign(1, 2.0, 1.5, x0, true) == 1.0);
    CHECK(green_sign(1, 0.3, 0.6, x0, false) == -1.0);
    CHECK(green_sign(1, 0.6, 0.3, x0, true) == 0.0);
    CHECK(green_sign(1, 1.5, 2.0, x0, false) == 0.0);
    for (int j : {2, 3}) {
        CHECK(green_sign(j, 2.0, 1.0, x0, true) == 1.0);
        CHECK(green_sign(j, 1.0, 2.0, x0, false) == 0.0);
    }
    for (int j : {4, 5, 6}) {
        CHECK(green_sign(j, 1.0, 2.0, x0, false) == -1.0);
        CHECK(green_sign(j, 2.0, 1.0, x0, true) == 0.0);
    }
    CHECK(green_sign(2, 1.0, 1.0, x0, true) == 1.0);
    CHECK(green_sign(2, 1.0, 1.0, x0, false) == 0.0);
}

TEST_CASE("P1 kernel matches the closed form") {
    const auto an = analyze(load("p1.json"), SolverConfig{});
    const GreenAssembly& g = *an->green;
    const double x0 = an->x0();
    auto oracle = [&](double x, double s) {
        Matrix k = Matrix::Zero(2, 2);
        const double e = std::exp(-(x - s));
        if (x0 <= s && s <= x) k(0, 0) = (x / s) * (x / s) * e;
        if (x < s && s < x0) k(0, 0) = -(x / s) * (x / s) * e;
        if (x >= s) k(1, 1) = (s / x) * e;
        return k;
    };
    CHECK((g.G(0.5, 0.8) - oracle(0.5, 0.8)).norm() < 1e-9);
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> lu(std::log(1e-3), std::log(20.0));
    for (int k = 0; k < 60; ++k) {
        const double x = std::exp(lu(rng)), s = std::exp(lu(rng));
        const Matrix o = oracle(x, s);
        CHECK((g.G(x, s) - o).norm() <= 1e-8 * (1.0 + o.norm()));
    }
}

TEST_CASE("P1 Gram matrix") {
    const auto an = analyze(load("p1.json"), SolverConfig{});
    const double x0 = an->x0();
    const double b = an->lattice.B(1)(0, 0);
    // int_0^inf (x/x0)^4 e^{-2(x - x0)} dx = e^{2 x0} 4! / (2^5 x0^4)
    const double expect = b * b * std::exp(2.0 * x0) * 24.0 / 32.0 / std::pow(x0, 4);
    CHECK(an->green->gram_L1()(0, 0) == doctest::Approx(expect).epsilon(1e-9));
    if (x0 == 1.0 && std::abs(b) == 1.0) CHECK(an->green->gram_L1()(0, 0) == doctest::Approx(0.75 * std::exp(2.0)).epsilon(1e-9));
}

TEST_CASE("weight is a probability density") {
    const auto an = analyze(load("p2_solvable.json"), SolverConfig{});
    const GreenAssembly& g = *an->green;
    const Matrix zero = Matrix::Zero(1, 1);
    for (double X : {0.5, 2.0, 10.0}) {
        const Matrix w = integrate_composite(
            [&](double x) { return Matrix::Constant(1, 1, g.weight(x)); }, 1e-14, X, an->x0(), {}, zero);
        CHECK(w(0, 0) == doctest::Approx(reg_lower_gamma(1.0 + g.beta(), g.kappa() * X)).epsilon(1e-9));
    }
}

TEST_CASE("P2 auxiliary functions F and N") {
    const auto an = analyze(load("p2_solvable.json"), SolverConfig{});
    const GreenAssembly& g = *an->green;
    const double x0 = an->x0();
    const Matrix P6 = an->lattice.P[5];
    for (double x : {0.3, 1.0, 2.5, 6.0}) {
        const double grow = std::sqrt(x / x0) * std::exp(x - x0);
        CHECK((g.F(x) - g.weight(x) * grow * P6).norm() <= 1e-9 * (1.0 + grow));
        const double tail = 1.0 - reg_lower_gamma(1.0 + g.beta(), g.kappa() * x);
        CHECK((g.N(x) - tail * grow * P6).norm() <= 1e-9 * (1.0 + grow));
    }
}

TEST_CASE("generalized Green function is orthogonal to L1 solutions") {
    const auto an = analyze(load("p1.json"), SolverConfig{});
    const GreenAssembly& g = *an->green;
    const ModeSet& m = *an->modes;
    const double x0 = an->x0();
    for (double s : {0.4, 0.8, 1.7, 3.0}) {
        const Matrix ip = integrate_composite(
            [&](double x) { return Matrix(m.Y(1, x).transpose() * g.generalized(x, s)); },
            an->grid->x_min(), an->x_inf(), x0, {s}, Matrix::Zero(1, 2));
        CHECK(ip.norm() <= 1e-7);
    }
}

TEST_CASE("parameter domain") {
    const auto an = analyze(load("p1.json"), SolverConfig{});
    auto make = [&](double kappa, double beta) {
        GreenAssembly(an->spec, an->lattice, *an->modes, *an->grid, an->samples, kappa, beta);
    };
    CHECK(thrown_kind([&] { make(0.5, 2.0); }) == ErrorKind::Domain);
    CHECK(thrown_kind([&] { make(3.0, 0.0); }) == ErrorKind::Domain);
    CHECK(thrown_kind([&] { make(3.0, 1.0); }) == ErrorKind::Domain);
    CHECK_NOTHROW(make(3.0, 2.0));
}

TEST_CASE("property battery passes on the reference problems") {
    for (const char* name : {"p1.json", "p2_solvable.json", "p3.json"}) {
        const auto an = analyze(load(name), SolverConfig{});
        const GreenReport r = verify_green(*an->green);
        CHECK(r.checks.size() == 7);
        for (const auto& c : r.checks) {
            INFO(name, " ", c.name, " ", c.value);
            CHECK(c.status == "pass");
        }
        CHECK(r.ok());
    }
}

TEST_CASE("coarse tolerances skip the fine checks") {
    const auto an = analyze(load("p1.json"), SolverConfig{});
    GreenProbeOptions o;
    o.tol = 1e-3;
    const GreenReport r = verify_green(*an->green, o);
    int skipped = 0;
    for (const auto& c : r.checks) skipped += c.status == "skipped" ? 1 : 0;
    CHECK(skipped == 4);
    CHECK(r.ok());
}

}  // TEST_SUITE
