#include <doctest.h>

#include <cmath>
#include <random>

#include "singbvp/quadrature.hpp"

using namespace singbvp;

TEST_SUITE("quadrature") {

TEST_CASE("gauss_legendre integrates polynomials up to degree 2m-1 exactly") {
    for (int order : {4, 6, 8, 10, 15, 20}) {
        const GaussRule& r = gauss_legendre(order);
        REQUIRE(static_cast<int>(r.nodes.size()) == order);
        for (int deg = 0; deg < 2 * order; ++deg) {
            double s = 0.0;
            for (int i = 0; i < order; ++i) s += r.weights[i] * std::pow(r.nodes[i], deg);
            CHECK(s == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-13));
        }
        for (int i = 1; i < order; ++i) CHECK(r.nodes[i] > r.nodes[i - 1]);
        CHECK(r.nodes.front() > 0.0);
        CHECK(r.nodes.back() < 1.0);
    }
    CHECK_THROWS(gauss_legendre(7));
}

TEST_CASE("panel stencil cumulative and derivative matrices") {
    const PanelStencil& st = panel_stencil(8);
    REQUIRE(st.size() == 10);
    CHECK(st.t.front() == 0.0);
    CHECK(st.t.back() == 1.0);
    CHECK(st.weights.front() == 0.0);
    CHECK(st.weights.back() == 0.0);
    for (int deg = 0; deg <= 9; ++deg) {
        Eigen::VectorXd f(st.size()), F(st.size()), df(st.size());
        for (int i = 0; i < st.size(); ++i) {
            f(i) = std::pow(st.t[i], deg);
            F(i) = std::pow(st.t[i], deg + 1) / (deg + 1);
            df(i) = deg == 0 ? 0.0 : deg * std::pow(st.t[i], deg - 1);
        }
        CHECK((st.cumulative * f - F).lpNorm<Eigen::Infinity>() < 1e-12);
        CHECK((st.derivative * f - df).lpNorm<Eigen::Infinity>() < 1e-9);
    }
}

TEST_CASE("panel stencil basis reproduces polynomials at random points") {
    const PanelStencil& st = panel_stencil(8);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double t = u(rng);
        const int deg = trial % 10;
        Eigen::VectorXd f(st.size());
        for (int i = 0; i < st.size(); ++i) f(i) = std::pow(st.t[i], deg);
        CHECK(st.basis(t).dot(f) == doctest::Approx(std::pow(t, deg)).epsilon(1e-11));
        CHECK(st.basis(t).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("uniform panel grids") {
    const PanelGrid g = PanelGrid::uniform(1.0, 3.0, 0.3);
    CHECK(g.panels() == 7);
    CHECK(g.edges.front() == 1.0);
    CHECK(g.edges.back() == doctest::Approx(3.0));
    for (int k = 0; k < g.panels(); ++k) CHECK(g.width(k) <= 0.3 + 1e-12);
    CHECK(g.node(0, 0) == 1.0);
    CHECK(g.node(0, g.order + 1) == doctest::Approx(g.edges[1]));
}

}  // TEST_SUITE
