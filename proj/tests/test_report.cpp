#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "singbvp/report.hpp"
#include "test_util.hpp"

using namespace singbvp;
using namespace testutil;

TEST_SUITE("report") {

TEST_CASE("CSV layout and exact round trip") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    std::vector<double> x;
    std::vector<Vector> y;
    for (int i = 0; i < 25; ++i) {
        x.push_back(std::abs(u(rng)) * 1e-5);
        y.push_back(vec2(u(rng), u(rng) * 1e-200));
    }
    const std::string csv = solution_csv(x, y);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,y1,y2");
    for (size_t i = 0; i < x.size(); ++i) {
        REQUIRE(std::getline(in, line));
        double a, b, c;
        char c1, c2;
        std::istringstream ls(line);
        ls >> a >> c1 >> b >> c2 >> c;
        CHECK(c1 == ',');
        CHECK(a == x[i]);
        CHECK(b == y[i](0));
        CHECK(c == y[i](1));
    }
    CHECK_FALSE(std::getline(in, line));
    CHECK(thrown_kind([] { solution_csv({1.0}, {}); }) == ErrorKind::Dimension);
}

TEST_CASE("matrices serialize row by row") {
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    CHECK(to_json(m).dump() == "[[1.0,2.0,3.0],[4.0,5.0,6.0]]");
    CHECK(to_json(vec2(0.5, -1)).dump() == "[0.5,-1.0]");
}

TEST_CASE("configuration reports auto fields") {
    SolverConfig c;
    c.x0 = 1.0;
    const auto j = config_json(c);
    CHECK(j["x0"] == 1.0);
    CHECK(j["kappa"] == "auto");
    CHECK(j["tol"] == 1e-8);
}

TEST_CASE("analysis and solution documents") {
    SolverConfig c;
    c.x0 = 1.0;
    const auto an = analyze(load("p3.json"), c);
    const auto a = analysis_json(*an);
    CHECK(a["dims"].dump() == "[1,1,0,0,0,0]");
    CHECK(a["index"] == 1);
    CHECK(a["x0"] == 1.0);
    const BvpSolution s = solve_main(*an, vec2(0, 1 - std::exp(-1.0)), vec2(std::exp(-1.0), 0));
    const auto j = solution_json(s, true);
    CHECK(j["x"].size() == s.grid.size());
    CHECK(j["y"].size() == s.grid.size());
    CHECK(j["solvability"]["solvable"] == true);
    CHECK(j["diagnostics"].contains("ode_residual"));
    CHECK_FALSE(solution_json(s, false).contains("x"));
    CHECK(solution_json(s, true).dump() == j.dump());

    const auto g = green_json(verify_green(*an->green));
    CHECK(g["checks"].size() == 7);
    CHECK(g["ok"] == true);
    const auto adj = adjoint_json(adjoint_integrability_check(*an));
    CHECK(adj["ok"] == true);
}

}  // TEST_SUITE
