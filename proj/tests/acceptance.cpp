// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "singbvp/solver.hpp"

using namespace singbvp;

namespace {

ProblemSpec load(const std::string& name) {
    std::ifstream in(std::string(SINGBVP_FIXTURES) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_problem(ss.str());
}

SolverConfig at_one() {
    SolverConfig c;
    c.x0 = 1.0;
    c.tol = 1e-8;
    return c;
}

Vector vec2(double a, double b) { return Eigen::Vector2d(a, b); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double sup_error(const BvpSolution& s, const std::function<Vector(double)>& exact) {
    double e = 0.0;
    for (size_t i = 0; i < s.grid.size(); ++i)
        if (s.grid[i] <= 10.0) e = std::max(e, (s.y[i] - exact(s.grid[i])).lpNorm<Eigen::Infinity>());
    return e;
}

Vector value_at(const BvpSolution& s, double x) {
    for (size_t i = 0; i < s.grid.size(); ++i)
        if (s.grid[i] == x) return s.y[i];
    throw Error(ErrorKind::Internal, "grid has no node at the requested point");
}

Outcome p1_oracle() {
    const auto an = analyze(load("p1.json"), at_one());
    const BvpSolution s = solve_main(*an, Vector::Zero(2), Vector::Zero(2));
    const double err = sup_error(s, [](double x) { return vec2(0, x * std::exp(-x)); });
    const double y21 = value_at(s, 1.0)(1);
    return {err <= 1e-6 && std::abs(y21 - 0.3678794) <= 1e-6,
            fmt("sup error %.3g on [0,10], y2(1) = %.10f", err, y21)};
}

Outcome p3_oracle() {
    const auto an = analyze(load("p3.json"), at_one());
    const double e1 = std::exp(-1.0);
    const BvpSolution s = solve_main(*an, vec2(0, 1 - e1), vec2(e1, 0));
    const double err = sup_error(s, [](double x) { return vec2(std::exp(-x), -std::exp(-x)); });
    const double dz = (s.zeta - vec2(1, 0)).lpNorm<Eigen::Infinity>();
    const bool eta_exact = s.eta == vec2(0, -1);
    const double w = s.w.lpNorm<Eigen::Infinity>();
    return {err <= 1e-6 && dz <= 1e-7 && eta_exact && w <= 1e-8,
            fmt("sup error %.3g, |zeta - (1,0)| %.3g, |w| %.3g", err, dz, w) +
                (eta_exact ? ", eta exact" : ", eta inexact")};
}

Outcome p2_solvability() {
    const auto solvable = analyze(load("p2_solvable.json"), at_one());
    const SolvabilityReport a = orthogonality_residual(*solvable, solvable->spec.f);
    const auto unsolvable = analyze(load("p2_unsolvable.json"), at_one());
    const SolvabilityReport b = orthogonality_residual(*unsolvable, unsolvable->spec.f);
    const double r0 = a.residual_P6.norm(), r1 = b.residual_P6.norm();
    const double exact = std::exp(1.0) * std::sqrt(M_PI / 2.0);
    const bool ok = r0 <= 1e-6 * a.scale && a.solvable && std::abs(r1 - exact) <= 1e-4 &&
                    std::abs(r1 - 3.4069293) <= 1e-4 && !b.solvable;
    return {ok, fmt("solvable residual %.3g (scale %.4g), unsolvable residual %.10f", r0, a.scale, r1)};
}

Outcome lattice_dims() {
    struct Case {
        const char* file;
        std::array<int, 6> dims;
        int index;
    };
    const Case cases[] = {{"p1.json", {1, 0, 1, 0, 0, 0}, 1},
                          {"p2_solvable.json", {1, 0, 0, 0, 0, 1}, 0},
                          {"p3.json", {1, 1, 0, 0, 0, 0}, 1}};
    Outcome o{true, ""};
    for (const auto& c : cases) {
        const auto an = analyze(load(c.file), at_one());
        const int index = noether_index(an->lattice).index;
        o.pass = o.pass && an->lattice.dims == c.dims && index == c.index;
        std::string d;
        for (int k : an->lattice.dims) d += std::to_string(k);
        o.detail += std::string(c.file) + " dims " + d + " index " + std::to_string(index) + "; ";
    }
    return o;
}

Outcome green_battery() {
    Outcome o{true, ""};
    for (const char* file : {"p1.json", "p2_solvable.json"}) {
        const auto an = analyze(load(file), at_one());
        const GreenReport r = verify_green(*an->green);
        for (const auto& c : r.checks) {
            if (c.status != "pass") {
                o.pass = false;
                o.detail += std::string(file) + " " + c.name + " " + c.status + "; ";
            }
        }
        double worst_di = 0.0;
        int probes = 0;
        for (const auto& c : r.checks)
            if (c.name == "differential_identity") {
                worst_di = c.value;
                probes = static_cast<int>(c.probes.size());
            }
        if (probes < 9) o.pass = false;
        o.detail += std::string(file) + fmt(" identity %.2g at %g probes; ", worst_di, probes);
    }
    return o;
}

Outcome picard_contract() {
    Outcome o{true, ""};
    for (const char* file : {"p1.json", "p2_solvable.json", "p3.json", "scalar.json"}) {
        const FundamentalNearZero fz = solve_U(load(file), SolverConfig{});
        double worst = 0.0;
        for (double x : fz.grid()) {
            if (x > std::exp(-fz.t0)) continue;
            const double bound = fz.C_ball * x * std::pow(-std::log(x), fz.r);
            worst = std::max(worst, opnorm(fz.U(x)) / bound);
        }
        const bool ok = fz.q <= 0.5 && fz.picard.max_ratio <= fz.q + 0.05 && worst <= 1.0;
        o.pass = o.pass && ok;
        o.detail += std::string(file) + fmt(" q %.3f ratio %.3f ball %.2f; ", fz.q, fz.picard.max_ratio, worst);
    }
    const FundamentalNearZero sc = solve_U(load("scalar.json"), SolverConfig{});
    const double du = std::abs(sc.U(0.01)(0, 0) - (std::exp(0.005) - 1.0));
    o.pass = o.pass && du <= 1e-9;
    o.detail += fmt("scalar U(0.01) error %.3g", du);
    return o;
}

Outcome adjoint_verdicts() {
    Outcome o{true, ""};
    for (const char* file : {"p1.json", "p2_solvable.json", "p3.json"}) {
        const auto an = analyze(load(file), at_one());
        const AdjointReport r = adjoint_integrability_check(*an);
        int integrable = 0;
        for (const auto& d : r.directions) integrable += d.integrable ? 1 : 0;
        const int expected = an->lattice.dims[4] + an->lattice.dims[5];
        o.pass = o.pass && r.ok() && integrable == expected;
        o.detail += std::string(file) + " integrable " + std::to_string(integrable) + "/" +
                    std::to_string(r.directions.size()) + "; ";
    }
    return o;
}

Outcome gram_regression() {
    const auto an = analyze(load("p1.json"), at_one());
    const Matrix b = an->lattice.B(1);
    const double unit = b.col(0).squaredNorm();
    const double gram = an->green->gram_L1()(0, 0) / unit;
    const double expect = 0.75 * std::exp(2.0);
    return {std::abs(gram - expect) <= 1e-6, fmt("gram %.10f, expected %.10f", gram, expect)};
}

struct Verdicts {
    std::array<int, 6> dims;
    int index;
    bool solvable;
    std::vector<bool> integrable;
};

Verdicts verdicts(const char* file, const LatticeOptions& lo) {
    const auto an = analyze(load(file), at_one(), lo);
    Verdicts v{an->lattice.dims, noether_index(an->lattice).index,
               orthogonality_residual(*an, an->spec.f).solvable, {}};
    for (const auto& d : adjoint_integrability_check(*an).directions) v.integrable.push_back(d.integrable);
    return v;
}

Outcome shuffle_invariance() {
    Outcome o{true, ""};
    int runs = 0;
    for (const char* file : {"p1.json", "p2_solvable.json", "p2_unsolvable.json", "p3.json"}) {
        const Verdicts base = verdicts(file, {});
        for (std::uint32_t seed : {11u, 2024u, 90210u}) {
            LatticeOptions lo;
            lo.shuffle_seed = seed;
            const Verdicts v = verdicts(file, lo);
            const bool same = v.dims == base.dims && v.index == base.index &&
                              v.solvable == base.solvable && v.integrable == base.integrable;
            if (!same) o.detail += std::string(file) + " seed " + std::to_string(seed) + " differs; ";
            o.pass = o.pass && same;
            ++runs;
        }
    }
    o.detail += std::to_string(runs) + " shuffled runs";
    return o;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"P1 closed-form oracle", p1_oracle},
        {"P3 closed-form oracle", p3_oracle},
        {"P2 solvability dichotomy", p2_solvability},
        {"lattice dimensions and index", lattice_dims},
        {"Green property battery", green_battery},
        {"Picard contraction contract", picard_contract},
        {"adjoint integrability verdicts", adjoint_verdicts},
        {"L1 Gram regression", gram_regression},
        {"shuffled complement invariance", shuffle_invariance},
    };
    int failed = 0, k = 0;
    for (const auto& [name, run] : criteria) {
        ++k;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %d %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", k, name, o.detail.c_str(), secs);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
