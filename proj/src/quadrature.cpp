#include "singbvp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "singbvp/error.hpp"

namespace singbvp {

namespace {

template <int N>
GaussRule make_rule() {
    using Q = boost::math::quadrature::gauss<double, N>;
    const auto& x = Q::abscissa();
    const auto& w = Q::weights();
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < x.size(); ++i) {
        pts.emplace_back(x[i], w[i]);
        if (x[i] != 0.0) pts.emplace_back(-x[i], w[i]);
    }
    std::sort(pts.begin(), pts.end());
    GaussRule r;
    for (const auto& [xi, wi] : pts) {
        r.nodes.push_back(0.5 * (xi + 1.0));
        r.weights.push_back(0.5 * wi);
    }
    return r;
}

PanelStencil make_stencil(int order) {
    const GaussRule& g = gauss_legendre(order);
    PanelStencil s;
    s.t.push_back(0.0);
    s.weights.push_back(0.0);
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        s.t.push_back(g.nodes[i]);
        s.weights.push_back(g.weights[i]);
    }
    s.t.push_back(1.0);
    s.weights.push_back(0.0);

    const int m = s.size();
    const GaussRule& hi = gauss_legendre(10);
    s.cumulative.resize(m, m);
    s.derivative.resize(m, m);
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
        for (size_t q = 0; q < hi.nodes.size(); ++q)
            acc += hi.weights[q] * s.t[i] * s.basis(hi.nodes[q] * s.t[i]);
        s.cumulative.row(i) = acc.transpose();
    }
    // l_j'(t_i) from the barycentric form
    std::vector<double> bw(m, 1.0);
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
            if (k != j) bw[j] /= (s.t[j] - s.t[k]);
    for (int i = 0; i < m; ++i) {
        double diag = 0.0;
        for (int j = 0; j < m; ++j) {
            if (j == i) continue;
            s.derivative(i, j) = (bw[j] / bw[i]) / (s.t[i] - s.t[j]);
            diag -= s.derivative(i, j);
        }
        s.derivative(i, i) = diag;
    }
    return s;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
    static const GaussRule r4 = make_rule<4>();
    static const GaussRule r6 = make_rule<6>();
    static const GaussRule r8 = make_rule<8>();
    static const GaussRule r10 = make_rule<10>();
    static const GaussRule r15 = make_rule<15>();
    static const GaussRule r20 = make_rule<20>();
    switch (order) {
        case 4: return r4;
        case 6: return r6;
        case 8: return r8;
        case 10: return r10;
        case 15: return r15;
        case 20: return r20;
        default: throw Error(ErrorKind::Domain, "unsupported Gauss-Legendre order");
    }
}

Eigen::VectorXd PanelStencil::basis(double tt) const {
    const int m = size();
    Eigen::VectorXd l(m);
    for (int j = 0; j < m; ++j) {
        double v = 1.0;
        for (int k = 0; k < m; ++k)
            if (k != j) v *= (tt - t[k]) / (t[j] - t[k]);
        l(j) = v;
    }
    return l;
}

const PanelStencil& panel_stencil(int order) {
    static std::mutex mu;
    static std::map<int, PanelStencil> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, make_stencil(order)).first;
    return it->second;
}

double PanelGrid::node(int k, int i) const {
    return edges[k] + width(k) * panel_stencil(order).t[i];
}

PanelGrid PanelGrid::uniform(double a, double b, double max_width, int order) {
    if (!(b > a)) throw Error(ErrorKind::Domain, "panel grid: empty interval");
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / max_width - 1e-12)));
    PanelGrid g;
    g.order = order;
    for (int k = 0; k <= n; ++k) g.edges.push_back(k == n ? b : a + (b - a) * k / n);
    return g;
}

}  // namespace singbvp
