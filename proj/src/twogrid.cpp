#include "singbvp/twogrid.hpp"

#include <algorithm>
#include <cmath>

#include "singbvp/error.hpp"

namespace singbvp {

TwoGrid::TwoGrid(double x_min, double x0, const FarField& far, double log_width) {
    if (!(x_min > 0.0) || !(x_min < x0)) throw Error(ErrorKind::Domain, "need 0 < x_min < x0");
    const PanelStencil& st = panel_stencil(kOrder);
    const double ta = std::log(x_min), tb = std::log(x0);
    near_panels_ = std::max(1, static_cast<int>(std::ceil((tb - ta) / log_width)));
    const double h = (tb - ta) / near_panels_;
    xs_.push_back(x_min);
    for (int k = 0; k < near_panels_; ++k) {
        Panel p{static_cast<int>(xs_.size()) - 1, ta + k * h, ta + (k + 1) * h, true};
        if (k == near_panels_ - 1) p.b = tb;
        panels_.push_back(p);
        for (int i = 1; i < st.size(); ++i) xs_.push_back(std::exp(p.a + (p.b - p.a) * st.t[i]));
        xs_.back() = std::exp(p.b);
    }
    xs_.back() = x0;
    const auto& fp = far.points();
    const auto& edges = far.grid().edges;
    for (int k = 0; k + 1 < static_cast<int>(edges.size()); ++k) {
        panels_.push_back({static_cast<int>(xs_.size()) - 1, edges[k], edges[k + 1], false});
        for (int i = 1; i < st.size(); ++i) xs_.push_back(fp[static_cast<size_t>(k * kStride + i)]);
    }
    w_.assign(xs_.size(), 0.0);
    for (const auto& p : panels_)
        for (int j = 0; j < st.size(); ++j) w_[static_cast<size_t>(p.first + j)] += st.weights[j] * jac(p, p.first + j);
}

double TwoGrid::jac(const Panel& p, int node) const {
    const double width = p.b - p.a;
    return p.log ? width * xs_[static_cast<size_t>(node)] : width;
}

int TwoGrid::locate(double x, double* local) const {
    if (!(x >= x_min() * (1 - 1e-14)) || !(x <= x_inf() * (1 + 1e-14)))
        throw Error(ErrorKind::Domain, "point outside the quadrature grid");
    int lo = 0, hi = static_cast<int>(panels_.size()) - 1;
    while (lo < hi) {
        const int mid = (lo + hi + 1) / 2;
        if (xs_[static_cast<size_t>(panels_[static_cast<size_t>(mid)].first)] <= x) lo = mid;
        else hi = mid - 1;
    }
    const Panel& p = panels_[static_cast<size_t>(lo)];
    const double v = p.log ? std::log(x) : x;
    *local = std::clamp((v - p.a) / (p.b - p.a), 0.0, 1.0);
    return lo;
}

std::vector<Matrix> TwoGrid::forward(const std::vector<Matrix>& f, int p0) const {
    const PanelStencil& st = panel_stencil(kOrder);
    const Matrix zero = Matrix::Zero(f.front().rows(), f.front().cols());
    std::vector<Matrix> out(xs_.size(), zero);
    for (size_t k = static_cast<size_t>(p0); k < panels_.size(); ++k) {
        const Panel& p = panels_[k];
        for (int i = 1; i < st.size(); ++i) {
            Matrix acc = out[static_cast<size_t>(p.first)];
            for (int j = 0; j < st.size(); ++j)
                acc += (st.cumulative(i, j) * jac(p, p.first + j)) * f[static_cast<size_t>(p.first + j)];
            out[static_cast<size_t>(p.first + i)] = acc;
        }
    }
    return out;
}

std::vector<Matrix> TwoGrid::backward(const std::vector<Matrix>& f, int p1) const {
    const PanelStencil& st = panel_stencil(kOrder);
    const int last = st.size() - 1;
    const Matrix zero = Matrix::Zero(f.front().rows(), f.front().cols());
    std::vector<Matrix> out(xs_.size(), zero);
    for (int k = p1 - 1; k >= 0; --k) {
        const Panel& p = panels_[static_cast<size_t>(k)];
        for (int i = last - 1; i >= 0; --i) {
            Matrix acc = out[static_cast<size_t>(p.first + last)];
            for (int j = 0; j < st.size(); ++j)
                acc += ((st.cumulative(last, j) - st.cumulative(i, j)) * jac(p, p.first + j)) *
                       f[static_cast<size_t>(p.first + j)];
            out[static_cast<size_t>(p.first + i)] = acc;
        }
    }
    return out;
}

Matrix TwoGrid::partial(const std::vector<Matrix>& f, double x) const {
    const PanelStencil& st = panel_stencil(kOrder);
    const GaussRule& gl = gauss_legendre(10);
    double u = 0.0;
    const Panel& p = panels_[static_cast<size_t>(locate(x, &u))];
    Eigen::VectorXd wts = Eigen::VectorXd::Zero(st.size());
    for (size_t q = 0; q < gl.nodes.size(); ++q) wts += (u * gl.weights[q]) * st.basis(u * gl.nodes[q]);
    Matrix acc = Matrix::Zero(f.front().rows(), f.front().cols());
    for (int j = 0; j < st.size(); ++j) acc += (wts(j) * jac(p, p.first + j)) * f[static_cast<size_t>(p.first + j)];
    return acc;
}

Matrix TwoGrid::interpolate(const std::vector<Matrix>& f, double x) const {
    const PanelStencil& st = panel_stencil(kOrder);
    double u = 0.0;
    const Panel& p = panels_[static_cast<size_t>(locate(x, &u))];
    const Eigen::VectorXd l = st.basis(u);
    Matrix acc = Matrix::Zero(f.front().rows(), f.front().cols());
    for (int j = 0; j < st.size(); ++j) acc += l(j) * f[static_cast<size_t>(p.first + j)];
    return acc;
}

Matrix TwoGrid::derivative(const std::vector<Matrix>& f, int i) const {
    const PanelStencil& st = panel_stencil(kOrder);
    const int k = std::min(i / kStride, static_cast<int>(panels_.size()) - 1);
    const Panel& p = panels_[static_cast<size_t>(k)];
    const int local = i - p.first;
    Matrix acc = Matrix::Zero(f.front().rows(), f.front().cols());
    for (int j = 0; j < st.size(); ++j) acc += st.derivative(local, j) * f[static_cast<size_t>(p.first + j)];
    acc /= (p.b - p.a);
    if (p.log) acc /= xs_[static_cast<size_t>(i)];
    return acc;
}

Matrix TwoGrid::integral(const std::vector<Matrix>& f) const {
    Matrix acc = Matrix::Zero(f.front().rows(), f.front().cols());
    for (size_t i = 0; i < xs_.size(); ++i) acc += w_[i] * f[i];
    return acc;
}

}  // namespace singbvp
