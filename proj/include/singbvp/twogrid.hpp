#pragma once

// Sample points on [x_min, X_inf]: panels uniform in ln x up to x0, then the
// far-field checkpoints. Consecutive panels share their endpoints, so a
// function sampled at the nodes can be integrated cumulatively in either
// direction and interpolated anywhere.

#include <vector>

#include "singbvp/dichotomy.hpp"

namespace singbvp {

class TwoGrid {
public:
    struct Panel {
        int first = 0;   // index of the left endpoint
        double a = 0.0;  // panel in ln x (log panels) or x
        double b = 0.0;
        bool log = false;
    };

    TwoGrid(double x_min, double x0, const FarField& far, double log_width = 0.5);

    static constexpr int kOrder = 8;
    static constexpr int kStride = kOrder + 1;

    const std::vector<double>& x() const { return xs_; }
    int size() const { return static_cast<int>(xs_.size()); }
    const std::vector<Panel>& panels() const { return panels_; }
    int near_panels() const { return near_panels_; }
    int x0_index() const { return near_panels_ * kStride; }
    double x_min() const { return xs_.front(); }
    double x0() const { return xs_[static_cast<size_t>(x0_index())]; }
    double x_inf() const { return xs_.back(); }

    /// Quadrature weights in dx for integrating over the whole grid.
    const std::vector<double>& weights() const { return w_; }

    /// Panel containing x and the local coordinate in [0, 1].
    int locate(double x, double* local) const;

    /// out[i] = integral of f from the left edge of panel p0 to x_i, for nodes
    /// at or right of that edge (zero before).
    std::vector<Matrix> forward(const std::vector<Matrix>& f, int p0 = 0) const;
    /// out[i] = integral of f from x_i to the right edge of panel p1 - 1, for
    /// nodes at or left of that edge (zero after).
    std::vector<Matrix> backward(const std::vector<Matrix>& f, int p1) const;
    /// Integral of f over [left edge of the panel containing x, x].
    Matrix partial(const std::vector<Matrix>& f, double x) const;
    Matrix interpolate(const std::vector<Matrix>& f, double x) const;
    /// df/dx at node i from the panel interpolant.
    Matrix derivative(const std::vector<Matrix>& f, int i) const;
    Matrix integral(const std::vector<Matrix>& f) const;

private:
    double jac(const Panel& p, int node) const;

    std::vector<double> xs_;
    std::vector<double> w_;
    std::vector<Panel> panels_;
    int near_panels_ = 0;
};

}  // namespace singbvp
