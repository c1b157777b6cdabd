#pragma once

// Gauss-Legendre rules and the panel layout shared by every integral in the
// library: each panel carries its two endpoints plus the Gauss nodes, so that
// panel boundaries are sample points and cumulative integrals can be read off
// at any node.

#include <vector>

#include <Eigen/Dense>

namespace singbvp {

struct GaussRule {
    std::vector<double> nodes;    // on [0, 1], increasing
    std::vector<double> weights;  // sum to 1
};

/// Supported orders: 4, 6, 8, 10, 15, 20.
const GaussRule& gauss_legendre(int order);

/// Local layout of one panel: t = 0, the Gauss nodes, t = 1.
struct PanelStencil {
    std::vector<double> t;        // size order + 2
    std::vector<double> weights;  // zero at the endpoints
    Eigen::MatrixXd cumulative;   // C(i, j) = integral_0^{t_i} l_j
    Eigen::MatrixXd derivative;   // D(i, j) = l_j'(t_i)

    int size() const { return static_cast<int>(t.size()); }
    /// Lagrange basis values at an arbitrary local t.
    Eigen::VectorXd basis(double tt) const;
};

const PanelStencil& panel_stencil(int order = 8);

/// Consecutive panels on an interval in some coordinate u; the physical
/// variable is x = map(u).
struct PanelGrid {
    std::vector<double> edges;  // increasing, size panels + 1
    int order = 8;

    int panels() const { return static_cast<int>(edges.size()) - 1; }
    double width(int k) const { return edges[k + 1] - edges[k]; }
    double node(int k, int i) const;

    static PanelGrid uniform(double a, double b, double max_width, int order = 8);
};

}  // namespace singbvp
