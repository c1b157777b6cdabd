#pragma once

// Thin wrapper over an adaptive embedded Runge-Kutta integrator for linear
// systems Z' = M(x) Z with a matrix-valued state.

#include <functional>
#include <vector>

#include "singbvp/linalg.hpp"

namespace singbvp {

using CoefficientFn = std::function<Matrix(double)>;

struct OdeTolerance {
    double rel = 1e-11;
    double abs = 1e-13;
};

/// Integrates Z' = M(x) Z + R(x) from xs.front() through xs (monotone, either
/// direction) and returns Z at every point of xs. R may be empty.
std::vector<Matrix> integrate_linear(const CoefficientFn& m, const Matrix& z0,
                                     const std::vector<double>& xs, OdeTolerance tol,
                                     const CoefficientFn& forcing = {});

/// Single-interval convenience form.
Matrix propagate(const CoefficientFn& m, const Matrix& z0, double from, double to,
                 OdeTolerance tol, const CoefficientFn& forcing = {});

}  // namespace singbvp
