#include "singbvp/ode.hpp"

#include <cmath>

#include <boost/numeric/odeint.hpp>

namespace singbvp {

namespace odeint = boost::numeric::odeint;

std::vector<Matrix> integrate_linear(const CoefficientFn& m, const Matrix& z0,
                                     const std::vector<double>& xs, OdeTolerance tol,
                                     const CoefficientFn& forcing) {
    std::vector<Matrix> out;
    if (xs.empty()) return out;
    const Eigen::Index rows = z0.rows(), cols = z0.cols();
    using State = std::vector<double>;
    State state(z0.data(), z0.data() + z0.size());

    auto rhs = [&](const State& y, State& dy, double x) {
        Eigen::Map<const Matrix> z(y.data(), rows, cols);
        Eigen::Map<Matrix> dz(dy.data(), rows, cols);
        dz.noalias() = m(x) * z;
        if (forcing) dz += forcing(x);
    };
    auto observer = [&](const State& y, double) {
        out.emplace_back(Eigen::Map<const Matrix>(y.data(), rows, cols));
    };

    if (xs.size() == 1) {
        out.push_back(z0);
        return out;
    }
    const double span = xs.back() - xs.front();
    double dt = span / std::max<size_t>(16, 4 * xs.size());
    auto stepper = odeint::make_controlled(tol.abs, tol.rel,
                                           odeint::runge_kutta_fehlberg78<State>());
    odeint::integrate_times(stepper, rhs, state, xs.begin(), xs.end(), dt, observer);
    for (const auto& z : out) {
        if (!z.allFinite())
            throw Error(ErrorKind::NumericalFailure, "ODE integration produced non-finite values");
    }
    return out;
}

Matrix propagate(const CoefficientFn& m, const Matrix& z0, double from, double to,
                 OdeTolerance tol, const CoefficientFn& forcing) {
    if (from == to) return z0;
    return integrate_linear(m, z0, {from, to}, tol, forcing).back();
}

}  // namespace singbvp
