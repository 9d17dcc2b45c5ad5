#include "bifkit/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace bifkit {

Grid build_grid(int n, std::pair<double, double> interval) {
    if (n < 8) throw std::invalid_argument("build_grid: n must be >= 8");
    const auto [a, b] = interval;
    if (!(b > a)) throw std::invalid_argument("build_grid: empty interval");

    Grid g;
    g.n = n;
    g.a = a;
    g.b = b;
    g.h = (b - a) / static_cast<double>(n + 1);

    g.nodes.resize(n);
    for (int i = 0; i < n; ++i) g.nodes[i] = a + (i + 1) * g.h;

    const double ih2 = 1.0 / (g.h * g.h);
    g.lap = Tridiag::zero(n);
    g.lap.diag.setConstant(-2.0 * ih2);
    g.lap.lower.setConstant(ih2);
    g.lap.upper.setConstant(ih2);

    const double i2h = 1.0 / (2.0 * g.h);
    g.grad = Tridiag::zero(n);
    g.grad.lower.setConstant(-i2h);
    g.grad.upper.setConstant(i2h);

    g.quad_weights = Eigen::VectorXd::Constant(n, g.h);
    return g;
}

double quad(const Grid& g, const Eigen::VectorXd& f) {
    if (f.size() != g.n) throw std::invalid_argument("quad: size mismatch");
    return g.quad_weights.dot(f);
}

Eigenpair principal_eigenpair(const Grid& g) {
    // -lap is SPD; inverse iteration converges at ratio sigma1/sigma2 ~ 1/4.
    Tridiag neg_lap = g.lap;
    neg_lap.scale(-1.0);
    const TridiagLU lu(neg_lap);
    if (lu.singular()) throw std::runtime_error("principal_eigenpair: -lap singular");

    Eigen::VectorXd x = Eigen::VectorXd::Ones(g.n);
    x /= x.norm();
    double rq_prev = 0.0;
    const int max_sweeps = 400;
    bool converged = false;
    double rq = 0.0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        Eigen::VectorXd y = lu.solve(x);
        y /= y.norm();
        rq = y.dot(neg_lap.apply(y));
        x = y;
        if (sweep > 0 && std::abs(rq - rq_prev) <= 1e-15 * std::abs(rq)) {
            converged = true;
            break;
        }
        rq_prev = rq;
    }
    if (!converged) throw std::runtime_error("principal_eigenpair: iteration stagnated");

    if (x.sum() < 0.0) x = -x;
    const double m = quad(g, x.cwiseProduct(x));
    x /= std::sqrt(m);

    Eigenpair ep;
    ep.sigma1 = rq;
    ep.phi0 = x;
    return ep;
}

}  // namespace bifkit
