#include "bifkit/problem.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

namespace bifkit {

namespace {

constexpr double kPhiNormTol = 1e-10;

double bisect_boundary(const std::function<double(double)>& f, double inside,
                       double outside) {
    // f(inside) <= 0 < f(outside); returns the boundary location.
    if (!(f(outside) > 0.0)) throw std::runtime_error("lambda_window: bracket lost");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (inside + outside);
        if (std::abs(outside - inside) <=
            1e-13 * (1.0 + std::abs(inside) + std::abs(outside)))
            return mid;
        if (f(mid) <= 0.0) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    throw std::runtime_error("lambda_window: bisection did not converge");
}

}  // namespace

ProblemParams ProblemParams::with_d(double new_d) const {
    ProblemParams p = *this;
    p.d = new_d;
    p.d_requested = new_d;
    return p;
}

ProblemParams make_problem(double d, int q, double a, const Grid& g,
                           double critical_snap_tol) {
    if (!(d > 0.0)) throw std::invalid_argument("make_problem: d must be positive");
    if (q == 3) throw std::invalid_argument("make_problem: q = 3 is not supported");
    if (q < 4) throw std::invalid_argument("make_problem: q must be >= 4");
    if (a == 0.0) throw std::invalid_argument("make_problem: a must be nonzero");

    const Eigenpair ep = principal_eigenpair(g);
    ProblemParams p;
    p.d_requested = d;
    p.d = (std::abs(d * ep.sigma1 - 1.0) <= critical_snap_tol) ? 1.0 / ep.sigma1 : d;
    p.q = q;
    p.a = a;
    p.domain = {g.a, g.b};
    p.sigma1 = ep.sigma1;
    p.phi0 = ep.phi0;

    if (!(p.sigma1 > 0.0)) throw std::runtime_error("make_problem: sigma1 not positive");
    if (std::abs(quad(g, p.phi0.cwiseProduct(p.phi0)) - 1.0) > kPhiNormTol)
        throw std::runtime_error("make_problem: phi0 normalization violated");
    return p;
}

double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

Eigen::VectorXd residual(const ProblemParams& p, double lam,
                         const Eigen::VectorXd& u, const Grid& g) {
    if (u.size() != g.n) throw std::invalid_argument("residual: u size mismatch");
    Eigen::VectorXd r = p.d * g.lap.apply(u) + (lam * p.a) * g.grad.apply(u);
    for (int i = 0; i < g.n; ++i) {
        const double ui = u[i];
        r[i] += ui + lam * ui * ui - ipow(ui, p.q);
    }
    return r;
}

Tridiag jacobian_u(const ProblemParams& p, double lam,
                   const Eigen::VectorXd& u, const Grid& g) {
    if (u.size() != g.n) throw std::invalid_argument("jacobian_u: u size mismatch");
    Tridiag J = g.lap;
    J.scale(p.d);
    J.add_scaled(lam * p.a, g.grad);
    Eigen::VectorXd dd(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double ui = u[i];
        dd[i] = 1.0 + 2.0 * lam * ui - p.q * ipow(ui, p.q - 1);
    }
    J.add_diagonal(dd);
    return J;
}

Eigen::VectorXd jacobian_lambda(const ProblemParams& p, double lam,
                                const Eigen::VectorXd& u, const Grid& g) {
    (void)lam;
    if (u.size() != g.n) throw std::invalid_argument("jacobian_lambda: u size mismatch");
    return p.a * g.grad.apply(u) + u.cwiseProduct(u);
}

Eigen::VectorXd transform(const ProblemParams& p, double lam,
                          const Eigen::VectorXd& u, const Grid& g,
                          TransformDirection direction) {
    if (u.size() != g.n) throw std::invalid_argument("transform: u size mismatch");
    const double reach = std::max(std::abs(g.b - g.a),
                                  std::max(std::abs(g.a), std::abs(g.b)));
    if (std::abs(lam) * p.abs_a() * reach / (2.0 * p.d) > 700.0)
        throw std::domain_error("transform: exponent out of numeric range");
    const double c = -lam * p.a / (2.0 * p.d);
    Eigen::VectorXd out(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double z = std::exp(c * g.nodes[i]);
        out[i] = (direction == TransformDirection::ToSelfAdjoint) ? u[i] / z : u[i] * z;
    }
    return out;
}

double apriori_bound(double lam, int q, SolutionSign sign) {
    if (q < 4) throw std::invalid_argument("apriori_bound: q must be >= 4");
    const double e = 1.0 / static_cast<double>(q - 2);
    if (sign == SolutionSign::Positive) {
        return lam <= 0.0 ? 1.0 : std::pow(lam, e) + 1.0;
    }
    return lam > 0.0 ? 1.0 : 1.0 + std::pow(-lam, e);
}

double window_gamma(double lam, double d, double abs_a, int q) {
    const double e = 1.0 / static_cast<double>(q - 2);
    return lam * lam * abs_a * abs_a / (4.0 * d * d) -
           lam * (1.0 + std::pow(lam, e)) / d;
}

LambdaWindow lambda_window(const ProblemParams& p, SolutionSign sign) {
    if (sign == SolutionSign::Negative) {
        // Mirror image: the v = -u substitution maps negative solutions to
        // positive solutions of the reflected problem (lambda -> -lambda).
        LambdaWindow w = lambda_window(p, SolutionSign::Positive);
        if (!w.empty) {
            const double lo = -w.hi, hi = -w.lo;
            w.lo = lo;
            w.hi = hi;
        }
        w.sign = SolutionSign::Negative;
        return w;
    }

    const double d = p.d, abs_a = p.abs_a(), sigma1 = p.sigma1;
    const double rhs = 1.0 / d - sigma1;
    auto excess = [&](double lam) { return window_gamma(lam, d, abs_a, p.q) - rhs; };

    LambdaWindow w;
    w.sign = SolutionSign::Positive;

    if (rhs >= -1e-14 * sigma1) {
        // d <= 1/sigma1: lower bound -lambda1(d), upper bound from Gamma.
        const double disc = std::max(0.0, d * (1.0 - d * sigma1));
        w.lo = -(2.0 / abs_a) * std::sqrt(disc);
        double out = 1.0;
        int guard = 0;
        while (excess(out) <= 0.0) {
            out *= 2.0;
            if (++guard > 200) throw std::runtime_error("lambda_window: no upper bound found");
        }
        // Gamma is strictly negative just right of 0
        w.hi = bisect_boundary(excess, 1e-9, out);
        return w;
    }

    // d > 1/sigma1: admissible set is where Gamma dips below rhs < 0.
    double hi_bracket = 1.0;
    int guard = 0;
    while (window_gamma(hi_bracket, d, abs_a, p.q) <= 0.0) {
        hi_bracket *= 2.0;
        if (++guard > 200) throw std::runtime_error("lambda_window: bracket search failed");
    }
    const auto gamma_fn = [&](double lam) { return window_gamma(lam, d, abs_a, p.q); };
    const auto mn = boost::math::tools::brent_find_minima(gamma_fn, 1e-12, hi_bracket, 40);
    if (mn.second > rhs) {
        w.empty = true;
        return w;
    }
    w.lo = bisect_boundary(excess, mn.first, 1e-14);
    w.hi = bisect_boundary(excess, mn.first, hi_bracket);
    return w;
}

SignClass classify_sign(const Eigen::VectorXd& u, const Grid& g, double tol) {
    if (u.size() != g.n) throw std::invalid_argument("classify_sign: u size mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("classify_sign: tol must be positive");
    const double sup = u.lpNorm<Eigen::Infinity>();
    if (sup <= tol) return SignClass::Trivial;

    // Outward one-sided boundary slopes are -u[0]/h and -u[n-1]/h; the
    // strictness conditions reduce to positivity of the first/last values.
    const bool pos = u.minCoeff() > -tol && u[0] > -tol && u[g.n - 1] > -tol;
    if (pos) return SignClass::StrictlyPositive;
    const bool neg = u.maxCoeff() < tol && u[0] < tol && u[g.n - 1] < tol;
    if (neg) return SignClass::StrictlyNegative;
    return SignClass::Mixed;
}

double default_sign_tol(const Eigen::VectorXd& u) {
    return std::max(1e-9 * u.lpNorm<Eigen::Infinity>(), 1e-300);
}

}  // namespace bifkit
