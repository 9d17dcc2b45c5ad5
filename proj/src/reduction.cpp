#include "bifkit/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bifkit {

ReducedCoefficients ls_coefficients(const ProblemParams& p, const Grid& g) {
    if (std::abs(p.d * p.sigma1 - 1.0) > 1e-6)
        throw std::invalid_argument("ls_coefficients: reduction requires d*sigma1 = 1");
    ReducedCoefficients rc;
    rc.q = p.q;
    rc.d = p.d;
    // lambda^2 Taylor coefficient of the perturbed eigenvalue
    // rho(lambda) = -lambda^2 a^2/(4d); the Newton-Puiseux balance uses the
    // coefficient, not the raw second derivative
    rc.c0 = -p.a * p.a / (4.0 * p.d);
    Eigen::VectorXd phi3(g.n), phiq1(g.n);
    for (int i = 0; i < g.n; ++i) {
        phi3[i] = ipow(p.phi0[i], 3);
        phiq1[i] = ipow(p.phi0[i], p.q + 1);
    }
    rc.b2 = quad(g, phi3);
    rc.bq = quad(g, phiq1);
    return rc;
}

NewtonPolygon newton_polygon(std::vector<LatticePoint> points) {
    if (points.empty()) throw std::invalid_argument("newton_polygon: empty input");
    std::sort(points.begin(), points.end(), [](const LatticePoint& a, const LatticePoint& b) {
        return a.l != b.l ? a.l < b.l : a.j < b.j;
    });
    points.erase(std::unique(points.begin(), points.end()), points.end());
    // keep only the lowest j per abscissa
    std::vector<LatticePoint> cols;
    for (const auto& pt : points) {
        if (!cols.empty() && cols.back().l == pt.l) continue;
        cols.push_back(pt);
    }

    // monotone-chain lower hull, integer cross products
    std::vector<LatticePoint> hull;
    for (const auto& pt : cols) {
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull[hull.size() - 1];
            const long cross = (b.l - a.l) * (pt.j - a.j) - (b.j - a.j) * (pt.l - a.l);
            if (cross <= 0) {
                hull.pop_back();  // b lies on or above segment a-pt
            } else {
                break;
            }
        }
        hull.push_back(pt);
    }

    // cut the hull at its first minimal-j vertex; the polygon does not turn
    // back up on the right
    size_t cut = 0;
    for (size_t i = 1; i < hull.size(); ++i) {
        if (hull[i].j < hull[cut].j) cut = i;
    }
    hull.resize(cut + 1);

    NewtonPolygon np;
    np.vertices = std::move(hull);
    return np;
}

std::vector<PuiseuxBranch> puiseux_branches(const ReducedCoefficients& rc) {
    if (!(rc.b2 > 0.0) || !(rc.bq > 0.0) || !(rc.c0 < 0.0))
        throw std::invalid_argument("puiseux_branches: invalid reduced coefficients");
    std::vector<PuiseuxBranch> out;

    PuiseuxBranch slope;
    slope.exponent = {1, 1};
    slope.coefficient = -rc.c0 / rc.b2;  // |a|^2 / (2 d b2)
    slope.lambda_side = Side::Both;
    slope.sign_of_x = Side::Plus;
    out.push_back(slope);

    const long root_den = rc.q - 2;
    const double root_coef = std::pow(rc.b2 / rc.bq, 1.0 / static_cast<double>(root_den));
    if (rc.q % 2 == 0) {
        // x^{q-2} = (b2/bq) lambda has real roots only for lambda > 0,
        // with both signs of x.
        for (Side sx : {Side::Plus, Side::Minus}) {
            PuiseuxBranch b;
            b.exponent = {1, root_den};
            b.coefficient = root_coef;
            b.lambda_side = Side::Plus;
            b.sign_of_x = sx;
            out.push_back(b);
        }
    } else {
        PuiseuxBranch b;
        b.exponent = {1, root_den};
        b.coefficient = root_coef;
        b.lambda_side = Side::Both;
        b.sign_of_x = Side::Plus;  // odd root: x carries the sign of lambda
        out.push_back(b);
    }
    return out;
}

std::vector<GermArc> germ_arcs(const ReducedCoefficients& rc) {
    std::vector<GermArc> arcs;
    for (const auto& b : puiseux_branches(rc)) {
        if (b.lambda_side == Side::Both) {
            arcs.push_back({b.exponent, b.coefficient, true, b.sign_of_x == Side::Plus});
            // the lambda<0 arc of a both-sided branch has the opposite x sign
            arcs.push_back({b.exponent, b.coefficient, false, b.sign_of_x != Side::Plus});
        } else {
            arcs.push_back({b.exponent, b.coefficient, b.lambda_side == Side::Plus,
                            b.sign_of_x == Side::Plus});
        }
    }
    return arcs;
}

std::pair<double, Eigen::VectorXd> predictor_cr(const ProblemParams& p, double bif_lambda,
                                                double s, double trust_radius) {
    if (std::abs(s) > trust_radius)
        throw std::domain_error("predictor_cr: step beyond trust radius");
    return {bif_lambda, s * p.phi0};
}

std::pair<double, Eigen::VectorXd> predictor_puiseux(const ProblemParams& p, const GermArc& arc,
                                                     double lam, double trust_radius) {
    if (std::abs(lam) > trust_radius)
        throw std::domain_error("predictor_puiseux: lambda beyond trust radius");
    if ((lam > 0.0) != arc.lambda_positive && lam != 0.0)
        throw std::domain_error("predictor_puiseux: lambda on the wrong side of the germ");
    return {lam, arc.x_of_lambda(lam) * p.phi0};
}

}  // namespace bifkit
