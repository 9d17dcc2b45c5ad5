#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bifkit/grid.hpp"
#include "bifkit/problem.hpp"

namespace bifkit {

/// Coefficients of the reduced bifurcation equation at the organizing
/// center: g(lambda, x) = c0 lambda^2 + b2 x lambda - bq x^{q-1} + h.o.t.
/// c0 is the lambda^2 Taylor coefficient of the perturbed eigenvalue,
/// rho''(0)/2 = -|a|^2/(4d); the traced slope germ confirms this factor.
struct ReducedCoefficients {
    double c0 = 0.0;  // lambda^2 coefficient, -|a|^2/(4d) < 0
    double b2 = 0.0;  // quad(phi0^3) > 0
    double bq = 0.0;  // quad(phi0^{q+1}) > 0
    int q = 4;
    double d = 1.0;
};

struct LatticePoint {
    long l = 0;  // x-exponent
    long j = 0;  // lambda-exponent
    friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

/// Lower convex hull of exponent pairs, vertices sorted by l with strictly
/// decreasing j (trailing upward turns are cut at the minimal-j vertex).
struct NewtonPolygon {
    std::vector<LatticePoint> vertices;
};

/// Exact rational exponent, kept as an integer pair.
struct Rational {
    long num = 0;
    long den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

enum class Side { Plus, Minus, Both };

/// Leading term of one solution germ x(lambda) of the reduced equation.
/// coefficient is positive; sign_of_x = Plus on lambda_side = Both means
/// x carries the sign of lambda (odd-root convention).
struct PuiseuxBranch {
    Rational exponent;
    double coefficient = 0.0;
    Side lambda_side = Side::Both;
    Side sign_of_x = Side::Plus;
};

/// One oriented germ arc, the expansion of PuiseuxBranch entries into the
/// four arcs through (0,0) used for branch switching.
struct GermArc {
    Rational exponent;
    double coefficient = 0.0;  // > 0
    bool lambda_positive = true;
    bool x_positive = true;

    double x_of_lambda(double lam) const {
        const double mag = coefficient * std::pow(std::abs(lam), exponent.value());
        return x_positive ? mag : -mag;
    }
};

/// Reduced-equation coefficients; requires d*sigma1 = 1 within 1e-6.
ReducedCoefficients ls_coefficients(const ProblemParams& p, const Grid& g);

/// Lower convex hull of a nonempty set of distinct lattice points.
NewtonPolygon newton_polygon(std::vector<LatticePoint> points);

/// Puiseux germ list from the reduced coefficients: the slope branch
/// x = -c0/b2 lambda (both sides) and the root branches
/// x = +-(b2/bq)^{1/(q-2)} lambda^{1/(q-2)} (two one-sided entries for even
/// q, one both-sided entry for odd q).
std::vector<PuiseuxBranch> puiseux_branches(const ReducedCoefficients& rc);

/// The four germ arcs through (0,0) (Weierstrass bound: at most two
/// lambda-roots per x).
std::vector<GermArc> germ_arcs(const ReducedCoefficients& rc);

enum class PredictorKind { CrandallRabinowitz, Puiseux };

/// First-order branch predictors to be Newton-corrected.
/// CR: (bif_lambda, s*phi0) for d < 1/sigma1. Puiseux: (lam, x(lam)*phi0)
/// from a germ arc at the organizing center. Throws std::domain_error when
/// the step leaves the trust radius.
std::pair<double, Eigen::VectorXd> predictor_cr(const ProblemParams& p, double bif_lambda,
                                                double s, double trust_radius = 0.25);
std::pair<double, Eigen::VectorXd> predictor_puiseux(const ProblemParams& p, const GermArc& arc,
                                                     double lam, double trust_radius = 0.25);

}  // namespace bifkit
