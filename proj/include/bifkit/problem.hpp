#pragma once

#include <utility>

#include <Eigen/Dense>

#include "bifkit/grid.hpp"
#include "bifkit/tridiag.hpp"

namespace bifkit {

/// Discrete sign class of a nodal vector. StrictlyPositive is the discrete
/// analog of u >> 0: positive interior values with inward-pointing boundary
/// slopes; StrictlyNegative mirrors it.
enum class SignClass { StrictlyPositive, StrictlyNegative, Trivial, Mixed };

enum class SolutionSign { Positive, Negative };

enum class TransformDirection { ToSelfAdjoint, FromSelfAdjoint };

/// Problem identity for -d u'' = lambda a u' + u + lambda u^2 - u^q on a
/// fixed grid. Immutable after construction; sigma1/phi0 are the grid's
/// principal eigenpair with quad(phi0^2) = 1.
struct ProblemParams {
    double d = 1.0;            // effective diffusion used by all operators
    double d_requested = 1.0;  // value asked for before the critical snap
    int q = 4;
    double a = 1.0;            // convection direction (scalar in 1D)
    std::pair<double, double> domain{0.0, 0.0};
    double sigma1 = 0.0;
    Eigen::VectorXd phi0;

    double abs_a() const { return std::abs(a); }
    /// d*sigma1 - 1; zero exactly at the (discrete) organizing center.
    double criticality() const { return d * sigma1 - 1.0; }
    /// Copy with a different diffusion, same grid data. No snapping.
    ProblemParams with_d(double new_d) const;
};

/// Builds ProblemParams from the grid's eigenpair. When |d*sigma1 - 1| is
/// within snap_tol, d is replaced by 1/sigma1 so that the discrete pencil
/// is exactly degenerate; the requested value is kept for reporting.
ProblemParams make_problem(double d, int q, double a, const Grid& g,
                           double critical_snap_tol = 1e-3);

/// Integer power by repeated multiplication (sign-correct for negative bases).
double ipow(double x, int e);

/// Nonlinear residual d*Lap u + lambda*a*Grad u + u + lambda u^2 - u^q.
Eigen::VectorXd residual(const ProblemParams& p, double lam,
                         const Eigen::VectorXd& u, const Grid& g);

/// Derivative of the residual in u: d*Lap + lambda*a*Grad
/// + diag(1 + 2 lambda u - q u^{q-1}).
Tridiag jacobian_u(const ProblemParams& p, double lam,
                   const Eigen::VectorXd& u, const Grid& g);

/// Derivative of the residual in lambda: a*Grad u + u^2.
Eigen::VectorXd jacobian_lambda(const ProblemParams& p, double lam,
                                const Eigen::VectorXd& u, const Grid& g);

/// Exponential change of variables zeta(x) = exp(-lambda a x / (2d)).
/// ToSelfAdjoint maps u to v = u / zeta; FromSelfAdjoint maps v to u = zeta v.
/// Throws std::domain_error when the exponent exceeds the numeric range.
Eigen::VectorXd transform(const ProblemParams& p, double lam,
                          const Eigen::VectorXd& u, const Grid& g,
                          TransformDirection direction);

/// Sup-norm a priori bound for solutions of the given sign at lambda.
/// Positive: 1 for lambda <= 0, else lambda^{1/(q-2)} + 1; Negative mirrors.
double apriori_bound(double lam, int q, SolutionSign sign);

struct LambdaWindow {
    double lo = 0.0;
    double hi = 0.0;
    bool empty = false;
    SolutionSign sign = SolutionSign::Positive;

    bool contains(double lam, double inflate = 0.0) const {
        return !empty && lam >= lo - inflate && lam <= hi + inflate;
    }
};

/// The lambda-interval outside which no solution of the given sign can
/// exist: for d <= 1/sigma1 the interval [-lambda1(d), C0(d)] (Positive),
/// for d > 1/sigma1 the strictly positive interval [C1(d), C2(d)] cut out
/// by Gamma(lambda) <= 1/d - sigma1, or an empty window when that set is
/// empty. Negative mirrors through lambda -> -lambda.
LambdaWindow lambda_window(const ProblemParams& p, SolutionSign sign);

/// Potential-comparison function Gamma(lambda) =
/// lambda^2 a^2 / (4 d^2) - lambda (1 + lambda^{1/(q-2)}) / d, lambda >= 0.
double window_gamma(double lam, double d, double abs_a, int q);

/// Classifies a nodal vector, with strict inequalities relaxed by tol and
/// sup-norm <= tol reported as Trivial.
SignClass classify_sign(const Eigen::VectorXd& u, const Grid& g, double tol);

/// Relative strictness tolerance used by the continuation layer.
double default_sign_tol(const Eigen::VectorXd& u);

}  // namespace bifkit
