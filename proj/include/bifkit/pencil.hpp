#pragma once

#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "bifkit/grid.hpp"
#include "bifkit/problem.hpp"

namespace bifkit {

/// A matrix-valued curve lambda -> c(lambda) of fixed dimension. eval must
/// be re-entrant (pure); it is shared across threads without locking.
struct MatrixCurve {
    std::function<Eigen::MatrixXd(double)> eval;
    Eigen::Index dim = 0;
};

/// One analyzed point of a curve's generalized spectrum. chi is the
/// vanishing order of det c(lambda) (nullopt = not algebraic at numeric
/// resolution); kappa is the resolvent blow-up rate when measured.
struct SpectrumPoint {
    double lambda0 = 0.0;
    std::optional<int> kappa;
    std::optional<int> chi;
};

/// Discretized linearization at u = 0: lambda -> d*Lap + lambda*a*Grad + I.
MatrixCurve linearization_curve(const ProblemParams& p, const Grid& g);

/// Conjugated self-adjoint form of the linearization:
/// lambda -> d*Lap + (1 - lambda^2 a^2/(4d)) I.
MatrixCurve transformed_curve(const ProblemParams& p, const Grid& g);

/// Principal eigenvalue of the transformed curve,
/// mu(lambda) = (1 - lambda^2 a^2/(4d)) - d*sigma1. Since the conjugation
/// only shifts the spectrum of d*Lap, this closed form is exact for the
/// discrete operator.
double principal_mu(const ProblemParams& p, double lam);

/// Closed-form bifurcation value (2/|a|) sqrt(d (1 - d sigma1)) when
/// d*sigma1 <= 1; nullopt otherwise (the spectrum is empty for d > 1/sigma1).
std::optional<double> lambda1(double d, double abs_a, double sigma1);

/// Whether (lambda, d) lies on the spectrum ellipse 4d(1 - sigma1 d) = lambda^2 a^2.
bool on_spectrum_ellipse(double lam, double d, double abs_a, double sigma1, double tol);

enum class EigMode { ClosedForm, Numeric };

/// Perturbation rho(lambda) of the zero eigenvalue of the linearization at
/// the organizing center. ClosedForm returns -lambda^2 a^2 / (4d); Numeric
/// returns the eigenvalue branch of the discretized problem nearest zero
/// (requires a grid; real by diagonal similarity of the tridiagonal matrix).
double perturbed_eigenvalue(double lam, double d, double abs_a, EigMode mode,
                            const Grid* g = nullptr);

/// Vanishing order of det c(lambda) at lambda0, from a polynomial fit on a
/// symmetric stencil. Only for small curves (dim <= 50); coefficients below
/// 1e-9 of the largest are treated as noise. chi = nullopt when every
/// sampled determinant sits below the noise floor.
SpectrumPoint chi_ord_det(const MatrixCurve& c, double lambda0);

struct KappaFit {
    double lambda0_refined = 0.0;
    double slope = 0.0;
    double fit_residual = 0.0;  // rms residual of the log-log fit
    int kappa = 0;
    int rungs_used = 0;
};

/// Least-squares slope of log sigma_min(c(lambda0 + t)) against log t over
/// a geometric ladder t in [1e-5, 1e-2]. lambda0 is first refined to the
/// nearby singular point of the curve; rungs below the SVD noise floor are
/// dropped. Throws when the slope is farther than 0.2 from an integer or
/// the curve is not invertible on the punctured neighborhood.
KappaFit estimate_kappa_fit(const MatrixCurve& c, double lambda0);
int estimate_kappa(const MatrixCurve& c, double lambda0);

/// Product-formula check: ord-det of the pointwise product equals the sum
/// of the parts' orders.
bool product_formula_check(const MatrixCurve& c1, const MatrixCurve& c2, double lambda0);

}  // namespace bifkit
