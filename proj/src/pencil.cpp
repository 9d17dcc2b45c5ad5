#include "bifkit/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace bifkit {

namespace {

double smallest_singular_value(const Eigen::MatrixXd& M, double* largest = nullptr) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
    const auto& s = svd.singularValues();
    if (largest) *largest = s[0];
    return s[s.size() - 1];
}

}  // namespace

MatrixCurve linearization_curve(const ProblemParams& p, const Grid& g) {
    const Tridiag lap = g.lap;
    const Tridiag grad = g.grad;
    const double d = p.d, a = p.a;
    MatrixCurve c;
    c.dim = g.n;
    c.eval = [lap, grad, d, a](double lam) {
        Tridiag t = lap;
        t.scale(d);
        t.add_scaled(lam * a, grad);
        t.add_diagonal(Eigen::VectorXd::Ones(t.rows()));
        return t.dense();
    };
    return c;
}

MatrixCurve transformed_curve(const ProblemParams& p, const Grid& g) {
    const Tridiag lap = g.lap;
    const double d = p.d, a2 = p.a * p.a;
    MatrixCurve c;
    c.dim = g.n;
    c.eval = [lap, d, a2](double lam) {
        Tridiag t = lap;
        t.scale(d);
        const double shift = 1.0 - lam * lam * a2 / (4.0 * d);
        t.add_diagonal(Eigen::VectorXd::Constant(t.rows(), shift));
        return t.dense();
    };
    return c;
}

double principal_mu(const ProblemParams& p, double lam) {
    return 1.0 - lam * lam * p.a * p.a / (4.0 * p.d) - p.d * p.sigma1;
}

std::optional<double> lambda1(double d, double abs_a, double sigma1) {
    if (!(d > 0.0)) throw std::invalid_argument("lambda1: d must be positive");
    double disc = d * (1.0 - d * sigma1);
    // exactly-critical d can land a hair below zero in floating point
    if (disc < 0.0 && disc >= -1e-14 * d) disc = 0.0;
    if (disc < 0.0) return std::nullopt;
    return (2.0 / abs_a) * std::sqrt(disc);
}

bool on_spectrum_ellipse(double lam, double d, double abs_a, double sigma1, double tol) {
    return std::abs(4.0 * d * (1.0 - sigma1 * d) - lam * lam * abs_a * abs_a) <= tol;
}

double perturbed_eigenvalue(double lam, double d, double abs_a, EigMode mode,
                            const Grid* g) {
    if (mode == EigMode::ClosedForm) {
        return -lam * lam * abs_a * abs_a / (4.0 * d);
    }
    if (!g) throw std::invalid_argument("perturbed_eigenvalue: Numeric mode needs a grid");
    // d*Lap + lam*a*Grad + I is tridiagonal with off-diagonals
    // d/h^2 -+ lam*a/(2h); while both stay positive it is diagonally similar
    // to a symmetric tridiagonal matrix, so the spectrum is real.
    const double h = g->h;
    const double sub = d / (h * h) - lam * abs_a / (2.0 * h);
    const double sup = d / (h * h) + lam * abs_a / (2.0 * h);
    if (!(sub * sup > 0.0))
        throw std::runtime_error("perturbed_eigenvalue: convection dominates the stencil");
    const double off = std::sqrt(sub * sup);
    Eigen::VectorXd diag = Eigen::VectorXd::Constant(g->n, 1.0 - 2.0 * d / (h * h));
    Eigen::VectorXd subdiag = Eigen::VectorXd::Constant(g->n - 1, off);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, subdiag, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("perturbed_eigenvalue: eigensolver failed");
    // The branch through rho(0) = 1 - d*sigma1 is the largest eigenvalue.
    return es.eigenvalues().maxCoeff();
}

SpectrumPoint chi_ord_det(const MatrixCurve& c, double lambda0) {
    if (c.dim > 50) throw std::invalid_argument("chi_ord_det: dim > 50, use estimate_kappa");
    constexpr int k = 8;          // stencil half-width -> 2k+1 samples
    constexpr double delta = 0.1; // stencil radius
    constexpr int fit_degree = 12;
    constexpr double rel_noise = 1e-9;

    const int m = 2 * k + 1;
    Eigen::VectorXd tau(m), dets(m);
    for (int j = -k; j <= k; ++j) {
        tau[j + k] = static_cast<double>(j) / k;
        dets[j + k] = c.eval(lambda0 + delta * tau[j + k]).partialPivLu().determinant();
    }

    SpectrumPoint out;
    out.lambda0 = lambda0;

    const double dmax = dets.cwiseAbs().maxCoeff();
    if (!(dmax > 0.0) || !std::isfinite(dmax)) {
        out.chi = std::nullopt;  // non-algebraic within resolution
        return out;
    }
    const Eigen::VectorXd rhs = dets / dmax;

    Eigen::MatrixXd V(m, fit_degree + 1);
    for (int i = 0; i < m; ++i) {
        double t = 1.0;
        for (int p = 0; p <= fit_degree; ++p) {
            V(i, p) = t;
            t *= tau[i];
        }
    }
    const Eigen::VectorXd coef = V.colPivHouseholderQr().solve(rhs);
    const double fit_res = (V * coef - rhs).norm() / rhs.norm();

    if (fit_res > 1e-6) {
        // Not polynomial of degree <= fit_degree in the window; fall back to
        // the log-log slope of |det| over a decade ladder.
        std::vector<double> lt, ld;
        for (int j = 0; j < 8; ++j) {
            const double t = delta * std::pow(10.0, -1.5 * j / 7.0);
            const double dv = std::abs(c.eval(lambda0 + t).partialPivLu().determinant());
            if (dv > dmax * 1e-12) {
                lt.push_back(std::log(t));
                ld.push_back(std::log(dv));
            }
        }
        if (lt.size() < 3) {
            out.chi = std::nullopt;
            return out;
        }
        double stt = 0, st = 0, sd = 0, std_ = 0;
        for (size_t i = 0; i < lt.size(); ++i) {
            st += lt[i];
            sd += ld[i];
            stt += lt[i] * lt[i];
            std_ += lt[i] * ld[i];
        }
        const double nn = static_cast<double>(lt.size());
        const double slope = (nn * std_ - st * sd) / (nn * stt - st * st);
        const int r = static_cast<int>(std::lround(slope));
        if (std::abs(slope - r) > 0.2 || r < 0) {
            out.chi = std::nullopt;
        } else {
            out.chi = r;
        }
        return out;
    }

    const double cmax = coef.cwiseAbs().maxCoeff();
    for (int p = 0; p <= fit_degree; ++p) {
        if (std::abs(coef[p]) > rel_noise * cmax) {
            out.chi = p;
            return out;
        }
    }
    out.chi = std::nullopt;
    return out;
}

KappaFit estimate_kappa_fit(const MatrixCurve& c, double lambda0) {
    constexpr double t_top = 1e-2;
    constexpr double t_bot = 1e-5;
    constexpr int rungs = 10;
    const double eps = std::numeric_limits<double>::epsilon();

    // Refine lambda0 to the curve's actual singular point nearby; the given
    // value is typically a closed-form or scan estimate that is off by more
    // than the bottom rung of the ladder.
    const auto smin_at = [&](double lam) { return smallest_singular_value(c.eval(lam)); };
    const auto refined = boost::math::tools::brent_find_minima(
        smin_at, lambda0 - t_top, lambda0 + t_top, 52);
    double lam0 = (refined.second < smin_at(lambda0)) ? refined.first : lambda0;

    KappaFit fit;
    fit.lambda0_refined = lam0;

    std::vector<double> lt, ls;
    int below_floor = 0;
    for (int j = 0; j < rungs; ++j) {
        const double t = t_top * std::pow(t_bot / t_top, static_cast<double>(j) / (rungs - 1));
        double smax = 0.0;
        const double smin = smallest_singular_value(c.eval(lam0 + t), &smax);
        const double floor = 50.0 * eps * smax;
        if (smin <= floor) {
            ++below_floor;
            continue;
        }
        lt.push_back(std::log(t));
        ls.push_back(std::log(smin));
    }
    if (below_floor == rungs)
        throw std::runtime_error("estimate_kappa: curve singular on the whole neighborhood");
    if (lt.size() < 4)
        throw std::runtime_error("estimate_kappa: too few usable rungs above noise floor");

    double st = 0, ss = 0, stt = 0, sts = 0;
    const double nn = static_cast<double>(lt.size());
    for (size_t i = 0; i < lt.size(); ++i) {
        st += lt[i];
        ss += ls[i];
        stt += lt[i] * lt[i];
        sts += lt[i] * ls[i];
    }
    const double slope = (nn * sts - st * ss) / (nn * stt - st * st);
    const double icpt = (ss - slope * st) / nn;
    double res2 = 0.0;
    for (size_t i = 0; i < lt.size(); ++i) {
        const double r = ls[i] - (slope * lt[i] + icpt);
        res2 += r * r;
    }
    fit.slope = slope;
    fit.fit_residual = std::sqrt(res2 / nn);
    fit.rungs_used = static_cast<int>(lt.size());

    const int k = static_cast<int>(std::lround(slope));
    if (std::abs(slope - k) > 0.2)
        throw std::runtime_error("estimate_kappa: slope not near an integer; curve not kappa-algebraic at resolution");
    if (k < 1)
        throw std::runtime_error("estimate_kappa: lambda0 is not a generalized eigenvalue at resolution");
    fit.kappa = k;
    return fit;
}

int estimate_kappa(const MatrixCurve& c, double lambda0) {
    return estimate_kappa_fit(c, lambda0).kappa;
}

bool product_formula_check(const MatrixCurve& c1, const MatrixCurve& c2, double lambda0) {
    if (c1.dim != c2.dim) throw std::invalid_argument("product_formula_check: dim mismatch");
    MatrixCurve prod;
    prod.dim = c1.dim;
    const auto e1 = c1.eval, e2 = c2.eval;
    prod.eval = [e1, e2](double lam) { return (e1(lam) * e2(lam)).eval(); };
    const auto cp = chi_ord_det(prod, lambda0);
    const auto a = chi_ord_det(c1, lambda0);
    const auto b = chi_ord_det(c2, lambda0);
    if (!cp.chi || !a.chi || !b.chi) return false;
    return *cp.chi == *a.chi + *b.chi;
}

}  // namespace bifkit
