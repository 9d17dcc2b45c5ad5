#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bifkit/continuation.hpp"
#include "bifkit/grid.hpp"
#include "bifkit/problem.hpp"
#include "oracles.hpp"

using namespace bifkit;
using oracles::kPi;

namespace {

const Grid& grid200() {
    static const Grid g = build_grid(200, {0.0, kPi});
    return g;
}

ProblemParams problem(double d, int q, double a = 1.0) {
    return make_problem(d, q, a, grid200());
}

}  // namespace

TEST_CASE("parameter validation") {
    const Grid& g = grid200();
    CHECK_THROWS_AS(make_problem(-1.0, 4, 1.0, g), std::invalid_argument);
    CHECK_THROWS_AS(make_problem(0.0, 4, 1.0, g), std::invalid_argument);
    CHECK_THROWS_AS(make_problem(1.0, 3, 1.0, g), std::invalid_argument);
    CHECK_THROWS_AS(make_problem(1.0, 2, 1.0, g), std::invalid_argument);
    CHECK_THROWS_AS(make_problem(1.0, 4, 0.0, g), std::invalid_argument);
}

TEST_CASE("critical snap replaces d by the discrete organizing center") {
    const ProblemParams p1 = problem(1.0, 4);
    CHECK(p1.d_requested == 1.0);
    CHECK(p1.d != 1.0);
    CHECK(p1.criticality() == doctest::Approx(0.0).epsilon(1e-15));

    const ProblemParams p2 = problem(0.5, 4);
    CHECK(p2.d == 0.5);  // far from critical: untouched

    const ProblemParams p3 = make_problem(1.0, 4, 1.0, grid200(), 0.0);
    CHECK(p3.d == 1.0);  // snap disabled
}

TEST_CASE("residual vanishes identically on the trivial branch") {
    const Grid& g = grid200();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    for (const auto& p : {problem(0.25, 5), problem(1.0, 4), problem(2.0, 6, -0.7)}) {
        for (int rep = 0; rep < 10; ++rep) {
            const Eigen::VectorXd r = residual(p, unif(rng), Eigen::VectorXd::Zero(g.n), g);
            CHECK(r.lpNorm<Eigen::Infinity>() == 0.0);  // exact, no tolerance
        }
    }
}

TEST_CASE("residual of the sine interpolant matches the symbolic evaluation") {
    // d=1, q=4, a=1, lambda=0: d u'' + u - u^4 = -sin^4 x + O(h^2) at u = sin
    const Grid& g = grid200();
    const ProblemParams p = make_problem(1.0, 4, 1.0, g, 0.0);
    Eigen::VectorXd u(g.n);
    for (int i = 0; i < g.n; ++i) u[i] = std::sin(g.nodes[i]);
    const Eigen::VectorXd r = residual(p, 0.0, u, g);
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i) {
        worst = std::max(worst, std::abs(r[i] + ipow(std::sin(g.nodes[i]), 4)));
    }
    CHECK(worst < g.h * g.h);
}

TEST_CASE("residual rejects vectors of the wrong size") {
    const Grid& g = grid200();
    const ProblemParams p = problem(1.0, 4);
    // a constant extension carrying boundary values is not an interior vector
    const Eigen::VectorXd padded = Eigen::VectorXd::Constant(g.n + 2, 0.3);
    CHECK_THROWS_AS(residual(p, 1.0, padded, g), std::invalid_argument);
    CHECK_THROWS_AS(jacobian_u(p, 1.0, padded, g), std::invalid_argument);
    CHECK_THROWS_AS(jacobian_lambda(p, 1.0, padded, g), std::invalid_argument);
}

TEST_CASE("jacobian at the trivial state is the linearization") {
    const Grid& g = grid200();
    const ProblemParams p = problem(0.4, 5, 1.3);
    const double lam = 0.8;
    Tridiag expected = g.lap;
    expected.scale(p.d);
    expected.add_scaled(lam * p.a, g.grad);
    expected.add_diagonal(Eigen::VectorXd::Ones(g.n));
    const Tridiag J = jacobian_u(p, lam, Eigen::VectorXd::Zero(g.n), g);
    CHECK((J.dense() - expected.dense()).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("jacobian agrees with centered differences for 100 random states") {
    const Grid& g = grid200();
    const ProblemParams p = problem(0.7, 4, -0.8);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const double t = 1e-6;
    for (int rep = 0; rep < 100; ++rep) {
        const double lam = 2.0 * unif(rng);
        Eigen::VectorXd u(g.n), w(g.n);
        for (int i = 0; i < g.n; ++i) {
            u[i] = unif(rng);
            w[i] = unif(rng);
        }
        const Eigen::VectorXd jw = jacobian_u(p, lam, u, g).apply(w);
        const Eigen::VectorXd fd = oracles::fd_directional(p, lam, u, w, g, t);
        CHECK((jw - fd).norm() <= 1e-6 * (1.0 + jw.norm()));
    }
}

TEST_CASE("jacobian diagonal matches the symbolic derivative at q=4, lambda=2") {
    const Grid& g = grid200();
    const ProblemParams p = make_problem(1.0, 4, 1.0, g, 0.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-1.5, 1.5);
    Eigen::VectorXd u(g.n);
    for (int i = 0; i < g.n; ++i) u[i] = unif(rng);
    const Tridiag J = jacobian_u(p, 2.0, u, g);
    for (int i = 0; i < g.n; i += 13) {
        const double ui = u[i];
        // subtracting the O(h^-2) stencil diagonal cancels ~12 digits
        const double nonlinear_part = J.diag[i] - p.d * g.lap.diag[i];
        const double expected = 1.0 + 4.0 * ui - 4.0 * ui * ui * ui;
        CHECK(std::abs(nonlinear_part - expected) < 1e-16 * std::abs(p.d * g.lap.diag[i]) * 4.0);
    }
}

TEST_CASE("lambda derivative of the residual") {
    const Grid& g = grid200();
    const ProblemParams p = problem(0.6, 5, 1.0);

    CHECK(jacobian_lambda(p, 0.3, Eigen::VectorXd::Zero(g.n), g).lpNorm<Eigen::Infinity>() == 0.0);

    // finite-difference oracle at u = phi0
    const Eigen::VectorXd fd = oracles::fd_lambda(p, 0.3, p.phi0, g, 1e-6);
    const Eigen::VectorXd jl = jacobian_lambda(p, 0.3, p.phi0, g);
    CHECK((jl - fd).lpNorm<Eigen::Infinity>() < 1e-7 * (1.0 + jl.lpNorm<Eigen::Infinity>()));

    // doubling a doubles the convection part exactly
    const ProblemParams p2 = make_problem(0.6, 5, 2.0, g);
    const Eigen::VectorXd u2 = p.phi0.cwiseProduct(p.phi0);
    const Eigen::VectorXd c1 = jacobian_lambda(p, 0.0, p.phi0, g) - u2;
    const Eigen::VectorXd c2 = jacobian_lambda(p2, 0.0, p.phi0, g) - u2;
    CHECK((c2 - 2.0 * c1).lpNorm<Eigen::Infinity>() < 1e-13 * c1.lpNorm<Eigen::Infinity>());
}

TEST_CASE("transform: identity at lambda=0, round trip, overflow guard") {
    const Grid& g = grid200();
    const ProblemParams p = problem(0.5, 4);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::VectorXd u(g.n);
    for (int i = 0; i < g.n; ++i) u[i] = unif(rng);

    const Eigen::VectorXd id = transform(p, 0.0, u, g, TransformDirection::ToSelfAdjoint);
    CHECK((id - u).lpNorm<Eigen::Infinity>() == 0.0);

    for (const double lam : {-2.0, -0.3, 0.7, 3.0}) {
        const Eigen::VectorXd v = transform(p, lam, u, g, TransformDirection::ToSelfAdjoint);
        const Eigen::VectorXd back = transform(p, lam, v, g, TransformDirection::FromSelfAdjoint);
        CHECK((back - u).lpNorm<Eigen::Infinity>() <= 1e-13 * u.lpNorm<Eigen::Infinity>());
    }

    CHECK_THROWS_AS(transform(p, 1e6, u, g, TransformDirection::ToSelfAdjoint),
                    std::domain_error);
}

TEST_CASE("transform maps solutions to solutions of the self-adjoint form") {
    // solve F(lam, u) = 0, push u through the change of variables, and check
    // the conjugated equation's residual vanishes within discretization error
    for (const int n : {100, 200}) {
        const Grid g = build_grid(n, {0.0, kPi});
        const ProblemParams p = make_problem(0.25, 5, 1.0, g);
        const double lam = 0.3;
        const Eigen::VectorXd guess = 0.8 / p.phi0.lpNorm<Eigen::Infinity>() * p.phi0;
        const Eigen::VectorXd u = newton_correct(p, g, lam, guess, 1e-12, 30);
        REQUIRE(u.lpNorm<Eigen::Infinity>() > 0.1);

        const Eigen::VectorXd v = transform(p, lam, u, g, TransformDirection::ToSelfAdjoint);
        const Eigen::VectorXd r = oracles::transformed_residual(p, lam, v, g);
        CHECK(r.lpNorm<Eigen::Infinity>() < 5.0 * g.h * g.h);
    }
}

TEST_CASE("a priori bound formula") {
    CHECK(apriori_bound(-1.0, 4, SolutionSign::Positive) == 1.0);
    CHECK(apriori_bound(1.0, 4, SolutionSign::Positive) == doctest::Approx(2.0));
    CHECK(apriori_bound(-4.0, 6, SolutionSign::Negative) ==
          doctest::Approx(1.0 + std::pow(4.0, 0.25)).epsilon(1e-15));
    CHECK(apriori_bound(0.5, 5, SolutionSign::Negative) == 1.0);
    CHECK(apriori_bound(0.0, 5, SolutionSign::Positive) == 1.0);
    CHECK_THROWS_AS(apriori_bound(1.0, 3, SolutionSign::Positive), std::invalid_argument);
}

TEST_CASE("lambda window contains 0 exactly below the critical diffusion") {
    CHECK(lambda_window(problem(0.5, 4), SolutionSign::Positive).contains(0.0));
    const LambdaWindow w2 = lambda_window(problem(2.0, 4), SolutionSign::Positive);
    CHECK_FALSE(w2.contains(0.0));
}

TEST_CASE("window lower bound is the closed-form bifurcation value") {
    const LambdaWindow w = lambda_window(problem(0.25, 4), SolutionSign::Positive);
    CHECK(std::abs(w.lo + 0.8660254037844386) < 1e-4);  // discrete sigma1 skew only
    CHECK(w.hi > 0.0);
}

TEST_CASE("supercritical window against a fine parameter scan") {
    const ProblemParams p = problem(2.0, 4);
    const LambdaWindow w = lambda_window(p, SolutionSign::Positive);
    REQUIRE_FALSE(w.empty);
    CHECK(w.lo > 0.0);
    CHECK(w.hi >= w.lo);

    // boundary inequality from Gamma(C_i) <= 1/d - sigma1 < 0:
    // sigma1 d - 1 <= C_i (1 + C_i^{1/(q-2)})
    const double target = p.sigma1 * p.d - 1.0;
    CHECK(w.lo * (1.0 + std::pow(w.lo, 0.5)) >= target - 1e-6);
    CHECK(w.hi * (1.0 + std::pow(w.hi, 0.5)) >= target - 1e-6);

    // scan oracle for both boundaries
    const double rhs = 1.0 / p.d - p.sigma1;
    auto gamma = [&](double lam) { return window_gamma(lam, p.d, p.abs_a(), p.q); };
    const double step = 1e-4;
    double first_inside = -1.0, last_inside = -1.0;
    for (double lam = step; lam < 200.0; lam += step) {
        if (gamma(lam) <= rhs) {
            if (first_inside < 0.0) first_inside = lam;
            last_inside = lam;
        }
    }
    REQUIRE(first_inside > 0.0);
    REQUIRE(last_inside < 200.0 - 2.0 * step);  // the set ended inside the scan
    CHECK(std::abs(w.lo - first_inside) < 2.0 * step);
    CHECK(std::abs(w.hi - last_inside) < 2.0 * step);
}

TEST_CASE("negative window is the mirror image") {
    for (const auto& p : {problem(0.25, 5), problem(2.0, 5)}) {
        const LambdaWindow wp = lambda_window(p, SolutionSign::Positive);
        const LambdaWindow wn = lambda_window(p, SolutionSign::Negative);
        REQUIRE(wp.empty == wn.empty);
        if (!wp.empty) {
            CHECK(wn.lo == doctest::Approx(-wp.hi).epsilon(1e-14));
            CHECK(wn.hi == doctest::Approx(-wp.lo).epsilon(1e-14));
        }
    }
}

TEST_CASE("window at the organizing center starts at zero") {
    const LambdaWindow w = lambda_window(problem(1.0, 5), SolutionSign::Positive);
    CHECK(w.lo == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(w.hi > 1.0);
}

TEST_CASE("sign classification") {
    const Grid& g = grid200();
    Eigen::VectorXd s(g.n), s2(g.n);
    for (int i = 0; i < g.n; ++i) {
        s[i] = std::sin(g.nodes[i]);
        s2[i] = std::sin(2.0 * g.nodes[i]);
    }
    CHECK(classify_sign(s, g, 1e-9) == SignClass::StrictlyPositive);
    CHECK(classify_sign(-s, g, 1e-9) == SignClass::StrictlyNegative);
    CHECK(classify_sign(Eigen::VectorXd::Zero(g.n), g, 1e-9) == SignClass::Trivial);
    CHECK(classify_sign(s2, g, 1e-9) == SignClass::Mixed);
    CHECK(classify_sign(1e-12 * s, g, 1e-9) == SignClass::Trivial);
    CHECK_THROWS_AS(classify_sign(s, g, 0.0), std::invalid_argument);
}
