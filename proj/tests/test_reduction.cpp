#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bifkit/grid.hpp"
#include "bifkit/problem.hpp"
#include "bifkit/reduction.hpp"
#include "oracles.hpp"

using namespace bifkit;
using oracles::kPi;

namespace {

const Grid& grid200() {
    static const Grid g = build_grid(200, {0.0, kPi});
    return g;
}

ReducedCoefficients coeffs(int q) {
    const ProblemParams p = make_problem(1.0, q, 1.0, grid200());
    return ls_coefficients(p, grid200());
}

// analytic values of the phi0 moments on (0, pi): phi0 = sqrt(2/pi) sin
double b2_analytic() { return std::pow(2.0 / kPi, 1.5) * oracles::kIntSin3; }
double bq_analytic(int q) { return std::pow(2.0 / kPi, 0.5 * (q + 1)) * oracles::int_sin_pow(q + 1); }

}  // namespace

TEST_CASE("reduced coefficients against the quadrature oracle") {
    const Grid& g = grid200();
    const ReducedCoefficients rc = coeffs(4);
    CHECK(rc.c0 == doctest::Approx(-1.0 / (4.0 * rc.d)).epsilon(1e-15));
    CHECK(std::abs(rc.c0 + 0.25) < 1e-4);  // discrete sigma1 skew only

    CHECK(std::abs(rc.b2 - b2_analytic()) < 5.0 * g.h * g.h);
    CHECK(std::abs(rc.b2 - 0.6772) < 2e-4);
    CHECK(std::abs(rc.bq - bq_analytic(4)) < 5.0 * g.h * g.h);
    CHECK(std::abs(rc.bq - 0.3449) < 2e-4);

    CHECK(rc.b2 > 0.0);
    CHECK(rc.bq > 0.0);
    CHECK(rc.c0 < 0.0);
}

TEST_CASE("reduction refuses to run away from the degenerate point") {
    const ProblemParams p = make_problem(0.5, 4, 1.0, grid200());
    CHECK_THROWS_AS(ls_coefficients(p, grid200()), std::invalid_argument);
}

TEST_CASE("newton polygon of the reduced equation") {
    for (int q = 4; q <= 12; ++q) {
        const NewtonPolygon np = newton_polygon({{0, 2}, {1, 1}, {q - 1, 0}});
        REQUIRE(np.vertices.size() == 3);
        CHECK(np.vertices[0] == LatticePoint{0, 2});
        CHECK(np.vertices[1] == LatticePoint{1, 1});
        CHECK(np.vertices[2] == LatticePoint{q - 1, 0});
    }
    // at q=3 the three points are collinear and the middle vertex drops out
    CHECK(newton_polygon({{0, 2}, {1, 1}, {2, 0}}).vertices.size() == 2);
}

TEST_CASE("newton polygon drops points above the hull") {
    const NewtonPolygon np = newton_polygon({{0, 2}, {1, 1}, {2, 1}, {3, 0}});
    REQUIRE(np.vertices.size() == 3);
    CHECK(np.vertices[0] == LatticePoint{0, 2});
    CHECK(np.vertices[1] == LatticePoint{1, 1});
    CHECK(np.vertices[2] == LatticePoint{3, 0});
}

TEST_CASE("newton polygon of a single point") {
    const NewtonPolygon np = newton_polygon({{2, 3}});
    REQUIRE(np.vertices.size() == 1);
    CHECK(np.vertices[0] == LatticePoint{2, 3});
    CHECK_THROWS_AS(newton_polygon({}), std::invalid_argument);
}

TEST_CASE("newton polygon against the brute-force hull") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<long> coord(0, 8);
    std::uniform_int_distribution<int> count(3, 10);
    for (int rep = 0; rep < 40; ++rep) {
        std::vector<LatticePoint> pts;
        const int m = count(rng);
        for (int i = 0; i < m; ++i) pts.push_back({coord(rng), coord(rng)});
        const auto got = newton_polygon(pts).vertices;
        const auto expected = oracles::brute_lower_hull(pts);
        REQUIRE(got.size() == expected.size());
        for (size_t i = 0; i < got.size(); ++i) CHECK(got[i] == expected[i]);
    }
}

TEST_CASE("polygon vertices decrease strictly in j and are convex") {
    std::mt19937_64 rng(37);
    std::uniform_int_distribution<long> coord(0, 12);
    for (int rep = 0; rep < 40; ++rep) {
        std::vector<LatticePoint> pts;
        for (int i = 0; i < 8; ++i) pts.push_back({coord(rng), coord(rng)});
        const auto v = newton_polygon(pts).vertices;
        for (size_t i = 1; i < v.size(); ++i) {
            CHECK(v[i].l > v[i - 1].l);
            CHECK(v[i].j < v[i - 1].j);
        }
        for (size_t i = 2; i < v.size(); ++i) {
            // slopes strictly increase along a convex lower hull
            const long cross = (v[i - 1].l - v[i - 2].l) * (v[i].j - v[i - 2].j) -
                               (v[i - 1].j - v[i - 2].j) * (v[i].l - v[i - 2].l);
            CHECK(cross > 0);
        }
    }
}

TEST_CASE("puiseux branch coefficients against the oracle moments") {
    const ReducedCoefficients rc4 = coeffs(4);
    const auto br4 = puiseux_branches(rc4);
    REQUIRE(br4.size() == 3);  // slope + two one-sided root entries for even q

    CHECK(br4[0].exponent == Rational{1, 1});
    CHECK(br4[0].coefficient == doctest::Approx(-rc4.c0 / rc4.b2).epsilon(1e-15));
    CHECK(std::abs(br4[0].coefficient - 0.3691) < 1e-3);
    CHECK(br4[0].lambda_side == Side::Both);

    CHECK(br4[1].exponent == Rational{1, 2});
    CHECK(br4[1].coefficient == doctest::Approx(std::sqrt(rc4.b2 / rc4.bq)).epsilon(1e-15));
    CHECK(std::abs(br4[1].coefficient - 1.401) < 2e-3);
    CHECK(br4[1].lambda_side == Side::Plus);
    CHECK(br4[2].lambda_side == Side::Plus);
    CHECK(br4[1].sign_of_x != br4[2].sign_of_x);

    const ReducedCoefficients rc5 = coeffs(5);
    const auto br5 = puiseux_branches(rc5);
    REQUIRE(br5.size() == 2);  // slope + one both-sided root entry for odd q
    CHECK(br5[1].exponent == Rational{1, 3});
    CHECK(br5[1].lambda_side == Side::Both);
}

TEST_CASE("four germ arcs through the origin for either parity") {
    for (const int q : {4, 5, 6, 7}) {
        const auto arcs = germ_arcs(coeffs(q));
        REQUIRE(arcs.size() == 4);
        int pos_lam = 0, pos_x = 0;
        for (const auto& a : arcs) {
            pos_lam += a.lambda_positive ? 1 : 0;
            pos_x += a.x_positive ? 1 : 0;
        }
        if (q % 2 == 0) {
            CHECK(pos_lam == 3);  // slope+, root+, root- on lambda>0; slope- on lambda<0
            CHECK(pos_x == 2);
        } else {
            CHECK(pos_lam == 2);  // two germs per side
            CHECK(pos_x == 2);
        }
    }
}

TEST_CASE("leading terms annihilate the dominant monomials exactly") {
    for (const int q : {4, 5, 6}) {
        const ReducedCoefficients rc = coeffs(q);
        // slope branch kills c0 lambda^2 + b2 x lambda
        const double slope = -rc.c0 / rc.b2;
        CHECK(std::abs(rc.c0 + rc.b2 * slope) <= 1e-15 * std::abs(rc.c0));
        // root branch kills b2 x lambda - bq x^{q-1}
        const double root = std::pow(rc.b2 / rc.bq, 1.0 / (q - 2));
        CHECK(ipow(root, q - 2) == doctest::Approx(rc.b2 / rc.bq).epsilon(1e-12));
    }
}

TEST_CASE("predictors") {
    const Grid& g = grid200();
    const ProblemParams p = make_problem(0.25, 5, 1.0, g);

    auto [l0, u0] = predictor_cr(p, 0.866, 0.0);
    CHECK(l0 == 0.866);
    CHECK(u0.lpNorm<Eigen::Infinity>() == 0.0);
    auto [l1, u1] = predictor_cr(p, 0.866, 0.02);
    CHECK((u1 - 0.02 * p.phi0).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK_THROWS_AS(predictor_cr(p, 0.866, 0.5), std::domain_error);

    const ProblemParams pc = make_problem(1.0, 4, 1.0, g);
    const ReducedCoefficients rc = ls_coefficients(pc, g);
    const auto arcs = germ_arcs(rc);

    // slope arc at lambda = 0.01: x = 0.003691 phi0 up to the h^2 skew
    const GermArc* slope = nullptr;
    const GermArc* root_pos = nullptr;
    for (const auto& a : arcs) {
        if (a.exponent.den == 1 && a.lambda_positive) slope = &a;
        if (a.exponent.den == 2 && a.lambda_positive && a.x_positive) root_pos = &a;
    }
    REQUIRE(slope);
    REQUIRE(root_pos);
    auto [ls, us] = predictor_puiseux(pc, *slope, 0.01);
    CHECK(ls == 0.01);
    const double x_pred = quad(g, us.cwiseProduct(pc.phi0));
    CHECK(std::abs(x_pred - 0.003691) < 1e-4);

    // root arc at lambda = 0.01: sup ~ 1.401 * 0.1 * max phi0
    auto [lr, ur] = predictor_puiseux(pc, *root_pos, 0.01);
    const double expected_sup = 1.401 * 0.1 * pc.phi0.lpNorm<Eigen::Infinity>();
    CHECK(ur.lpNorm<Eigen::Infinity>() == doctest::Approx(expected_sup).epsilon(2e-3));

    CHECK_THROWS_AS(predictor_puiseux(pc, *slope, 0.5), std::domain_error);
    CHECK_THROWS_AS(predictor_puiseux(pc, *root_pos, -0.01), std::domain_error);
}
