#include "bifkit/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "bifkit/pencil.hpp"
#include "bifkit/reduction.hpp"

namespace bifkit {

namespace {

struct NewtonResult {
    Eigen::VectorXd u;
    int iters = 0;
};

NewtonResult newton_correct_impl(const ProblemParams& p, const Grid& g, double lam,
                                 const Eigen::VectorXd& guess, double tol, int max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("newton_correct: tol must be positive");
    Eigen::VectorXd u = guess;
    for (int it = 0; it <= max_iter; ++it) {
        const Tridiag J = jacobian_u(p, lam, u, g);
        const TridiagLU lu(J);
        if (lu.singular() || lu.condition_estimate(J) > 1e14)
            throw singular_jacobian_error("newton_correct: singular Jacobian");
        const Eigen::VectorXd F = residual(p, lam, u, g);
        if (F.lpNorm<Eigen::Infinity>() <= tol) return {u, it};
        u -= lu.solve(F);
        if (!u.allFinite()) throw convergence_error("newton_correct: iterate diverged");
    }
    throw convergence_error("newton_correct: max iterations exceeded");
}

/// Solves the bordered system [J, flam; c^T, e] [du; dlam] = [-F; -N] by two
/// tridiagonal solves; falls back to a dense solve when J is near singular.
struct BorderedStep {
    Eigen::VectorXd du;
    double dlam = 0.0;
};

BorderedStep solve_bordered(const Tridiag& J, const Eigen::VectorXd& flam,
                            const Eigen::VectorXd& c, double e,
                            const Eigen::VectorXd& F, double N) {
    const TridiagLU lu(J);
    if (!lu.singular()) {
        const Eigen::VectorXd y = lu.solve(F);
        const Eigen::VectorXd z = lu.solve(flam);
        const double denom = e - c.dot(z);
        if (std::abs(denom) > 1e-14 * (std::abs(e) + c.norm() * z.norm() + 1.0)) {
            BorderedStep st;
            st.dlam = (c.dot(y) - N) / denom;
            st.du = -y - st.dlam * z;
            return st;
        }
    }
    const Eigen::Index n = J.rows();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + 1, n + 1);
    M.topLeftCorner(n, n) = J.dense();
    M.col(n).head(n) = flam;
    M.row(n).head(n) = c.transpose();
    M(n, n) = e;
    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = -F;
    rhs[n] = -N;
    const Eigen::VectorXd sol = M.partialPivLu().solve(rhs);
    BorderedStep st;
    st.du = sol.head(n);
    st.dlam = sol[n];
    return st;
}

/// Unit tangent (dlam, du) of the solution curve at (lam, u): the scaled
/// null direction of [J, flam]. Keller bordering against orient_ref keeps it
/// well defined through folds.
std::pair<double, Eigen::VectorXd> tangent_at(const ProblemParams& p, const Grid& g,
                                              const ContinuationConfig& cfg, double lam,
                                              const Eigen::VectorXd& u,
                                              double ref_dlam, const Eigen::VectorXd& ref_du) {
    const Tridiag J = jacobian_u(p, lam, u, g);
    const Eigen::VectorXd flam = jacobian_lambda(p, lam, u, g);
    const TridiagLU lu(J);
    double tlam;
    Eigen::VectorXd tu;
    if (!lu.singular()) {
        tu = lu.solve(-flam);
        tlam = 1.0;
    } else {
        // exactly at a fold: border with the reference direction
        const Eigen::VectorXd c = ((1.0 - cfg.w_lambda) / g.n) * ref_du;
        const double e = cfg.w_lambda * ref_dlam;
        const BorderedStep st = solve_bordered(J, flam, c, e,
                                               Eigen::VectorXd::Zero(g.n), -1.0);
        tu = st.du;
        tlam = st.dlam;
    }
    const double nrm = scaled_norm(cfg, tlam, tu);
    tlam /= nrm;
    tu /= nrm;
    const double orient = cfg.w_lambda * tlam * ref_dlam +
                          (1.0 - cfg.w_lambda) / g.n * tu.dot(ref_du);
    if (orient < 0.0) {
        tlam = -tlam;
        tu = -tu;
    }
    return {tlam, tu};
}

double scaled_distance(const ContinuationConfig& cfg, const BranchPoint& a,
                       double lam_b, const Eigen::VectorXd& u_b) {
    return scaled_norm(cfg, a.lam - lam_b, a.u - u_b);
}

/// Newton correction of (lam, u) with the projection quad(u * phi0) held at
/// x_target and lambda free.
std::pair<double, Eigen::VectorXd> correct_at_amplitude(
    const ProblemParams& p, const Grid& g, const ContinuationConfig& cfg,
    double lam_guess, const Eigen::VectorXd& u_guess, double x_target) {
    double lam = lam_guess;
    Eigen::VectorXd u = u_guess;
    const Eigen::VectorXd c = g.quad_weights.cwiseProduct(p.phi0);
    for (int it = 0; it <= cfg.newton_max_iter; ++it) {
        const Eigen::VectorXd F = residual(p, lam, u, g);
        const double N = c.dot(u) - x_target;
        if (F.lpNorm<Eigen::Infinity>() <= cfg.newton_tol &&
            std::abs(N) <= cfg.newton_tol * (1.0 + std::abs(x_target)))
            return {lam, u};
        const Tridiag J = jacobian_u(p, lam, u, g);
        const Eigen::VectorXd flam = jacobian_lambda(p, lam, u, g);
        const BorderedStep st = solve_bordered(J, flam, c, 0.0, F, N);
        lam += st.dlam;
        u += st.du;
        if (!u.allFinite() || !std::isfinite(lam))
            throw convergence_error("correct_at_amplitude: iterate diverged");
    }
    throw convergence_error("correct_at_amplitude: max iterations exceeded");
}

}  // namespace

double scaled_norm(const ContinuationConfig& cfg, double dlam, const Eigen::VectorXd& du) {
    return std::sqrt(cfg.w_lambda * dlam * dlam +
                     (1.0 - cfg.w_lambda) * du.squaredNorm() / du.size());
}

Eigen::VectorXd newton_correct(const ProblemParams& p, const Grid& g, double lam,
                               const Eigen::VectorXd& guess, double tol, int max_iter) {
    return newton_correct_impl(p, g, lam, guess, tol, max_iter).u;
}

BranchPoint make_branch_point(const ProblemParams& p, const Grid& g,
                              const ContinuationConfig& cfg, double lam,
                              const Eigen::VectorXd& u, int newton_iters, double s,
                              const BranchPoint* prev) {
    BranchPoint bp;
    bp.lam = lam;
    bp.u = u;
    bp.x_proj = quad(g, u.cwiseProduct(p.phi0));
    bp.sup_norm = u.lpNorm<Eigen::Infinity>();
    bp.h2_seminorm = g.lap.apply(u).norm();
    bp.newton_iters = newton_iters;
    bp.s = s;
    bp.sign = (bp.sup_norm <= cfg.trivial_threshold)
                  ? SignClass::Trivial
                  : classify_sign(u, g, default_sign_tol(u));

    double ref_dlam;
    Eigen::VectorXd ref_du;
    if (prev) {
        ref_dlam = prev->tangent_lam;
        ref_du = prev->tangent_u;
    } else {
        // seed orientation: point away from the trivial line
        ref_dlam = 0.0;
        ref_du = u;
        if (scaled_norm(cfg, ref_dlam, ref_du) < 1e-300) {
            ref_dlam = 1.0;
            ref_du = Eigen::VectorXd::Zero(g.n);
        }
    }
    auto [tlam, tu] = tangent_at(p, g, cfg, lam, u, ref_dlam, ref_du);
    bp.tangent_lam = tlam;
    bp.tangent_u = std::move(tu);
    return bp;
}

BranchPoint arclength_step(const ProblemParams& p, const Grid& g,
                           const ContinuationConfig& cfg, const BranchPoint& current,
                           double ds) {
    if (!(ds >= cfg.ds_min * 0.5 && ds <= cfg.ds_max * (1.0 + 1e-12)))
        throw std::invalid_argument("arclength_step: ds outside [ds_min, ds_max]");

    double lam = current.lam + ds * current.tangent_lam;
    Eigen::VectorXd u = current.u + ds * current.tangent_u;

    const Eigen::VectorXd c = ((1.0 - cfg.w_lambda) / g.n) * current.tangent_u;
    const double e = cfg.w_lambda * current.tangent_lam;

    int used_iters = cfg.newton_max_iter + 1;
    for (int it = 0; it <= cfg.newton_max_iter; ++it) {
        const Eigen::VectorXd F = residual(p, lam, u, g);
        const double N = e * (lam - current.lam) + c.dot(u - current.u) - ds;
        if (F.lpNorm<Eigen::Infinity>() <= cfg.newton_tol &&
            std::abs(N) <= 10.0 * cfg.newton_tol) {
            used_iters = it;
            break;
        }
        const Tridiag J = jacobian_u(p, lam, u, g);
        const Eigen::VectorXd flam = jacobian_lambda(p, lam, u, g);
        const BorderedStep st = solve_bordered(J, flam, c, e, F, N);
        lam += st.dlam;
        u += st.du;
        if (!u.allFinite() || !std::isfinite(lam))
            throw convergence_error("arclength_step: iterate diverged");
    }
    if (used_iters > cfg.newton_max_iter)
        throw convergence_error("arclength_step: corrector did not converge");
    // a laboring corrector has usually wandered near another arc (tight
    // folds); force a shorter step instead of accepting its answer
    if (used_iters > 8)
        throw convergence_error("arclength_step: corrector labored; refine the step");

    // a corrector landing far from the predictor has left the branch
    // (a crash onto the trivial line, or a hop onto a nearby arc at a
    // tight fold); halving ds on retry separates the arcs
    const double drift = scaled_norm(cfg, lam - (current.lam + ds * current.tangent_lam),
                                     u - (current.u + ds * current.tangent_u));
    if (drift > ds)
        throw convergence_error("arclength_step: corrector left the predictor trust region");

    return make_branch_point(p, g, cfg, lam, u, used_iters, current.s + ds, &current);
}

std::vector<TrivialBifurcation> detect_trivial_bifurcations(
    const ProblemParams& p, const Grid& g, std::pair<double, double> lam_range,
    double scan_step, const ContinuationConfig& cfg) {
    if (!(scan_step > 0.0))
        throw std::invalid_argument("detect_trivial_bifurcations: scan_step must be positive");
    const auto [lo, hi] = lam_range;
    if (!(hi > lo)) return {};

    const auto mu = [&](double lam) { return principal_mu(p, lam); };
    const double tangency_tol = cfg.tangency_tol_factor * g.h * g.h * p.d;

    const int m = std::max(3, static_cast<int>(std::ceil((hi - lo) / scan_step)) + 1);
    std::vector<double> ls(m), mus(m);
    for (int i = 0; i < m; ++i) {
        ls[i] = lo + (hi - lo) * i / (m - 1);
        mus[i] = mu(ls[i]);
    }

    // near-tangencies at interior extrema of mu
    const double merge_radius =
        3.0 * std::sqrt(p.d * tangency_tol) / std::max(p.abs_a(), 1e-300);
    std::vector<TrivialBifurcation> quad_pts;
    for (int i = 1; i + 1 < m; ++i) {
        const bool is_max = mus[i] >= mus[i - 1] && mus[i] >= mus[i + 1];
        const bool is_min = mus[i] <= mus[i - 1] && mus[i] <= mus[i + 1];
        if (!is_max && !is_min) continue;
        const auto obj = [&](double lam) { return is_max ? -mu(lam) : mu(lam); };
        const auto ext = boost::math::tools::brent_find_minima(obj, ls[i - 1], ls[i + 1], 52);
        const double mu_v = mu(ext.first);
        if (std::abs(mu_v) > tangency_tol) continue;
        bool dup = false;
        for (const auto& q : quad_pts) {
            if (std::abs(q.lambda0 - ext.first) <= merge_radius) {
                dup = true;  // a plateau of samples refines to one vertex
                break;
            }
        }
        if (!dup) quad_pts.push_back({ext.first, Tangency::Quadratic});
    }

    // sign crossings
    std::vector<TrivialBifurcation> simple_pts;
    for (int i = 0; i + 1 < m; ++i) {
        if (mus[i] == 0.0) {
            simple_pts.push_back({ls[i], Tangency::Simple});
            continue;
        }
        if (mus[i] * mus[i + 1] < 0.0) {
            auto tol = [](double a, double b) { return b - a <= 1e-13 * (1.0 + std::abs(a)); };
            std::uintmax_t iters = 200;
            const auto r = boost::math::tools::toms748_solve(mu, ls[i], ls[i + 1], tol, iters);
            simple_pts.push_back({0.5 * (r.first + r.second), Tangency::Simple});
        }
    }

    // a crossing pair straddling a near-tangency is the same degenerate point
    std::vector<TrivialBifurcation> out = quad_pts;
    for (const auto& s : simple_pts) {
        bool merged = false;
        for (const auto& q : quad_pts) {
            if (std::abs(s.lambda0 - q.lambda0) <= merge_radius) {
                merged = true;
                break;
            }
        }
        if (!merged) out.push_back(s);
    }
    std::sort(out.begin(), out.end(),
              [](const TrivialBifurcation& a, const TrivialBifurcation& b) {
                  return a.lambda0 < b.lambda0;
              });
    return out;
}

std::vector<BranchSeed> branch_switch(const ProblemParams& p, const Grid& g,
                                      const TrivialBifurcation& bif,
                                      const ContinuationConfig& cfg) {
    std::vector<BranchSeed> seeds;
    const double amp = cfg.seed_amplitude;

    auto push_seed = [&](const std::string& label, double lam_guess,
                         const Eigen::VectorXd& u_guess, double x_target) {
        BranchSeed seed;
        seed.seed_id = static_cast<int>(seeds.size());
        seed.label = label;
        seed.origin = {BranchOriginKind::TrivialBifurcation, bif.lambda0};
        try {
            auto [lam, u] = correct_at_amplitude(p, g, cfg, lam_guess, u_guess, x_target);
            seed.point = make_branch_point(p, g, cfg, lam, u, 0, 0.0, nullptr);
            // orientation: away from the bifurcation point
            const double away = cfg.w_lambda * seed.point.tangent_lam * (lam - bif.lambda0) +
                                (1.0 - cfg.w_lambda) / g.n * seed.point.tangent_u.dot(u);
            if (away < 0.0) {
                seed.point.tangent_lam = -seed.point.tangent_lam;
                seed.point.tangent_u = -seed.point.tangent_u;
            }
            seed.corrected = true;
        } catch (const std::exception& ex) {
            seed.failure = ex.what();
        }
        seeds.push_back(std::move(seed));
    };

    if (bif.tangency == Tangency::Simple) {
        for (const double s : {amp, -amp}) {
            auto [lam0, u0] = predictor_cr(p, bif.lambda0, s);
            push_seed(s > 0 ? "cr_pos" : "cr_neg", lam0, u0, s);
        }
        return seeds;
    }

    // Quadratic tangency: Puiseux germs of the reduced equation.
    std::vector<GermArc> arcs;
    ReducedCoefficients rc;
    try {
        rc = ls_coefficients(p, g);
        arcs = germ_arcs(rc);
    } catch (const std::exception& ex) {
        BranchSeed seed;
        seed.seed_id = 0;
        seed.label = "puiseux";
        seed.origin = {BranchOriginKind::TrivialBifurcation, bif.lambda0};
        seed.failure = ex.what();
        seeds.push_back(std::move(seed));
        return seeds;
    }
    for (const auto& arc : arcs) {
        // root germs sit at lambda ~ amp^{q-2}: keep the seed outside the
        // corrector's flat zone, where b2*x*lambda ~ newton_tol and the
        // amplitude no longer pins lambda
        double amp_arc = amp;
        if (arc.exponent.den > 1) {
            const double floor = std::pow(
                100.0 * cfg.newton_tol * ipow(arc.coefficient, p.q - 2) / rc.b2,
                1.0 / (p.q - 1));
            amp_arc = std::min(0.25, std::max(amp, floor));
        }
        const double abs_lam = std::pow(amp_arc / arc.coefficient, 1.0 / arc.exponent.value());
        const double lam_seed = bif.lambda0 + (arc.lambda_positive ? abs_lam : -abs_lam);
        const double x_target = arc.x_positive ? amp_arc : -amp_arc;
        std::string label = std::string("puiseux_") +
                            (arc.exponent.den == 1 ? "slope" : "root") +
                            (arc.lambda_positive ? "_lp" : "_lm") +
                            (arc.x_positive ? "_xp" : "_xm");
        BranchSeed seed;
        seed.seed_id = static_cast<int>(seeds.size());
        seed.label = label;
        seed.origin = {BranchOriginKind::TrivialBifurcation, bif.lambda0};
        try {
            auto [lam_off, u0] = predictor_puiseux(p, arc, lam_seed - bif.lambda0);
            // fixed-lambda correction: germs of different exponents can share
            // an amplitude, so the projection constraint is ambiguous here
            const double lam = bif.lambda0 + lam_off;
            const Eigen::VectorXd u =
                newton_correct(p, g, lam, u0, cfg.newton_tol, cfg.newton_max_iter);
            const double x = quad(g, u.cwiseProduct(p.phi0));
            if (x * x_target <= 0.0 || std::abs(x) < 0.2 * amp_arc || std::abs(x) > 5.0 * amp_arc)
                throw convergence_error("seed correction left the germ");
            seed.point = make_branch_point(p, g, cfg, lam, u, 0, 0.0, nullptr);
            const double away = cfg.w_lambda * seed.point.tangent_lam * (lam - bif.lambda0) +
                                (1.0 - cfg.w_lambda) / g.n * seed.point.tangent_u.dot(u);
            if (away < 0.0) {
                seed.point.tangent_lam = -seed.point.tangent_lam;
                seed.point.tangent_u = -seed.point.tangent_u;
            }
            seed.corrected = true;
        } catch (const std::exception& ex) {
            seed.failure = ex.what();
        }
        seeds.push_back(std::move(seed));
    }
    return seeds;
}

Branch trace_branch(const ProblemParams& p, const Grid& g, const ContinuationConfig& cfg,
                    const BranchSeed& seed, const StopCriteria& stop) {
    Branch br;
    br.origin = seed.origin;
    br.seed_id = seed.seed_id;
    br.label = seed.label;
    if (!seed.corrected) {
        br.termination = {TerminationKind::NewtonFailure, 0.0, 0.0};
        return br;
    }

    const bool anchored_at_trivial = seed.origin.kind == BranchOriginKind::TrivialBifurcation;
    const double anchor_lam = anchored_at_trivial ? seed.origin.lambda0 : seed.point.lam;
    const Eigen::VectorXd anchor_u =
        anchored_at_trivial ? Eigen::VectorXd::Zero(g.n).eval() : seed.point.u;

    const double min_loop = cfg.min_loop_length_factor * cfg.ds_max;
    const double span_margin = cfg.window_margin * (stop.lambda_max - stop.lambda_min);

    br.points.push_back(seed.point);
    BranchPoint cur = seed.point;
    double ds = cfg.ds_init;

    // once inside the closure ball, track the closest approach to the anchor
    bool closing = false;
    double min_dist = 0.0;
    double min_lam = 0.0;
    int closing_steps = 0;

    br.termination = {TerminationKind::MaxSteps, cur.lam, 0.0};
    for (int step = 0; step < stop.max_steps; ++step) {
        // keep steps below the distance to the anchor once closure is possible
        if (cur.s > min_loop) {
            const double dist = scaled_distance(cfg, cur, anchor_lam, anchor_u);
            if (dist < 10.0 * ds) ds = std::max(cfg.ds_min, std::min(ds, 0.5 * dist));
        }
        // resolve the germ scale when the branch approaches the trivial line
        const double u_scale = scaled_norm(cfg, 0.0, cur.u);
        if (u_scale < 20.0 * ds) ds = std::max(cfg.ds_min, std::min(ds, 0.25 * u_scale));

        BranchPoint next;
        bool stepped = false;
        while (true) {
            try {
                next = arclength_step(p, g, cfg, cur, ds);
                stepped = true;
                break;
            } catch (const convergence_error&) {
                ds *= 0.5;
                if (ds < cfg.ds_min) break;
            } catch (const singular_jacobian_error&) {
                ds *= 0.5;
                if (ds < cfg.ds_min) break;
            }
        }
        if (!stepped) {
            br.termination = {TerminationKind::NewtonFailure, cur.lam, 0.0};
            break;
        }

        cur = next;
        br.points.push_back(cur);
        if (cur.newton_iters <= 4) ds = std::min(ds * 1.3, cfg.ds_max);
        ds = std::max(ds, cfg.ds_min);

        const double dist = scaled_distance(cfg, cur, anchor_lam, anchor_u);
        if (closing) {
            ++closing_steps;
            if (dist < min_dist) {
                min_dist = dist;
                min_lam = cur.lam;
            }
            if (dist > 2.0 * min_dist + 1e-12 || cur.sup_norm < cfg.trivial_threshold ||
                closing_steps > 400) {
                br.termination = {TerminationKind::LoopClosed, min_lam, min_dist};
                break;
            }
            continue;
        }
        if (cur.s > min_loop && dist < cfg.closure_tol) {
            closing = true;
            min_dist = dist;
            min_lam = cur.lam;
            br.termination = {TerminationKind::LoopClosed, min_lam, min_dist};
            continue;
        }
        if (cur.sup_norm < cfg.trivial_threshold) {
            br.termination = {TerminationKind::ReturnedToTrivial, cur.lam, dist};
            break;
        }
        // a sign flip of the projection means the branch crossed u = 0
        // between the last two points (the trivial window can be narrower
        // than ds_min); interpolate the crossing value
        const BranchPoint& prev = br.points[br.points.size() - 2];
        if (prev.x_proj * cur.x_proj < 0.0) {
            const double t = prev.x_proj / (prev.x_proj - cur.x_proj);
            const double lam_end = prev.lam + t * (cur.lam - prev.lam);
            br.points.pop_back();  // the overshoot lies past the trivial line
            cur = br.points.back();
            br.termination = {TerminationKind::ReturnedToTrivial, lam_end, dist};
            break;
        }
        if (cur.lam < stop.lambda_min - span_margin || cur.lam > stop.lambda_max + span_margin) {
            br.termination = {TerminationKind::WindowExit, cur.lam, 0.0};
            break;
        }
        br.termination = {TerminationKind::MaxSteps, cur.lam, 0.0};
    }
    br.arclength = cur.s;
    return br;
}

ContinueInDResult continue_in_d(const ProblemParams& p, const Grid& g,
                                const ContinuationConfig& cfg, const BranchPoint& point,
                                double d_target, int steps) {
    if (steps < 1) throw std::invalid_argument("continue_in_d: steps must be >= 1");
    {
        const Tridiag J = jacobian_u(p, point.lam, point.u, g);
        const TridiagLU lu(J);
        if (lu.singular() || lu.condition_estimate(J) > 1e12)
            throw std::invalid_argument("continue_in_d: starting Jacobian is (near) singular");
    }
    ContinueInDResult res;
    res.d_achieved = p.d;
    res.point = point;
    res.reached = (d_target == p.d);
    if (res.reached) return res;

    Eigen::VectorXd u = point.u;
    for (int k = 1; k <= steps; ++k) {
        const double dk = p.d + (d_target - p.d) * k / steps;
        const ProblemParams pk = p.with_d(dk);
        try {
            NewtonResult nr = newton_correct_impl(pk, g, point.lam, u, cfg.newton_tol,
                                                  cfg.newton_max_iter);
            // a collapse onto the trivial branch means the solution folded
            // away in d before d_target
            if (nr.u.lpNorm<Eigen::Infinity>() < cfg.trivial_threshold) {
                res.reached = false;
                return res;
            }
            u = nr.u;
            res.d_achieved = dk;
            res.point = make_branch_point(pk, g, cfg, point.lam, u, nr.iters, 0.0, nullptr);
        } catch (const std::exception&) {
            res.reached = false;
            return res;  // partial result at the last achieved d
        }
    }
    res.reached = true;
    return res;
}

std::vector<Eigen::VectorXd> deflated_probe(const ProblemParams& p, const Grid& g,
                                            const ContinuationConfig& cfg, double lam,
                                            const std::vector<Eigen::VectorXd>& known,
                                            int attempts, SolutionSign sign) {
    std::mt19937_64 rng(cfg.rng_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // even-q negative solutions obey no closed-form sup bound (superlinear
    // substituted problem); sweep an exploratory amplitude range there
    const double formula = apriori_bound(lam, p.q, sign);
    const bool formula_binds = sign == SolutionSign::Positive || p.q % 2 == 1;
    const double bound = formula_binds ? formula : 3.0 * formula;
    const double phi_sup = p.phi0.lpNorm<Eigen::Infinity>();
    const double len = g.b - g.a;

    std::vector<Eigen::VectorXd> deflate_set;
    deflate_set.push_back(Eigen::VectorXd::Zero(g.n));  // always repel from u = 0
    for (const auto& k : known) deflate_set.push_back(k);

    std::vector<Eigen::VectorXd> found;

    for (int attempt = 0; attempt < attempts; ++attempt) {
        const double amp = bound * (0.15 + 0.75 * unif(rng));
        const double c2 = 0.6 * (unif(rng) - 0.5);
        const double c3 = 0.4 * (unif(rng) - 0.5);
        Eigen::VectorXd u(g.n);
        for (int i = 0; i < g.n; ++i) {
            const double t = (g.nodes[i] - g.a) / len;
            const double shape = p.phi0[i] / phi_sup + c2 * std::sin(2.0 * std::numbers::pi * t) +
                                 c3 * std::sin(3.0 * std::numbers::pi * t);
            u[i] = (sign == SolutionSign::Positive ? amp : -amp) * shape;
        }

        bool ok = true;
        for (int it = 0; it < 60; ++it) {
            const Eigen::VectorXd F = residual(p, lam, u, g);
            if (F.lpNorm<Eigen::Infinity>() <= cfg.newton_tol) break;
            const TridiagLU lu(jacobian_u(p, lam, u, g));
            if (lu.singular()) {
                ok = false;
                break;
            }
            const Eigen::VectorXd y = lu.solve(F);
            // deflation only rescales the undeflated Newton step
            double wy = 0.0;
            for (const auto& k : deflate_set) {
                const Eigen::VectorXd diff = u - k;
                const double q2 = quad(g, diff.cwiseProduct(diff));
                if (q2 < 1e-300) {
                    wy = std::numeric_limits<double>::infinity();
                    break;
                }
                const Eigen::VectorXd grad_q2 = 2.0 * g.quad_weights.cwiseProduct(diff);
                wy += -grad_q2.dot(y) / (q2 * q2 * (1.0 + 1.0 / q2));
            }
            double scale = 1.0 + wy;
            if (!std::isfinite(scale) || std::abs(scale) < 1e-8) scale = 1.0;
            Eigen::VectorXd step = -y / scale;
            const double cap = 2.0 * bound;
            const double sn = step.lpNorm<Eigen::Infinity>();
            if (sn > cap) step *= cap / sn;
            u += step;
            if (!u.allFinite()) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        if (residual(p, lam, u, g).lpNorm<Eigen::Infinity>() > cfg.newton_tol) continue;

        const SignClass cls = (u.lpNorm<Eigen::Infinity>() <= cfg.trivial_threshold)
                                  ? SignClass::Trivial
                                  : classify_sign(u, g, default_sign_tol(u));
        const bool wanted = (sign == SolutionSign::Positive && cls == SignClass::StrictlyPositive) ||
                            (sign == SolutionSign::Negative && cls == SignClass::StrictlyNegative);
        if (!wanted) continue;

        bool fresh = true;
        for (const auto& k : deflate_set) {
            if ((u - k).lpNorm<Eigen::Infinity>() <= 1e-6 * (1.0 + u.lpNorm<Eigen::Infinity>())) {
                fresh = false;
                break;
            }
        }
        if (fresh) {
            found.push_back(u);
            deflate_set.push_back(u);
        }
    }
    return found;
}

}  // namespace bifkit
