// Acceptance suite: runs every shipping criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code = failure count.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bifkit/config.hpp"
#include "bifkit/continuation.hpp"
#include "bifkit/diagram.hpp"
#include "bifkit/grid.hpp"
#include "bifkit/io.hpp"
#include "bifkit/pencil.hpp"
#include "bifkit/problem.hpp"
#include "bifkit/reduction.hpp"
#include "bifkit/runner.hpp"

using namespace bifkit;

namespace {

namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;

int g_failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

RunConfig base_config(double d, int q) {
    RunConfig cfg;
    cfg.d = d;
    cfg.q = q;
    cfg.n = 200;
    cfg.seed = 20240817;
    return cfg;
}

std::map<std::string, Diagram> g_diagrams;

const Diagram& diagram_for(double d, int q) {
    const std::string key = std::to_string(d) + "_" + std::to_string(q);
    auto it = g_diagrams.find(key);
    if (it == g_diagrams.end()) {
        it = g_diagrams.emplace(key, run_diagram_pipeline(base_config(d, q))).first;
    }
    return it->second;
}

const Branch* branch_by_label(const Diagram& dg, const std::string& label) {
    for (const auto& br : dg.branches) {
        if (br.label == label) return &br;
    }
    return nullptr;
}

struct GermFit {
    double exponent = 0.0;
    double coefficient = 0.0;
    int points = 0;
};

/// Log-log fit of |x| against |lambda| over one germ run of a loop trace:
/// from_head walks forward from the vertex seed, otherwise backward from
/// the closure end. Only points with |x| in (0, 0.05] enter the fit.
GermFit fit_germ(const Branch& br, bool from_head, double x_floor) {
    std::vector<double> lx, ly;
    const size_t n = br.points.size();
    for (size_t k = 0; k < n; ++k) {
        const BranchPoint& pt = br.points[from_head ? k : n - 1 - k];
        const double ax = std::abs(pt.x_proj);
        const double al = std::abs(pt.lam);
        if (ax > 0.05) break;
        if (ax < x_floor || al <= 0.0) continue;  // vertex flat zone
        lx.push_back(std::log(al));
        ly.push_back(std::log(ax));
    }
    GermFit fit;
    fit.points = static_cast<int>(lx.size());
    if (fit.points < 3) return fit;
    const double m = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    fit.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.coefficient = std::exp((sy - fit.exponent * sx) / m);
    return fit;
}

void criterion1() {
    double errs[4], hs[4];
    int k = 0;
    for (const int n : {100, 200, 400, 800}) {
        const Grid g = build_grid(n, {0.0, kPi});
        errs[k] = std::abs(principal_eigenpair(g).sigma1 - 1.0);
        hs[k] = g.h;
        ++k;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < 4; ++i) {
        sx += std::log(hs[i]);
        sy += std::log(errs[i]);
        sxx += std::log(hs[i]) * std::log(hs[i]);
        sxy += std::log(hs[i]) * std::log(errs[i]);
    }
    const double order = (4.0 * sxy - sx * sy) / (4.0 * sxx - sx * sx);
    const bool ok = errs[3] <= 1e-4 && std::abs(order - 2.0) <= 0.1;
    report(1, ok,
           fmt("eigenvalue convergence: |sigma1(n=800)-1| = %.3e (<= 1e-4), order = %.3f (2.0 +- 0.1)",
               errs[3], order));
}

void criterion2() {
    const Grid g = build_grid(200, {0.0, kPi});
    const ContinuationConfig cc;
    bool ok = true;
    std::ostringstream detail;
    double worst = 0.0;
    for (const double d : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const ProblemParams p = make_problem(d, 5, 1.0, g);
        const double l1 = 2.0 * std::sqrt(d * (1.0 - d));
        const auto bifs = detect_trivial_bifurcations(p, g, {-1.5, 1.5}, 5e-3, cc);
        if (bifs.size() != 2) {
            ok = false;
            detail << " d=" << d << ": " << bifs.size() << " detections;";
            continue;
        }
        worst = std::max({worst, std::abs(bifs[0].lambda0 + l1), std::abs(bifs[1].lambda0 - l1)});
    }
    ok = ok && worst <= 2e-3;
    int spurious = 0;
    for (const double d : {1.1, 1.5, 2.0}) {
        const ProblemParams p = make_problem(d, 5, 1.0, g);
        spurious += static_cast<int>(detect_trivial_bifurcations(p, g, {-2.0, 2.0}, 5e-3, cc).size());
    }
    ok = ok && spurious == 0;
    report(2, ok,
           fmt("spectrum formula: worst |detected - 2 sqrt(d(1-d))| = %.2e (<= 2e-3), "
               "spurious detections above critical d = %d%s",
               worst, spurious, detail.str().c_str()));
}

void criterion3() {
    const Grid g = build_grid(200, {0.0, kPi});
    const ProblemParams p025 = make_problem(0.25, 5, 1.0, g);
    const MatrixCurve c025 = linearization_curve(p025, g);
    const double l1 = *lambda1(p025.d, p025.abs_a(), p025.sigma1);

    bool ok = true;
    double s_plus = 0.0, s_minus = 0.0, s_zero = 0.0;
    try {
        s_plus = estimate_kappa_fit(c025, l1).slope;
        s_minus = estimate_kappa_fit(c025, -l1).slope;
        const ProblemParams p1 = make_problem(1.0, 5, 1.0, g);
        s_zero = estimate_kappa_fit(linearization_curve(p1, g), 0.0).slope;
    } catch (const std::exception&) {
        ok = false;
    }
    ok = ok && std::abs(s_plus - 1.0) <= 0.1 && std::abs(s_minus - 1.0) <= 0.1 &&
         std::abs(s_zero - 2.0) <= 0.1;

    // ord-det pencil suite must pass exactly
    auto diag_curve = [](std::vector<int> powers) {
        MatrixCurve c;
        c.dim = static_cast<Eigen::Index>(powers.size());
        c.eval = [powers](double lam) {
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(
                static_cast<Eigen::Index>(powers.size()), static_cast<Eigen::Index>(powers.size()));
            for (size_t i = 0; i < powers.size(); ++i) M(i, i) = ipow(lam, powers[i]);
            return M;
        };
        return c;
    };
    MatrixCurve jordan;
    jordan.dim = 2;
    jordan.eval = [](double lam) {
        Eigen::MatrixXd M(2, 2);
        M << lam, 1.0, 0.0, lam;
        return M;
    };
    MatrixCurve np_curve;
    np_curve.dim = 4;
    np_curve.eval = [](double lam) {
        Eigen::VectorXd v(4), w(4);
        v << 1.0, 0.5, -0.25, 0.75;
        w << 0.5, 1.0, 0.5, -0.5;
        const Eigen::MatrixXd Pi = v * w.transpose() / w.dot(v);
        return (lam * Pi + Eigen::MatrixXd::Identity(4, 4) - Pi).eval();
    };
    bool suite = true;
    suite = suite && chi_ord_det(diag_curve({1, 0}), 0.0).chi == std::optional<int>(1);
    suite = suite && chi_ord_det(jordan, 0.0).chi == std::optional<int>(2);
    suite = suite && chi_ord_det(np_curve, 0.0).chi == std::optional<int>(1);
    suite = suite && product_formula_check(diag_curve({1, 0}), diag_curve({1, 0}), 0.0);
    suite = suite && product_formula_check(jordan, diag_curve({0, 0}), 0.0);
    suite = suite && estimate_kappa(diag_curve({3, 0}), 0.0) == 3;
    ok = ok && suite;

    report(3, ok,
           fmt("multiplicity exponents: slopes %.3f / %.3f at +-lambda1(0.25) (1 +- 0.1), "
               "%.3f at 0 for d=1 (2 +- 0.1); axiom suite %s",
               s_plus, s_minus, s_zero, suite ? "pass" : "FAIL"));
}

void criterion4() {
    const Diagram& dg = diagram_for(0.25, 5);
    const double l1 = 0.8660254037844386;
    bool ok = true;
    double worst = 0.0;
    int found = 0;
    for (const auto& br : dg.branches) {
        if (br.origin.kind != BranchOriginKind::TrivialBifurcation) continue;
        if (std::abs(br.origin.lambda0 - l1) > 2e-3) continue;  // seeded at +lambda1
        if (br.termination.kind != TerminationKind::ReturnedToTrivial) {
            ok = false;
            continue;
        }
        worst = std::max(worst, std::abs(br.termination.lambda_end + l1));
        ++found;
    }
    ok = ok && found >= 2 && worst <= 2e-3;  // the positive and the negative branch
    const bool census = dg.report.census.outcome == CensusOutcome::Pass;
    ok = ok && census;
    std::string found_list;
    for (const auto& f : dg.report.census.found) found_list += f + " ";
    report(4, ok,
           fmt("link regime (d=0.25, q=5): worst |lambda_end + lambda1| = %.2e (<= 2e-3) over %d "
               "branches from +lambda1; census %s= { %s}",
               worst, found, census ? "pass " : "FAIL ", found_list.c_str()));
}

void criterion5() {
    const Diagram& dg = diagram_for(0.5, 4);
    const double l1 = 1.0;
    bool right_arm = false, left_arm = false, no_return = true;
    for (const auto& br : dg.branches) {
        SignClass sc = SignClass::Trivial;
        for (const auto& pt : br.points) {
            if (pt.sup_norm > 1e-4) {
                sc = pt.sign;
                break;
            }
        }
        if (sc != SignClass::StrictlyNegative) continue;
        if (br.termination.kind == TerminationKind::ReturnedToTrivial) no_return = false;
        if (br.termination.kind != TerminationKind::WindowExit) continue;
        if (br.termination.lambda_end > l1 + 2.0) right_arm = true;
        if (br.termination.lambda_end < -l1 - 2.0) left_arm = true;
    }

    const Grid g = build_grid(200, {0.0, kPi});
    const ProblemParams p = make_problem(0.5, 4, 1.0, g);
    ContinuationConfig cc;
    cc.rng_seed = base_config(0.5, 4).seed;
    const auto hits = deflated_probe(p, g, cc, 0.0, {}, 50, SolutionSign::Negative);

    const bool ok = right_arm && left_arm && no_return && hits.empty();
    report(5, ok,
           fmt("even-q arms (d=0.5, q=4): window exits beyond +-(lambda1+2) %s/%s, no trivial "
               "return %s, negative probe hits at lambda=0: %zu of 50 attempts",
               right_arm ? "yes" : "NO", left_arm ? "yes" : "NO", no_return ? "yes" : "NO",
               hits.size()));
}

void criterion6() {
    bool ok = true;
    std::ostringstream detail;

    const Grid g = build_grid(200, {0.0, kPi});
    for (const int q : {4, 5}) {
        const Diagram& dg = diagram_for(1.0, q);
        const Branch* slope_branch = branch_by_label(dg, "puiseux_slope_lp_xp");
        if (!slope_branch || slope_branch->termination.kind != TerminationKind::LoopClosed ||
            slope_branch->termination.closure_defect > 1e-3) {
            ok = false;
            detail << " q=" << q << ": positive loop not closed;";
            continue;
        }
        detail << " q=" << q << " defect=" << fmt("%.1e", slope_branch->termination.closure_defect);

        if (q == 5) {
            const Branch* neg = branch_by_label(dg, "puiseux_slope_lm_xm");
            if (!neg || neg->termination.kind != TerminationKind::LoopClosed) {
                ok = false;
                detail << " negative loop not closed;";
            }
        }

        // reduced coefficients against their oracles
        const ProblemParams p = make_problem(1.0, q, 1.0, g);
        const ReducedCoefficients rc = ls_coefficients(p, g);
        const double b2_oracle = std::pow(2.0 / kPi, 1.5) * (4.0 / 3.0);
        double bq_oracle = std::pow(2.0 / kPi, 0.5 * (q + 1));
        {  // int_0^pi sin^{q+1}
            double im2 = kPi, im1 = 2.0, v = 0.0;
            for (int k = 2; k <= q + 1; ++k) {
                v = (k - 1.0) / k * im2;
                im2 = im1;
                im1 = v;
            }
            bq_oracle *= v;
        }
        if (std::abs(rc.c0 + 0.25) > 1e-4 || std::abs(rc.b2 - b2_oracle) > 1e-3 ||
            std::abs(rc.bq - bq_oracle) > 1e-3) {
            ok = false;
            detail << " coefficients off oracle;";
        }

        // germ fits near the vertex: head run = slope germ, tail run = root
        // germ. Tail floor: below it the corrector tolerance cannot pin
        // lambda at a given amplitude (delta_lambda = tol/(b2 x) vs
        // lambda = (x/C)^{q-2}), so such points carry no germ information.
        const double tol = base_config(1.0, q).cont.newton_tol;
        const double root_c = std::pow(rc.b2 / rc.bq, 1.0 / (q - 2));
        const double tail_floor =
            3.0 * std::pow(tol * ipow(root_c, q - 2) / rc.b2, 1.0 / (q - 1));
        const GermFit head = fit_germ(*slope_branch, true, 0.0);
        const GermFit tail = fit_germ(*slope_branch, false, tail_floor);
        const double slope_coef = -rc.c0 / rc.b2;
        const double root_coef = std::pow(rc.b2 / rc.bq, 1.0 / (q - 2));
        const double root_exp = 1.0 / (q - 2);
        if (head.points < 3 || std::abs(head.exponent - 1.0) > 0.1 ||
            std::abs(head.coefficient - slope_coef) > 0.05 * slope_coef) {
            ok = false;
            detail << fmt(" q=%d slope fit e=%.3f beta=%.4f (want 1, %.4f);", q, head.exponent,
                          head.coefficient, slope_coef);
        } else {
            detail << fmt(" slope(e=%.3f,b=%.3f)", head.exponent, head.coefficient);
        }
        if (tail.points < 3 || std::abs(tail.exponent - root_exp) > 0.1 * root_exp ||
            std::abs(tail.coefficient - root_coef) > 0.05 * root_coef) {
            ok = false;
            detail << fmt(" q=%d root fit e=%.3f beta=%.4f (want %.3f, %.4f);", q, tail.exponent,
                          tail.coefficient, root_exp, root_coef);
        } else {
            detail << fmt(" root(e=%.3f,b=%.3f)", tail.exponent, tail.coefficient);
        }
    }
    report(6, ok, "loop regime (d=1, q=4/5):" + detail.str());
}

void criterion7() {
    const Diagram& dg = diagram_for(1.02, 5);
    const Component* pos = nullptr;
    const Component* neg = nullptr;
    for (const auto& comp : dg.components) {
        if (comp.cls.tag != ClassTag::Isola) continue;
        (comp.cls.sign == SolutionSign::Positive ? pos : neg) = &comp;
    }
    bool ok = pos && neg;
    double min_sup = 1e300;
    if (ok) {
        for (const auto* comp : {pos, neg}) {
            for (int id : comp->branch_ids) {
                for (const auto& pt : dg.branches[id].points)
                    min_sup = std::min(min_sup, pt.sup_norm);
            }
        }
        ok = ok && min_sup > 1e-4;
        ok = ok && pos->cls.lambda_a > 0.0 && neg->cls.lambda_b < 0.0;
    }
    report(7, ok,
           ok ? fmt("isola regime (d=1.02, q=5): P_lambda+ = [%.4f, %.4f] (alpha > 0), "
                    "P_lambda- = [%.4f, %.4f] (beta < 0), min sup-norm = %.2e (> 1e-4)",
                    pos->cls.lambda_a, pos->cls.lambda_b, neg->cls.lambda_a, neg->cls.lambda_b,
                    min_sup)
              : std::string("isola regime (d=1.02, q=5): isolas not found or touching zero"));
}

void criterion8() {
    bool ok = true;
    std::ostringstream detail;
    int bound_viols = 0, window_viols = 0, lam_sign_viols = 0;
    const struct {
        double d;
        int q;
    } runs[] = {{0.25, 5}, {0.5, 4}, {1.0, 4}, {1.0, 5}, {1.02, 5}};
    for (const auto& r : runs) {
        const Diagram& dg = diagram_for(r.d, r.q);
        bound_viols += dg.report.bounds.violations;
        window_viols += dg.report.windows.violations;
        if (r.d >= 1.0) lam_sign_viols += dg.report.nonexistence.violations;
    }
    ok = bound_viols == 0 && window_viols == 0 && lam_sign_viols == 0;
    report(8, ok,
           fmt("a priori bounds over criteria 4-7 points: %d bound violations, %d window "
               "violations, %d lambda-sign violations at d >= 1 (all must be 0)",
               bound_viols, window_viols, lam_sign_viols));
}

void criterion9() {
    const fs::path tmp = fs::temp_directory_path() / "bifkit_acceptance_determinism";
    fs::remove_all(tmp);
    bool ok = true;
    std::ostringstream detail;

    auto run_twice = [&](const std::string& name, const std::function<int(const RunConfig&)>& cmd,
                         RunConfig cfg, const std::vector<std::string>& files) {
        cfg.out_dir = (tmp / name).string();
        if (cmd(cfg) != kExitOk) {
            ok = false;
            detail << " " << name << ": first run failed;";
            return;
        }
        std::map<std::string, std::string> first;
        for (const auto& f : files) first[f] = read_file((tmp / name / f).string());
        if (cmd(cfg) != kExitOk) {
            ok = false;
            detail << " " << name << ": second run failed;";
            return;
        }
        for (const auto& f : files) {
            if (read_file((tmp / name / f).string()) != first[f]) {
                ok = false;
                detail << " " << name << "/" << f << ": bytes differ;";
            }
        }
        detail << " " << name << " ok;";
    };

    run_twice("diagram", cmd_diagram, base_config(0.25, 5), {"branches.csv", "diagram.json"});
    run_twice("spectrum", cmd_spectrum, base_config(0.25, 5), {"spectrum.csv"});
    run_twice("multiplicity", cmd_multiplicity, base_config(0.25, 5), {"multiplicity.csv"});
    fs::remove_all(tmp);
    report(9, ok, "determinism (re-run, byte-compare CSV/JSON):" + detail.str());
}

}  // namespace

int main() {
    std::printf("acceptance suite:7 modules, desk scale Omega=(0,pi), n=200 (n=800 where noted)\n");
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
    } else {
        std::printf("%d criteria FAILED\n", g_failures);
    }
    return g_failures;
}
