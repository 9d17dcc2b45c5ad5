#include "bifkit/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <thread>

#include <json.hpp>

#include "bifkit/io.hpp"
#include "bifkit/pencil.hpp"
#include "bifkit/reduction.hpp"

namespace bifkit {

namespace {

namespace fs = std::filesystem;

ContinuationConfig cont_config(const RunConfig& cfg) {
    ContinuationConfig c = cfg.cont;
    c.rng_seed = cfg.seed;
    return c;
}

std::vector<Branch> trace_all(const ProblemParams& p, const Grid& g,
                              const ContinuationConfig& cc, const StopCriteria& stop,
                              std::vector<BranchSeed>& seeds, int workers) {
    std::vector<Branch> out(seeds.size());
    const int k = std::max(1, std::min<int>(workers, static_cast<int>(seeds.size())));
    if (k == 1) {
        for (size_t i = 0; i < seeds.size(); ++i) out[i] = trace_branch(p, g, cc, seeds[i], stop);
        return out;
    }
    std::atomic<size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= seeds.size()) return;
            out[i] = trace_branch(p, g, cc, seeds[i], stop);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(k);
    for (int t = 0; t < k; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return out;  // slots keyed by seed id: merge order is deterministic
}

/// Picks a robust homotopy take-off point from a traced branch: for a loop
/// the largest sup-norm point (mid-loop, far from folds and the trivial
/// line); for an arm a mid-amplitude point well inside the window.
const BranchPoint* takeoff_point(const Branch& br) {
    const BranchPoint* best = nullptr;
    double max_sup = 0.0;
    for (const auto& pt : br.points) max_sup = std::max(max_sup, pt.sup_norm);
    if (br.termination.kind == TerminationKind::WindowExit) {
        const double target = 0.5 * max_sup;
        for (const auto& pt : br.points) {
            if (!best ||
                std::abs(pt.sup_norm - target) < std::abs(best->sup_norm - target))
                best = &pt;
        }
        return best;
    }
    for (const auto& pt : br.points) {
        if (!best || pt.sup_norm > best->sup_norm) best = &pt;
    }
    return best;
}

/// Seeds for d > 1/sigma1: trace the loops of the problem at the critical
/// diffusion and continue their interior points in d.
std::vector<BranchSeed> homotopy_seeds(const ProblemParams& p, const Grid& g,
                                       const ContinuationConfig& cc, const StopCriteria& stop) {
    std::vector<BranchSeed> seeds;
    const double d_crit = 1.0 / p.sigma1;
    const ProblemParams p0 = p.with_d(d_crit);

    // the take-off loops live at the organizing center; trace them in that
    // regime's own window
    StopCriteria stop0 = stop;
    stop0.lambda_min = -3.0;
    stop0.lambda_max = 3.0;

    const auto bifs0 = detect_trivial_bifurcations(p0, g, {stop0.lambda_min, stop0.lambda_max},
                                                   cc.bif_scan_step, cc);
    int next_id = 0;
    bool done_pos = false, done_neg = false;  // one take-off per sign class
    for (const auto& bif : bifs0) {
        auto germ_seeds = branch_switch(p0, g, bif, cc);
        for (auto& gs : germ_seeds) {
            if (!gs.corrected) continue;
            const bool positive = gs.point.x_proj > 0.0;
            if ((positive && done_pos) || (!positive && done_neg)) continue;
            Branch br = trace_branch(p0, g, cc, gs, stop0);
            const BranchPoint* off = takeoff_point(br);
            if (!off) continue;
            ContinueInDResult res;
            try {
                res = continue_in_d(p0, g, cc, *off, p.d,
                                    std::max(1, static_cast<int>(std::ceil(
                                                    std::abs(p.d - d_crit) / 2e-3))));
            } catch (const std::exception&) {
                continue;
            }
            if (!res.reached) continue;
            BranchSeed seed;
            seed.seed_id = next_id++;
            seed.label = positive ? "d_homotopy_pos" : "d_homotopy_neg";
            seed.origin = {BranchOriginKind::DHomotopySeed, res.point.lam};
            seed.point = res.point;
            seed.corrected = true;
            seeds.push_back(std::move(seed));
            (positive ? done_pos : done_neg) = true;
        }
    }
    return seeds;
}

int pencil_expected_chi(Tangency t) { return t == Tangency::Simple ? 1 : 2; }

}  // namespace

std::pair<double, double> effective_lambda_range(const RunConfig& cfg, const ProblemParams& p) {
    if (cfg.lambda_min && cfg.lambda_max) return {*cfg.lambda_min, *cfg.lambda_max};
    double extent;
    const auto l1 = lambda1(p.d, p.abs_a(), p.sigma1);
    if (l1) {
        extent = *l1 + 3.0;
    } else {
        const LambdaWindow w = lambda_window(p, SolutionSign::Positive);
        extent = (w.empty ? p.d : w.hi) + 1.0;
    }
    return {cfg.lambda_min.value_or(-extent), cfg.lambda_max.value_or(extent)};
}

Diagram run_diagram_pipeline(const RunConfig& cfg, Grid* grid_out) {
    const Grid g = build_grid(cfg.n, {cfg.interval_a, cfg.interval_b});
    const ProblemParams p = make_problem(cfg.d, cfg.q, cfg.a, g, cfg.critical_snap_tol);
    const ContinuationConfig cc = cont_config(cfg);

    const auto [lam_lo, lam_hi] = effective_lambda_range(cfg, p);
    StopCriteria stop;
    stop.lambda_min = lam_lo;
    stop.lambda_max = lam_hi;
    stop.max_steps = cc.max_steps;

    const auto bifs = detect_trivial_bifurcations(p, g, {lam_lo, lam_hi}, cc.bif_scan_step, cc);

    std::vector<BranchSeed> seeds;
    for (const auto& bif : bifs) {
        auto s = branch_switch(p, g, bif, cc);
        for (auto& seed : s) {
            seed.seed_id = static_cast<int>(seeds.size());
            seeds.push_back(std::move(seed));
        }
    }
    if (bifs.empty()) {
        seeds = homotopy_seeds(p, g, cc, stop);
        for (size_t i = 0; i < seeds.size(); ++i) seeds[i].seed_id = static_cast<int>(i);
    }

    std::vector<Branch> branches = trace_all(p, g, cc, stop, seeds, cfg.workers);

    Diagram dg = assemble(p, std::move(branches), bifs, cc);
    validate_diagram(p, g, dg, cc, cfg.probes, cfg.probe_attempts);
    if (grid_out) *grid_out = g;
    return dg;
}

int cmd_spectrum(const RunConfig& cfg) {
    const Grid g = build_grid(cfg.n, {cfg.interval_a, cfg.interval_b});
    // base problem fixes sigma1/phi0; d varies per row without snapping
    const ProblemParams base = make_problem(cfg.d, cfg.q, cfg.a, g, 0.0);
    const ContinuationConfig cc = cont_config(cfg);

    std::vector<double> dvals;
    for (int i = 0; i < cfg.d_sweep_count; ++i) {
        dvals.push_back(cfg.d_sweep_min +
                        (cfg.d_sweep_max - cfg.d_sweep_min) * i / (cfg.d_sweep_count - 1));
    }
    dvals.push_back(1.0 / base.sigma1);  // the critical row, lambda1 = 0 exactly
    std::sort(dvals.begin(), dvals.end());

    std::vector<SpectrumRow> rows;
    for (double d : dvals) {
        if (!(d > 0.0)) continue;
        const ProblemParams pd = base.with_d(d);
        SpectrumRow row;
        row.d = d;
        if (const auto l1 = lambda1(d, pd.abs_a(), pd.sigma1)) {
            row.has_lambda1 = true;
            row.lambda1 = *l1;
        }
        const double extent = (row.has_lambda1 ? row.lambda1 : 0.0) + 1.0;
        for (const auto& bif :
             detect_trivial_bifurcations(pd, g, {-extent, extent}, cc.bif_scan_step, cc)) {
            row.detected.push_back(bif.lambda0);
            row.tangency.push_back(to_string(bif.tangency));
        }
        rows.push_back(std::move(row));
    }

    const fs::path out(cfg.out_dir);
    write_file((out / "spectrum.csv").string(), spectrum_csv(rows));
    write_file((out / "spectrum.svg").string(), spectrum_svg(rows, base.abs_a(), base.sigma1));
    return kExitOk;
}

int cmd_diagram(const RunConfig& cfg) {
    Diagram dg;
    try {
        dg = run_diagram_pipeline(cfg);
    } catch (const config_error&) {
        throw;
    } catch (const std::exception& ex) {
        std::cerr << "diagram: numerical failure: " << ex.what() << "\n";
        return kExitNumerical;
    }
    const fs::path out(cfg.out_dir);
    write_file((out / "branches.csv").string(), branches_csv(dg));
    write_file((out / "diagram.json").string(), diagram_json(dg, cfg));
    write_file((out / "diagram.svg").string(), diagram_svg(dg));
    return dg.report.contradiction() ? kExitContradiction : kExitOk;
}

int cmd_validate(const RunConfig& cfg, const std::string& branches_path,
                 const std::string& diagram_json_path) {
    std::vector<StoredPoint> pts;
    nlohmann::json meta;
    try {
        pts = parse_branches_csv(read_file(branches_path));
        if (!diagram_json_path.empty())
            meta = nlohmann::json::parse(read_file(diagram_json_path));
    } catch (const std::exception& ex) {
        std::cerr << "validate: malformed input: " << ex.what() << "\n";
        return kExitConfig;
    }

    // problem identity: stored params when available, else the run config
    double d = cfg.d, a = cfg.a;
    int q = cfg.q, n = cfg.n;
    double ia = cfg.interval_a, ib = cfg.interval_b;
    if (meta.contains("params")) {
        const auto& pm = meta["params"];
        d = pm.value("d_effective", d);
        a = pm.value("a", a);
        q = pm.value("q", q);
        ia = pm.value("interval_a", ia);
        ib = pm.value("interval_b", ib);
    }
    if (meta.contains("config")) n = meta["config"].value("n", n);

    const Grid g = build_grid(n, {ia, ib});
    const ProblemParams p = make_problem(d, q, a, g, 0.0);

    ValidationReport rep;
    const double crit = p.criticality();
    const LambdaWindow wpos = lambda_window(p, SolutionSign::Positive);
    const LambdaWindow wneg = lambda_window(p, SolutionSign::Negative);

    std::map<int, SignClass> established;
    std::map<int, bool> sign_ok;
    for (const auto& pt : pts) {
        const bool is_pos = pt.sign == "positive";
        const bool is_neg = pt.sign == "negative";
        if (!sign_ok.count(pt.branch_id)) sign_ok[pt.branch_id] = true;
        if (pt.sign == "mixed") sign_ok[pt.branch_id] = false;
        if (!is_pos && !is_neg) continue;
        const SolutionSign ss = is_pos ? SolutionSign::Positive : SolutionSign::Negative;
        const bool formula_applies = is_pos || q % 2 == 1;

        if (formula_applies) {
            rep.bounds.record(pt.branch_id, pt.point_idx,
                              apriori_bound(pt.lambda, q, ss) + 1e-8 - pt.sup_norm,
                              "a priori bound");
            const LambdaWindow& w = is_pos ? wpos : wneg;
            if (w.empty) {
                rep.windows.record(pt.branch_id, pt.point_idx, -1.0,
                                   "solution in an empty lambda window");
            } else {
                rep.windows.record(pt.branch_id, pt.point_idx,
                                   std::min(pt.lambda - (w.lo - 1e-6), (w.hi + 1e-6) - pt.lambda),
                                   "lambda window");
            }
        }
        const SignClass sc = is_pos ? SignClass::StrictlyPositive : SignClass::StrictlyNegative;
        auto it = established.find(pt.branch_id);
        if (it == established.end()) {
            established[pt.branch_id] = sc;
        } else if (it->second != sc) {
            sign_ok[pt.branch_id] = false;
        }
        const bool resolvable =
            std::abs(pt.lambda) * pt.sup_norm * pt.sup_norm > 100.0 * cfg.cont.newton_tol;
        if (crit >= 0.0 && is_pos && resolvable)
            rep.nonexistence.record(pt.branch_id, pt.point_idx, pt.lambda,
                                    "positive solution needs lambda > 0 at d >= 1/sigma1");
        if (crit >= 0.0 && is_neg && q % 2 == 1 && resolvable)
            rep.nonexistence.record(pt.branch_id, pt.point_idx, -pt.lambda,
                                    "negative solution needs lambda < 0 at d >= 1/sigma1");
        if (crit <= 0.0 && is_neg && q % 2 == 0)
            rep.nonexistence.record(pt.branch_id, pt.point_idx, std::abs(pt.lambda) - 1e-8,
                                    "no negative solution at lambda = 0 for d <= 1/sigma1");
    }
    for (const auto& [bid, ok] : sign_ok) {
        rep.sign_consistency.record(bid, -1, ok ? 1.0 : -1.0, "sign persistence along branch");
    }
    rep.census.outcome = rep.contradiction() ? CensusOutcome::Contradicted : CensusOutcome::Pass;
    rep.census.note = "census recheck from stored data";
    if (meta.contains("validation") && meta["validation"].contains("census")) {
        const auto& cj = meta["validation"]["census"];
        rep.census.expected = cj.value("expected", std::vector<std::string>{});
        rep.census.found = cj.value("found", std::vector<std::string>{});
    }

    const fs::path out(cfg.out_dir);
    write_file((out / "validation.json").string(), validation_json(rep));
    return rep.contradiction() ? kExitContradiction : kExitOk;
}

int cmd_multiplicity(const RunConfig& cfg) {
    const Grid g = build_grid(cfg.n, {cfg.interval_a, cfg.interval_b});
    const ProblemParams p = make_problem(cfg.d, cfg.q, cfg.a, g, cfg.critical_snap_tol);
    const ContinuationConfig cc = cont_config(cfg);
    const auto [lam_lo, lam_hi] = effective_lambda_range(cfg, p);

    std::vector<MultiplicityRow> rows;

    const MatrixCurve pde = linearization_curve(p, g);
    for (const auto& bif :
         detect_trivial_bifurcations(p, g, {lam_lo, lam_hi}, cc.bif_scan_step, cc)) {
        MultiplicityRow row;
        row.check = "pde_pencil";
        row.has_numbers = true;
        row.lambda0 = bif.lambda0;
        row.expected_chi = pencil_expected_chi(bif.tangency);
        try {
            const KappaFit fit = estimate_kappa_fit(pde, bif.lambda0);
            row.kappa = fit.kappa;
            row.slope = fit.slope;
            row.fit_residual = fit.fit_residual;
            row.status = (fit.kappa == row.expected_chi) ? "pass" : "fail: kappa != chi";
        } catch (const std::exception& ex) {
            row.status = std::string("fail: ") + ex.what();
        }
        rows.push_back(std::move(row));
    }

    // axiom/test-pencil suite
    auto push_suite = [&rows](const std::string& name, bool ok) {
        MultiplicityRow row;
        row.check = name;
        row.status = ok ? "pass" : "fail";
        rows.push_back(std::move(row));
    };
    auto diag_curve = [](std::vector<int> powers) {
        MatrixCurve c;
        c.dim = static_cast<Eigen::Index>(powers.size());
        c.eval = [powers](double lam) {
            Eigen::MatrixXd M = Eigen::MatrixXd::Identity(
                static_cast<Eigen::Index>(powers.size()), static_cast<Eigen::Index>(powers.size()));
            for (size_t i = 0; i < powers.size(); ++i) M(i, i) = ipow(lam, powers[i]);
            return M;
        };
        return c;
    };

    try {
        const auto c_lin = diag_curve({1, 0});
        const auto c_jordan = [] {
            MatrixCurve c;
            c.dim = 2;
            c.eval = [](double lam) {
                Eigen::MatrixXd M(2, 2);
                M << lam, 1.0, 0.0, lam;
                return M;
            };
            return c;
        }();
        push_suite("ord_det_diag_lambda", chi_ord_det(c_lin, 0.0).chi == std::optional<int>(1));
        push_suite("ord_det_jordan", chi_ord_det(c_jordan, 0.0).chi == std::optional<int>(2));
        push_suite("kappa_diag_cubic", estimate_kappa(diag_curve({3, 0}), 0.0) == 3);

        // (NP): rank-one projection curve has multiplicity one
        MatrixCurve np_curve;
        np_curve.dim = 4;
        np_curve.eval = [](double lam) {
            Eigen::VectorXd v(4), w(4);
            v << 1.0, 0.5, -0.25, 0.75;
            w << 0.5, 1.0, 0.5, -0.5;
            const Eigen::MatrixXd Pi = v * w.transpose() / w.dot(v);
            return (lam * Pi + Eigen::MatrixXd::Identity(4, 4) - Pi).eval();
        };
        push_suite("axiom_np_rank_one_projection",
                   chi_ord_det(np_curve, 0.0).chi == std::optional<int>(1));

        // (PF): product formula on test pencils
        push_suite("axiom_pf_diag_x_diag", product_formula_check(c_lin, c_lin, 0.0));
        const auto c_id = diag_curve({0, 0});
        push_suite("axiom_pf_jordan_x_identity", product_formula_check(c_jordan, c_id, 0.0));
        MatrixCurve rand_inv;
        rand_inv.dim = 2;
        rand_inv.eval = [](double lam) {
            Eigen::MatrixXd M(2, 2);
            M << 2.0 + lam, 0.3 - 0.5 * lam, -0.4, 1.5 + 0.25 * lam;
            return M;
        };
        push_suite("axiom_pf_invertible_x_diag2", product_formula_check(rand_inv, diag_curve({2, 0}), 0.0));
    } catch (const std::exception& ex) {
        MultiplicityRow row;
        row.check = "pencil_suite";
        row.status = std::string("fail: ") + ex.what();
        rows.push_back(std::move(row));
    }

    const fs::path out(cfg.out_dir);
    write_file((out / "multiplicity.csv").string(), multiplicity_csv(rows));
    return kExitOk;
}

}  // namespace bifkit
