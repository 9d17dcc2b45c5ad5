#include "bifkit/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace bifkit {

namespace {

constexpr double kEndpointTol = 1e-3;
constexpr double kLinkBifTol = 2e-3;
constexpr size_t kMaxFailuresKept = 100;

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); }
    void unite(int i, int j) { parent[find(i)] = find(j); }
};

/// Dominant sign class of a branch (points below the trivial threshold are
/// ignored). Mixed wins over everything if present.
SignClass branch_sign(const Branch& br, double trivial_threshold) {
    int pos = 0, neg = 0, mixed = 0;
    for (const auto& pt : br.points) {
        if (pt.sup_norm <= trivial_threshold) continue;
        switch (pt.sign) {
            case SignClass::StrictlyPositive: ++pos; break;
            case SignClass::StrictlyNegative: ++neg; break;
            case SignClass::Mixed: ++mixed; break;
            default: break;
        }
    }
    if (mixed > 0) return SignClass::Mixed;
    if (pos > 0 && neg == 0) return SignClass::StrictlyPositive;
    if (neg > 0 && pos == 0) return SignClass::StrictlyNegative;
    if (pos > 0 && neg > 0) return SignClass::Mixed;
    return SignClass::Trivial;
}

/// One touch of the trivial branch: the bifurcation value plus the germ
/// the branch leaves/approaches it along (lambda side and x sign).
struct TrivialAnchor {
    double lambda0 = 0.0;
    int lam_side = 0;  // sign of (adjacent lambda - lambda0)
    int x_sign = 0;    // sign of the adjacent projection
};

int sgn(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

/// Trivial-branch anchors of a branch. Two branches connect through a
/// bifurcation point only when they meet it along the same germ; distinct
/// germs at one vertex belong to components that merely share a closure
/// point (the arms of the even-q diagrams). The germ side is evaluated at a
/// reference amplitude so that seeds and terminations see the same scale.
std::vector<TrivialAnchor> trivial_anchors(const Branch& br, double amp_ref) {
    std::vector<TrivialAnchor> out;
    if (br.points.empty()) return out;

    auto germ_at = [&](bool from_front, double lambda0) {
        const auto n = br.points.size();
        const BranchPoint* adj = from_front ? &br.points.front() : &br.points.back();
        for (size_t k = 0; k < n; ++k) {
            const BranchPoint& pt = br.points[from_front ? k : n - 1 - k];
            if (std::abs(pt.x_proj) >= amp_ref) {
                adj = &pt;
                break;
            }
        }
        return TrivialAnchor{lambda0, sgn(adj->lam - lambda0), sgn(adj->x_proj)};
    };

    if (br.origin.kind == BranchOriginKind::TrivialBifurcation)
        out.push_back(germ_at(true, br.origin.lambda0));
    if (br.termination.kind == TerminationKind::ReturnedToTrivial)
        out.push_back(germ_at(false, br.termination.lambda_end));
    if (br.termination.kind == TerminationKind::LoopClosed &&
        br.origin.kind == BranchOriginKind::TrivialBifurcation)
        out.push_back(germ_at(false, br.origin.lambda0));
    return out;
}

bool anchors_match(const TrivialAnchor& a, const TrivialAnchor& b) {
    return std::abs(a.lambda0 - b.lambda0) <= kEndpointTol && a.lam_side == b.lam_side &&
           a.x_sign == b.x_sign;
}

}  // namespace

void CheckCounters::record(int branch_id, int point_idx, double margin,
                           const std::string& what) {
    ++checked;
    if (!worst_set || margin < worst_margin) {
        worst_margin = margin;
        worst_set = true;
    }
    if (margin < 0.0) {
        ++violations;
        if (failures.size() < kMaxFailuresKept)
            failures.push_back({branch_id, point_idx, margin, what});
    }
}

bool ValidationReport::contradiction() const {
    if (bounds.violations || windows.violations || sign_consistency.violations ||
        nonexistence.violations)
        return true;
    for (const auto& pr : probes) {
        if (pr.forbidden && pr.found > 0) return true;
    }
    return false;
}

Diagram assemble(const ProblemParams& p, std::vector<Branch> branches,
                 std::vector<TrivialBifurcation> bifurcations,
                 const ContinuationConfig& cfg) {
    Diagram dg;
    dg.params = p;
    dg.branches = std::move(branches);
    dg.bifurcations = std::move(bifurcations);

    const int nb = static_cast<int>(dg.branches.size());
    UnionFind uf(nb);
    std::vector<SignClass> signs(nb);
    std::vector<std::vector<TrivialAnchor>> anchors(nb);
    for (int i = 0; i < nb; ++i) {
        signs[i] = branch_sign(dg.branches[i], cfg.trivial_threshold);
        anchors[i] = trivial_anchors(dg.branches[i], 0.5 * cfg.seed_amplitude);
    }
    for (int i = 0; i < nb; ++i) {
        for (int j = i + 1; j < nb; ++j) {
            if (signs[i] != signs[j]) continue;
            bool shared = false;
            for (const auto& ai : anchors[i]) {
                for (const auto& aj : anchors[j]) {
                    if (anchors_match(ai, aj)) {
                        shared = true;
                        break;
                    }
                }
                if (shared) break;
            }
            if (shared) uf.unite(i, j);
        }
    }

    std::map<int, Component> comps;
    for (int i = 0; i < nb; ++i) comps[uf.find(i)].branch_ids.push_back(i);
    for (auto& [root, comp] : comps) {
        std::sort(comp.branch_ids.begin(), comp.branch_ids.end());
        comp.cls = classify(p, dg, comp, cfg);
        dg.components.push_back(comp);
    }
    std::sort(dg.components.begin(), dg.components.end(),
              [](const Component& a, const Component& b) {
                  if (a.cls.sign != b.cls.sign) return a.cls.sign == SolutionSign::Positive;
                  if (a.cls.lambda_a != b.cls.lambda_a) return a.cls.lambda_a < b.cls.lambda_a;
                  return a.branch_ids < b.branch_ids;
              });
    return dg;
}

Classification classify(const ProblemParams& p, const Diagram& dg, const Component& comp,
                        const ContinuationConfig& cfg) {
    Classification cls;
    if (comp.branch_ids.empty()) {
        cls.reason = "empty component";
        return cls;
    }

    SignClass sc = SignClass::Trivial;
    for (int id : comp.branch_ids) {
        const SignClass s = branch_sign(dg.branches[id], cfg.trivial_threshold);
        if (s != SignClass::Trivial) sc = s;
    }
    if (sc == SignClass::Mixed) {
        cls.reason = "mixed sign along component";
        return cls;
    }
    cls.sign = (sc == SignClass::StrictlyNegative) ? SolutionSign::Negative
                                                   : SolutionSign::Positive;

    double lam_lo = std::numeric_limits<double>::infinity();
    double lam_hi = -std::numeric_limits<double>::infinity();
    double min_sup = std::numeric_limits<double>::infinity();
    for (int id : comp.branch_ids) {
        for (const auto& pt : dg.branches[id].points) {
            lam_lo = std::min(lam_lo, pt.lam);
            lam_hi = std::max(lam_hi, pt.lam);
            min_sup = std::min(min_sup, pt.sup_norm);
        }
    }

    const Branch* loop_branch = nullptr;
    const Branch* exit_branch = nullptr;
    for (int id : comp.branch_ids) {
        const Branch& br = dg.branches[id];
        if (br.termination.kind == TerminationKind::LoopClosed && !loop_branch)
            loop_branch = &br;
        if (br.termination.kind == TerminationKind::WindowExit && !exit_branch)
            exit_branch = &br;
    }

    if (loop_branch) {
        if (loop_branch->origin.kind == BranchOriginKind::TrivialBifurcation) {
            cls.tag = ClassTag::Loop;
            cls.lambda_a = loop_branch->origin.lambda0;
            // far end of the loop (negative loops extend to the left)
            cls.lambda_b = (std::abs(lam_hi - cls.lambda_a) >= std::abs(lam_lo - cls.lambda_a))
                               ? lam_hi
                               : lam_lo;
            return cls;
        }
        if (min_sup <= cfg.trivial_threshold) {
            cls.reason = "closed component touches the trivial line";
            return cls;
        }
        cls.tag = ClassTag::Isola;
        cls.lambda_a = lam_lo;
        cls.lambda_b = lam_hi;
        return cls;
    }

    if (exit_branch) {
        cls.tag = ClassTag::UnboundedArm;
        cls.lambda_a = lam_lo;
        cls.lambda_b = lam_hi;
        const double origin_lam = exit_branch->origin.lambda0;
        cls.direction = (exit_branch->termination.lambda_end >= origin_lam)
                            ? ArmDirection::Right
                            : ArmDirection::Left;
        return cls;
    }

    // link candidate: distinct trivial anchors at both ends
    std::vector<double> anchor_set;
    for (int id : comp.branch_ids) {
        for (const auto& ta : trivial_anchors(dg.branches[id], 0.5 * cfg.seed_amplitude)) {
            bool dup = false;
            for (double b : anchor_set) {
                if (std::abs(ta.lambda0 - b) <= kEndpointTol) {
                    dup = true;
                    break;
                }
            }
            if (!dup) anchor_set.push_back(ta.lambda0);
        }
    }
    if (anchor_set.size() >= 2) {
        std::sort(anchor_set.begin(), anchor_set.end());
        const double la = anchor_set.front(), lb = anchor_set.back();
        bool la_known = false, lb_known = false;
        for (const auto& bif : dg.bifurcations) {
            if (std::abs(bif.lambda0 - la) <= kLinkBifTol) la_known = true;
            if (std::abs(bif.lambda0 - lb) <= kLinkBifTol) lb_known = true;
        }
        if (la_known && lb_known) {
            cls.tag = ClassTag::Link;
            cls.lambda_a = la;
            cls.lambda_b = lb;
            return cls;
        }
        cls.reason = "link endpoints not in the detected bifurcation set";
        return cls;
    }

    cls.lambda_a = lam_lo;
    cls.lambda_b = lam_hi;
    cls.reason = "terminated by " + to_string(dg.branches[comp.branch_ids.front()].termination.kind);
    return cls;
}

std::string census_label(const Classification& c) {
    std::string tag;
    switch (c.tag) {
        case ClassTag::Link: tag = "Link"; break;
        case ClassTag::Loop: tag = "Loop"; break;
        case ClassTag::Isola: tag = "Isola"; break;
        case ClassTag::UnboundedArm: tag = "Arm"; break;
        case ClassTag::Unclassified: tag = "Unclassified"; break;
    }
    return tag + (c.sign == SolutionSign::Positive ? "+" : "-");
}

CensusResult census_check(const ProblemParams& p, const Diagram& dg, bool has_contradiction) {
    CensusResult res;
    const double crit = p.criticality();
    const bool even = p.q % 2 == 0;
    if (std::abs(crit) <= 1e-12) {
        res.expected = even ? std::vector<std::string>{"Loop+", "Arm-", "Arm-"}
                            : std::vector<std::string>{"Loop+", "Loop-"};
    } else if (crit < 0.0) {
        res.expected = even ? std::vector<std::string>{"Link+", "Arm-", "Arm-"}
                            : std::vector<std::string>{"Link+", "Link-"};
    } else {
        res.expected = even ? std::vector<std::string>{"Isola+"}
                            : std::vector<std::string>{"Isola+", "Isola-"};
        if (even) res.note = "negative census excluded for even q above the critical diffusion (open)";
    }

    for (const auto& comp : dg.components) res.found.push_back(census_label(comp.cls));

    std::vector<std::string> missing;
    std::vector<std::string> pool = res.found;
    for (const auto& e : res.expected) {
        auto it = std::find(pool.begin(), pool.end(), e);
        if (it == pool.end()) {
            missing.push_back(e);
        } else {
            pool.erase(it);
        }
    }

    if (has_contradiction) {
        res.outcome = CensusOutcome::Contradicted;
    } else if (missing.empty()) {
        res.outcome = CensusOutcome::Pass;
    } else {
        res.outcome = CensusOutcome::NotFound;
        std::string m = "not found:";
        for (const auto& s : missing) m += " " + s;
        res.note = res.note.empty() ? m : res.note + "; " + m;
    }
    return res;
}

ValidationReport validate_diagram(const ProblemParams& p, const Grid& g, Diagram& dg,
                                  const ContinuationConfig& cfg, bool run_probes,
                                  int probe_attempts) {
    ValidationReport rep;
    const double crit = p.criticality();
    const LambdaWindow wpos = lambda_window(p, SolutionSign::Positive);
    const LambdaWindow wneg = lambda_window(p, SolutionSign::Negative);

    for (size_t bi = 0; bi < dg.branches.size(); ++bi) {
        const Branch& br = dg.branches[bi];
        bool sign_ok = true;
        SignClass established = SignClass::Trivial;
        for (size_t pi = 0; pi < br.points.size(); ++pi) {
            const BranchPoint& pt = br.points[pi];
            const bool is_pos = pt.sign == SignClass::StrictlyPositive;
            const bool is_neg = pt.sign == SignClass::StrictlyNegative;
            if (!is_pos && !is_neg) {
                if (pt.sign == SignClass::Mixed) sign_ok = false;
                continue;
            }
            const SolutionSign ss = is_pos ? SolutionSign::Positive : SolutionSign::Negative;
            // the closed-form negative-solution bounds and windows come from
            // the odd-q analysis; even-q negatives solve a superlinear
            // problem with no closed-form sup bound
            const bool formula_applies = is_pos || p.q % 2 == 1;

            if (formula_applies) {
                const double bound = apriori_bound(pt.lam, p.q, ss) + 1e-8;
                rep.bounds.record(static_cast<int>(bi), static_cast<int>(pi),
                                  bound - pt.sup_norm, "a priori bound");

                const LambdaWindow& w = is_pos ? wpos : wneg;
                if (w.empty) {
                    rep.windows.record(static_cast<int>(bi), static_cast<int>(pi), -1.0,
                                       "solution in an empty lambda window");
                } else {
                    const double margin =
                        std::min(pt.lam - (w.lo - 1e-6), (w.hi + 1e-6) - pt.lam);
                    rep.windows.record(static_cast<int>(bi), static_cast<int>(pi), margin,
                                       "lambda window");
                }
            }

            if (established == SignClass::Trivial) established = pt.sign;
            if (pt.sign != established) sign_ok = false;

            // near a degenerate vertex the residual is flat along phi0 and a
            // corrector cannot separate such points from the trivial branch;
            // lambda-sign conclusions are void within that resolution
            const bool resolvable = std::abs(pt.lam) * pt.sup_norm * pt.sup_norm >
                                    100.0 * cfg.newton_tol;
            if (crit >= 0.0 && is_pos && resolvable) {
                rep.nonexistence.record(static_cast<int>(bi), static_cast<int>(pi), pt.lam,
                                        "positive solution needs lambda > 0 at d >= 1/sigma1");
            }
            if (crit >= 0.0 && is_neg && p.q % 2 == 1 && resolvable) {
                rep.nonexistence.record(static_cast<int>(bi), static_cast<int>(pi), -pt.lam,
                                        "negative solution needs lambda < 0 at d >= 1/sigma1");
            }
            // the lambda = 0 exclusion comes from the superlinear substituted
            // problem and only holds for even q (the odd-q negative link
            // genuinely crosses lambda = 0)
            if (crit <= 0.0 && is_neg && p.q % 2 == 0) {
                rep.nonexistence.record(static_cast<int>(bi), static_cast<int>(pi),
                                        std::abs(pt.lam) - 1e-8,
                                        "no negative solution at lambda = 0 for d <= 1/sigma1");
            }
        }
        rep.sign_consistency.record(static_cast<int>(bi), -1, sign_ok ? 1.0 : -1.0,
                                    "sign persistence along branch");
    }

    if (run_probes) {
        auto run_probe = [&](double lam, SolutionSign sign, bool forbidden) {
            std::vector<Eigen::VectorXd> known;
            for (const auto& br : dg.branches) {
                for (const auto& pt : br.points) {
                    if (std::abs(pt.lam - lam) <= 1e-9) known.push_back(pt.u);
                }
            }
            ProbeResult pr;
            pr.lam = lam;
            pr.sign = sign;
            pr.attempts = probe_attempts;
            pr.forbidden = forbidden;
            pr.found = static_cast<int>(
                deflated_probe(p, g, cfg, lam, known, probe_attempts, sign).size());
            rep.probes.push_back(pr);
        };
        // at the exactly-degenerate d the residual is q-th-order flat along
        // phi0 at lambda = 0, so a Newton probe cannot separate the trivial
        // basin there; the lambda = 0 probes need |crit| bounded away from 0
        if (crit <= -1e-6 && p.q % 2 == 0) run_probe(0.0, SolutionSign::Negative, true);
        if (crit >= 0.0) {
            if (crit > 1e-6) run_probe(0.0, SolutionSign::Positive, true);
            run_probe(-0.5, SolutionSign::Positive, true);
        }
    }

    rep.census = census_check(p, dg, rep.contradiction());
    dg.report = rep;
    return rep;
}

std::string to_string(ClassTag t) {
    switch (t) {
        case ClassTag::Link: return "Link";
        case ClassTag::Loop: return "Loop";
        case ClassTag::Isola: return "Isola";
        case ClassTag::UnboundedArm: return "UnboundedArm";
        case ClassTag::Unclassified: return "Unclassified";
    }
    return "?";
}

std::string to_string(SignClass s) {
    switch (s) {
        case SignClass::StrictlyPositive: return "positive";
        case SignClass::StrictlyNegative: return "negative";
        case SignClass::Trivial: return "trivial";
        case SignClass::Mixed: return "mixed";
    }
    return "?";
}

std::string to_string(SolutionSign s) {
    return s == SolutionSign::Positive ? "positive" : "negative";
}

std::string to_string(CensusOutcome o) {
    switch (o) {
        case CensusOutcome::Pass: return "pass";
        case CensusOutcome::NotFound: return "not_found";
        case CensusOutcome::Contradicted: return "contradicted";
    }
    return "?";
}

std::string to_string(TerminationKind k) {
    switch (k) {
        case TerminationKind::ReturnedToTrivial: return "returned_to_trivial";
        case TerminationKind::LoopClosed: return "loop_closed";
        case TerminationKind::WindowExit: return "window_exit";
        case TerminationKind::MaxSteps: return "max_steps";
        case TerminationKind::NewtonFailure: return "newton_failure";
    }
    return "?";
}

std::string to_string(BranchOriginKind k) {
    switch (k) {
        case BranchOriginKind::TrivialBifurcation: return "trivial_bifurcation";
        case BranchOriginKind::DHomotopySeed: return "d_homotopy_seed";
        case BranchOriginKind::UserSeed: return "user_seed";
    }
    return "?";
}

std::string to_string(Tangency t) {
    return t == Tangency::Simple ? "simple" : "quadratic";
}

}  // namespace bifkit
