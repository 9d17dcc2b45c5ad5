#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bifkit/grid.hpp"
#include "bifkit/problem.hpp"

namespace bifkit {

struct singular_jacobian_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContinuationConfig {
    double newton_tol = 1e-10;
    int newton_max_iter = 25;
    double ds_min = 1e-4;
    double ds_max = 5e-2;
    double ds_init = 1e-3;
    double w_lambda = 0.5;           // weight of the lambda axis in the metric
    double trivial_threshold = 1e-4; // sup-norm cutoff for "returned to u = 0"
    double closure_tol = 1e-3;       // scaled distance for loop closure
    double min_loop_length_factor = 10.0;  // * ds_max before closure may fire
    double lambda_min = -4.0;
    double lambda_max = 4.0;
    double window_margin = 1e-9;
    int max_steps = 20000;
    double seed_amplitude = 1e-2;    // |x_proj| at which seeds are corrected
    double tangency_tol_factor = 10.0;  // * h^2 * d
    double bif_scan_step = 5e-3;
    std::uint64_t rng_seed = 0;
};

/// One converged continuation state. tangent has unit norm in the scaled
/// product metric w_l*dlam^2 + (1-w_l)*||du||^2/n.
struct BranchPoint {
    double lam = 0.0;
    Eigen::VectorXd u;
    double x_proj = 0.0;    // quad(u * phi0)
    double sup_norm = 0.0;
    double h2_seminorm = 0.0;  // ||Lap u||_2, reporting proxy
    double tangent_lam = 0.0;
    Eigen::VectorXd tangent_u;
    SignClass sign = SignClass::Trivial;
    int newton_iters = 0;
    double s = 0.0;  // arclength from branch start
};

enum class BranchOriginKind { TrivialBifurcation, DHomotopySeed, UserSeed };

struct BranchOrigin {
    BranchOriginKind kind = BranchOriginKind::UserSeed;
    double lambda0 = 0.0;  // bifurcation value for TrivialBifurcation
};

enum class TerminationKind { ReturnedToTrivial, LoopClosed, WindowExit, MaxSteps, NewtonFailure };

struct BranchTermination {
    TerminationKind kind = TerminationKind::MaxSteps;
    double lambda_end = 0.0;
    double closure_defect = 0.0;  // scaled distance to the anchor at closure
};

struct Branch {
    std::vector<BranchPoint> points;
    BranchOrigin origin;
    BranchTermination termination;
    double arclength = 0.0;
    int seed_id = 0;
    std::string label;
};

enum class Tangency { Simple, Quadratic };

struct TrivialBifurcation {
    double lambda0 = 0.0;
    Tangency tangency = Tangency::Simple;
};

/// Scaled product metric of a (dlam, du) displacement.
double scaled_norm(const ContinuationConfig& cfg, double dlam, const Eigen::VectorXd& du);

/// Newton iteration at fixed lambda. The Jacobian is factorized before the
/// convergence check, so a guess sitting on a bifurcation point of the
/// trivial branch reports the singular Jacobian rather than "converged".
/// Throws singular_jacobian_error / convergence_error.
Eigen::VectorXd newton_correct(const ProblemParams& p, const Grid& g, double lam,
                               const Eigen::VectorXd& guess, double tol, int max_iter);

/// Builds a fully populated BranchPoint (projection, norms, sign, tangent)
/// from a converged state. prev_tangent orients the new tangent.
BranchPoint make_branch_point(const ProblemParams& p, const Grid& g,
                              const ContinuationConfig& cfg, double lam,
                              const Eigen::VectorXd& u, int newton_iters, double s,
                              const BranchPoint* prev = nullptr);

/// One pseudo-arclength step of size ds from current (Keller bordering with
/// tridiagonal elimination; dense bordered fallback near folds).
/// Throws convergence_error when the corrector fails.
BranchPoint arclength_step(const ProblemParams& p, const Grid& g,
                           const ContinuationConfig& cfg, const BranchPoint& current,
                           double ds);

/// Scans the principal eigenvalue mu(lambda) of the transformed self-adjoint
/// curve over lam_range: zero crossings are Simple; interior near-tangencies
/// with |mu| below 10 h^2 d are Quadratic (the index does not change there).
std::vector<TrivialBifurcation> detect_trivial_bifurcations(
    const ProblemParams& p, const Grid& g, std::pair<double, double> lam_range,
    double scan_step, const ContinuationConfig& cfg = {});

struct BranchSeed {
    BranchPoint point;
    BranchOrigin origin;
    int seed_id = 0;
    std::string label;
    bool corrected = false;
    std::string failure;  // non-empty when the seed correction failed
};

/// Branch seeds at a trivial-branch bifurcation: two Crandall-Rabinowitz
/// seeds (s > 0 positive, s < 0 negative) at a Simple point, up to four
/// Puiseux germ seeds at a Quadratic point. Each seed is Newton-corrected
/// at fixed small amplitude; per-seed failures are reported, not thrown.
std::vector<BranchSeed> branch_switch(const ProblemParams& p, const Grid& g,
                                      const TrivialBifurcation& bif,
                                      const ContinuationConfig& cfg);

struct StopCriteria {
    double lambda_min = -4.0;
    double lambda_max = 4.0;
    int max_steps = 20000;
};

/// Traces a branch from a corrected seed until it returns to the trivial
/// state, closes into a loop at its anchor, exits the lambda window, or
/// runs out of steps. Newton failure terminates the branch, never throws.
Branch trace_branch(const ProblemParams& p, const Grid& g, const ContinuationConfig& cfg,
                    const BranchSeed& seed, const StopCriteria& stop);

struct ContinueInDResult {
    double d_achieved = 0.0;
    bool reached = false;
    BranchPoint point;
};

/// Natural continuation in d at fixed lambda, re-corrected each micro-step.
/// A fold in d before d_target yields a partial result with the achieved d.
/// Requires a nonsingular Jacobian at the starting point.
ContinueInDResult continue_in_d(const ProblemParams& p, const Grid& g,
                                const ContinuationConfig& cfg, const BranchPoint& point,
                                double d_target, int steps);

/// Deflated Newton probes for solutions of the requested sign at fixed
/// lambda. Returns any new solutions found; an empty result is evidence
/// (not proof) of nonexistence. Deterministic for a fixed rng seed.
std::vector<Eigen::VectorXd> deflated_probe(const ProblemParams& p, const Grid& g,
                                            const ContinuationConfig& cfg, double lam,
                                            const std::vector<Eigen::VectorXd>& known,
                                            int attempts, SolutionSign sign);

}  // namespace bifkit
