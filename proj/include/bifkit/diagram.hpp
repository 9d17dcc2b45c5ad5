#pragma once

#include <string>
#include <vector>

#include "bifkit/continuation.hpp"
#include "bifkit/grid.hpp"
#include "bifkit/problem.hpp"

namespace bifkit {

enum class ClassTag { Link, Loop, Isola, UnboundedArm, Unclassified };

enum class ArmDirection { Left, Right };

struct Classification {
    ClassTag tag = ClassTag::Unclassified;
    SolutionSign sign = SolutionSign::Positive;
    // Link: [lambda_a, lambda_b] endpoints; Loop: lambda_a = vertex;
    // Isola: [lambda_a, lambda_b] = lambda-extent.
    double lambda_a = 0.0;
    double lambda_b = 0.0;
    ArmDirection direction = ArmDirection::Right;  // UnboundedArm only
    std::string reason;  // Unclassified only
};

struct Component {
    std::vector<int> branch_ids;
    Classification cls;
};

struct CheckFailure {
    int branch_id = -1;
    int point_idx = -1;
    double margin = 0.0;
    std::string what;
};

struct CheckCounters {
    int checked = 0;
    int violations = 0;
    double worst_margin = 0.0;  // min slack observed; negative = violation
    bool worst_set = false;
    std::vector<CheckFailure> failures;

    void record(int branch_id, int point_idx, double margin, const std::string& what);
};

enum class CensusOutcome { Pass, NotFound, Contradicted };

struct CensusResult {
    std::vector<std::string> expected;
    std::vector<std::string> found;
    CensusOutcome outcome = CensusOutcome::NotFound;
    std::string note;
};

struct ProbeResult {
    double lam = 0.0;
    SolutionSign sign = SolutionSign::Positive;
    int attempts = 0;
    int found = 0;
    bool forbidden = false;  // a hit here lands where no such solution can exist
};

struct ValidationReport {
    CheckCounters bounds;            // sup-norm a priori bounds
    CheckCounters windows;           // lambda-window membership
    CheckCounters sign_consistency;  // one sign class per branch
    CheckCounters nonexistence;      // lambda-sign exclusions
    std::vector<ProbeResult> probes;
    CensusResult census;

    bool contradiction() const;
};

struct Diagram {
    ProblemParams params;
    std::vector<Branch> branches;
    std::vector<TrivialBifurcation> bifurcations;
    std::vector<Component> components;
    ValidationReport report;
};

/// Groups branches into components by endpoint matching: same-sign branches
/// sharing a trivial bifurcation value within 1e-3 coalesce; homotopy-seeded
/// branches stand alone. Components are classified and sorted.
Diagram assemble(const ProblemParams& p, std::vector<Branch> branches,
                 std::vector<TrivialBifurcation> bifurcations,
                 const ContinuationConfig& cfg = {});

/// Taxonomy tag for one assembled component.
Classification classify(const ProblemParams& p, const Diagram& dg, const Component& comp,
                        const ContinuationConfig& cfg = {});

/// Expected-vs-found component census for the (d, q) regime. Three-valued:
/// a missing expected object is "not found", never a contradiction.
CensusResult census_check(const ProblemParams& p, const Diagram& dg, bool has_contradiction);

/// Runs every static validator (bounds, windows, sign consistency,
/// lambda-sign exclusions) over the diagram, optionally the randomized
/// nonexistence probes, then the census.
ValidationReport validate_diagram(const ProblemParams& p, const Grid& g, Diagram& dg,
                                  const ContinuationConfig& cfg, bool run_probes,
                                  int probe_attempts = 20);

std::string to_string(ClassTag t);
std::string to_string(SignClass s);
std::string to_string(SolutionSign s);
std::string to_string(CensusOutcome o);
std::string to_string(TerminationKind k);
std::string to_string(BranchOriginKind k);
std::string to_string(Tangency t);

/// Short "Tag+" / "Tag-" label used by the census multiset.
std::string census_label(const Classification& c);

}  // namespace bifkit
