#pragma once

#include <string>

#include "bifkit/config.hpp"
#include "bifkit/diagram.hpp"
#include "bifkit/grid.hpp"

namespace bifkit {

/// Exit codes shared by every command.
enum ExitCode : int {
    kExitOk = 0,
    kExitContradiction = 1,
    kExitConfig = 2,
    kExitNumerical = 3,
};

/// Effective lambda window: the configured one, or the regime default
/// (lambda1(d) + 3 on either side below the critical diffusion, the positive
/// window extent + 1 above it).
std::pair<double, double> effective_lambda_range(const RunConfig& cfg, const ProblemParams& p);

/// detect -> switch -> trace (-> d-homotopy above the critical diffusion)
/// -> assemble -> classify -> validate.
Diagram run_diagram_pipeline(const RunConfig& cfg, Grid* grid_out = nullptr);

int cmd_spectrum(const RunConfig& cfg);
int cmd_diagram(const RunConfig& cfg);
int cmd_validate(const RunConfig& cfg, const std::string& branches_path,
                 const std::string& diagram_json_path);
int cmd_multiplicity(const RunConfig& cfg);

}  // namespace bifkit
