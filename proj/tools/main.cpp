#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bifkit/config.hpp"
#include "bifkit/runner.hpp"

namespace {

struct CliOverrides {
    std::optional<std::string> config_path;
    std::optional<double> d, a, lambda_min, lambda_max;
    std::optional<int> q, n, workers;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
};

void add_common_flags(CLI::App* cmd, CliOverrides& ov) {
    cmd->add_option("--config", ov.config_path, "JSON config file (flat keys)");
    cmd->add_option("--d", ov.d, "diffusion coefficient");
    cmd->add_option("--q", ov.q, "nonlinearity exponent (integer >= 4)");
    cmd->add_option("--a", ov.a, "convection direction (nonzero)");
    cmd->add_option("--n", ov.n, "interior grid points");
    cmd->add_option("--lambda-min", ov.lambda_min, "left end of the lambda window");
    cmd->add_option("--lambda-max", ov.lambda_max, "right end of the lambda window");
    cmd->add_option("--out", ov.out_dir, "output directory");
    cmd->add_option("--seed", ov.seed, "random seed for probes");
    cmd->add_option("--workers", ov.workers, "concurrent branch tracers");
}

bifkit::RunConfig build_config(const CliOverrides& ov) {
    bifkit::RunConfig cfg;
    if (ov.config_path) cfg = bifkit::load_config_file(*ov.config_path);
    if (ov.d) cfg.d = *ov.d;
    if (ov.q) cfg.q = *ov.q;
    if (ov.a) cfg.a = *ov.a;
    if (ov.n) cfg.n = *ov.n;
    if (ov.lambda_min) cfg.lambda_min = *ov.lambda_min;
    if (ov.lambda_max) cfg.lambda_max = *ov.lambda_max;
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.workers) cfg.workers = *ov.workers;
    bifkit::validate_config(cfg);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bifurcation diagrams of -d u'' = lambda a u' + u + lambda u^2 - u^q"};
    app.require_subcommand(1);

    CliOverrides ov;
    std::string branches_path;
    std::string diagram_json_path;

    auto* spectrum = app.add_subcommand("spectrum", "trivial-branch spectrum sweep over d");
    add_common_flags(spectrum, ov);
    auto* diagram = app.add_subcommand("diagram", "full continuation pipeline");
    add_common_flags(diagram, ov);
    auto* validate = app.add_subcommand("validate", "re-run validators on stored branches");
    add_common_flags(validate, ov);
    validate->add_option("--branches", branches_path, "branches.csv to validate")->required();
    validate->add_option("--diagram", diagram_json_path, "matching diagram.json (optional)");
    auto* multiplicity = app.add_subcommand("multiplicity", "resolvent-rate table and axiom suite");
    add_common_flags(multiplicity, ov);

    CLI11_PARSE(app, argc, argv);

    try {
        const bifkit::RunConfig cfg = build_config(ov);
        if (spectrum->parsed()) return bifkit::cmd_spectrum(cfg);
        if (diagram->parsed()) return bifkit::cmd_diagram(cfg);
        if (validate->parsed()) return bifkit::cmd_validate(cfg, branches_path, diagram_json_path);
        if (multiplicity->parsed()) return bifkit::cmd_multiplicity(cfg);
    } catch (const bifkit::config_error& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return bifkit::kExitConfig;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return bifkit::kExitConfig;
    } catch (const std::exception& ex) {
        std::cerr << "numerical failure: " << ex.what() << "\n";
        return bifkit::kExitNumerical;
    }
    return bifkit::kExitConfig;
}
