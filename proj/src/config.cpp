#include "bifkit/config.hpp"

#include <fstream>

#include <json.hpp>

namespace bifkit {

namespace {

template <typename T>
void pick(const nlohmann::json& j, const char* key, T& target) {
    if (j.contains(key)) target = j.at(key).get<T>();
}

void pick_opt(const nlohmann::json& j, const char* key, std::optional<double>& target) {
    if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<double>();
}

}  // namespace

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw config_error(std::string("malformed config JSON: ") + ex.what());
    }

    RunConfig c;
    pick(j, "d", c.d);
    pick(j, "q", c.q);
    pick(j, "a", c.a);
    pick(j, "interval_a", c.interval_a);
    pick(j, "interval_b", c.interval_b);
    pick(j, "n", c.n);
    pick_opt(j, "lambda_min", c.lambda_min);
    pick_opt(j, "lambda_max", c.lambda_max);
    pick(j, "newton_tol", c.cont.newton_tol);
    pick(j, "newton_max_iter", c.cont.newton_max_iter);
    pick(j, "ds_min", c.cont.ds_min);
    pick(j, "ds_max", c.cont.ds_max);
    pick(j, "ds_init", c.cont.ds_init);
    pick(j, "w_lambda", c.cont.w_lambda);
    pick(j, "trivial_threshold", c.cont.trivial_threshold);
    pick(j, "closure_tol", c.cont.closure_tol);
    pick(j, "min_loop_length_factor", c.cont.min_loop_length_factor);
    pick(j, "window_margin", c.cont.window_margin);
    pick(j, "max_steps", c.cont.max_steps);
    pick(j, "seed_amplitude", c.cont.seed_amplitude);
    pick(j, "tangency_tol_factor", c.cont.tangency_tol_factor);
    pick(j, "bif_scan_step", c.cont.bif_scan_step);
    pick(j, "critical_snap_tol", c.critical_snap_tol);
    pick(j, "probes", c.probes);
    pick(j, "probe_attempts", c.probe_attempts);
    pick(j, "d_sweep_min", c.d_sweep_min);
    pick(j, "d_sweep_max", c.d_sweep_max);
    pick(j, "d_sweep_count", c.d_sweep_count);
    pick(j, "out_dir", c.out_dir);
    pick(j, "seed", c.seed);
    pick(j, "workers", c.workers);
    return c;
}

void validate_config(const RunConfig& c) {
    if (!(c.d > 0.0)) throw config_error("d must be positive");
    if (c.q == 3) throw config_error("q = 3 is not supported");
    if (c.q < 4) throw config_error("q must be >= 4");
    if (c.a == 0.0) throw config_error("a must be nonzero");
    if (c.n < 8) throw config_error("n must be >= 8");
    if (!(c.interval_b > c.interval_a)) throw config_error("empty interval");
    if (!(c.cont.newton_tol > 0.0)) throw config_error("newton_tol must be positive");
    if (c.cont.newton_max_iter < 1) throw config_error("newton_max_iter must be >= 1");
    if (!(c.cont.ds_min > 0.0) || !(c.cont.ds_max >= c.cont.ds_min))
        throw config_error("need 0 < ds_min <= ds_max");
    if (!(c.cont.ds_init >= c.cont.ds_min && c.cont.ds_init <= c.cont.ds_max))
        throw config_error("ds_init must lie in [ds_min, ds_max]");
    if (!(c.cont.w_lambda > 0.0 && c.cont.w_lambda < 1.0))
        throw config_error("w_lambda must lie in (0, 1)");
    if (!(c.cont.trivial_threshold > 0.0)) throw config_error("trivial_threshold must be positive");
    if (!(c.cont.closure_tol > 0.0)) throw config_error("closure_tol must be positive");
    if (!(c.cont.seed_amplitude > 0.0)) throw config_error("seed_amplitude must be positive");
    if (!(c.cont.bif_scan_step > 0.0)) throw config_error("bif_scan_step must be positive");
    if (c.lambda_min && c.lambda_max && !(*c.lambda_max > *c.lambda_min))
        throw config_error("lambda_max must exceed lambda_min");
    if (c.workers < 1) throw config_error("workers must be >= 1");
    if (c.probe_attempts < 0) throw config_error("probe_attempts must be >= 0");
    if (c.d_sweep_count < 2) throw config_error("d_sweep_count must be >= 2");
}

std::string config_to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["d"] = c.d;
    j["q"] = c.q;
    j["a"] = c.a;
    j["interval_a"] = c.interval_a;
    j["interval_b"] = c.interval_b;
    j["n"] = c.n;
    if (c.lambda_min) j["lambda_min"] = *c.lambda_min; else j["lambda_min"] = nullptr;
    if (c.lambda_max) j["lambda_max"] = *c.lambda_max; else j["lambda_max"] = nullptr;
    j["newton_tol"] = c.cont.newton_tol;
    j["newton_max_iter"] = c.cont.newton_max_iter;
    j["ds_min"] = c.cont.ds_min;
    j["ds_max"] = c.cont.ds_max;
    j["ds_init"] = c.cont.ds_init;
    j["w_lambda"] = c.cont.w_lambda;
    j["trivial_threshold"] = c.cont.trivial_threshold;
    j["closure_tol"] = c.cont.closure_tol;
    j["min_loop_length_factor"] = c.cont.min_loop_length_factor;
    j["window_margin"] = c.cont.window_margin;
    j["max_steps"] = c.cont.max_steps;
    j["seed_amplitude"] = c.cont.seed_amplitude;
    j["tangency_tol_factor"] = c.cont.tangency_tol_factor;
    j["bif_scan_step"] = c.cont.bif_scan_step;
    j["critical_snap_tol"] = c.critical_snap_tol;
    j["probes"] = c.probes;
    j["probe_attempts"] = c.probe_attempts;
    j["d_sweep_min"] = c.d_sweep_min;
    j["d_sweep_max"] = c.d_sweep_max;
    j["d_sweep_count"] = c.d_sweep_count;
    j["out_dir"] = c.out_dir;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    return j.dump(2) + "\n";
}

}  // namespace bifkit
