#pragma once

#include <string>
#include <vector>

#include "bifkit/config.hpp"
#include "bifkit/diagram.hpp"

namespace bifkit {

/// Locale-independent float formatting, 17 significant digits.
std::string format_float(double v);

/// branches.csv row as stored on disk (no nodal values).
struct StoredPoint {
    int branch_id = 0;
    int point_idx = 0;
    double s = 0.0;
    double lambda = 0.0;
    double sup_norm = 0.0;
    double signed_norm = 0.0;
    double x_proj = 0.0;
    std::string sign;
    int newton_iters = 0;
};

std::string branches_csv(const Diagram& dg);
std::vector<StoredPoint> parse_branches_csv(const std::string& text);

/// Full diagram.json document (includes the config for reproducibility).
std::string diagram_json(const Diagram& dg, const RunConfig& cfg);

/// Round-trip image of diagram.json: parse + re-emit must be the identity.
std::string reemit_diagram_json(const std::string& text);

std::string diagram_svg(const Diagram& dg);

struct SpectrumRow {
    double d = 0.0;
    bool has_lambda1 = false;
    double lambda1 = 0.0;
    std::vector<double> detected;
    std::vector<std::string> tangency;
};

std::string spectrum_csv(const std::vector<SpectrumRow>& rows);
std::string spectrum_svg(const std::vector<SpectrumRow>& rows, double abs_a, double sigma1);

struct MultiplicityRow {
    std::string check;
    bool has_numbers = false;
    double lambda0 = 0.0;
    int kappa = 0;
    int expected_chi = 0;
    double slope = 0.0;
    double fit_residual = 0.0;
    std::string status;  // "pass" / "fail: <why>"
};

std::string multiplicity_csv(const std::vector<MultiplicityRow>& rows);

std::string validation_json(const ValidationReport& rep);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace bifkit
