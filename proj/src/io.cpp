#include "bifkit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace bifkit {

namespace {

using nlohmann::ordered_json;

ordered_json counters_json(const CheckCounters& c) {
    ordered_json j;
    j["checked"] = c.checked;
    j["violations"] = c.violations;
    if (c.worst_set) j["worst_margin"] = c.worst_margin; else j["worst_margin"] = nullptr;
    ordered_json fails = ordered_json::array();
    for (const auto& f : c.failures) {
        ordered_json jf;
        jf["branch_id"] = f.branch_id;
        jf["point_idx"] = f.point_idx;
        jf["margin"] = f.margin;
        jf["what"] = f.what;
        fails.push_back(jf);
    }
    j["failures"] = fails;
    return j;
}

ordered_json report_json(const ValidationReport& rep) {
    ordered_json v;
    v["bounds"] = counters_json(rep.bounds);
    v["windows"] = counters_json(rep.windows);
    v["sign_consistency"] = counters_json(rep.sign_consistency);
    v["nonexistence"] = counters_json(rep.nonexistence);
    ordered_json probes = ordered_json::array();
    for (const auto& pr : rep.probes) {
        ordered_json jp;
        jp["lambda"] = pr.lam;
        jp["sign"] = to_string(pr.sign);
        jp["attempts"] = pr.attempts;
        jp["found"] = pr.found;
        jp["forbidden"] = pr.forbidden;
        jp["kind"] = "evidence";  // a clean probe never proves nonexistence
        probes.push_back(jp);
    }
    v["probes"] = probes;
    ordered_json census;
    census["expected"] = rep.census.expected;
    census["found"] = rep.census.found;
    census["outcome"] = to_string(rep.census.outcome);
    census["note"] = rep.census.note;
    v["census"] = census;
    v["contradiction"] = rep.contradiction();
    return v;
}

double point_signed_norm(const BranchPoint& pt) {
    if (pt.sign == SignClass::StrictlyNegative) return -pt.sup_norm;
    if (pt.sign == SignClass::StrictlyPositive) return pt.sup_norm;
    return pt.x_proj < 0.0 ? -pt.sup_norm : pt.sup_norm;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string format_float(double v) {
    // locale-independent by construction, unlike printf
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                   std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string branches_csv(const Diagram& dg) {
    std::string out = "branch_id,point_idx,s,lambda,sup_norm,signed_norm,x_proj,sign,newton_iters\n";
    for (size_t bi = 0; bi < dg.branches.size(); ++bi) {
        const Branch& br = dg.branches[bi];
        for (size_t pi = 0; pi < br.points.size(); ++pi) {
            const BranchPoint& pt = br.points[pi];
            out += std::to_string(bi);
            out += ',';
            out += std::to_string(pi);
            out += ',';
            out += format_float(pt.s);
            out += ',';
            out += format_float(pt.lam);
            out += ',';
            out += format_float(pt.sup_norm);
            out += ',';
            out += format_float(point_signed_norm(pt));
            out += ',';
            out += format_float(pt.x_proj);
            out += ',';
            out += to_string(pt.sign);
            out += ',';
            out += std::to_string(pt.newton_iters);
            out += '\n';
        }
    }
    return out;
}

std::vector<StoredPoint> parse_branches_csv(const std::string& text) {
    std::vector<StoredPoint> pts;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("branch_id,", 0) != 0)
                throw std::runtime_error("branches csv: unexpected header");
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 9) throw std::runtime_error("branches csv: bad row: " + line);
        StoredPoint p;
        p.branch_id = std::stoi(f[0]);
        p.point_idx = std::stoi(f[1]);
        p.s = std::stod(f[2]);
        p.lambda = std::stod(f[3]);
        p.sup_norm = std::stod(f[4]);
        p.signed_norm = std::stod(f[5]);
        p.x_proj = std::stod(f[6]);
        p.sign = f[7];
        p.newton_iters = std::stoi(f[8]);
        pts.push_back(std::move(p));
    }
    return pts;
}

std::string diagram_json(const Diagram& dg, const RunConfig& cfg) {
    ordered_json j;
    j["schema"] = "bifkit.diagram.v1";
    j["config"] = ordered_json::parse(config_to_json(cfg));

    ordered_json params;
    params["d_requested"] = dg.params.d_requested;
    params["d_effective"] = dg.params.d;
    params["q"] = dg.params.q;
    params["a"] = dg.params.a;
    params["interval_a"] = dg.params.domain.first;
    params["interval_b"] = dg.params.domain.second;
    params["sigma1"] = dg.params.sigma1;
    j["params"] = params;

    ordered_json bifs = ordered_json::array();
    for (const auto& b : dg.bifurcations) {
        ordered_json jb;
        jb["lambda0"] = b.lambda0;
        jb["tangency"] = to_string(b.tangency);
        bifs.push_back(jb);
    }
    j["bifurcations"] = bifs;

    ordered_json branches = ordered_json::array();
    for (size_t bi = 0; bi < dg.branches.size(); ++bi) {
        const Branch& br = dg.branches[bi];
        ordered_json jb;
        jb["id"] = bi;
        jb["seed_id"] = br.seed_id;
        jb["label"] = br.label;
        jb["origin"] = to_string(br.origin.kind);
        jb["origin_lambda0"] = br.origin.lambda0;
        jb["termination"] = to_string(br.termination.kind);
        jb["lambda_end"] = br.termination.lambda_end;
        jb["closure_defect"] = br.termination.closure_defect;
        jb["arclength"] = br.arclength;
        jb["n_points"] = br.points.size();
        double max_sup = 0.0, max_h2 = 0.0;
        for (const auto& pt : br.points) {
            max_sup = std::max(max_sup, pt.sup_norm);
            max_h2 = std::max(max_h2, pt.h2_seminorm);
        }
        jb["max_sup_norm"] = max_sup;
        jb["max_h2_seminorm"] = max_h2;
        branches.push_back(jb);
    }
    j["branches"] = branches;

    ordered_json comps = ordered_json::array();
    for (const auto& comp : dg.components) {
        ordered_json jc;
        jc["branches"] = comp.branch_ids;
        jc["tag"] = to_string(comp.cls.tag);
        jc["sign"] = to_string(comp.cls.sign);
        jc["lambda_a"] = comp.cls.lambda_a;
        jc["lambda_b"] = comp.cls.lambda_b;
        if (comp.cls.tag == ClassTag::UnboundedArm)
            jc["direction"] = comp.cls.direction == ArmDirection::Right ? "right" : "left";
        if (comp.cls.tag == ClassTag::Unclassified) jc["reason"] = comp.cls.reason;
        comps.push_back(jc);
    }
    j["components"] = comps;

    j["validation"] = report_json(dg.report);
    return j.dump(2) + "\n";
}

std::string reemit_diagram_json(const std::string& text) {
    return ordered_json::parse(text).dump(2) + "\n";
}

std::string diagram_svg(const Diagram& dg) {
    const int W = 840, H = 620, M = 50;
    double lam_lo = 0.0, lam_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
    bool first = true;
    for (const auto& br : dg.branches) {
        for (const auto& pt : br.points) {
            const double y = point_signed_norm(pt);
            if (first) {
                lam_lo = lam_hi = pt.lam;
                y_lo = y_hi = y;
                first = false;
            }
            lam_lo = std::min(lam_lo, pt.lam);
            lam_hi = std::max(lam_hi, pt.lam);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    }
    if (first) {
        lam_lo = -1.0;
        lam_hi = 1.0;
        y_lo = -1.0;
        y_hi = 1.0;
    }
    const double lam_pad = 0.05 * std::max(lam_hi - lam_lo, 1e-6);
    const double y_pad = 0.05 * std::max(y_hi - y_lo, 1e-6);
    lam_lo -= lam_pad;
    lam_hi += lam_pad;
    y_lo = std::min(y_lo - y_pad, -1e-6);
    y_hi = std::max(y_hi + y_pad, 1e-6);

    auto px = [&](double lam) { return M + (lam - lam_lo) / (lam_hi - lam_lo) * (W - 2 * M); };
    auto py = [&](double y) { return H - M - (y - y_lo) / (y_hi - y_lo) * (H - 2 * M); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    // axes: signed norm = 0 line, lambda = 0 line
    s << "<line x1=\"" << M << "\" y1=\"" << py(0.0) << "\" x2=\"" << W - M << "\" y2=\""
      << py(0.0) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    if (lam_lo < 0.0 && lam_hi > 0.0)
        s << "<line x1=\"" << px(0.0) << "\" y1=\"" << M << "\" x2=\"" << px(0.0) << "\" y2=\""
          << H - M << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    s << "<text x=\"" << W - M + 6 << "\" y=\"" << py(0.0) + 4 << "\" font-size=\"13\">lambda</text>\n";
    s << "<text x=\"" << M << "\" y=\"" << M - 8 << "\" font-size=\"13\">signed sup-norm</text>\n";

    for (const auto& br : dg.branches) {
        if (br.points.empty()) continue;
        const SignClass sc = br.points[br.points.size() / 2].sign;
        const char* color = sc == SignClass::StrictlyNegative ? "#7ed321" : "#4a90d9";
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& pt : br.points) {
            s << px(pt.lam) << "," << py(point_signed_norm(pt)) << " ";
        }
        s << "\"/>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::string spectrum_csv(const std::vector<SpectrumRow>& rows) {
    std::string out = "d,lambda1,detected,tangency\n";
    for (const auto& r : rows) {
        out += format_float(r.d);
        out += ',';
        if (r.has_lambda1) out += format_float(r.lambda1);
        out += ',';
        for (size_t i = 0; i < r.detected.size(); ++i) {
            if (i) out += ';';
            out += format_float(r.detected[i]);
        }
        out += ',';
        for (size_t i = 0; i < r.tangency.size(); ++i) {
            if (i) out += ';';
            out += r.tangency[i];
        }
        out += '\n';
    }
    return out;
}

std::string spectrum_svg(const std::vector<SpectrumRow>& rows, double abs_a, double sigma1) {
    const int W = 700, H = 560, M = 55;
    const double alpha = 1.0 / (abs_a * std::sqrt(sigma1));  // lambda semi-axis
    const double beta = 1.0 / (2.0 * sigma1);                // d semi-axis
    const double gamma = 1.0 / (2.0 * sigma1);               // center in d

    double d_hi = 1.2 / sigma1;
    for (const auto& r : rows) d_hi = std::max(d_hi, r.d * 1.05);
    const double lam_lo = -1.25 * alpha, lam_hi = 1.25 * alpha;

    auto px = [&](double lam) { return M + (lam - lam_lo) / (lam_hi - lam_lo) * (W - 2 * M); };
    auto py = [&](double d) { return H - M - d / d_hi * (H - 2 * M); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    s << "<line x1=\"" << M << "\" y1=\"" << py(0.0) << "\" x2=\"" << W - M << "\" y2=\""
      << py(0.0) << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << px(0.0) << "\" y1=\"" << M << "\" x2=\"" << px(0.0) << "\" y2=\""
      << H - M << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << W - M + 4 << "\" y=\"" << py(0.0) + 4 << "\" font-size=\"13\">lambda</text>\n";
    s << "<text x=\"" << px(0.0) + 6 << "\" y=\"" << M - 6 << "\" font-size=\"13\">d</text>\n";

    s << "<polyline fill=\"none\" stroke=\"#d0021b\" stroke-width=\"2\" points=\"";
    const int K = 256;
    for (int k = 0; k <= K; ++k) {
        const double t = 2.0 * 3.14159265358979323846 * k / K;
        s << px(alpha * std::cos(t)) << "," << py(gamma + beta * std::sin(t)) << " ";
    }
    s << "\"/>\n";
    s << "</svg>\n";
    return s.str();
}

std::string multiplicity_csv(const std::vector<MultiplicityRow>& rows) {
    std::string out = "check,lambda0,kappa,expected_chi,slope,fit_residual,status\n";
    for (const auto& r : rows) {
        out += r.check;
        out += ',';
        if (r.has_numbers) out += format_float(r.lambda0);
        out += ',';
        if (r.has_numbers) out += std::to_string(r.kappa);
        out += ',';
        if (r.has_numbers) out += std::to_string(r.expected_chi);
        out += ',';
        if (r.has_numbers) out += format_float(r.slope);
        out += ',';
        if (r.has_numbers) out += format_float(r.fit_residual);
        out += ',';
        out += r.status;
        out += '\n';
    }
    return out;
}

std::string validation_json(const ValidationReport& rep) {
    return report_json(rep).dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
    const std::filesystem::path fp(path);
    if (fp.has_parent_path()) std::filesystem::create_directories(fp.parent_path());
    std::ofstream out(fp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace bifkit
