#include "qdfss/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <stdexcept>

namespace qdfss {

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

// RFC 4180 quoting for free-text cells.
std::string quoted(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '\n' || c == '\r') c = ' ';
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

nlohmann::ordered_json param_json(const QuadrupoleParam& p) {
    return {{"v_V", round9(p.v)},
            {"delta_v_rl_V", round9(p.delta_v_rl)},
            {"delta_v_tb_V", round9(p.delta_v_tb)}};
}

}  // namespace

double round9(double x) {
    if (!std::isfinite(x) || x == 0.0) return x;
    return std::strtod(num(x).c_str(), nullptr);
}

nlohmann::ordered_json to_json(const GateVoltages& g) {
    return {{"v_top_V", round9(g.top)},
            {"v_bottom_V", round9(g.bottom)},
            {"v_left_V", round9(g.left)},
            {"v_right_V", round9(g.right)}};
}

nlohmann::ordered_json to_json(const ExcitonReport& r) {
    nlohmann::ordered_json j = to_json(r.gates);
    j["fss_ueV"] = round9(r.fss_ueV);
    j["delta_ueV"] = round9(r.delta_ueV);
    j["beta"] = round9(r.beta);
    j["xi"] = round9(r.xi);
    j["l_x_eh_nm"] = round9(r.l_x_eh_nm);
    j["l_y_eh_nm"] = round9(r.l_y_eh_nm);
    j["eps_e"] = round9(r.eps_e);
    j["eps_h"] = round9(r.eps_h);
    j["hybrid_angle_deg"] = round9(r.hybrid_angle_deg);
    j["electron_energy_eV"] = round9(r.electron_energy_eV);
    j["hole_energy_eV"] = round9(r.hole_energy_eV);
    j["electron_residual_eV"] = round9(r.electron_residual_eV);
    j["hole_residual_eV"] = round9(r.hole_residual_eV);
    j["hartree_iterations"] = r.hartree_iterations;
    return j;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    for (const auto& name : result.parameter_names) out << name << ',';
    out << "fss_ueV,beta,xi,l_x_eh_nm,l_y_eh_nm,eps_e,eps_h,status\n";
    for (const auto& rec : result.records) {
        for (double p : rec.parameters) out << num(p) << ',';
        if (rec.ok()) {
            const auto& r = *rec.report;
            out << num(r.fss_ueV) << ',' << num(r.beta) << ',' << num(r.xi) << ','
                << num(r.l_x_eh_nm) << ',' << num(r.l_y_eh_nm) << ',' << num(r.eps_e) << ','
                << num(r.eps_h) << ',';
        } else {
            out << ",,,,,,,";
        }
        out << quoted(rec.status) << '\n';
    }
}

void write_fss_matrix_csv(std::ostream& out, const SweepResult& result) {
    if (result.rows * result.cols != result.records.size() || result.records.empty())
        throw std::invalid_argument("write_fss_matrix_csv: not a grid sweep");
    // Parameters are (v, delta_v_rl, delta_v_tb).
    out << "delta_v_tb_V\\delta_v_rl_V";
    for (std::size_t c = 0; c < result.cols; ++c) out << ',' << num(result.records[c].parameters[1]);
    out << '\n';
    for (std::size_t r = 0; r < result.rows; ++r) {
        out << num(result.records[r * result.cols].parameters[2]);
        for (std::size_t c = 0; c < result.cols; ++c) {
            const auto& rec = result.records[r * result.cols + c];
            out << ',';
            if (rec.ok()) out << num(rec.report->fss_ueV);
        }
        out << '\n';
    }
}

nlohmann::ordered_json sweep_summary(const SweepResult& result, const std::string& mode) {
    nlohmann::ordered_json j;
    j["mode"] = mode;
    j["parameter_names"] = result.parameter_names;
    j["points"] = result.records.size();
    std::size_t failed = 0;
    for (const auto& rec : result.records) failed += rec.ok() ? 0 : 1;
    j["failed_points"] = failed;

    auto crossings = nlohmann::ordered_json::array();
    for (const auto& zc : result.crossings) {
        nlohmann::ordered_json c{{"lo", round9(zc.lo)}, {"hi", round9(zc.hi)}};
        if (zc.refined) {
            c["refined"] = round9(*zc.refined);
            c["refined_fss_ueV"] = round9(zc.refined_fss_ueV);
            c["refined_beta"] = round9(zc.refined_beta);
        }
        c["is_zero"] = zc.is_zero;
        crossings.push_back(c);
    }
    j["zero_crossings"] = crossings;

    if (result.min_fss_index) {
        const auto& rec = result.records[*result.min_fss_index];
        nlohmann::ordered_json m;
        m["index"] = *result.min_fss_index;
        for (std::size_t k = 0; k < rec.parameters.size(); ++k)
            m[result.parameter_names[k]] = round9(rec.parameters[k]);
        m["report"] = to_json(*rec.report);
        j["minimum"] = m;
    } else {
        j["minimum"] = nullptr;
    }
    if (result.rows > 0) {
        j["rows"] = result.rows;
        j["cols"] = result.cols;
    }
    return j;
}

nlohmann::ordered_json to_json(const OptimizeResult& r) {
    nlohmann::ordered_json j;
    j["converged"] = r.converged;
    j["reason"] = r.reason;
    j["evaluations"] = r.trace.size();
    j["best"] = param_json(r.best);
    j["report"] = to_json(r.report);
    return j;
}

void write_trace_csv(std::ostream& out, const OptimizeResult& r) {
    out << "evaluation,v_V,delta_v_rl_V,delta_v_tb_V,fss_ueV,beta,status\n";
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
        const auto& t = r.trace[k];
        out << k << ',' << num(t.param.v) << ',' << num(t.param.delta_v_rl) << ','
            << num(t.param.delta_v_tb) << ',';
        if (t.status == "ok") out << num(t.fss_ueV) << ',' << num(t.beta);
        else out << ',';
        out << ',' << quoted(t.status) << '\n';
    }
}

}  // namespace qdfss
