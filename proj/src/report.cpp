#include "dobkit/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "dobkit/errors.hpp"

namespace dobkit {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string curve_csv(const ComplexResponse& r) {
    std::string out = "w_rad_s,re,im,mag_db,phase_deg\n";
    for (std::size_t i = 0; i < r.size(); ++i) {
        const Complex v = r.values[i];
        const double mag_db = 20.0 * std::log10(std::abs(v));
        const double ph = std::arg(v) * 180.0 / std::numbers::pi;
        out += fmt(r.grid[i]);
        out += ',';
        out += fmt(v.real());
        out += ',';
        out += fmt(v.imag());
        out += ',';
        out += fmt(mag_db);
        out += ',';
        out += fmt(ph);
        out += '\n';
    }
    return out;
}

std::string trace_csv(const SimTrace& tr) {
    std::string out = "t";
    std::vector<std::string> names;
    for (const auto& [name, _] : tr.channels) names.push_back(name);
    for (const std::string& n : names) out += "," + n;
    out += '\n';
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        out += fmt(tr.t[k]);
        for (const std::string& n : names) {
            out += ',';
            const auto& ch = tr.channels.at(n);
            out += fmt(k < ch.size() ? ch[k] : 0.0);
        }
        out += '\n';
    }
    return out;
}

const char* theorem_name(TheoremKind k) {
    switch (k) {
        case TheoremKind::lemma1: return "first_order_min_phase";
        case TheoremKind::thm1: return "min_phase_hodob";
        case TheoremKind::thm2: return "time_delay";
        case TheoremKind::thm3: return "rhp_zero";
        case TheoremKind::thm4: return "rhp_pole";
    }
    return "unknown";
}

ordered_json report_json(const ConstraintReport& r) {
    ordered_json j;
    j["theorem"] = theorem_name(r.theorem);
    j["backend"] = r.backend == Backend::exact ? "exact" : "literal";
    ordered_json psis;
    for (const auto& [k, v] : r.psi_values) psis[k] = fmt(v);
    j["psi_values"] = psis;
    ordered_json checks;
    for (const auto& [k, v] : r.literal_checks) checks[k] = v;
    j["literal_checks"] = checks;
    j["literal_ok"] = r.literal_ok;
    j["forms_disagree"] = r.forms_disagree;
    if (r.sweep_interval) {
        j["sweep_bandwidth_interval"] = {fmt(r.sweep_interval->first),
                                         fmt(r.sweep_interval->second)};
    } else {
        j["sweep_bandwidth_interval"] = nullptr;
    }
    j["achieved_w_beta"] = fmt(r.achieved_w_beta);
    j["peak_S"] = fmt(r.peak_S);
    j["peak_T"] = fmt(r.peak_T);
    j["notes"] = r.notes;
    if (!r.grid.empty()) {
        ordered_json rows = ordered_json::array();
        for (const GridPointReport& gp : r.grid) {
            rows.push_back({{"g", fmt(gp.g)},
                            {"admissible", gp.admissible},
                            {"stable", gp.stable},
                            {"peak_S", fmt(gp.peak_S)},
                            {"peak_T", fmt(gp.peak_T)},
                            {"w_beta_achieved", fmt(gp.w_beta_achieved)}});
        }
        j["grid"] = rows;
    }
    return j;
}

}  // namespace

std::string content_digest(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunCommand parse_command(const std::string& name) {
    if (name == "analyze") return RunCommand::analyze;
    if (name == "constraints") return RunCommand::constraints;
    if (name == "sweep") return RunCommand::sweep;
    if (name == "simulate") return RunCommand::simulate;
    if (name == "all") return RunCommand::all;
    throw ValidationError("unknown command '" + name + "'");
}

std::string emit(const ReportBundle& bundle, const CaseConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("emit: cannot create output directory " + out_dir);

    bool want_csv = false, want_json = false;
    for (const std::string& f : cfg.out_formats) {
        if (f == "csv") want_csv = true;
        if (f == "json") want_json = true;
    }

    std::map<std::string, std::string> files;  // name -> content
    if (want_csv) {
        for (const auto& [name, curve] : bundle.curves) files[name + ".csv"] = curve_csv(curve);
        for (const auto& [name, tr] : bundle.traces) files[name + "_trace.csv"] = trace_csv(tr);
    }
    if (want_json) {
        ordered_json j;
        j["tool_version"] = kToolVersion;
        j["config_digest"] = bundle.config_digest;
        j["notes"] = bundle.notes;
        ordered_json cons;
        for (const auto& [name, rep] : bundle.constraints) cons[name] = report_json(rep);
        j["constraints"] = cons;
        ordered_json scal;
        for (const auto& [k, v] : bundle.scalars) scal[k] = fmt(v);
        j["scalars"] = scal;
        ordered_json mets;
        for (const auto& [name, m] : bundle.metrics) {
            mets[name] = {{"overshoot", fmt(m.overshoot)},
                          {"undershoot", fmt(m.undershoot)},
                          {"settling_time_2pct", fmt(m.settling_time_2pct)},
                          {"steady_state_error", fmt(m.steady_state_error)},
                          {"settled", m.settled}};
        }
        j["step_metrics"] = mets;
        files["report.json"] = j.dump(2) + "\n";
    }

    ordered_json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["config_digest"] = bundle.config_digest;
    ordered_json entries = ordered_json::array();
    for (const auto& [name, content] : files) {
        const fs::path p = fs::path(out_dir) / name;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw IoError("emit: cannot write " + p.string());
        out << content;
        entries.push_back({{"name", name},
                           {"bytes", content.size()},
                           {"fnv1a64", content_digest(content)}});
    }
    manifest["files"] = entries;
    const std::string manifest_text = manifest.dump(2) + "\n";
    {
        const fs::path p = fs::path(out_dir) / "manifest.json";
        std::ofstream out(p, std::ios::binary);
        if (!out) throw IoError("emit: cannot write manifest.json");
        out << manifest_text;
    }
    return manifest_text;
}

}  // namespace dobkit
