#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dobkit/errors.hpp"
#include "dobkit/report.hpp"

namespace {

extern "C" {
extern const char* dobkit_builtin_case(int n);  // generated from cases/*.cfg
}

void print_summary(const dobkit::ReportBundle& bundle, const std::string& log_convention) {
    using namespace dobkit;
    std::printf("config digest: %s\n", bundle.config_digest.c_str());
    if (!bundle.notes.empty()) std::printf("notes: %s\n", bundle.notes.c_str());
    for (const auto& [name, rep] : bundle.constraints) {
        std::printf("[%s]\n", name.c_str());
        if (rep.sweep_interval) {
            std::printf("  admissible bandwidth: [%.6g, %.6g] rad/s\n",
                        rep.sweep_interval->first, rep.sweep_interval->second);
        } else if (name == "sweep") {
            std::printf("  admissible bandwidth: none on the grid\n");
        }
        std::printf("  peak |S| = %.6g, peak |T| = %.6g, band(|S|<=alpha_beta) = %.6g rad/s\n",
                    rep.peak_S, rep.peak_T, rep.achieved_w_beta);
        for (const auto& [k, v] : rep.psi_values) {
            const bool nat = k.find("log10") == std::string::npos;
            if (log_convention == "dB10" && nat && k.rfind("psi_", 0) == 0) continue;
            if (log_convention == "nat" && !nat) continue;
            std::printf("  %s = %.9g\n", k.c_str(), v);
        }
        for (const auto& [k, v] : rep.literal_checks) {
            std::printf("  check %s: %s\n", k.c_str(), v ? "ok" : "violated");
        }
        if (rep.forms_disagree) {
            std::printf("  note: the two printed performance-band forms disagree here\n");
        }
    }
    for (const auto& [k, v] : bundle.scalars) std::printf("%s = %.9g\n", k.c_str(), v);
    for (const auto& [name, m] : bundle.metrics) {
        std::printf("step[%s]: sup %.6g inf %.6g settle %.6g ss_err %.6g%s\n", name.c_str(),
                    m.overshoot, m.undershoot, m.settling_time_2pct, m.steady_state_error,
                    m.settled ? "" : " (not settled)");
    }
}

int run(const std::string& command, const dobkit::CaseConfig& cfg, const std::string& out_dir,
        const std::string& backend_name, const std::string& log_convention) {
    using namespace dobkit;
    const Backend backend = backend_name == "literal" ? Backend::literal : Backend::exact;
    const ReportBundle bundle = run_case(cfg, parse_command(command), backend);
    print_summary(bundle, log_convention);
    const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;
    emit(bundle, cfg, dir);
    std::printf("wrote %s/manifest.json\n", dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"disturbance-observer loop analysis toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir, backend = "exact", log_convention = "nat";
    app.add_option("--out", out_dir, "output directory (overrides outputs.dir)");
    app.add_option("--backend", backend, "literal or exact constraint backend")
        ->check(CLI::IsMember({"literal", "exact"}));
    app.add_option("--log-convention", log_convention, "nat or dB10 summary convention")
        ->check(CLI::IsMember({"nat", "dB10"}));

    std::vector<std::string> commands = {"analyze", "constraints", "sweep", "simulate"};
    std::map<std::string, CLI::App*> subs;
    for (const std::string& c : commands) {
        CLI::App* sub = app.add_subcommand(c);
        sub->add_option("--config", config_path, "case config file")->required();
        subs[c] = sub;
    }
    CLI::App* case_cmd = app.add_subcommand("case", "run a bundled case end to end");
    int case_number = 0;
    case_cmd->add_option("number", case_number, "bundled case number")
        ->required()
        ->check(CLI::Range(1, 5));

    CLI11_PARSE(app, argc, argv);

    try {
        if (case_cmd->parsed()) {
            const dobkit::CaseConfig cfg = dobkit::parse_config(
                dobkit_builtin_case(case_number), "case" + std::to_string(case_number));
            return run("all", cfg, out_dir, backend, log_convention);
        }
        for (const std::string& c : commands) {
            if (subs[c]->parsed()) {
                return run(c, dobkit::load_config(config_path), out_dir, backend, log_convention);
            }
        }
    } catch (const dobkit::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    }
    return 0;
}
