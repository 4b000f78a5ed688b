#pragma once

#include <map>
#include <string>

#include "dobkit/config.hpp"

namespace dobkit {

inline constexpr const char* kToolVersion = "0.1.0";

enum class RunCommand { analyze, constraints, sweep, simulate, all };

struct ReportBundle {
    std::map<std::string, ConstraintReport> constraints;  // keyed by a short name
    std::map<std::string, ComplexResponse> curves;
    std::map<std::string, SimTrace> traces;
    std::map<std::string, StepMetrics> metrics;
    std::map<std::string, double> scalars;  // assorted derived numbers
    std::string config_digest;
    std::string notes;
};

RunCommand parse_command(const std::string& name);

// Runs one analysis case end to end; deterministic given config and seed.
ReportBundle run_case(const CaseConfig& cfg, RunCommand command,
                      Backend backend = Backend::exact);

// Writes curves as CSV (w_rad_s,re,im,mag_db,phase_deg), traces as CSV,
// report.json with stable key order, and manifest.json with content
// digests. Returns the manifest text.
std::string emit(const ReportBundle& bundle, const CaseConfig& cfg, const std::string& out_dir);

// FNV-1a 64-bit content digest, hex encoded.
std::string content_digest(const std::string& bytes);

}  // namespace dobkit
