#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dobkit/constraint_solver.hpp"
#include "dobkit/sim_engine.hpp"

namespace dobkit {

// One analysis case as read from a config file: dotted keys, `key = value`
// lines, `#` comments, numeric lists in brackets. Unknown keys are errors.
struct CaseConfig {
    // plant.*  (coefficient lists ascending in s)
    std::vector<double> plant_num;
    std::vector<double> plant_den;
    double plant_tau = 0.0;
    std::optional<std::vector<double>> plant_approx_num;
    std::optional<std::vector<double>> plant_approx_den;

    // weight.*  (either the parametric form or a first-order rational)
    std::optional<double> weight_w_T;
    std::optional<double> weight_e_min;
    std::optional<double> weight_e_max;
    std::optional<std::vector<double>> weight_num;
    std::optional<std::vector<double>> weight_den;

    // delta.*
    double delta_lo = 0.0;
    double delta_hi = 0.0;
    int delta_grid_points = 13;

    // dob.*
    int dob_order = 1;
    double dob_g = 0.0;
    std::optional<std::vector<double>> dob_g_list;

    // spec.*
    DesignSpec spec;

    // controllers.*
    std::optional<std::vector<double>> outer_num;
    std::optional<std::vector<double>> outer_den;
    std::optional<std::vector<double>> prefilter_num;
    std::optional<std::vector<double>> prefilter_den;

    // sim.*
    double sim_dt = 1e-4;
    double sim_horizon = 1.0;
    unsigned long sim_seed = 0;
    std::string dist_kind = "step";  // step | sine | none
    double dist_amplitude = 1.0;
    double dist_frequency = 0.0;
    double dist_start_time = 0.0;

    // outputs.*
    std::string out_dir = "out";
    std::vector<std::string> out_formats = {"csv", "json"};

    // --- derived objects ---
    PlantModel plant() const;
    UncertaintyWeight weight() const;
    DobFilter dob() const;
    ControllerSet controllers() const;
    SimInputs sim_inputs(bool reference_step) const;
    std::vector<double> bandwidth_grid() const;  // g_list densified, or around dob.g
};

CaseConfig load_config(const std::string& path);
CaseConfig parse_config(const std::string& text, const std::string& origin = "<string>");

// Serialization that load_config reads back field for field.
std::string emit_config(const CaseConfig& cfg);

}  // namespace dobkit
