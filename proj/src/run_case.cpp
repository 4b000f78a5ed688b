#include <cmath>

#include "dobkit/errors.hpp"
#include "dobkit/report.hpp"

namespace dobkit {

namespace {

std::vector<double> default_curve_grid(const PlantModel& plant, const DobFilter& dob) {
    const double g = std::max(dob.nominal_bandwidth, 1e-3);
    const double hi = 1e3 * std::max({g, plant.weight.w_T, 10.0});
    return logspace(1e-3 * g, hi, 400);
}

LoopSet loop_for(const PlantModel& plant, const DobFilter& dob, const ControllerSet& c,
                 TheoremKind kind, double delta) {
    switch (kind) {
        case TheoremKind::thm3: return approx_inverse_loop(plant, dob, delta);
        case TheoremKind::thm4: return outer_loop(plant, dob, c, delta);
        default: return inner_loop(plant, dob, delta);
    }
}

void add_loop_curves(ReportBundle& bundle, const PlantModel& plant, const DobFilter& dob,
                     const ControllerSet& c, TheoremKind kind) {
    const std::vector<double> grid = default_curve_grid(plant, dob);
    const std::vector<std::pair<std::string, double>> deltas = {
        {"lo", plant.delta.lo},
        {"mid", std::clamp(0.0, plant.delta.lo, plant.delta.hi)},
        {"hi", plant.delta.hi}};
    for (const auto& [tag, d] : deltas) {
        const LoopSet loop = loop_for(plant, dob, c, kind, d);
        bundle.curves["S_" + tag] = freq_response(loop.S, grid);
        bundle.curves["T_" + tag] = freq_response(loop.T, grid);
        bundle.curves["L_" + tag] = freq_response(loop.L, grid);
    }
}

ConstraintReport run_check(const PlantModel& plant, const DobFilter& dob, const ControllerSet& c,
                           const DesignSpec& spec, TheoremKind kind,
                           const std::vector<double>& deltas) {
    switch (kind) {
        case TheoremKind::thm2: return check_thm2(plant, dob, spec, deltas);
        case TheoremKind::thm3: return check_thm3(plant, dob, spec, deltas);
        case TheoremKind::thm4: return check_thm4(plant, dob, c, spec, deltas);
        default: return check_thm1(plant, dob, spec, deltas);
    }
}

}  // namespace

ReportBundle run_case(const CaseConfig& cfg, RunCommand command, Backend backend) {
    ReportBundle bundle;
    bundle.config_digest = content_digest(emit_config(cfg));

    PlantModel plant = cfg.plant();
    const DobFilter dob = cfg.dob();
    const ControllerSet controllers = cfg.controllers();
    const std::vector<double> deltas = plant.delta.sample(cfg.delta_grid_points);
    const TheoremKind kind = dispatch_theorem(plant, cfg.dob_order);

    if (kind == TheoremKind::thm3 && !plant.approx_nominal) {
        plant.approx_nominal = mirror_approx_nominal(plant.nominal);
        bundle.notes += "approximate nominal model generated by mirroring the RHP zeros; ";
    }

    const bool do_analyze = command == RunCommand::analyze || command == RunCommand::all;
    const bool do_constraints = command == RunCommand::constraints || command == RunCommand::all;
    const bool do_sweep = command == RunCommand::sweep || command == RunCommand::all;
    const bool do_simulate = command == RunCommand::simulate || command == RunCommand::all;

    if (do_analyze) {
        const Classification cls = classify(DelayedTF(plant.nominal, plant.tau));
        bundle.scalars["is_stable"] = cls.is_stable ? 1.0 : 0.0;
        bundle.scalars["is_minimum_phase"] = cls.is_minimum_phase ? 1.0 : 0.0;
        bundle.scalars["relative_degree"] = cls.relative_degree;
        bundle.scalars["marginal_pole"] = cls.marginal_pole ? 1.0 : 0.0;
        bundle.scalars["dob_pole_parameter"] = dob.nominal_bandwidth;
        bundle.scalars["dob_three_db"] = dob.three_db_frequency();
        add_loop_curves(bundle, plant, dob, controllers, kind);
    }

    if (do_constraints) {
        DesignSpec sp = cfg.spec;
        if (kind == TheoremKind::thm3 && !(sp.w_gamma > 0.0)) {
            sp.w_gamma = 2.0 * dob.nominal_bandwidth;
        }
        try {
            bundle.constraints["point_check"] = run_check(plant, dob, controllers, sp, kind,
                                                          deltas);
        } catch (const NumericError& e) {
            bundle.notes += std::string("point check: ") + e.what() + "; ";
        }
        if (kind == TheoremKind::thm2) {
            const RefinedDelayBound rb =
                refined_delay_bound(dob.nominal_bandwidth, plant.tau, plant.weight, cfg.spec);
            bundle.scalars["delay_w1"] = rb.w1;
            bundle.scalars["delay_w2"] = rb.w2;
            bundle.scalars["refined_bandwidth_cap"] = rb.refined_cap;
            bundle.scalars["closed_form_s_check"] = rb.eq_check_max_err;
        }
    }

    if (do_sweep) {
        bundle.constraints["sweep"] = sweep_admissible_bandwidth(
            plant, cfg.dob_order, cfg.spec, backend, cfg.bandwidth_grid(), controllers);
        if (kind == TheoremKind::thm2) {
            const RefinedDelayBound rb =
                refined_delay_bound(dob.nominal_bandwidth, plant.tau, plant.weight, cfg.spec);
            bundle.scalars["refined_bandwidth_cap"] = rb.refined_cap;
        }
    }

    if (do_simulate) {
        const SimStructure structure =
            (kind == TheoremKind::thm4) ? SimStructure::fig3 : SimStructure::fig1;
        const bool track_reference = !controllers.outer.is_zero();
        const SimInputs inputs = cfg.sim_inputs(track_reference);
        const double delta0 = std::clamp(0.0, plant.delta.lo, plant.delta.hi);
        const SimTrace trace = simulate_closed_loop(structure, plant, delta0, dob, controllers,
                                                    inputs, cfg.sim_dt, cfg.sim_horizon);
        bundle.metrics["nominal"] = step_metrics(trace, track_reference ? 1.0 : 0.0);
        bundle.traces["nominal"] = trace;
        if (kind == TheoremKind::thm4) {
            bundle.curves["nyquist_L"] = nyquist_curve(
                loop_for(plant, dob, controllers, kind, delta0).L,
                1e-2 * dob.nominal_bandwidth, 1e3 * dob.nominal_bandwidth, 200);
        }
    }

    return bundle;
}

}  // namespace dobkit
