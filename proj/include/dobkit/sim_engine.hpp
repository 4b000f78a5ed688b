#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>

#include "dobkit/dob_model.hpp"

namespace dobkit {

// Controllable-canonical state-space realization of a proper RationalTF.
struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;

    int order() const { return static_cast<int>(A.rows()); }
    Complex eval(const Complex& s) const;  // C (sI-A)^{-1} B + D
};

StateSpace realize(const RationalTF& tf);  // throws ImproperTF

struct SimTrace {
    double dt = 0.0;
    std::vector<double> t;
    std::map<std::string, std::vector<double>> channels;  // y, u, d_hat, r, dis
    std::optional<double> diverged_at;                    // |y| crossed 1e6 here

    const std::vector<double>& y() const { return channels.at("y"); }
    const std::vector<double>& u() const { return channels.at("u"); }
    const std::vector<double>& d_hat() const { return channels.at("d_hat"); }
};

enum class SimStructure { fig1, fig3 };

struct SignalSpec {
    enum class Kind { none, step, sine };
    Kind kind = Kind::none;
    double amplitude = 0.0;
    double frequency = 0.0;   // rad/s, sine only
    double start_time = 0.0;  // signal is zero before this

    double at(double t) const;
};

struct SimInputs {
    SignalSpec r;
    SignalSpec dis;
    double noise_amplitude = 0.0;  // uniform [-1,1] scaled, held per step
    unsigned long noise_seed = 0;
};

// Fixed-step RK4 simulation of the closed loop. The reference structure is
// fig1 (outer controller C on the reference error) or fig3 (stabilizing C_s
// with the prefilter C_p shaping the reference). Dead time is simulated by
// a ring buffer of ceil(tau/dt) samples on the plant input; delay-free
// configurations run through exact closed-loop transfer functions instead.
// dt must satisfy dt <= 1/(50 g) with g the fastest pole in the loop.
SimTrace simulate_closed_loop(SimStructure structure, const PlantModel& plant, double delta,
                              const DobFilter& dob, const ControllerSet& controllers,
                              const SimInputs& inputs, double dt, double horizon);

// Log-spaced Nyquist samples of L(jw) with adaptive densification wherever
// the phase step between neighbours exceeds 5 degrees.
ComplexResponse nyquist_curve(const DelayedTF& L, double w_lo, double w_hi, int n_points);

struct StepMetrics {
    double overshoot = 0.0;   // sup of the response
    double undershoot = 0.0;  // inf of the response
    double settling_time_2pct = 0.0;
    double steady_state_error = 0.0;
    bool settled = false;
};

StepMetrics step_metrics(const SimTrace& trace, double r_final = 1.0);

}  // namespace dobkit
