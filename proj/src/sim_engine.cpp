#include "dobkit/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dobkit/errors.hpp"

namespace dobkit {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDivergenceLimit = 1e6;
}  // namespace

Complex StateSpace::eval(const Complex& s) const {
    const int n = order();
    if (n == 0) return Complex(D, 0.0);
    Eigen::MatrixXcd m = s * Eigen::MatrixXcd::Identity(n, n) - A.cast<Complex>();
    const Eigen::VectorXcd x = m.partialPivLu().solve(B.cast<Complex>());
    return (C.cast<Complex>() * x)(0) + D;
}

StateSpace realize(const RationalTF& tf) {
    if (tf.relative_degree() < 0) throw ImproperTF("realize: transfer function is improper");
    const int n = tf.den().degree();
    StateSpace ss;
    ss.D = tf.num().coeff(n);  // den is monic
    const Polynomial rem = tf.num() - ss.D * tf.den();
    ss.A = Eigen::MatrixXd::Zero(n, n);
    ss.B = Eigen::VectorXd::Zero(n);
    ss.C = Eigen::RowVectorXd::Zero(n);
    if (n == 0) return ss;
    for (int i = 0; i + 1 < n; ++i) ss.A(i, i + 1) = 1.0;
    for (int i = 0; i < n; ++i) {
        ss.A(n - 1, i) = -tf.den().coeff(i);
        ss.C(i) = rem.coeff(i);
    }
    ss.B(n - 1) = 1.0;
    return ss;
}

double SignalSpec::at(double t) const {
    if (kind == Kind::none || t < start_time) return 0.0;
    switch (kind) {
        case Kind::step: return amplitude;
        case Kind::sine: return amplitude * std::sin(frequency * (t - start_time));
        default: return 0.0;
    }
}

namespace {

// one RK4 step of x' = A x + b_const (inputs held over the step)
void rk4_step(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, double dt) {
    const Eigen::VectorXd k1 = A * x + b;
    const Eigen::VectorXd k2 = A * (x + 0.5 * dt * k1) + b;
    const Eigen::VectorXd k3 = A * (x + 0.5 * dt * k2) + b;
    const Eigen::VectorXd k4 = A * (x + dt * k3) + b;
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Proper channel plus explicit first-order improper remainder. Improper-by-
// one channels (derivative action hitting an exogenous input) simulate the
// derivative as the per-step difference quotient of the held input.
struct Channel {
    StateSpace ss;
    double deriv_gain = 0.0;
    Eigen::VectorXd x;
    double prev_in = 0.0;
    bool first = true;

    void init() { x = Eigen::VectorXd::Zero(ss.order()); }
    double output(double in, double dt) {
        const double din = first ? 0.0 : (in - prev_in) / dt;
        double out = 0.0;
        if (ss.order() > 0) out = (ss.C * x)(0);
        out += ss.D * in + deriv_gain * din;
        return out;
    }
    void advance(double in, double dt) {
        if (ss.order() > 0) {
            const Eigen::VectorXd b = ss.B * in;
            rk4_step(ss.A, b, x, dt);
        }
        prev_in = in;
        first = false;
    }
};

Channel make_channel(const Polynomial& num, const Polynomial& den) {
    Channel ch;
    const RationalTF tf(num, den);
    if (tf.relative_degree() >= 0) {
        ch.ss = realize(tf);
    } else if (tf.relative_degree() == -1) {
        // num = (q1 s + q0) den + rem
        const double q1 = tf.num().leading() / tf.den().leading();
        Polynomial r1 = tf.num() - q1 * (Polynomial{0.0, 1.0} * tf.den());
        const double q0 = r1.coeff(tf.den().degree());
        Polynomial rem = r1 - q0 * tf.den();
        StateSpace ss = realize(RationalTF(rem, tf.den()));
        ss.D += q0;
        ch.ss = std::move(ss);
        ch.deriv_gain = q1;
    } else {
        throw ImproperTF("simulate: channel transfer function improper by more than one");
    }
    ch.init();
    return ch;
}

double fastest_pole(const Polynomial& charpoly) {
    double fastest = 0.0;
    if (charpoly.degree() >= 1) {
        for (const Complex& r : roots(charpoly)) fastest = std::max(fastest, std::abs(r));
    }
    return fastest;
}

struct NoiseSource {
    std::mt19937 gen;
    std::uniform_real_distribution<double> dist{-1.0, 1.0};
    double amplitude = 0.0;
    double next() { return amplitude == 0.0 ? 0.0 : amplitude * dist(gen); }
};

struct LoopPolys {
    Polynomial ng, dg;  // perturbed plant rational part G = ng/dg (weight folded in)
    Polynomial nh, dh;  // inverse model H (approx nominal if present, else G_n)
    Polynomial nq, dq;  // DOB filter
    Polynomial nc, dc;  // outer controller (zero if none)
    Polynomial np, dp;  // prefilter (one if none)
};

LoopPolys collect_polys(const PlantModel& plant, double delta, const DobFilter& dob,
                        const ControllerSet& c) {
    LoopPolys lp;
    const RationalTF g = (plant.nominal * (RationalTF::one() + delta * realize_weight(plant.weight)));
    lp.ng = g.num();
    lp.dg = g.den();
    const RationalTF h = plant.approx_nominal ? *plant.approx_nominal : plant.nominal;
    lp.nh = h.num();
    lp.dh = h.den();
    const RationalTF q = dob.q();
    lp.nq = q.num();
    lp.dq = q.den();
    lp.nc = c.outer.num();
    lp.dc = c.outer.den();
    const RationalTF pre = c.prefilter ? *c.prefilter : RationalTF::one();
    lp.np = pre.num();
    lp.dp = pre.den();
    return lp;
}

SimTrace simulate_channels(const LoopPolys& lp, const SimInputs& inputs, double dt, double horizon,
                           double dt_rule_fastest) {
    // D2 = H(1-Q) + G Q + C G H over the common denominator dh dq dg dw dc
    const Polynomial one_minus_q = lp.dq - lp.nq;
    const Polynomial p2 = lp.nh * one_minus_q * lp.dg * lp.dc + lp.ng * lp.nq * lp.dh * lp.dc +
                          lp.nc * lp.ng * lp.nh * lp.dq;

    const double fast =
        std::max({dt_rule_fastest, fastest_pole(p2), fastest_pole(lp.dp)});
    if (fast > 0.0 && dt > 1.0 / (50.0 * fast)) {
        throw ValidationError("simulate: dt must be <= 1/(50 * fastest loop pole)");
    }

    struct Entry {
        const char* out;
        const char* in;
        Channel ch;
    };
    std::vector<Entry> entries;
    auto add = [&](const char* out, const char* in, const Polynomial& num, const Polynomial& den) {
        if (num.is_zero()) return;
        entries.push_back(Entry{out, in, make_channel(num, den)});
    };

    const Polynomial g_minus_h = lp.ng * lp.dh - lp.nh * lp.dg;  // over dg dh
    const Polynomial ch_q = lp.nc * lp.nh * lp.dq + lp.nq * lp.dc * lp.dh;  // C H + Q pieces
    const Polynomial one_plus_ch = lp.dc * lp.dh + lp.nc * lp.nh;

    add("y", "r", lp.ng * lp.nh * lp.nc * lp.np * lp.dq, lp.dp * p2);
    add("y", "dis", lp.ng * lp.nh * one_minus_q * lp.dc, p2);
    add("u", "r", lp.nh * lp.nc * lp.np * lp.dq * lp.dg, lp.dp * p2);
    add("u", "dis", -1.0 * lp.ng * ch_q, p2);
    add("d_hat", "r", lp.nq * lp.nc * lp.np * g_minus_h, lp.dp * p2);
    add("d_hat", "dis", lp.nq * lp.ng * one_plus_ch, p2);
    if (inputs.noise_amplitude != 0.0) {
        add("y", "noise", -1.0 * lp.ng * ch_q, p2);
        add("u", "noise", -1.0 * ch_q * lp.dg, p2);
        add("d_hat", "noise", lp.nq * one_plus_ch * lp.dg, p2);
    }

    const std::size_t steps = static_cast<std::size_t>(std::ceil(horizon / dt)) + 1;
    SimTrace trace;
    trace.dt = dt;
    trace.t.resize(steps);
    for (const char* name : {"y", "u", "d_hat", "r", "dis"}) {
        trace.channels[name].assign(steps, 0.0);
    }

    NoiseSource noise{std::mt19937(inputs.noise_seed), {}, inputs.noise_amplitude};
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        trace.t[k] = t;
        const double r = inputs.r.at(t);
        const double d = inputs.dis.at(t);
        const double xi = noise.next();
        trace.channels["r"][k] = r;
        trace.channels["dis"][k] = d;
        for (Entry& e : entries) {
            const double in = (std::string_view(e.in) == "r")     ? r
                              : (std::string_view(e.in) == "dis") ? d
                                                                  : xi;
            trace.channels[e.out][k] += e.ch.output(in, dt);
        }
        const double yk = trace.channels["y"][k];
        if (std::abs(yk) > kDivergenceLimit && !trace.diverged_at) {
            trace.diverged_at = t;
            // keep the partial trace; stop integrating further
            for (std::size_t j = k + 1; j < steps; ++j) trace.t[j] = static_cast<double>(j) * dt;
            break;
        }
        for (Entry& e : entries) {
            const double in = (std::string_view(e.in) == "r")     ? r
                              : (std::string_view(e.in) == "dis") ? d
                                                                  : xi;
            e.ch.advance(in, dt);
        }
    }
    return trace;
}

SimTrace simulate_hybrid_delay(const PlantModel& plant, const LoopPolys& lp,
                               const SimInputs& inputs, double dt, double horizon) {
    // u (1-Q) = C C_p r - (C + Q H^{-1}) y_m; plant input v = u + d runs
    // through the dead-time ring buffer. Blocks F_r = C C_p/(1-Q),
    // F_y = (C + Q H^{-1})/(1-Q), M = Q H^{-1} and Q itself must be proper.
    const Polynomial one_minus_q = lp.dq - lp.nq;
    const RationalTF g_pert(lp.ng, lp.dg);
    const RationalTF f_r(lp.nc * lp.np * lp.dq, lp.dc * lp.dp * one_minus_q);
    // (C + Q H^{-1})/(1-Q) = (nc nh dq + nq dc dh)/(dc nh (dq - nq))
    const RationalTF f_y(lp.nc * lp.nh * lp.dq + lp.nq * lp.dc * lp.dh,
                         lp.dc * lp.nh * one_minus_q);
    const RationalTF m_tf(lp.nq * lp.dh, lp.dq * lp.nh);
    const RationalTF q_tf(lp.nq, lp.dq);

    StateSpace g_ss, fr_ss, fy_ss, m_ss, q_ss;
    try {
        g_ss = realize(g_pert);
        fr_ss = realize(f_r);
        fy_ss = realize(f_y);
        m_ss = realize(m_tf);
        q_ss = realize(q_tf);
    } catch (const ImproperTF&) {
        throw ImproperTF(
            "simulate: delayed structure needs proper C C_p/(1-Q) and (C + Q/H)/(1-Q) blocks");
    }

    double fast = 0.0;
    for (const StateSpace* ss : {&g_ss, &fr_ss, &fy_ss, &m_ss, &q_ss}) {
        if (ss->order() > 0) {
            Eigen::VectorXcd ev = ss->A.eigenvalues();
            for (int i = 0; i < ev.size(); ++i) fast = std::max(fast, std::abs(ev(i)));
        }
    }
    if (fast > 0.0 && dt > 1.0 / (50.0 * fast)) {
        throw ValidationError("simulate: dt must be <= 1/(50 * fastest loop pole)");
    }

    const std::size_t delay_samples =
        plant.tau > 0.0 ? static_cast<std::size_t>(std::ceil(plant.tau / dt)) : 0;
    std::vector<double> ring(std::max<std::size_t>(delay_samples, 1), 0.0);
    std::size_t ring_pos = 0;

    const std::size_t steps = static_cast<std::size_t>(std::ceil(horizon / dt)) + 1;
    SimTrace trace;
    trace.dt = dt;
    trace.t.resize(steps);
    for (const char* name : {"y", "u", "d_hat", "r", "dis", "plant_in", "plant_in_delayed"}) {
        trace.channels[name].assign(steps, 0.0);
    }

    Eigen::VectorXd xg = Eigen::VectorXd::Zero(g_ss.order());
    Eigen::VectorXd xfr = Eigen::VectorXd::Zero(fr_ss.order());
    Eigen::VectorXd xfy = Eigen::VectorXd::Zero(fy_ss.order());
    Eigen::VectorXd xm = Eigen::VectorXd::Zero(m_ss.order());
    Eigen::VectorXd xq = Eigen::VectorXd::Zero(q_ss.order());

    NoiseSource noise{std::mt19937(inputs.noise_seed), {}, inputs.noise_amplitude};

    auto out_of = [](const StateSpace& ss, const Eigen::VectorXd& x, double in) {
        double v = ss.D * in;
        if (ss.order() > 0) v += (ss.C * x)(0);
        return v;
    };

    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        trace.t[k] = t;
        const double r = inputs.r.at(t);
        const double d = inputs.dis.at(t);
        const double xi = noise.next();

        const double w_eff = ring[ring_pos];  // v(t - tau); tau > 0 here
        const double y = out_of(g_ss, xg, w_eff);
        const double y_m = y + xi;
        const double u = out_of(fr_ss, xfr, r) - out_of(fy_ss, xfy, y_m);
        const double v = u + d;
        const double d_hat = out_of(m_ss, xm, y_m) - out_of(q_ss, xq, u);

        trace.channels["y"][k] = y;
        trace.channels["u"][k] = u;
        trace.channels["d_hat"][k] = d_hat;
        trace.channels["r"][k] = r;
        trace.channels["dis"][k] = d;
        trace.channels["plant_in"][k] = v;
        trace.channels["plant_in_delayed"][k] = w_eff;

        if (std::abs(y) > kDivergenceLimit && !trace.diverged_at) {
            trace.diverged_at = t;
            for (std::size_t j = k + 1; j < steps; ++j) trace.t[j] = static_cast<double>(j) * dt;
            break;
        }

        ring[ring_pos] = v;
        ring_pos = (ring_pos + 1) % delay_samples;

        // joint advance with held (w_eff, r, y_m-ish, u) inputs
        if (g_ss.order() > 0) rk4_step(g_ss.A, g_ss.B * w_eff, xg, dt);
        if (fr_ss.order() > 0) rk4_step(fr_ss.A, fr_ss.B * r, xfr, dt);
        if (fy_ss.order() > 0) rk4_step(fy_ss.A, fy_ss.B * y_m, xfy, dt);
        if (m_ss.order() > 0) rk4_step(m_ss.A, m_ss.B * y_m, xm, dt);
        if (q_ss.order() > 0) rk4_step(q_ss.A, q_ss.B * u, xq, dt);
    }
    return trace;
}

}  // namespace

SimTrace simulate_closed_loop(SimStructure structure, const PlantModel& plant, double delta,
                              const DobFilter& dob, const ControllerSet& controllers,
                              const SimInputs& inputs, double dt, double horizon) {
    if (!(dt > 0.0)) throw ValidationError("simulate: dt must be positive");
    if (!(horizon > 0.0)) throw ValidationError("simulate: horizon must be positive");

    ControllerSet c = controllers;
    if (structure == SimStructure::fig1) c.prefilter.reset();  // C_p belongs to fig3

    const LoopPolys lp = collect_polys(plant, delta, dob, c);
    if (plant.tau > 0.0) {
        return simulate_hybrid_delay(plant, lp, inputs, dt, horizon);
    }
    double fast = 0.0;
    return simulate_channels(lp, inputs, dt, horizon, fast);
}

ComplexResponse nyquist_curve(const DelayedTF& L, double w_lo, double w_hi, int n_points) {
    if (!(0.0 < w_lo && w_lo < w_hi)) throw Error("nyquist_curve: need 0 < w_lo < w_hi");
    std::vector<double> grid = logspace(w_lo, w_hi, std::max(2, n_points));
    const double max_step = 5.0 * kPi / 180.0;
    for (int pass = 0; pass < 8; ++pass) {
        ComplexResponse r = freq_response(L, grid);
        std::vector<double> refined;
        refined.reserve(grid.size() * 2);
        bool dense_enough = true;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            refined.push_back(grid[i]);
            double dphi = std::arg(r.values[i + 1]) - std::arg(r.values[i]);
            while (dphi > kPi) dphi -= 2.0 * kPi;
            while (dphi < -kPi) dphi += 2.0 * kPi;
            if (std::abs(dphi) > max_step && grid[i + 1] - grid[i] > 1e-12 * grid[i]) {
                dense_enough = false;
                refined.push_back(std::sqrt(grid[i] * grid[i + 1]));  // log midpoint
            }
        }
        refined.push_back(grid.back());
        if (dense_enough) return r;
        grid = std::move(refined);
    }
    return freq_response(L, grid);
}

StepMetrics step_metrics(const SimTrace& trace, double r_final) {
    const std::vector<double>& y = trace.y();
    if (y.empty()) throw Error("step_metrics: empty trace");
    StepMetrics m;
    m.overshoot = *std::max_element(y.begin(), y.end());
    m.undershoot = *std::min_element(y.begin(), y.end());
    const double y_ss = y.back();
    m.steady_state_error = r_final - y_ss;

    double band = 0.02 * std::abs(y_ss);
    if (band == 0.0) {
        band = 0.02 * std::max(std::abs(m.overshoot), std::abs(m.undershoot));
    }
    std::size_t settle_idx = y.size();
    for (std::size_t k = y.size(); k-- > 0;) {
        if (std::abs(y[k] - y_ss) > band) {
            settle_idx = k + 1;
            break;
        }
        settle_idx = k;
    }
    m.settling_time_2pct = trace.t[std::min(settle_idx, y.size() - 1)];
    m.settled = settle_idx + 1 < y.size() &&
                m.settling_time_2pct < 0.9 * trace.t.back() && !trace.diverged_at;
    return m;
}

}  // namespace dobkit
