#include "dobkit/constraint_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "dobkit/errors.hpp"
#include "dobkit/parallel.hpp"

namespace dobkit {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kLog10E = 0.43429448190325176;
}  // namespace

double DesignSpec::budget_magnitude() const {
    switch (interp) {
        case SupInterp::magnitude: return sup_logS;
        case SupInterp::log_nat: return std::exp(sup_logS);
        case SupInterp::log_10: return std::pow(10.0, sup_logS);
    }
    return sup_logS;
}

void DesignSpec::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("spec: need 0 < alpha < 1");
    if (!(alpha_beta > 0.0 && alpha_beta < 1.0)) {
        throw ValidationError("spec: need 0 < alpha_beta < 1");
    }
    if (!(alpha_gamma > 0.0)) throw ValidationError("spec: need alpha_gamma > 0");
    if (w_gamma > 0.0 && w_beta > 0.0 && !(w_beta < w_gamma)) {
        throw ValidationError("spec: need w_beta < w_gamma");
    }
    if (!(delta > 0.0 && delta <= 0.5)) throw ValidationError("spec: need 0 < delta <= 1/2");
    if (k < 1) throw ValidationError("spec: need k >= 1");
    if (!(sup_logS > 0.0)) throw ValidationError("spec: need sup_logS > 0");
}

TheoremKind dispatch_theorem(const PlantModel& plant, int dob_order) {
    const Classification c = classify(DelayedTF(plant.nominal, 0.0));
    if (c.has_rhp_pole) return TheoremKind::thm4;
    if (c.has_rhp_zero) return TheoremKind::thm3;
    if (plant.tau > 0.0) return TheoremKind::thm2;
    return dob_order >= 2 ? TheoremKind::thm1 : TheoremKind::lemma1;
}

namespace {

using LoopMaker = std::function<LoopSet(double delta)>;

LoopMaker make_loop_family(const PlantModel& plant, const DobFilter& dob,
                           const ControllerSet& controllers, TheoremKind kind) {
    switch (kind) {
        case TheoremKind::thm3:
            return [=](double d) { return approx_inverse_loop(plant, dob, d); };
        case TheoremKind::thm4:
            return [=](double d) { return outer_loop(plant, dob, controllers, d); };
        default: return [=](double d) { return inner_loop(plant, dob, d); };
    }
}

double safe_mag(const DelayedTF& tf, double w) {
    try {
        return std::abs(tf.eval(Complex(0.0, w)));
    } catch (const PoleHit&) {
        return std::numeric_limits<double>::infinity();
    }
}

// golden-section maximum of |tf| on a log-frequency bracket
double refine_peak(const DelayedTF& tf, double w_lo, double w_hi, double best) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::log(w_lo), b = std::log(w_hi);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = safe_mag(tf, std::exp(x1)), f2 = safe_mag(tf, std::exp(x2));
    for (int i = 0; i < 48; ++i) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = safe_mag(tf, std::exp(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = safe_mag(tf, std::exp(x2));
        }
    }
    return std::max({best, f1, f2});
}

double loop_reference_frequency(const PlantModel& plant, const DobFilter& dob) {
    double w_ref = std::max(1.0, dob.nominal_bandwidth);
    w_ref = std::max(w_ref, plant.weight.w_T * std::max(1.0, plant.weight.e_max));
    if (plant.tau > 0.0) w_ref = std::max(w_ref, 10.0 / plant.tau);
    if (plant.nominal.den().degree() >= 1) {
        for (const Complex& p : poles(plant.nominal)) w_ref = std::max(w_ref, std::abs(p));
    }
    if (plant.nominal.num().degree() >= 1) {
        for (const Complex& z : zeros(plant.nominal)) w_ref = std::max(w_ref, std::abs(z));
    }
    return w_ref;
}

}  // namespace

ExactMetrics evaluate_exact_metrics(const PlantModel& plant, const DobFilter& dob,
                                    const ControllerSet& controllers, const DesignSpec& spec,
                                    const std::vector<double>& deltas) {
    const TheoremKind kind = dispatch_theorem(plant, dob.order);
    const LoopMaker make = make_loop_family(plant, dob, controllers, kind);

    std::vector<LoopSet> loops(deltas.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) loops[i] = make(deltas[i]);

    const double g = dob.nominal_bandwidth;
    const double w_ref = loop_reference_frequency(plant, dob);
    const int n_grid = 600;
    const std::vector<double> grid = logspace(1e-4 * std::min(g, w_ref), 1e3 * w_ref, n_grid);

    ExactMetrics m;
    m.stable_all = true;

    // stability per delta (serial; each check parallelises internally)
    for (const LoopSet& loop : loops) {
        LoopStability st;
        try {
            st = check_closed_loop(loop);
        } catch (const GridTooCoarse&) {
            st = LoopStability::marginal;
        }
        if (st == LoopStability::unstable) m.stable_all = false;
        if (st == LoopStability::marginal) {
            m.any_marginal = true;
            m.stable_all = false;
        }
    }

    // |S| and |T| over the delta x frequency grid
    std::vector<double> worst_s(grid.size(), 0.0), worst_t(grid.size(), 0.0);
    std::vector<std::vector<double>> s_mag(deltas.size());
    for (std::size_t di = 0; di < deltas.size(); ++di) {
        auto& row = s_mag[di];
        row.assign(grid.size(), 0.0);
        const LoopSet& loop = loops[di];
        std::vector<double> t_row(grid.size(), 0.0);
        par::for_each_index(grid.size(), [&](std::size_t wi) {
            row[wi] = safe_mag(loop.S, grid[wi]);
            t_row[wi] = safe_mag(loop.T, grid[wi]);
        });
        for (std::size_t wi = 0; wi < grid.size(); ++wi) {
            worst_s[wi] = std::max(worst_s[wi], row[wi]);
            worst_t[wi] = std::max(worst_t[wi], t_row[wi]);
        }
    }

    std::size_t peak_idx = 0;
    for (std::size_t wi = 1; wi < grid.size(); ++wi) {
        if (worst_s[wi] > worst_s[peak_idx]) peak_idx = wi;
    }
    m.w_at_peak_S = grid[peak_idx];
    m.peak_S = worst_s[peak_idx];
    for (std::size_t di = 0; di < deltas.size(); ++di) {
        const std::size_t lo = peak_idx > 0 ? peak_idx - 1 : 0;
        const std::size_t hi = std::min(peak_idx + 1, grid.size() - 1);
        m.peak_S = refine_peak(loops[di].S, grid[lo], grid[hi], m.peak_S);
    }
    double peak_t = *std::max_element(worst_t.begin(), worst_t.end());
    {
        std::size_t ti = static_cast<std::size_t>(
            std::max_element(worst_t.begin(), worst_t.end()) - worst_t.begin());
        const std::size_t lo = ti > 0 ? ti - 1 : 0;
        const std::size_t hi = std::min(ti + 1, grid.size() - 1);
        for (std::size_t di = 0; di < deltas.size(); ++di) {
            peak_t = refine_peak(loops[di].T, grid[lo], grid[hi], peak_t);
        }
    }
    m.peak_T = peak_t;

    // nominal (delta = 0) sensitivity peak
    {
        const LoopSet nominal = make(std::clamp(0.0, plant.delta.lo, plant.delta.hi));
        double best = 0.0;
        std::vector<double> vals(grid.size());
        par::for_each_index(grid.size(),
                            [&](std::size_t wi) { vals[wi] = safe_mag(nominal.S, grid[wi]); });
        std::size_t bi = 0;
        for (std::size_t wi = 0; wi < grid.size(); ++wi) {
            if (vals[wi] > best) {
                best = vals[wi];
                bi = wi;
            }
        }
        const std::size_t lo = bi > 0 ? bi - 1 : 0;
        const std::size_t hi = std::min(bi + 1, grid.size() - 1);
        m.nominal_peak_S = refine_peak(nominal.S, grid[lo], grid[hi], best);
    }

    // performance band: largest w with worst-case |S| <= alpha_beta below it
    auto worst_s_at = [&](double w) {
        double v = 0.0;
        for (const LoopSet& loop : loops) v = std::max(v, safe_mag(loop.S, w));
        return v;
    };
    m.w_beta_achieved = grid.back();
    for (std::size_t wi = 0; wi < grid.size(); ++wi) {
        if (worst_s[wi] > spec.alpha_beta) {
            double lo = wi > 0 ? grid[wi - 1] : grid[0];
            double hi = grid[wi];
            for (int it = 0; it < 40 && wi > 0; ++it) {
                const double mid = std::sqrt(lo * hi);
                (worst_s_at(mid) > spec.alpha_beta ? hi : lo) = mid;
            }
            m.w_beta_achieved = lo;
            break;
        }
    }

    // tail of the open loop beyond w_gamma (minimum-phase theorem hypothesis)
    if (spec.w_gamma > 0.0) {
        const std::vector<double> tail_grid = logspace(spec.w_gamma, 1e3 * spec.w_gamma, 501);
        double sup = 0.0;
        for (const LoopSet& loop : loops) {
            std::vector<double> vals(tail_grid.size());
            par::for_each_index(tail_grid.size(),
                                [&](std::size_t wi) { vals[wi] = safe_mag(loop.L, tail_grid[wi]); });
            std::size_t bi = 0;
            for (std::size_t wi = 0; wi < vals.size(); ++wi) {
                if (vals[wi] > vals[bi]) bi = wi;
            }
            const std::size_t lo = bi > 0 ? bi - 1 : 0;
            const std::size_t hi = std::min(bi + 1, tail_grid.size() - 1);
            sup = refine_peak(loop.L, tail_grid[lo], tail_grid[hi], std::max(sup, vals[bi]));
        }
        m.tail_sup = sup;
    }
    return m;
}

double psi_thm1(const DesignSpec& spec) {
    spec.validate();
    const double sup_ln = std::log(spec.budget_magnitude());
    return (sup_ln + 3.0 * spec.delta / (2.0 * spec.k)) / (sup_ln + std::log(1.0 / spec.alpha));
}

std::map<std::string, double> psi_thm1_all(const DesignSpec& spec) {
    std::map<std::string, double> out;
    const double tail = 3.0 * spec.delta / (2.0 * spec.k);
    const double mag_ln = std::log(spec.budget_magnitude());
    out["psi_nat_magnitude"] = (mag_ln + tail) / (mag_ln + std::log(1.0 / spec.alpha));
    out["psi_log10_magnitude"] = (mag_ln * kLog10E + tail * kLog10E) /
                                 (mag_ln * kLog10E + std::log10(1.0 / spec.alpha));
    // as-printed readings: the budget number used directly as a log
    out["psi_nat_as_printed"] =
        (spec.sup_logS + tail) / (spec.sup_logS + std::log(1.0 / spec.alpha));
    out["psi_log10_as_printed"] =
        (spec.sup_logS + tail) / (spec.sup_logS + std::log10(1.0 / spec.alpha));
    return out;
}

double psi_thm2(const DesignSpec& spec, double tau, double R) {
    spec.validate();
    if (!(tau > 0.0)) throw ZeroDelay("psi_thm2: tau must be positive");
    if (!(R > 0.0)) throw Error("psi_thm2: R must be positive");
    const double sup_ln = std::log(spec.budget_magnitude());
    const double tail_term = 3.0 * kPi * spec.delta / (4.0 * tau * R);
    return (sup_ln + tail_term) / (sup_ln + std::log(1.0 / spec.alpha));
}

PsiPair psi12_thm3(const DesignSpec& spec, double z, double b_s_val) {
    if (!(z > 0.0)) throw NotRHP("psi12_thm3: zero must be in the open RHP");
    if (!(b_s_val >= 1.0 - 1e-12)) throw Error("psi12_thm3: |B_S^{-1}| must be >= 1");
    const double max_s_ln = std::log(spec.budget_magnitude());
    const double a_b = std::log(1.0 / spec.alpha_beta);
    const double a_g_plus = std::log(1.0 + spec.alpha_gamma);
    const double b_ln = std::log(b_s_val);
    const double gw_gamma = theta(spec.w_gamma, z);
    const double gw_beta = theta(spec.w_beta, z);

    PsiPair out;
    out.angle1 = (a_g_plus * (kPi - 2.0 * gw_gamma) + 2.0 * max_s_ln * gw_gamma) /
                     (2.0 * (max_s_ln + a_b)) -
                 kPi * b_ln / (2.0 * (max_s_ln + a_b));
    // note the printed denominator of the first fragment differs from the
    // second; both are kept exactly as stated
    out.angle2 = (-a_g_plus * kPi + 2.0 * (a_b + max_s_ln) * gw_beta) /
                     (2.0 * (max_s_ln - a_g_plus)) +
                 kPi * b_ln / (2.0 * (max_s_ln + a_b));

    if (!(out.angle1 > 0.0 && out.angle1 < 0.5 * kPi)) {
        throw InfeasibleAngles("psi12_thm3: performance-band angle outside (0, pi/2)");
    }
    if (out.angle2 >= 0.5 * kPi) {
        throw InfeasibleAngles("psi12_thm3: rolloff-band angle reaches pi/2");
    }
    out.psi1 = std::tan(out.angle1);
    out.psi2 = out.angle2 > 0.0 ? std::tan(out.angle2) : 0.0;  // vacuous when the angle is <= 0
    out.degenerate = out.psi2 < out.psi1 && out.angle2 > 0.0;
    return out;
}

double psi_thm4(const DesignSpec& spec, double p, double b_t_val, double t_inf_norm) {
    if (!(p > 0.0)) throw NotRHP("psi_thm4: pole must be in the open RHP");
    if (!(t_inf_norm > 0.0)) throw Error("psi_thm4: need a positive co-sensitivity norm");
    const double num = kPi * (std::log(1.0 / spec.alpha) + std::log(b_t_val));
    const double den = 2.0 * (std::log(1.0 / spec.alpha) + std::log(t_inf_norm));
    if (!(den > 0.0)) throw InfeasibleAngles("psi_thm4: degenerate denominator");
    const double angle = num / den;
    if (!(angle > 0.0 && angle < 0.5 * kPi)) {
        throw InfeasibleAngles("psi_thm4: angle outside (0, pi/2)");
    }
    return std::tan(angle);
}

namespace {

// worst case over the delta samples of |ratio| style inequalities
bool holds_for_all(const std::vector<double>& deltas, const std::vector<double>& ws,
                   const std::function<bool(double delta, double w)>& pred) {
    for (double d : deltas) {
        for (double w : ws) {
            if (!pred(d, w)) return false;
        }
    }
    return true;
}

std::vector<Complex> rhp_roots(const std::vector<Complex>& rts) {
    std::vector<Complex> out;
    for (const Complex& r : rts) {
        if (r.real() > kAxisBand * std::max(1.0, std::abs(r))) out.push_back(r);
    }
    return out;
}

double blaschke_inv_mag_at(const std::vector<Complex>& points, const Complex& at) {
    if (points.empty()) return 1.0;
    const RationalTF b = blaschke(points);
    const double m = std::abs(b.eval(at));
    return m > 0.0 ? 1.0 / m : std::numeric_limits<double>::infinity();
}

}  // namespace

ConstraintReport check_thm1(const PlantModel& plant, const DobFilter& dob, const DesignSpec& spec,
                            const std::vector<double>& deltas) {
    plant.validate();
    const Classification cls = classify(DelayedTF(plant.nominal, plant.tau));
    if (plant.tau > 0.0) throw HasDelay("check_thm1: plant has dead time");
    if (!cls.is_minimum_phase) throw NotMinimumPhase("check_thm1: plant is not minimum-phase");

    ConstraintReport rep;
    rep.backend = Backend::literal;
    if (dob.order < 2) {
        rep.theorem = TheoremKind::lemma1;
        rep.notes = "first-order filter on a minimum-phase plant: robustly stable over the "
                    "uncertainty range for any bandwidth; performance set by the filter pole";
        const ExactMetrics m = evaluate_exact_metrics(plant, dob, ControllerSet::none(), spec,
                                                      deltas);
        rep.peak_S = m.peak_S;
        rep.peak_T = m.peak_T;
        rep.achieved_w_beta = m.w_beta_achieved;
        rep.literal_ok = m.stable_all;
        return rep;
    }

    rep.theorem = TheoremKind::thm1;
    if (!(spec.w_gamma > 0.0)) throw ValidationError("check_thm1: spec.w_gamma must be set");
    DesignSpec sp = spec;
    sp.k = dob.order - 1;
    rep.psi_values = psi_thm1_all(sp);
    const double psi = psi_thm1(sp);
    rep.psi_values["psi"] = psi;
    rep.psi_values["w_beta_bound"] = psi * sp.w_gamma;

    const RationalTF q_tf = dob.q();
    const RationalTF w_tf = realize_weight(plant.weight);
    const RationalTF one_minus_q = RationalTF::one() - q_tf;

    const double w_star = psi * sp.w_gamma;
    const std::vector<double> band = logspace(1e-3 * dob.nominal_bandwidth, w_star, 160);

    auto q_lower = [&](double d, double w) {
        const Complex jw(0.0, w);
        const double lhs = std::abs(q_tf.eval(jw));
        const double rhs = (1.0 - sp.alpha) / (1.0 + sp.alpha * std::abs(d * w_tf.eval(jw)));
        return lhs >= rhs;
    };
    auto s_form = [&](double d, double w) {
        const Complex jw(0.0, w);
        return std::abs(one_minus_q.eval(jw)) /
               std::abs(1.0 + d * q_tf.eval(jw) * w_tf.eval(jw));
    };

    const bool eq18_q = holds_for_all(deltas, band, q_lower);
    bool eq18_boundary = true;
    for (double d : deltas) eq18_boundary = eq18_boundary && s_form(d, w_star) >= sp.alpha;

    bool eq23 = true;
    bool eq18_perf = true;
    if (sp.w_beta > 0.0) {
        const std::vector<double> perf =
            logspace(1e-3 * dob.nominal_bandwidth, std::min(sp.w_beta, w_star), 120);
        eq23 = holds_for_all(deltas, perf,
                             [&](double d, double w) { return s_form(d, w) <= sp.alpha; });
        eq18_perf = holds_for_all(deltas, perf, q_lower);
    }

    const ExactMetrics m = evaluate_exact_metrics(plant, dob, ControllerSet::none(), sp, deltas);
    const bool tail_ok = m.tail_sup <= sp.delta;
    // majorant form of the tail hypothesis from the leading coefficients:
    // M = g^n sup|1 + delta W(j inf)|, |L| <= M/w^{k+1}
    double winf_worst = 0.0;
    for (double d : deltas) {
        winf_worst = std::max(winf_worst,
                              std::abs(1.0 + d * w_tf.num().leading() / w_tf.den().leading()));
    }
    const double m_major = std::pow(dob.nominal_bandwidth, dob.order) * winf_worst;
    const bool tail_major_ok =
        m_major / std::pow(sp.w_gamma, dob.order) <= sp.delta;

    rep.literal_checks = {{"eq_q_lower_bound", eq18_q},
                          {"eq_boundary_rise", eq18_boundary},
                          {"eq_s_form_band", eq23},
                          {"tail_le_delta_exact", tail_ok},
                          {"tail_le_delta_majorant", tail_major_ok}};
    rep.literal_ok = eq18_q && eq18_boundary && eq23 && tail_ok;
    rep.forms_disagree = eq18_perf != eq23;
    rep.peak_S = m.peak_S;
    rep.peak_T = m.peak_T;
    rep.achieved_w_beta = m.w_beta_achieved;
    rep.psi_values["tail_sup_exact"] = m.tail_sup;
    rep.psi_values["tail_majorant"] = m_major / std::pow(sp.w_gamma, dob.order);
    return rep;
}

ConstraintReport check_thm2(const PlantModel& plant, const DobFilter& dob, const DesignSpec& spec,
                            const std::vector<double>& deltas) {
    plant.validate();
    if (!(plant.tau > 0.0)) throw ZeroDelay("check_thm2: plant has no dead time");

    ConstraintReport rep;
    rep.backend = Backend::literal;
    rep.theorem = TheoremKind::thm2;
    DesignSpec sp = spec;
    sp.k = dob.order;

    const double g = dob.nominal_bandwidth;
    const double r_rule = sp.R > 0.0 ? sp.R : g * std::pow(sp.delta, -1.0 / sp.k);

    // smallest R (at or below the rule) for which the nominal loop satisfies
    // |L(s)| <= delta (R/|s|)^k over the sampled region
    const LoopSet nominal = inner_loop(plant, dob, std::clamp(0.0, plant.delta.lo, plant.delta.hi));
    auto region_feasible = [&](double R) {
        const std::vector<double> ws = logspace(R, 1e3 * R, 241);
        for (double w : ws) {
            const double lim = sp.delta * std::pow(R / w, sp.k) * (1.0 + 1e-9);
            if (safe_mag(nominal.L, w) > lim) return false;
        }
        for (int i = 0; i <= 60; ++i) {
            const double th = 0.5 * kPi * i / 60.0;
            const Complex s = R * Complex(std::cos(th), std::sin(th));
            try {
                if (std::abs(nominal.L.eval(s)) > sp.delta * (1.0 + 1e-9)) return false;
            } catch (const PoleHit&) {
                return false;
            }
        }
        return true;
    };
    double r_used = r_rule;
    if (region_feasible(r_rule)) {
        double lo = r_rule / 64.0, hi = r_rule;
        for (int it = 0; it < 48; ++it) {
            const double mid = std::sqrt(lo * hi);
            (region_feasible(mid) ? hi : lo) = mid;
        }
        r_used = hi;
    } else {
        double lo = r_rule, hi = r_rule * 1e3;
        bool found = false;
        for (int it = 0; it < 60 && !found; ++it) {
            if (region_feasible(hi)) {
                found = true;
                break;
            }
            hi *= 2.0;
        }
        if (found) {
            for (int it = 0; it < 48; ++it) {
                const double mid = std::sqrt(lo * hi);
                (region_feasible(mid) ? hi : lo) = mid;
            }
            r_used = hi;
        }
    }

    const double psi = psi_thm2(sp, plant.tau, r_used);
    rep.psi_values["psi"] = psi;
    rep.psi_values["R_rule"] = r_rule;
    rep.psi_values["R_used"] = r_used;
    rep.psi_values["psi_R"] = psi * r_used;

    const RationalTF q_tf = dob.q();
    const RationalTF w_tf = realize_weight(plant.weight);
    const RationalTF one_minus_q = RationalTF::one() - q_tf;
    const double w_star = psi * r_used;

    const std::vector<double> band = logspace(1e-3 * g, w_star, 160);
    const bool eq26_q = holds_for_all(deltas, band, [&](double d, double w) {
        const Complex jw(0.0, w);
        const double lhs = std::abs(q_tf.eval(jw)) / std::abs(one_minus_q.eval(jw));
        const double rhs = (1.0 - sp.alpha) / (sp.alpha * std::abs(1.0 + d * w_tf.eval(jw)));
        return lhs >= rhs;
    });
    bool eq26_boundary = true;
    {
        std::vector<LoopSet> loops;
        for (double d : deltas) loops.push_back(inner_loop(plant, dob, d));
        double min_s = std::numeric_limits<double>::max();
        for (const LoopSet& l : loops) min_s = std::min(min_s, safe_mag(l.S, w_star));
        eq26_boundary = min_s >= sp.alpha;
    }
    bool eq27_gain = true;
    bool eq27_boundary = true;
    if (dob.order == 1) {
        eq27_gain = holds_for_all(deltas, band, [&](double d, double w) {
            const Complex jw(0.0, w);
            return g >= (1.0 - sp.alpha) * w /
                            (sp.alpha * std::abs(1.0 + d * w_tf.eval(jw)));
        });
        for (double d : deltas) {
            const Complex jw(0.0, w_star);
            const Complex denom =
                jw + g * (1.0 + d * w_tf.eval(jw)) * std::exp(-jw * plant.tau);
            eq27_boundary = eq27_boundary && (w_star / std::abs(denom) >= sp.alpha);
        }
    }

    const ExactMetrics m = evaluate_exact_metrics(plant, dob, ControllerSet::none(), sp, deltas);
    rep.literal_checks = {{"eq_q_over_1mq", eq26_q},
                          {"eq_boundary_rise", eq26_boundary},
                          {"eq_first_order_gain", eq27_gain},
                          {"eq_first_order_boundary", eq27_boundary}};
    rep.literal_ok = eq26_q && eq26_boundary && eq27_gain && eq27_boundary;
    rep.peak_S = m.peak_S;
    rep.peak_T = m.peak_T;
    rep.achieved_w_beta = m.w_beta_achieved;
    rep.psi_values["nominal_peak_S"] = m.nominal_peak_S;
    return rep;
}

ConstraintReport check_thm3(const PlantModel& plant, const DobFilter& dob, const DesignSpec& spec,
                            const std::vector<double>& deltas) {
    plant.validate();
    const Classification cls = classify(DelayedTF(plant.nominal, 0.0));
    if (!cls.has_rhp_zero) throw NoRhpZero("check_thm3: plant has no RHP zero");
    if (!plant.approx_nominal) {
        throw MissingApproxNominal("check_thm3: approximate nominal model required");
    }

    ConstraintReport rep;
    rep.backend = Backend::literal;
    rep.theorem = TheoremKind::thm3;

    // anchor at the slowest RHP zero (the binding one)
    std::vector<Complex> zr = rhp_roots(zeros(plant.nominal));
    Complex z_anchor = zr.front();
    for (const Complex& z : zr) {
        if (std::abs(z) < std::abs(z_anchor)) z_anchor = z;
    }
    const double z = std::abs(z_anchor);

    DesignSpec sp = spec;
    sp.k = dob.order;
    const double g = dob.nominal_bandwidth;
    if (!(sp.w_gamma > 0.0)) sp.w_gamma = 2.0 * g;  // the co-sensitivity band rule

    const LoopSet nominal = approx_inverse_loop(plant, dob,
                                                std::clamp(0.0, plant.delta.lo, plant.delta.hi));
    const double b_s_val = blaschke_inv_mag_at(rhp_roots(poles(nominal.L.rational())),
                                               Complex(z, 0.0));
    rep.psi_values["b_s_inv_at_z"] = b_s_val;

    bool psi_ok = true;
    PsiPair pp;
    try {
        pp = psi12_thm3(sp, z, b_s_val);
        rep.psi_values["psi1"] = pp.psi1;
        rep.psi_values["psi2"] = pp.psi2;
        rep.psi_values["z_psi1"] = z * pp.psi1;
        rep.psi_values["z_psi2"] = z * pp.psi2;
        rep.psi_values["bw_floor_from_psi2"] = 0.5 * z * pp.psi2;
        if (pp.degenerate) rep.notes += "psi2 < psi1 under the printed denominators; ";
    } catch (const InfeasibleAngles&) {
        psi_ok = false;
        rep.notes += "angle bounds leave (0, pi/2): no admissible band pair; ";
    }

    const RationalTF r_err = relative_error_tf(plant);
    const RationalTF q_tf = dob.q();
    const RationalTF w_tf = realize_weight(plant.weight);
    const RationalTF one_minus_q = RationalTF::one() - q_tf;

    bool eq37_q = psi_ok, eq37_boundary = psi_ok, eq38_q = psi_ok, eq38_boundary = psi_ok;
    if (psi_ok) {
        const double w1 = z * pp.psi1;
        const std::vector<double> band_lo = logspace(1e-3 * g, w1, 140);
        eq37_q = holds_for_all(deltas, band_lo, [&](double d, double w) {
            const Complex jw(0.0, w);
            const double lhs = std::abs(q_tf.eval(jw)) / std::abs(one_minus_q.eval(jw));
            const double rhs =
                (1.0 - sp.alpha_beta) /
                (sp.alpha_beta * std::abs(r_err.eval(jw) * (1.0 + d * w_tf.eval(jw))));
            return lhs >= rhs;
        });
        std::vector<LoopSet> loops;
        for (double d : deltas) loops.push_back(approx_inverse_loop(plant, dob, d));
        double min_s = std::numeric_limits<double>::max();
        for (const LoopSet& l : loops) min_s = std::min(min_s, safe_mag(l.S, w1));
        eq37_boundary = min_s >= sp.alpha_beta;

        const double w2 = std::max(z * pp.psi2, 1e-3 * g);
        const std::vector<double> band_hi = logspace(w2, 1e3 * std::max(z, g), 200);
        eq38_q = holds_for_all(deltas, band_hi, [&](double d, double w) {
            const Complex jw(0.0, w);
            const double lhs =
                std::abs(r_err.eval(jw) * q_tf.eval(jw) * (1.0 + d * w_tf.eval(jw))) /
                std::abs(one_minus_q.eval(jw));
            return lhs <= sp.alpha_gamma / (1.0 - sp.alpha_gamma);
        });
        double min_t = std::numeric_limits<double>::max();
        for (const LoopSet& l : loops) min_t = std::min(min_t, safe_mag(l.T, w2));
        eq38_boundary = min_t >= sp.alpha_gamma;
    }

    const ExactMetrics m = evaluate_exact_metrics(plant, dob, ControllerSet::none(), sp, deltas);
    rep.literal_checks = {{"eq_perf_q_lower", eq37_q},
                          {"eq_perf_boundary", eq37_boundary},
                          {"eq_rolloff_upper", eq38_q},
                          {"eq_rolloff_boundary", eq38_boundary}};
    rep.literal_ok = eq37_q && eq37_boundary && eq38_q && eq38_boundary;
    rep.peak_S = m.peak_S;
    rep.peak_T = m.peak_T;
    rep.achieved_w_beta = m.w_beta_achieved;
    return rep;
}

ConstraintReport check_thm4(const PlantModel& plant, const DobFilter& dob,
                            const ControllerSet& c_s, const DesignSpec& spec,
                            const std::vector<double>& deltas) {
    plant.validate();
    const Classification cls = classify(DelayedTF(plant.nominal, 0.0));
    if (!cls.has_rhp_pole) throw NoRhpPole("check_thm4: plant has no RHP pole");

    // C_s must stabilize the nominal closed loop
    {
        const LoopSet nominal = outer_loop(plant, dob, c_s,
                                           std::clamp(0.0, plant.delta.lo, plant.delta.hi));
        if (check_closed_loop(nominal) != LoopStability::stable) {
            throw NotStabilized("check_thm4: outer controller fails on the nominal plant");
        }
    }

    ConstraintReport rep;
    rep.backend = Backend::literal;
    rep.theorem = TheoremKind::thm4;

    std::vector<Complex> pr = rhp_roots(poles(plant.nominal));
    Complex p_anchor = pr.front();
    for (const Complex& p : pr) {
        if (std::abs(p) > std::abs(p_anchor)) p_anchor = p;
    }
    const double p = std::abs(p_anchor);

    DesignSpec sp = spec;
    sp.k = dob.order;
    const ExactMetrics m = evaluate_exact_metrics(plant, dob, c_s, sp, deltas);

    const LoopSet nominal = outer_loop(plant, dob, c_s,
                                       std::clamp(0.0, plant.delta.lo, plant.delta.hi));
    const double b_t_val = blaschke_inv_mag_at(
        [&] {
            const RationalTF lr = nominal.L.rational();
            return lr.num().degree() >= 1 ? rhp_roots(roots(lr.num())) : std::vector<Complex>{};
        }(),
        Complex(p, 0.0));
    rep.psi_values["b_t_inv_at_p"] = b_t_val;
    rep.psi_values["t_inf_norm"] = m.peak_T;

    bool psi_ok = true;
    double psi = 0.0;
    try {
        psi = psi_thm4(sp, p, b_t_val, m.peak_T);
        rep.psi_values["psi"] = psi;
        rep.psi_values["p_psi"] = p * psi;
    } catch (const InfeasibleAngles&) {
        psi_ok = false;
        rep.notes += "rolloff angle outside (0, pi/2); ";
    }

    bool eq45 = psi_ok;
    if (psi_ok) {
        const RationalTF q_tf = dob.q();
        const RationalTF w_tf = realize_weight(plant.weight);
        const double w_lo = std::max(p * psi, 1e-6);
        const std::vector<double> band =
            logspace(w_lo, 1e3 * loop_reference_frequency(plant, dob), 200);
        eq45 = holds_for_all(deltas, band, [&](double d, double w) {
            const Complex jw(0.0, w);
            const Complex qw = q_tf.eval(jw) * w_tf.eval(jw);
            const DelayedTF g_pert = perturbed_plant(plant, d);
            const double rhs = (1.0 - sp.alpha) / sp.alpha *
                               std::abs(c_s.outer.eval(jw) * g_pert.eval(jw));
            return std::abs(1.0 + d * qw) >= rhs;
        });
    }

    rep.literal_checks = {{"eq_pole_margin", eq45}};
    rep.literal_ok = eq45;
    rep.peak_S = m.peak_S;
    rep.peak_T = m.peak_T;
    rep.achieved_w_beta = m.w_beta_achieved;
    return rep;
}

PerfLimits perf_limits(const PerformanceSpec& p_spec, std::optional<double> z,
                       std::optional<double> p) {
    PerfLimits out;
    if (z) {
        const double arg = 1.0 - 0.9 / p_spec.y_undershoot;
        if (!(arg > 0.0)) throw DomainError("perf_limits: undershoot log argument <= 0");
        const double nat = 2.1991 * (*z) / std::log(arg);
        const double ten = 2.1991 * (*z) / std::log10(arg);
        out.both_conventions["w_B_upper_nat"] = nat;
        out.both_conventions["w_B_upper_log10"] = ten;
        if (!(nat > 0.0)) {
            throw DomainError("perf_limits: undershoot bound is negative under natural logs");
        }
        out.w_B_upper = nat;
    }
    if (p) {
        const double arg = 10.0 * (p_spec.y_overshoot - 0.9);
        if (!(arg > 0.0)) throw DomainError("perf_limits: overshoot log argument <= 0");
        const double nat = 2.1991 * (*p) / std::log(arg);
        const double ten = 2.1991 * (*p) / std::log10(arg);
        out.both_conventions["w_B_lower_nat"] = nat;
        out.both_conventions["w_B_lower_log10"] = ten;
        out.w_B_lower = nat;
    }
    return out;
}

namespace {

void eq55_frequencies(double g, double tau, double& w1, double& w2) {
    if (!(tau > 0.0)) throw ZeroDelay("refined_delay_bound: tau must be positive");
    double disc = tau * tau * (3.0 - g * tau);
    if (disc < -1e-12 * tau * tau * 3.0) {
        throw DiscriminantNegative("refined_delay_bound: g tau exceeds 3");
    }
    disc = std::max(disc, 0.0);
    const double root = 1.73205 * std::sqrt(disc);
    const double tau3 = tau * tau * tau;
    w1 = std::sqrt((3.0 * tau - root) / tau3);
    w2 = std::sqrt((3.0 * tau + root) / tau3);
}

}  // namespace

RefinedDelayBound refined_delay_bound(double g, double tau, const UncertaintyWeight& weight,
                                      const DesignSpec& spec) {
    weight.validate();
    RefinedDelayBound out;
    eq55_frequencies(g, tau, out.w1, out.w2);

    // closed-form |S|^2 of the nominal delayed loop vs the exact evaluation
    const DelayedTF s_nominal = DelayedTF::delay_fraction(
        Polynomial{0.0, 1.0}, Polynomial{}, Polynomial{0.0, 1.0}, Polynomial{g}, tau);
    const std::vector<double> grid = logspace(1e-3 * g, 1e3 / tau, 500);
    double max_err = 0.0;
    for (double w : grid) {
        const double num = std::abs(s_nominal.eval(Complex(0.0, w)));
        const double closed =
            w * w / (w * w - 2.0 * g * w * std::sin(w * tau) + g * g);
        // relative agreement; the closed form peaks by orders of magnitude
        max_err = std::max(max_err, std::abs(num * num - closed) / std::max(1.0, std::abs(closed)));
    }
    out.eq_check_max_err = max_err;

    // rebalance the sensitivity budget over the peak band [w1, w2]: the
    // performance area runs to the bandwidth itself, the tail starts at w2
    const double sup_ln = std::log(spec.budget_magnitude());
    auto balance = [&](double gp) -> double {
        double w1p = 0.0, w2p = 0.0;
        eq55_frequencies(gp, tau, w1p, w2p);
        const double delta_nom = gp / w2p;
        if (delta_nom > 0.5) return -1.0;  // outside the tail lemma hypothesis
        return -std::log(1.0 / spec.alpha) * gp + sup_ln * (w2p - w1p) +
               3.0 * kPi * delta_nom / (4.0 * tau);
    };
    double lo = 1e-3 / tau, hi = 3.0 / tau;
    if (balance(hi) >= 0.0) {
        out.refined_cap = hi;
    } else if (balance(lo) < 0.0) {
        out.refined_cap = 0.0;
    } else {
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (balance(mid) >= 0.0 ? lo : hi) = mid;
        }
        out.refined_cap = lo;
    }
    return out;
}

namespace {

bool exact_admissible(TheoremKind kind, const ExactMetrics& m, const DesignSpec& spec) {
    const double budget = spec.budget_magnitude();
    switch (kind) {
        case TheoremKind::lemma1: return m.stable_all;
        case TheoremKind::thm1:
            return m.stable_all && m.tail_sup <= spec.delta && m.peak_S <= budget;
        case TheoremKind::thm2: return m.stable_all && m.nominal_peak_S <= budget;
        case TheoremKind::thm3:
            return m.stable_all && m.peak_S <= budget &&
                   (spec.w_beta <= 0.0 || m.w_beta_achieved >= spec.w_beta);
        case TheoremKind::thm4: return m.stable_all && m.peak_S <= budget;
    }
    return false;
}

}  // namespace

ConstraintReport sweep_admissible_bandwidth(const PlantModel& plant, int order,
                                            const DesignSpec& spec, Backend backend,
                                            const std::vector<double>& g_grid,
                                            const ControllerSet& controllers) {
    if (g_grid.size() < 30) {
        throw ValidationError("sweep: need a log-spaced grid with at least 30 points");
    }
    const TheoremKind kind = dispatch_theorem(plant, order);
    const std::vector<double> deltas = plant.delta.sample();

    ConstraintReport rep;
    rep.backend = backend;
    rep.theorem = kind;

    auto admissible_at = [&](double g, GridPointReport* gp) -> bool {
        const DobFilter dob = make_lpf(order, g);
        DesignSpec sp = spec;
        if (kind == TheoremKind::thm3 && !(sp.w_gamma > 0.0)) sp.w_gamma = 2.0 * g;
        sp.k = (kind == TheoremKind::thm1) ? std::max(1, order - 1) : order;
        bool ok = false;
        ExactMetrics m;
        try {
            m = evaluate_exact_metrics(plant, dob, controllers, sp, deltas);
            if (backend == Backend::exact) {
                ok = exact_admissible(kind, m, sp);
            } else {
                switch (kind) {
                    case TheoremKind::thm1:
                    case TheoremKind::lemma1:
                        ok = check_thm1(plant, dob, sp, deltas).literal_ok;
                        break;
                    case TheoremKind::thm2:
                        ok = check_thm2(plant, dob, sp, deltas).literal_ok;
                        break;
                    case TheoremKind::thm3:
                        ok = check_thm3(plant, dob, sp, deltas).literal_ok;
                        break;
                    case TheoremKind::thm4:
                        ok = check_thm4(plant, dob, controllers, sp, deltas).literal_ok;
                        break;
                }
            }
        } catch (const NumericError&) {
            ok = false;
        }
        if (gp) {
            gp->g = g;
            gp->admissible = ok;
            gp->stable = m.stable_all;
            gp->peak_S = m.peak_S;
            gp->peak_T = m.peak_T;
            gp->w_beta_achieved = m.w_beta_achieved;
        }
        return ok;
    };

    rep.grid.resize(g_grid.size());
    par::for_each_index(g_grid.size(),
                        [&](std::size_t i) { admissible_at(g_grid[i], &rep.grid[i]); });

    // maximal contiguous admissible run (log measure)
    std::size_t best_lo = 0, best_hi = 0;
    bool have = false;
    for (std::size_t i = 0; i < rep.grid.size();) {
        if (!rep.grid[i].admissible) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < rep.grid.size() && rep.grid[j + 1].admissible) ++j;
        if (!have || std::log(g_grid[j] / g_grid[i]) > std::log(g_grid[best_hi] / g_grid[best_lo])) {
            best_lo = i;
            best_hi = j;
            have = true;
        }
        i = j + 1;
    }

    if (!have) {
        rep.notes += "no admissible bandwidth on the grid; ";
        return rep;
    }

    double lo_edge = g_grid[best_lo];
    double hi_edge = g_grid[best_hi];
    // bisection refinement to 1% relative width, endpoints kept admissible
    if (best_lo > 0) {
        double bad = g_grid[best_lo - 1], good = lo_edge;
        while ((good - bad) / good > 0.01) {
            const double mid = std::sqrt(bad * good);
            (admissible_at(mid, nullptr) ? good : bad) = mid;
        }
        lo_edge = good;
    }
    if (best_hi + 1 < g_grid.size()) {
        double good = hi_edge, bad = g_grid[best_hi + 1];
        while ((bad - good) / good > 0.01) {
            const double mid = std::sqrt(bad * good);
            (admissible_at(mid, nullptr) ? good : bad) = mid;
        }
        hi_edge = good;
    }
    rep.sweep_interval = std::make_pair(lo_edge, hi_edge);

    // metrics at the admissible upper edge
    GridPointReport edge;
    admissible_at(hi_edge, &edge);
    rep.achieved_w_beta = edge.w_beta_achieved;
    rep.peak_S = edge.peak_S;
    rep.peak_T = edge.peak_T;
    if (kind == TheoremKind::lemma1) {
        rep.notes += "first-order filter, minimum-phase plant: robustness holds across the grid; "
                     "performance follows the filter pole; ";
    }
    return rep;
}

bool nyquist_robust_stability(const PlantModel& plant, const DobFilter& dob,
                              const std::vector<double>& deltas) {
    for (double d : deltas) {
        if (check_closed_loop(inner_loop(plant, dob, d)) != LoopStability::stable) return false;
    }
    return true;
}

}  // namespace dobkit

