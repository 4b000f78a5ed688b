#pragma once

#include <optional>
#include <vector>

#include "dobkit/tf_core.hpp"

namespace dobkit {

// First-order multiplicative uncertainty weight
//   W(s) = (w_T^{-1} s + e_min) / (w_T^{-1} e_max^{-1} s + 1)
// W(0) = e_min, |W(j inf)| = e_max; w_T is where the nominal model stops
// being a useful description of the plant.
struct UncertaintyWeight {
    double w_T = 1.0;
    double e_min = 0.0;
    double e_max = 1.0;

    void validate() const;
};

RationalTF realize_weight(const UncertaintyWeight& w);
// Inverse of realize_weight for a first-over-first rational weight.
UncertaintyWeight weight_from_rational(const RationalTF& w);

// Admissible range of the scalar uncertainty: -1/e_max < lo <= hi <= 1,
// so the uncertainty cannot introduce a RHP zero.
struct DeltaInterval {
    double lo = 0.0;
    double hi = 0.0;

    void validate(double e_max) const;
    // endpoints plus an interior grid (n points total, default 13)
    std::vector<double> sample(int n = 13) const;
};

struct PlantModel {
    RationalTF nominal;                        // G_n
    UncertaintyWeight weight;                  // W (or W_T)
    DeltaInterval delta;                       // admissible uncertainty range
    double tau = 0.0;                          // dead time, seconds
    std::optional<RationalTF> approx_nominal;  // minimum-phase stand-in for G_n

    void validate() const;
};

// n-th order low-pass filter Q(s) = g_0 / (s^n + g_{n-1} s^{n-1} + ... + g_0).
// Unity DC gain by construction; relative degree equals the order.
struct DobFilter {
    int order = 1;
    std::vector<double> den_coeffs;  // g_0 ... g_{n-1}
    double nominal_bandwidth = 0.0;  // the pole parameter g used to generate them

    RationalTF q() const;
    // exact -3 dB frequency g * sqrt(2^{1/order} - 1) for the binomial pattern
    double three_db_frequency() const;
};

// Repeated-pole (binomial) filter: denominator (s + g)^order.
DobFilter make_lpf(int order, double g);
// Free-coefficient construction; validates that every denominator root is
// strictly in the left half plane.
DobFilter make_lpf_raw(int order, std::vector<double> den_coeffs);

struct ControllerSet {
    RationalTF outer;                       // C, or the stabilizing C_s
    std::optional<RationalTF> prefilter;    // C_p, reference shaping only

    static ControllerSet none() { return ControllerSet{RationalTF::zero(), std::nullopt}; }
};

enum class LoopKind { inner, outer };

// Open loop L plus the sensitivity pair S = 1/(1+L), T = L/(1+L), all
// carried exactly (the delayed case keeps e^{-tau s} in the fraction).
struct LoopSet {
    DelayedTF L;
    DelayedTF S;
    DelayedTF T;
    LoopKind which = LoopKind::inner;

    // q0 + q1 of S: the closed-loop characteristic polynomial when tau = 0
    Polynomial char_poly_no_delay() const { return S.char_poly_no_delay(); }
};

// G = G_n (1 + delta W) e^{-tau s}
DelayedTF perturbed_plant(const PlantModel& p, double delta);

// Inner loop in the reduced form L_i = [Q/(1-Q)] (1 + delta W) e^{-tau s};
// the nominal plant cancels analytically so no near-cancellation occurs.
LoopSet inner_loop(const PlantModel& p, const DobFilter& q, double delta);

// Literal assembly of the inner loop from G, G_n and Q. Kept as a
// cross-check path; pointwise it matches inner_loop wherever both are
// defined, but it carries the uncancelled G_n factors.
LoopSet inner_loop_verbatim(const PlantModel& p, const DobFilter& q, double delta);

// Outer loop; uses the approximate-inverse form when p.approx_nominal is set.
LoopSet outer_loop(const PlantModel& p, const DobFilter& q, const ControllerSet& c, double delta);

// Inner loop for plants driven through an approximate minimum-phase
// nominal model: L_i = r_err (1 + delta W) Q/(1-Q), r_err = G_n / G_n_hat.
LoopSet approx_inverse_loop(const PlantModel& p, const DobFilter& q, double delta);

// r_err = G_n / approx_nominal, formed without cancelling anything.
RationalTF relative_error_tf(const PlantModel& p);

// Replaces each RHP zero z of g_n by -conj(z), preserving DC gain; the
// result has the same magnitude response and a stable inverse.
RationalTF mirror_approx_nominal(const RationalTF& g_n);

}  // namespace dobkit
