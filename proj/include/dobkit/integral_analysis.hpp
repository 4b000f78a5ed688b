#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "dobkit/dob_model.hpp"

namespace dobkit {

enum class LoopStability { stable, marginal, unstable };

// Closed-loop stability of a LoopSet: characteristic-polynomial roots for
// rational loops, sampled-Nyquist encirclement counting when dead time is
// present. Throws GridTooCoarse if phase steps stay above 10 degrees after
// one refinement pass.
LoopStability check_closed_loop(const LoopSet& loop);

struct TailBound {
    enum class Kind { none, lemma2, lemma3 };
    double value = 0.0;
    Kind kind = Kind::none;
    std::map<std::string, double> params;
};

// |int_{w_gamma}^inf log|S|| <= 3 delta w_gamma / (2k) for loops bounded by
// |L(jw)| <= M/w^{k+1} = delta <= 1/2 beyond w_gamma.
TailBound lemma2_tail(double M, int k, double w_gamma, double delta);

// Delay version: |int_R^inf log|S|| <= 3 pi delta / (4 tau).
TailBound lemma3_tail(double delta, double tau);

struct IntegralResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    double truncation_bound = 0.0;
    int grid_points_used = 0;
    // analytic comparison value when one exists: the residue term for the
    // relative-degree-one Bode integral, or the Poisson right-hand side
    std::optional<double> analytic;
};

// Adaptive Gauss-Kronrod quadrature of ln|S(jw)| over [0, w_max], with a
// log substitution near w = 0 where |S| -> 0. truncation_bound is taken
// from the tail argument. For relative-degree-one delay-free loops the
// analytic field carries -(pi/2) lim s L(s).
IntegralResult bode_integral(const LoopSet& loop, double w_max, const TailBound& tail);

// max |L| over {jw : w >= R} and the quarter circle R e^{j theta},
// theta in [0, pi/2], sampled with one refinement pass around the maximum.
double semicircle_sup(const DelayedTF& L, double R);

// Poisson integral of ln|S| against the kernel anchored at the RHP zero z,
// computed with the arctan change of variables; analytic holds the right
// side pi ln|B_S^{-1}(z)|.
IntegralResult poisson_sensitivity(const LoopSet& loop, const Complex& z, const RationalTF& b_s);
// Mirror for the co-sensitivity at a RHP pole p with the RHP-zero product B_T.
IntegralResult poisson_cosensitivity(const LoopSet& loop, const Complex& p, const RationalTF& b_t);

// arctan(w/x): the Poisson weight integral used by the RHP-zero theorem.
double theta(double w, double x);

// Waterbed lower bound on sup log|S| over [w_beta, w_gamma]:
// ln(1/alpha) w_beta/(w_gamma - w_beta) - tail/(w_gamma - w_beta).
double peak_lower_bound_thm1(double alpha, double w_beta, double w_gamma, const TailBound& tail);

// Phase-rate comparison deciding whether the weight's phase lead can beat
// the delay-plus-filter lag at frequency w (orders 1 to 3 only).
bool sensitivity_peak_condition_eq29(const UncertaintyWeight& weight, double tau,
                                     const DobFilter& dob, double w);

// Low-level adaptive quadrature (exposed for tests and the benchmark).
struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    int evals = 0;
};
QuadResult gk_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                       double rel_tol, int max_segments = 2000);

}  // namespace dobkit
