#include "dobkit/integral_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "dobkit/errors.hpp"
#include "dobkit/parallel.hpp"

namespace dobkit {

namespace {

constexpr double kPi = std::numbers::pi;

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                            0.741531185599394, 0.586087235467691, 0.405845151377397,
                            0.207784955007898, 0.0};
constexpr double kWgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                            0.140653259715525, 0.169004726639267, 0.190350578064785,
                            0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                           0.417959183673469};

struct Segment {
    double a, b;
    double value = 0.0;
    double error = 0.0;
};

void gk15(const std::function<double(double)>& f, Segment& seg) {
    const double c = 0.5 * (seg.a + seg.b);
    const double h = 0.5 * (seg.b - seg.a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kXgk[i]);
        fv[14 - i] = f(c + h * kXgk[i]);
    }
    fv[7] = f(c);
    double resk = 0.0;
    for (int i = 0; i < 7; ++i) resk += kWgk[i] * (fv[i] + fv[14 - i]);
    resk += kWgk[7] * fv[7];
    double resg = 0.0;
    for (int i = 0; i < 3; ++i) resg += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    resg += kWg[3] * fv[7];
    seg.value = resk * h;
    seg.error = std::abs((resk - resg) * h);
}

}  // namespace

QuadResult gk_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                       double rel_tol, int max_segments) {
    QuadResult out;
    if (a == b) return out;
    std::vector<Segment> done;
    std::vector<Segment> pending{Segment{a, b}};
    int evals = 0;
    while (!pending.empty() && static_cast<int>(done.size() + pending.size()) < max_segments) {
        // evaluate the whole generation in parallel, then decide splits serially
        par::for_each_index(pending.size(), [&](std::size_t i) { gk15(f, pending[i]); });
        evals += static_cast<int>(pending.size()) * 15;

        double total = 0.0;
        for (const Segment& s : done) total += std::abs(s.value);
        for (const Segment& s : pending) total += std::abs(s.value);
        const double tol = std::max(abs_tol, rel_tol * total);

        std::vector<Segment> next;
        for (const Segment& s : pending) {
            const double local_tol = tol * (s.b - s.a) / (b - a);
            if (s.error <= std::max(local_tol, 1e-300) || (s.b - s.a) < 1e-14 * (b - a)) {
                done.push_back(s);
            } else {
                const double m = 0.5 * (s.a + s.b);
                next.push_back(Segment{s.a, m});
                next.push_back(Segment{m, s.b});
            }
        }
        pending = std::move(next);
    }
    if (!pending.empty()) {
        par::for_each_index(pending.size(), [&](std::size_t i) { gk15(f, pending[i]); });
        evals += static_cast<int>(pending.size()) * 15;
        for (const Segment& s : pending) done.push_back(s);
    }
    // deterministic reduction in interval order
    std::sort(done.begin(), done.end(),
              [](const Segment& x, const Segment& y) { return x.a < y.a; });
    for (const Segment& s : done) {
        out.value += s.value;
        out.abs_error += s.error;
    }
    out.evals = evals;
    return out;
}

LoopStability check_closed_loop(const LoopSet& loop) {
    if (!loop.S.has_delay()) {
        const Polynomial cp = loop.char_poly_no_delay();
        if (cp.degree() < 1) return LoopStability::stable;
        LoopStability verdict = LoopStability::stable;
        for (const Complex& r : roots(cp)) {
            const double band = kAxisBand * std::max(1.0, std::abs(r));
            if (r.real() > band) return LoopStability::unstable;
            if (r.real() >= -band) verdict = LoopStability::marginal;
        }
        return verdict;
    }

    // sampled Nyquist winding of 1 + L(jw) for the delayed loop
    const DelayedTF& L = loop.L;
    const RationalTF lr = L.rational();
    int rhp_poles = 0;
    int origin_poles = 0;
    // the pole layout and the delay set the frequency range; zeros do not
    // (a near-degenerate leading coefficient can park one absurdly far out)
    double w_hi_scale = 1.0;
    double w_lo_scale = std::numeric_limits<double>::max();
    if (lr.den().degree() >= 1) {
        for (const Complex& p : poles(lr)) {
            const double mag = std::abs(p);
            w_hi_scale = std::max(w_hi_scale, mag);
            const double band = kAxisBand * std::max(1.0, mag);
            if (p.real() > band) {
                ++rhp_poles;
            } else if (std::abs(p.real()) <= band) {
                if (std::abs(p.imag()) > 1e-6) {
                    throw GridTooCoarse("check_closed_loop: imaginary-axis pole off the origin");
                }
                ++origin_poles;
            }
            if (mag > 1e-6) w_lo_scale = std::min(w_lo_scale, mag);
        }
    }
    if (L.tau() > 0.0) w_hi_scale = std::max(w_hi_scale, 10.0 / L.tau());
    if (w_lo_scale == std::numeric_limits<double>::max()) w_lo_scale = 1.0;

    double w_max = 1e3 * w_hi_scale;
    const double w_min = 1e-7 * std::min(w_lo_scale, w_hi_scale);
    for (int tries = 0; tries < 6; ++tries) {
        if (std::abs(L.eval(Complex(0.0, w_max))) < 0.05) break;
        w_max *= 10.0;
    }

    auto sample_phase = [&](const std::vector<double>& grid, std::vector<double>& phase,
                            double& min_dist) {
        phase.resize(grid.size());
        std::vector<double> dist(grid.size());
        par::for_each_index(grid.size(), [&](std::size_t i) {
            const Complex v = 1.0 + L.eval(Complex(0.0, grid[i]));
            phase[i] = std::arg(v);
            dist[i] = std::abs(v);
        });
        min_dist = *std::min_element(dist.begin(), dist.end());
        // unwrap
        for (std::size_t i = 1; i < phase.size(); ++i) {
            double d = phase[i] - phase[i - 1];
            while (d > kPi) {
                phase[i] -= 2.0 * kPi;
                d -= 2.0 * kPi;
            }
            while (d < -kPi) {
                phase[i] += 2.0 * kPi;
                d += 2.0 * kPi;
            }
        }
    };

    std::vector<double> grid = logspace(w_min, w_max, 3000);
    std::vector<double> phase;
    double min_dist = 0.0;
    const double max_step = 10.0 * kPi / 180.0;
    for (int pass = 0;; ++pass) {
        sample_phase(grid, phase, min_dist);
        double worst = 0.0;
        std::vector<double> refined;
        refined.reserve(grid.size() * 2);
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            refined.push_back(grid[i]);
            const double step = std::abs(phase[i + 1] - phase[i]);
            worst = std::max(worst, step);
            if (step > max_step) {
                // densify this cell
                for (int k = 1; k <= 7; ++k) {
                    refined.push_back(grid[i] + (grid[i + 1] - grid[i]) * k / 8.0);
                }
            }
        }
        refined.push_back(grid.back());
        if (worst <= max_step) break;
        if (pass >= 3) {
            // phase keeps jumping after refinement only when the curve passes
            // hard by the critical point; that configuration has no margin
            if (min_dist < 1e-3) return LoopStability::marginal;
            throw GridTooCoarse("check_closed_loop: Nyquist phase steps above 10 deg after refine");
        }
        grid = std::move(refined);
    }

    if (min_dist < 1e-6) return LoopStability::marginal;

    const double turns_axis = (phase.back() - phase.front()) / (2.0 * kPi);
    const double total = 2.0 * turns_axis - 0.5 * origin_poles;
    const double z_float = rhp_poles - total;
    const double z_round = std::round(z_float);
    if (std::abs(z_float - z_round) > 0.25) {
        throw GridTooCoarse("check_closed_loop: non-integer encirclement count");
    }
    return z_round <= 0.0 ? LoopStability::stable : LoopStability::unstable;
}

TailBound lemma2_tail(double M, int k, double w_gamma, double delta) {
    if (k < 1) throw Error("lemma2_tail: k must be >= 1");
    if (delta > 0.5) {
        throw DeltaTooLarge("lemma2_tail: delta must be <= 1/2 for the log(1+L) bound");
    }
    TailBound t;
    t.kind = TailBound::Kind::lemma2;
    t.value = 3.0 * delta * w_gamma / (2.0 * k);
    t.params = {{"M", M}, {"k", static_cast<double>(k)}, {"w_gamma", w_gamma}, {"delta", delta}};
    return t;
}

TailBound lemma3_tail(double delta, double tau) {
    if (!(tau > 0.0)) throw ZeroDelay("lemma3_tail: tau must be positive");
    if (delta > 0.5) {
        throw DeltaTooLarge("lemma3_tail: delta must be <= 1/2 for the log(1+L) bound");
    }
    TailBound t;
    t.kind = TailBound::Kind::lemma3;
    t.value = 3.0 * kPi * delta / (4.0 * tau);
    t.params = {{"delta", delta}, {"tau", tau}};
    return t;
}

namespace {

double log_abs_s_of(const DelayedTF& S, double w) {
    const double m = std::abs(S.eval(Complex(0.0, w)));
    if (m <= 0.0) return -745.0;  // ln(DBL_MIN)-ish floor; integrable anyway
    return std::log(m);
}

}  // namespace

IntegralResult bode_integral(const LoopSet& loop, double w_max, const TailBound& tail) {
    const LoopStability st = check_closed_loop(loop);
    if (st == LoopStability::unstable) {
        throw UnstableLoop("bode_integral: closed loop is unstable");
    }
    if (st == LoopStability::marginal) {
        throw DivergentNearZero("bode_integral: sensitivity pole on the imaginary axis");
    }

    const DelayedTF& S = loop.S;
    IntegralResult out;
    out.truncation_bound = tail.value;

    // |S| -> 0 as w -> 0 for loops with integral action; substitute w = e^u
    // on the first decade so the log singularity is spread out.
    bool dc_zero = false;
    try {
        dc_zero = std::abs(S.eval(Complex(0.0, 0.0))) < 1e-8;
    } catch (const PoleHit&) {
        dc_zero = true;
    }

    const double w_split = std::min(1.0e-2 * w_max, w_max);
    QuadResult low;
    if (dc_zero && w_split > 0.0) {
        const double u_hi = std::log(w_split);
        const double u_lo = u_hi - 45.0;
        low = gk_adaptive([&](double u) { return log_abs_s_of(S, std::exp(u)) * std::exp(u); },
                          u_lo, u_hi, 1e-10, 1e-9);
    } else {
        low = gk_adaptive([&](double w) { return log_abs_s_of(S, w); }, 0.0, w_split, 1e-10, 1e-9);
    }
    QuadResult high = gk_adaptive([&](double w) { return log_abs_s_of(S, w); }, w_split, w_max,
                                  1e-10, 1e-9, 4000);

    out.value = low.value + high.value;
    out.abs_error_estimate = low.abs_error + high.abs_error;
    out.grid_points_used = low.evals + high.evals;

    // Analytic value for delay-free relative-degree-one loops:
    // int_0^inf ln|S| dw = -(pi/2) lim s L(s).
    if (!loop.L.has_delay()) {
        const RationalTF lr = loop.L.rational();
        if (lr.relative_degree() == 1) {
            const double lim = lr.num().leading() / lr.den().leading();
            out.analytic = -(kPi / 2.0) * lim;
        }
    }
    return out;
}

double semicircle_sup(const DelayedTF& L, double R) {
    if (!(R > 0.0)) throw Error("semicircle_sup: R must be positive");
    auto mag = [&](const Complex& s) -> double {
        try {
            return std::abs(L.eval(s));
        } catch (const PoleHit&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    struct Candidate {
        double param;
        int which;  // 0 = jw axis (param = w), 1 = arc (param = theta)
        double value;
    };
    std::vector<double> ws = logspace(R, 1e3 * R, 721);
    std::vector<Candidate> cands(ws.size() + 181);
    par::for_each_index(ws.size(), [&](std::size_t i) {
        cands[i] = {ws[i], 0, mag(Complex(0.0, ws[i]))};
    });
    par::for_each_index(181, [&](std::size_t k) {
        const double th = 0.5 * kPi * static_cast<double>(k) / 180.0;
        cands[ws.size() + k] = {th, 1, mag(R * Complex(std::cos(th), std::sin(th)))};
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < cands.size(); ++i) {
        if (cands[i].value > cands[best].value) best = i;
    }
    Candidate top = cands[best];
    if (!std::isfinite(top.value)) return top.value;

    // one refinement pass: golden-section around the sampled maximiser
    double lo, hi;
    auto eval_param = [&](double p) -> double {
        if (top.which == 0) return mag(Complex(0.0, p));
        return mag(R * Complex(std::cos(p), std::sin(p)));
    };
    if (top.which == 0) {
        const double f = 1.26;  // one log-grid cell each side
        lo = std::max(R, top.param / f);
        hi = std::min(1e3 * R, top.param * f);
    } else {
        lo = std::max(0.0, top.param - kPi / 360.0);
        hi = std::min(0.5 * kPi, top.param + kPi / 360.0);
    }
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = eval_param(x1), f2 = eval_param(x2);
    for (int it = 0; it < 40; ++it) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = eval_param(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = eval_param(x2);
        }
    }
    return std::max({top.value, f1, f2});
}

namespace {

IntegralResult poisson_weighted(const LoopSet& loop, const DelayedTF& F, const Complex& anchor,
                                const RationalTF& blaschke_tf) {
    if (!(anchor.real() > 0.0)) throw NotRHP("poisson integral: anchor must be in the open RHP");
    const LoopStability st = check_closed_loop(loop);
    if (st == LoopStability::unstable) {
        throw UnstableLoop("poisson integral: closed loop is unstable");
    }

    const double sigma = anchor.real();
    const double w0 = anchor.imag();

    auto integrand = [&](double th) -> double {
        const double w = w0 + sigma * std::tan(th);
        const double m = std::abs(F.eval(Complex(0.0, w)));
        if (m <= 0.0) return -745.0;
        return std::log(m);
    };

    const double eps = 1e-7;
    std::vector<double> breaks{-0.5 * kPi + eps, 0.5 * kPi - eps};
    // split at points where |F| can vanish (DC zero of S, or w = 0 generally)
    bool f_dc_zero = false;
    try {
        f_dc_zero = std::abs(F.eval(Complex(0.0, 0.0))) < 1e-8;
    } catch (const PoleHit&) {
        f_dc_zero = true;
    }
    if (f_dc_zero) {
        const double th0 = std::atan(-w0 / sigma);
        if (th0 > breaks.front() && th0 < breaks.back()) breaks.insert(breaks.begin() + 1, th0);
    }

    IntegralResult out;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const QuadResult q = gk_adaptive(integrand, breaks[i], breaks[i + 1], 1e-9, 1e-8, 4000);
        out.value += q.value;
        out.abs_error_estimate += q.abs_error;
        out.grid_points_used += q.evals;
    }
    // truncated tails at theta -> +-pi/2: ln|F| grows at most like a few
    // log decades; charge a crude bound into the error estimate
    out.abs_error_estimate += 2.0 * eps * 60.0;

    const double b_at = std::abs(blaschke_tf.eval(anchor));
    out.analytic = (b_at > 0.0) ? kPi * std::log(1.0 / b_at)
                                : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace

IntegralResult poisson_sensitivity(const LoopSet& loop, const Complex& z, const RationalTF& b_s) {
    return poisson_weighted(loop, loop.S, z, b_s);
}

IntegralResult poisson_cosensitivity(const LoopSet& loop, const Complex& p, const RationalTF& b_t) {
    return poisson_weighted(loop, loop.T, p, b_t);
}

double theta(double w, double x) {
    if (!(x > 0.0)) throw Error("theta: abscissa must be positive");
    if (w < 0.0) throw Error("theta: frequency must be nonnegative");
    return std::atan(w / x);
}

double peak_lower_bound_thm1(double alpha, double w_beta, double w_gamma, const TailBound& tail) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw BadOrdering("peak bound: need 0 < alpha < 1");
    if (!(0.0 < w_beta && w_beta < w_gamma)) {
        throw BadOrdering("peak bound: need 0 < w_beta < w_gamma");
    }
    return (std::log(1.0 / alpha) * w_beta - tail.value) / (w_gamma - w_beta);
}

bool sensitivity_peak_condition_eq29(const UncertaintyWeight& weight, double tau,
                                     const DobFilter& dob, double w) {
    weight.validate();
    const double a = weight.w_T * weight.e_min;
    const double b = weight.w_T * weight.e_max;
    const double lhs = a / (w * w + a * a) - b / (w * w + b * b);

    double rhs = tau;
    if (dob.order == 1) {
        // rhs = tau
    } else if (dob.order == 2) {
        const double g1 = dob.den_coeffs.at(1);
        rhs += std::abs(g1 / Complex(g1, w));
    } else if (dob.order == 3) {
        const double g1 = dob.den_coeffs.at(1);
        const double g2 = dob.den_coeffs.at(2);
        rhs += (g1 * g2 + g2 * w * w) / (g2 * g2 * w * w + (g1 - w * w) * (g1 - w * w));
    } else {
        throw UnsupportedOrder("eq29: only DOB orders 1-3 are tabulated");
    }
    return lhs > rhs;
}

}  // namespace dobkit
