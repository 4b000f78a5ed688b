#include "dobkit/dob_model.hpp"

#include <algorithm>
#include <cmath>

#include "dobkit/errors.hpp"

namespace dobkit {

void UncertaintyWeight::validate() const {
    if (!(w_T > 0.0)) throw ValidationError("weight: w_T must be > 0");
    if (!(e_min >= 0.0)) throw ValidationError("weight: e_min must be >= 0");
    if (!(e_max > 0.0)) throw ValidationError("weight: e_max must be > 0");
    if (!(e_min < e_max)) throw ValidationError("weight: e_min must be < e_max");
}

RationalTF realize_weight(const UncertaintyWeight& w) {
    w.validate();
    return RationalTF(Polynomial{w.e_min, 1.0 / w.w_T}, Polynomial{1.0, 1.0 / (w.w_T * w.e_max)});
}

UncertaintyWeight weight_from_rational(const RationalTF& w) {
    if (w.num().degree() != 1 || w.den().degree() != 1) {
        throw ValidationError("weight: rational form must be first order over first order");
    }
    const double d0 = w.den().coeff(0);
    if (d0 == 0.0) throw ValidationError("weight: denominator constant term is zero");
    const double a = w.num().coeff(1) / d0;  // w_T^{-1}
    const double b = w.num().coeff(0) / d0;  // e_min
    const double c = w.den().coeff(1) / d0;  // w_T^{-1} e_max^{-1}
    if (!(a > 0.0) || !(c > 0.0)) throw ValidationError("weight: coefficients must be positive");
    UncertaintyWeight uw{1.0 / a, b, a / c};
    uw.validate();
    return uw;
}

void DeltaInterval::validate(double e_max) const {
    if (!(lo <= hi)) throw ValidationError("delta: lo must be <= hi");
    if (!(lo >= -1.0 / e_max + 1e-9)) {
        throw ValidationError("delta: lo violates -1/e_max < delta (RHP zero would be added)");
    }
    if (!(hi <= 1.0)) throw ValidationError("delta: hi must be <= 1");
}

std::vector<double> DeltaInterval::sample(int n) const {
    if (n < 2 || lo == hi) return {lo};
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        s[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    }
    return s;
}

void PlantModel::validate() const {
    weight.validate();
    delta.validate(weight.e_max);
    if (tau < 0.0) throw ValidationError("plant: tau must be >= 0");
    if (nominal.relative_degree() < 0) throw ValidationError("plant: nominal model is improper");
    if (approx_nominal) {
        const Classification c = classify(*approx_nominal);
        if (!c.is_stable) throw ValidationError("plant: approx_nominal must be stable");
        if (!c.is_minimum_phase) {
            throw ValidationError("plant: approx_nominal must be minimum-phase");
        }
    }
}

RationalTF DobFilter::q() const {
    std::vector<double> den(den_coeffs);
    den.resize(static_cast<std::size_t>(order) + 1, 0.0);
    den[static_cast<std::size_t>(order)] = 1.0;
    return RationalTF(Polynomial{den_coeffs.at(0)}, Polynomial(std::move(den)));
}

double DobFilter::three_db_frequency() const {
    return nominal_bandwidth * std::sqrt(std::pow(2.0, 1.0 / order) - 1.0);
}

DobFilter make_lpf(int order, double g) {
    if (order < 1) throw ValidationError("dob: order must be >= 1");
    if (!(g > 0.0)) throw ValidationError("dob: bandwidth must be > 0");
    // (s + g)^order expanded
    Polynomial den{1.0};
    for (int i = 0; i < order; ++i) den = den * Polynomial{g, 1.0};
    std::vector<double> coeffs(den.coeffs().begin(), den.coeffs().end() - 1);
    return DobFilter{order, std::move(coeffs), g};
}

DobFilter make_lpf_raw(int order, std::vector<double> den_coeffs) {
    if (order < 1) throw ValidationError("dob: order must be >= 1");
    if (static_cast<int>(den_coeffs.size()) != order) {
        throw ValidationError("dob: need exactly g_0 ... g_{order-1}");
    }
    std::vector<double> full(den_coeffs);
    full.push_back(1.0);
    for (const Complex& r : roots(Polynomial(full))) {
        if (r.real() >= -kAxisBand) {
            throw ValidationError("dob: filter denominator root not in the open left half plane");
        }
    }
    const double g = std::pow(den_coeffs[0], 1.0 / order);  // geometric-mean pole magnitude
    return DobFilter{order, std::move(den_coeffs), g};
}

DelayedTF perturbed_plant(const PlantModel& p, double delta) {
    if (delta < p.delta.lo - 1e-12 || delta > p.delta.hi + 1e-12) {
        throw DeltaOutOfRange("perturbed_plant: delta outside the admissible interval");
    }
    const RationalTF w = realize_weight(p.weight);
    return DelayedTF(p.nominal * (RationalTF::one() + delta * w), p.tau);
}

namespace {

struct LoopPieces {
    Polynomial one_minus_q;  // dq - nq over dq
    Polynomial nq;
    Polynomial dq;
    Polynomial wnum_pert;  // dw + delta*nw
    Polynomial dw;
};

LoopPieces loop_pieces(const PlantModel& p, const DobFilter& q, double delta) {
    if (delta < p.delta.lo - 1e-12 || delta > p.delta.hi + 1e-12) {
        throw DeltaOutOfRange("loop: delta outside the admissible interval");
    }
    const RationalTF qt = q.q();
    const RationalTF w = realize_weight(p.weight);
    LoopPieces lp;
    lp.nq = qt.num();
    lp.dq = qt.den();
    lp.one_minus_q = lp.dq - lp.nq;
    lp.dw = w.den();
    lp.wnum_pert = w.den() + delta * w.num();
    return lp;
}

LoopSet loops_from_parts(Polynomial l_num, Polynomial l_den, double tau, LoopKind which) {
    // L = l_num e^{-tau s} / l_den, S = l_den / (l_den + l_num e^{-tau s})
    LoopSet ls;
    ls.which = which;
    ls.L = DelayedTF::delay_fraction(Polynomial{}, l_num, l_den, Polynomial{}, tau);
    ls.S = DelayedTF::delay_fraction(l_den, Polynomial{}, l_den, l_num, tau);
    ls.T = DelayedTF::delay_fraction(Polynomial{}, l_num, l_den, l_num, tau);
    return ls;
}

}  // namespace

LoopSet inner_loop(const PlantModel& p, const DobFilter& q, double delta) {
    const LoopPieces lp = loop_pieces(p, q, delta);
    // L_i = [Q/(1-Q)] (1 + delta W) e^{-tau s}
    return loops_from_parts(lp.nq * lp.wnum_pert, lp.one_minus_q * lp.dw, p.tau, LoopKind::inner);
}

LoopSet inner_loop_verbatim(const PlantModel& p, const DobFilter& q, double delta) {
    const LoopPieces lp = loop_pieces(p, q, delta);
    const Polynomial ng = p.nominal.num();
    const Polynomial dg = p.nominal.den();
    // L_i = G Q / (G_n (1 - Q)), G = G_n (1 + delta W) e^{-tau s}
    return loops_from_parts(ng * lp.wnum_pert * lp.nq * dg, dg * lp.dw * ng * lp.one_minus_q, p.tau,
                            LoopKind::inner);
}

LoopSet outer_loop(const PlantModel& p, const DobFilter& q, const ControllerSet& c, double delta) {
    const LoopPieces lp = loop_pieces(p, q, delta);
    const Polynomial nc = c.outer.num();
    const Polynomial dc = c.outer.den();
    const Polynomial ng = p.nominal.num();
    const Polynomial dg = p.nominal.den();

    if (p.approx_nominal) {
        // L_o = C G / (1 - Q + r_err (1 + delta W) Q) with r_err = G_n/G_n_hat
        // = (ng dh)/(dg nh). Over the common denominator dq dg nh dw the
        // loop denominator reads (dq-nq) dg nh dw + ng dh (dw + d nw) nq;
        // the dg dw factors of C G cancel against it structurally.
        const Polynomial nh = p.approx_nominal->num();
        const Polynomial dh = p.approx_nominal->den();
        const Polynomial den_expr =
            lp.one_minus_q * dg * nh * lp.dw + ng * dh * lp.wnum_pert * lp.nq;
        const Polynomial l_num = nc * ng * lp.wnum_pert * lp.dq * nh;
        const Polynomial l_den = dc * den_expr;
        return loops_from_parts(l_num, l_den, p.tau, LoopKind::outer);
    }

    // Reduced Eq form: L_o = C G_n (1+dW) e / ((1-Q) + Q (1+dW) e)
    const Polynomial l_num = nc * ng * lp.wnum_pert * lp.dq;
    const Polynomial den_plain = dc * dg * lp.one_minus_q * lp.dw;
    const Polynomial den_delay = dc * dg * lp.nq * lp.wnum_pert;

    LoopSet ls;
    ls.which = LoopKind::outer;
    ls.L = DelayedTF::delay_fraction(Polynomial{}, l_num, den_plain, den_delay, p.tau);
    ls.S = DelayedTF::delay_fraction(den_plain, den_delay, den_plain, den_delay + l_num, p.tau);
    ls.T = DelayedTF::delay_fraction(Polynomial{}, l_num, den_plain, den_delay + l_num, p.tau);
    return ls;
}

RationalTF relative_error_tf(const PlantModel& p) {
    if (!p.approx_nominal) {
        throw MissingApproxNominal("relative_error_tf: plant has no approximate nominal model");
    }
    const Classification c = classify(*p.approx_nominal);
    if (c.has_rhp_zero || c.marginal_zero) {
        throw UnstableInverse("relative_error_tf: approximate nominal model has no stable inverse");
    }
    return p.nominal / *p.approx_nominal;
}

LoopSet approx_inverse_loop(const PlantModel& p, const DobFilter& q, double delta) {
    const RationalTF r_err = relative_error_tf(p);
    const LoopPieces lp = loop_pieces(p, q, delta);
    // L_i = r_err (1 + delta W_T) Q/(1-Q)   (tau = 0 in this configuration)
    const Polynomial l_num = r_err.num() * lp.wnum_pert * lp.nq;
    const Polynomial l_den = r_err.den() * lp.dw * lp.one_minus_q;
    return loops_from_parts(l_num, l_den, p.tau, LoopKind::inner);
}

RationalTF mirror_approx_nominal(const RationalTF& g_n) {
    const Classification c = classify(g_n);
    if (!c.has_rhp_zero) throw NoRhpZero("mirror_approx_nominal: no RHP zero to mirror");
    std::vector<Complex> zs = zeros(g_n);
    std::vector<Complex> mirrored;
    mirrored.reserve(zs.size());
    for (const Complex& z : zs) {
        mirrored.push_back(z.real() > kAxisBand ? Complex(-z.real(), z.imag()) : z);
    }
    Polynomial num = polynomial_from_roots(mirrored);
    // preserve DC gain (fall back to matching leading gain for zero-at-origin cases)
    const double old_dc = g_n.num().coeff(0);
    const double new_dc = num.coeff(0);
    double gain = 0.0;
    if (std::abs(new_dc) > 1e-300) {
        gain = old_dc / new_dc;
    } else {
        gain = g_n.num().leading() / num.leading();
    }
    return RationalTF(gain * num, g_n.den());
}

}  // namespace dobkit
