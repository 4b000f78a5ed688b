#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dobkit/errors.hpp"
#include "dobkit/integral_analysis.hpp"
#include "test_util.hpp"

using namespace dobkit;
using testutil::Rng;

namespace {
constexpr double kPi = std::numbers::pi;

LoopSet loop_from_rational(const RationalTF& l) {
    LoopSet ls;
    ls.L = DelayedTF(l);
    ls.S = DelayedTF::delay_fraction(l.den(), Polynomial{}, l.den() + l.num(), Polynomial{}, 0.0);
    ls.T = DelayedTF::delay_fraction(l.num(), Polynomial{}, l.den() + l.num(), Polynomial{}, 0.0);
    return ls;
}

// stable loop with stable closed loop, relative degree >= 2
RationalTF random_stable_loop(Rng& rng, int rel_deg_min) {
    for (;;) {
        const int dn = rng.integer(rel_deg_min, 5);
        const int nn = std::max(0, dn - rel_deg_min);
        Polynomial num = nn == 0 ? Polynomial{1.0} : testutil::stable_poly(rng, rng.integer(0, nn));
        const RationalTF l(rng.log_uniform(0.1, 30.0) * num, testutil::stable_poly(rng, dn));
        if (l.relative_degree() < rel_deg_min) continue;
        bool stable = true;
        for (const Complex& r : roots(l.den() + l.num())) {
            if (r.real() >= -1e-9) stable = false;
        }
        if (stable) return l;
    }
}

}  // namespace

TEST_CASE("quadrature core") {
    const QuadResult q1 = gk_adaptive([](double x) { return std::sin(x); }, 0.0, kPi, 1e-12, 1e-12);
    CHECK(q1.value == doctest::Approx(2.0).epsilon(1e-12));

    // integrable log singularity
    const QuadResult q2 =
        gk_adaptive([](double x) { return std::log(x); }, 0.0, 1.0, 1e-10, 1e-10, 4000);
    CHECK(q2.value == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("lemma tail bounds") {
    const TailBound t1 = lemma2_tail(0.0, 1, 100.0, 0.4);
    CHECK(t1.value == doctest::Approx(60.0));
    CHECK(lemma2_tail(0.0, 1, 100.0, 0.0).value == 0.0);
    CHECK_THROWS_AS(lemma2_tail(0.0, 1, 100.0, 0.6), DeltaTooLarge);

    const TailBound t2 = lemma3_tail(0.1, 0.01);
    CHECK(t2.value == doctest::Approx(23.5619).epsilon(1e-4));
    CHECK(lemma3_tail(0.0, 0.01).value == 0.0);
    CHECK(lemma3_tail(0.1, 10.0).value < lemma3_tail(0.1, 0.1).value);
    CHECK_THROWS_AS(lemma3_tail(0.1, 0.0), ZeroDelay);

    // bit-level determinism
    CHECK(lemma2_tail(3.0, 2, 50.0, 0.25).value == lemma2_tail(3.0, 2, 50.0, 0.25).value);
}

TEST_CASE("bode integral of the integrator loop") {
    // L = g/s  ->  int_0^inf ln|S| dw = -(pi/2) g
    const double g = 10.0;
    const RationalTF l(Polynomial{g}, Polynomial{0.0, 1.0});
    const LoopSet loop = loop_from_rational(l);
    const double w_max = 2e4;
    TailBound tail;
    tail.value = g * g / (2.0 * w_max) * 1.5;
    const IntegralResult r = bode_integral(loop, w_max, tail);
    CHECK(std::abs(r.value - (-kPi / 2.0 * g)) <= 0.02);
    REQUIRE(r.analytic.has_value());
    CHECK(*r.analytic == doctest::Approx(-kPi / 2.0 * g));
}

TEST_CASE("bode integral open loop is zero") {
    const LoopSet loop = loop_from_rational(RationalTF::zero());  // S identically 1
    const IntegralResult r = bode_integral(loop, 100.0, TailBound{});
    CHECK(std::abs(r.value) < 1e-12);
}

TEST_CASE("bode integral rejects unstable and marginal loops") {
    const RationalTF unstable(Polynomial{-3.0}, Polynomial{1.0, 1.0});  // 1+L has RHP root
    CHECK_THROWS_AS(bode_integral(loop_from_rational(unstable), 100.0, TailBound{}), UnstableLoop);

    const RationalTF marginal(Polynomial{1.0, 1.0}, Polynomial{-1.0, 0.0, 1.0});
    CHECK_THROWS_AS(bode_integral(loop_from_rational(marginal), 100.0, TailBound{}),
                    DivergentNearZero);
}

TEST_CASE("bode integral beats the tail bound on random loops") {
    Rng rng(2025);
    int done = 0;
    while (done < 20) {
        const RationalTF l = random_stable_loop(rng, 2);
        const int k = l.relative_degree() - 1;

        double w_gamma = 1.0;
        for (const Complex& r : roots(l.den())) w_gamma = std::max(w_gamma, 2.0 * std::abs(r));
        if (l.num().degree() >= 1) {
            for (const Complex& r : roots(l.num())) w_gamma = std::max(w_gamma, 2.0 * std::abs(r));
        }
        const LoopSet loop = loop_from_rational(l);

        double M = 0.0, delta = 1.0;
        for (int tries = 0; tries < 40 && delta > 0.5; ++tries) {
            M = 0.0;
            for (double w : logspace(w_gamma, 1e4 * w_gamma, 800)) {
                M = std::max(M, std::abs(l.eval(Complex(0.0, w))) * std::pow(w, k + 1));
            }
            M *= 1.05;
            delta = M / std::pow(w_gamma, k + 1);
            if (delta > 0.5) w_gamma *= 1.6;
        }
        if (delta > 0.5) continue;

        const TailBound tail = lemma2_tail(M, k, w_gamma, delta);
        const IntegralResult r = bode_integral(loop, w_gamma, tail);
        CHECK(std::abs(r.value) <= tail.value + 10.0 * r.abs_error_estimate);
        ++done;
    }
}

TEST_CASE("relative-degree-one residue consistency") {
    Rng rng(606);
    int done = 0;
    while (done < 20) {
        const RationalTF l = random_stable_loop(rng, 1);
        if (l.relative_degree() != 1) continue;
        const LoopSet loop = loop_from_rational(l);
        const double w_max = 2e4 * std::max(1.0, std::abs(l.num().leading() / l.den().leading()));
        // tail estimate from the measured decay of ln|S| (~ C / w^2)
        const double tail_est =
            2.0 * w_max * std::abs(std::log(std::abs(loop.S.eval(Complex(0.0, w_max)))));
        TailBound tail;
        tail.value = tail_est;
        const IntegralResult r = bode_integral(loop, w_max, tail);
        REQUIRE(r.analytic.has_value());
        CHECK(std::abs(r.value - *r.analytic) <= tail.value + 10.0 * r.abs_error_estimate + 1e-6);
        ++done;
    }
}

TEST_CASE("semicircle sup") {
    const double g = 20.0;
    const DelayedTF l(RationalTF(Polynomial{g}, Polynomial{0.0, 1.0}));
    CHECK(semicircle_sup(l, 10.0 * g) == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(semicircle_sup(DelayedTF(RationalTF::zero()), 5.0) == 0.0);

    // a delay changes nothing on the imaginary axis and can only shrink the
    // magnitude on the arc
    const DelayedTF ld(RationalTF(Polynomial{g}, Polynomial{0.0, 1.0}), 0.001);
    CHECK(semicircle_sup(ld, 10.0 * g) == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("poisson kernel normalization") {
    Rng rng(13);
    for (int i = 0; i < 20; ++i) {
        const double sigma = rng.log_uniform(0.1, 100.0);
        const double w0 = rng.uniform(-50.0, 50.0);
        const double big = 1e5 * sigma;
        const QuadResult q = gk_adaptive(
            [&](double w) { return sigma / (sigma * sigma + (w0 - w) * (w0 - w)); }, w0 - big,
            w0 + big, 1e-9, 1e-10, 4000);
        const double tails = (kPi / 2.0 - std::atan(big / sigma)) * 2.0;
        CHECK(std::abs(q.value + tails - kPi) <= 1e-6);
    }
}

TEST_CASE("poisson integrals on simple loops") {
    // L = k/(s - p) stabilized: T has no RHP zero, so the weighted integral
    // of ln|T| anchored at p vanishes
    const double p = 2.0, k = 7.0;
    const RationalTF l(Polynomial{k}, Polynomial{-p, 1.0});
    const LoopSet loop = loop_from_rational(l);
    const IntegralResult r = poisson_cosensitivity(loop, Complex(p, 0.0), blaschke({}));
    CHECK(*r.analytic == 0.0);
    CHECK(std::abs(r.value) <= 2e-3);

    // sensitivity side with a RHP zero: L = k(z-s)/(s+a)^2
    const double z = 5.0;
    const RationalTF lz(0.8 * Polynomial{z, -1.0}, Polynomial{100.0, 20.0, 1.0});
    const LoopSet loop_z = loop_from_rational(lz);
    const IntegralResult rz = poisson_sensitivity(loop_z, Complex(z, 0.0), blaschke({}));
    CHECK(std::abs(rz.value - *rz.analytic) <= 2e-3);
}

TEST_CASE("theta weight") {
    CHECK(theta(5.0, 5.0) == doctest::Approx(kPi / 4.0));
    CHECK(theta(0.0, 3.0) == 0.0);
    CHECK(theta(1e9, 2.0) == doctest::Approx(kPi / 2.0).epsilon(1e-8));
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const double x = rng.log_uniform(0.1, 100.0);
        const double w1 = rng.log_uniform(1e-3, 1e3);
        const double w2 = w1 * rng.log_uniform(1.001, 10.0);
        CHECK(theta(w2, x) > theta(w1, x));
    }
}

TEST_CASE("peak lower bound") {
    TailBound none;
    // alpha -> 1: no demand, bound -> 0
    CHECK(peak_lower_bound_thm1(0.999999, 10.0, 100.0, none) ==
          doctest::Approx(0.0).epsilon(1e-3));
    // performance band filling the budget blows the bound up
    CHECK(peak_lower_bound_thm1(0.1, 99.99, 100.0, none) >
          peak_lower_bound_thm1(0.1, 50.0, 100.0, none));
    CHECK_THROWS_AS(peak_lower_bound_thm1(0.1, 100.0, 50.0, none), BadOrdering);

    const TailBound t = lemma2_tail(0.0, 1, 100.0, 0.4);
    const double v = peak_lower_bound_thm1(0.1, 46.0, 100.0, t);
    CHECK(v == doctest::Approx((std::log(10.0) * 46.0 - 60.0) / 54.0).epsilon(1e-12));
}

TEST_CASE("phase-rate condition") {
    const UncertaintyWeight w42{200.0, 0.4, 3.0};
    // large delay dominates everywhere
    for (double w : {0.1, 1.0, 10.0, 100.0}) {
        CHECK(!sensitivity_peak_condition_eq29(w42, 10.0, make_lpf(1, 50.0), w));
    }
    // equal error levels: left side is identically zero
    const UncertaintyWeight flat_ish{100.0, 0.999, 1.0};
    CHECK(!sensitivity_peak_condition_eq29(flat_ish, 0.0001, make_lpf(1, 50.0), 10.0));

    // hand evaluation at w = 10 for the dead-time case study weight:
    // lhs = 80/6500 - 600/360100, rhs = tau = 0.01
    const double lhs = 80.0 / 6500.0 - 600.0 / 360100.0;
    CHECK(lhs > 0.01);
    CHECK(sensitivity_peak_condition_eq29(w42, 0.01, make_lpf(1, 50.0), 10.0));

    CHECK_THROWS_AS(sensitivity_peak_condition_eq29(w42, 0.01, make_lpf(4, 50.0), 10.0),
                    UnsupportedOrder);
}
