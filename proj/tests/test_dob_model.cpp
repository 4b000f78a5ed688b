#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dobkit/dob_model.hpp"
#include "dobkit/errors.hpp"
#include "test_util.hpp"

using namespace dobkit;
using testutil::Rng;

TEST_CASE("make_lpf") {
    const DobFilter q1 = make_lpf(1, 100.0);
    const RationalTF q1_tf = q1.q();
    CHECK(q1_tf.num().coeff(0) == 100.0);
    CHECK(q1_tf.den().coeff(0) == 100.0);
    CHECK(q1_tf.den().coeff(1) == 1.0);

    const DobFilter q2 = make_lpf(2, 100.0);
    const RationalTF q2_tf = q2.q();
    CHECK(q2_tf.den().coeff(0) == doctest::Approx(1e4));
    CHECK(q2_tf.den().coeff(1) == doctest::Approx(200.0));
    CHECK(q2.three_db_frequency() == doctest::Approx(64.3594).epsilon(1e-4));

    for (int order : {1, 2, 3}) {
        const RationalTF q = make_lpf(order, 50.0).q();
        CHECK(std::abs(q.eval(Complex(0.0, 0.0))) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(q.relative_degree() == order);
    }

    CHECK_THROWS_AS(make_lpf(0, 10.0), ValidationError);
    CHECK_THROWS_AS(make_lpf_raw(2, {100.0, -3.0}), ValidationError);  // unstable coefficients
}

TEST_CASE("realize_weight") {
    const UncertaintyWeight w{100.0, 0.2, 5.0};
    const RationalTF wt = realize_weight(w);
    // matches (5s+100)/(s+500) after clearing denominators
    CHECK(std::abs(wt.eval(Complex(0.0, 0.0))) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(wt.num().leading() / wt.den().leading() == doctest::Approx(5.0).epsilon(1e-14));
    const Complex at700(0.0, 700.0);
    const Complex direct = RationalTF(Polynomial{100.0, 5.0}, Polynomial{500.0, 1.0}).eval(at700);
    CHECK(std::abs(wt.eval(at700) - direct) < 1e-12 * std::abs(direct));

    UncertaintyWeight flat{10.0, 2.0, 2.0};
    CHECK_THROWS_AS(realize_weight(flat), ValidationError);

    const UncertaintyWeight round_trip = weight_from_rational(wt);
    CHECK(round_trip.w_T == doctest::Approx(100.0));
    CHECK(round_trip.e_min == doctest::Approx(0.2));
    CHECK(round_trip.e_max == doctest::Approx(5.0));
}

TEST_CASE("perturbed_plant") {
    PlantModel p = testutil::simple_min_phase_plant();
    const DelayedTF g0 = perturbed_plant(p, 0.0);
    CHECK(std::abs(g0.eval(Complex(0.0, 1.0)) - p.nominal.eval(Complex(0.0, 1.0))) < 1e-14);

    // delta = 1 at DC: G(0) = G_n(0) (1 + W(0)) = (5/6) * 1.2 = 1
    const DelayedTF g1 = perturbed_plant(p, 1.0);
    CHECK(g1.eval(Complex(0.0, 0.0)).real() == doctest::Approx(1.0).epsilon(1e-12));

    p.tau = 0.01;
    const DelayedTF gd = perturbed_plant(p, 0.0);
    CHECK(gd.tau() == 0.01);
    const Complex s(0.0, 30.0);
    CHECK(std::abs(gd.eval(s) - p.nominal.eval(s) * std::exp(-0.01 * s)) < 1e-14);

    CHECK_THROWS_AS(perturbed_plant(p, 2.0), DeltaOutOfRange);
}

TEST_CASE("inner loop reduced form") {
    PlantModel p = testutil::simple_min_phase_plant();

    // delta = 0: plant-independent nominal loop, g/s for first order
    const DobFilter q1 = make_lpf(1, 80.0);
    const LoopSet nominal = inner_loop(p, q1, 0.0);
    for (double w : {0.01, 1.0, 50.0, 2000.0}) {
        const Complex v = nominal.L.eval(Complex(0.0, w));
        const Complex want = Complex(80.0, 0.0) / Complex(0.0, w);
        CHECK(std::abs(v - want) <= 1e-11 * std::abs(want));
    }

    // S + T = 1 pointwise
    Rng rng(5150);
    for (int trial = 0; trial < 40; ++trial) {
        const int order = rng.integer(1, 3);
        const DobFilter q = make_lpf(order, rng.log_uniform(1.0, 300.0));
        const double d = rng.uniform(p.delta.lo, p.delta.hi);
        PlantModel pp = p;
        pp.tau = rng.integer(0, 1) ? 0.0 : 0.01;
        const LoopSet loop = inner_loop(pp, q, d);
        const double w = rng.log_uniform(1e-3, 1e4);
        const Complex sum =
            loop.S.eval(Complex(0.0, w)) + loop.T.eval(Complex(0.0, w));
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("first-order closed form oracle") {
    // L_i = g0 (1 + d e_max) (s + w_T e_max (1 + d e_min)/(1 + d e_max)) / (s (s + w_T e_max))
    Rng rng(31337);
    const std::vector<double> grid = logspace(1e-2, 1e4, 500);
    for (int draw = 0; draw < 50; ++draw) {
        const UncertaintyWeight w = testutil::random_weight(rng);
        PlantModel p = testutil::simple_min_phase_plant();
        p.weight = w;
        p.delta = DeltaInterval{-1.0 / w.e_max + 1e-6, 1.0};
        const double g0 = rng.log_uniform(0.5, 500.0);
        const double d = rng.uniform(p.delta.lo, p.delta.hi);

        const double a = 1.0 + d * w.e_max;
        const double b = w.w_T * w.e_max * (1.0 + d * w.e_min) / a;
        const RationalTF closed(g0 * a * Polynomial{b, 1.0},
                                Polynomial{0.0, 1.0} * Polynomial{w.w_T * w.e_max, 1.0});

        const LoopSet loop = inner_loop(p, make_lpf(1, g0), d);
        for (double freq : grid) {
            const Complex va = loop.L.eval(Complex(0.0, freq));
            const Complex vb = closed.eval(Complex(0.0, freq));
            CHECK(std::abs(va - vb) <= 1e-10 * std::abs(vb));
        }
    }
}

TEST_CASE("verbatim and reduced assemblies agree pointwise") {
    PlantModel p = testutil::simple_min_phase_plant();
    p.tau = 0.005;
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const DobFilter q = make_lpf(rng.integer(1, 3), rng.log_uniform(2.0, 200.0));
        const double d = rng.uniform(p.delta.lo, p.delta.hi);
        const LoopSet reduced = inner_loop(p, q, d);
        const LoopSet verbatim = inner_loop_verbatim(p, q, d);
        for (int i = 0; i < 20; ++i) {
            const Complex s(0.0, rng.log_uniform(1e-2, 1e4));
            const Complex a = reduced.S.eval(s);
            const Complex b = verbatim.S.eval(s);
            CHECK(std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a)));
        }
    }
}

TEST_CASE("DC disturbance rejection") {
    PlantModel p = testutil::simple_min_phase_plant();
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const double g = rng.log_uniform(1.0, 300.0);
        const DobFilter q = make_lpf(rng.integer(1, 3), g);
        const double d = rng.uniform(p.delta.lo + 1e-3, p.delta.hi);
        const LoopSet loop = inner_loop(p, q, d);
        CHECK(std::abs(loop.S.eval(Complex(0.0, 1e-4 * g))) < 1e-3);
    }
}

TEST_CASE("outer loop") {
    PlantModel p = testutil::simple_min_phase_plant();
    const DobFilter q = make_lpf(2, 60.0);

    // C = 0: S_o = 1, T_o = 0
    const LoopSet open = outer_loop(p, q, ControllerSet::none(), 0.3);
    for (double w : {0.1, 10.0, 500.0}) {
        CHECK(std::abs(open.S.eval(Complex(0.0, w)) - 1.0) < 1e-12);
        CHECK(std::abs(open.T.eval(Complex(0.0, w))) < 1e-12);
    }

    // delta = 0 nominalizes the inner loop exactly: L_o = C G_n
    ControllerSet c = ControllerSet::none();
    c.outer = RationalTF(Polynomial{4.0, 1.0, 0.1}, Polynomial{0.0, 1.0});
    const LoopSet nominal = outer_loop(p, q, c, 0.0);
    const double w_check = 60.0 / 1000.0;
    const Complex lo = nominal.L.eval(Complex(0.0, w_check));
    const Complex cg = c.outer.eval(Complex(0.0, w_check)) * p.nominal.eval(Complex(0.0, w_check));
    CHECK(std::abs(lo - cg) <= 1e-2 * std::abs(cg));

    // stabilizing controller on the unstable plant: char poly s^2 + 7s + 20
    PlantModel unstable;
    unstable.nominal = RationalTF(Polynomial{1.0}, Polynomial{0.0, -5.0, 1.0});
    unstable.weight = UncertaintyWeight{200.0, 0.4, 7.5};
    unstable.delta = DeltaInterval{-1.0 / 7.5 + 1e-6, 1.0};
    ControllerSet cs = ControllerSet::none();
    cs.outer = RationalTF(Polynomial{20.0, 12.0}, Polynomial{1.0});
    const LoopSet stabilized = outer_loop(unstable, make_lpf(2, 100.0), cs, 0.0);
    for (const Complex& r : roots(stabilized.char_poly_no_delay())) {
        CHECK(r.real() < -1e-9);
    }
}

TEST_CASE("approximate-inverse loop") {
    PlantModel p;
    p.nominal = RationalTF(Polynomial{50.0, -1.0}, Polynomial{40.0, 25.0, 1.0});
    p.weight = UncertaintyWeight{400.0, 0.3, 3.75};
    p.delta = DeltaInterval{-1.0 / 3.75 + 1e-6, 1.0};
    p.approx_nominal =
        RationalTF(Polynomial{20.0, 200.0, 1.0}, Polynomial{16.0, 170.0, 100.4, 4.0});

    // r_err(0) = 1: the approximate model matches at DC
    const RationalTF r_err = relative_error_tf(p);
    CHECK(r_err.eval(Complex(0.0, 0.0)).real() == doctest::Approx(1.0).epsilon(1e-12));

    // with the exact model the loop reduces to the plain inner loop
    PlantModel min_phase = testutil::simple_min_phase_plant();
    min_phase.approx_nominal = min_phase.nominal;
    const DobFilter q = make_lpf(1, 30.0);
    const LoopSet a = approx_inverse_loop(min_phase, q, 0.4);
    const LoopSet b = inner_loop(min_phase, q, 0.4);
    for (double w : {0.1, 5.0, 300.0}) {
        const Complex va = a.L.eval(Complex(0.0, w));
        const Complex vb = b.L.eval(Complex(0.0, w));
        CHECK(std::abs(va - vb) <= 1e-10 * (1.0 + std::abs(vb)));
    }

    PlantModel missing = testutil::simple_min_phase_plant();
    CHECK_THROWS_AS(approx_inverse_loop(missing, q, 0.0), MissingApproxNominal);

    PlantModel bad = p;
    bad.approx_nominal = p.nominal;  // has the RHP zero, inverse unstable
    CHECK_THROWS_AS(relative_error_tf(bad), UnstableInverse);
}

TEST_CASE("mirror heuristic") {
    const RationalTF g50(Polynomial{50.0, -1.0}, Polynomial{40.0, 25.0, 1.0});
    const RationalTF mirrored = mirror_approx_nominal(g50);
    CHECK(classify(mirrored).is_minimum_phase);
    CHECK(mirrored.eval(Complex(0.0, 0.0)).real() ==
          doctest::Approx(g50.eval(Complex(0.0, 0.0)).real()).epsilon(1e-12));
    for (double w : logspace(1e-2, 1e4, 200)) {
        const double a = std::abs(mirrored.eval(Complex(0.0, w)));
        const double b = std::abs(g50.eval(Complex(0.0, w)));
        CHECK(std::abs(a - b) <= 1e-10 * (1.0 + b));
    }

    CHECK_THROWS_AS(mirror_approx_nominal(RationalTF(Polynomial{5.0, 1.0}, Polynomial{6.0, 5.0, 1.0})),
                    NoRhpZero);

    // conjugate RHP pair mirrors to real coefficients
    const Polynomial rhp_pair = polynomial_from_roots({Complex(3.0, 4.0), Complex(3.0, -4.0)});
    const RationalTF g2(rhp_pair, Polynomial{8.0, 6.0, 1.0} * Polynomial{30.0, 1.0});
    const RationalTF m2 = mirror_approx_nominal(g2);
    CHECK(classify(m2).is_minimum_phase);
    for (double w : {0.5, 5.0, 50.0}) {
        CHECK(std::abs(std::abs(m2.eval(Complex(0.0, w))) -
                       std::abs(g2.eval(Complex(0.0, w)))) < 1e-10);
    }
}

TEST_CASE("delta interval") {
    DeltaInterval d{-0.6, 1.0};
    CHECK_THROWS_AS(d.validate(2.0), ValidationError);  // lo below -1/e_max
    DeltaInterval d2{-0.3, 1.1};
    CHECK_THROWS_AS(d2.validate(5.0), ValidationError);  // hi above 1
    const DeltaInterval ok{-0.19, 1.0};
    ok.validate(5.0);
    const std::vector<double> s = ok.sample(13);
    CHECK(s.size() == 13);
    CHECK(s.front() == -0.19);
    CHECK(s.back() == 1.0);
}
