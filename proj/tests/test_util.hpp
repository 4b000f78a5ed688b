#pragma once

#include <random>

#include "dobkit/dob_model.hpp"

namespace dobkit::testutil {

// deterministic draws for the property tests
struct Rng {
    std::mt19937 gen;
    explicit Rng(unsigned seed) : gen(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen);
    }
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
};

// stable polynomial with the given degree: random real roots and conjugate
// pairs, all with negative real part
inline Polynomial stable_poly(Rng& rng, int degree) {
    std::vector<Complex> rts;
    int left = degree;
    while (left > 0) {
        if (left >= 2 && rng.integer(0, 1)) {
            const double re = -rng.log_uniform(0.1, 50.0);
            const double im = rng.log_uniform(0.1, 50.0);
            rts.emplace_back(re, im);
            rts.emplace_back(re, -im);
            left -= 2;
        } else {
            rts.emplace_back(-rng.log_uniform(0.1, 50.0), 0.0);
            left -= 1;
        }
    }
    return polynomial_from_roots(rts);
}

inline RationalTF random_rational(Rng& rng, int max_deg) {
    const int dn = rng.integer(1, max_deg);
    const int nn = rng.integer(0, dn);
    Polynomial num = nn == 0 ? Polynomial{rng.uniform(0.2, 5.0)} : stable_poly(rng, nn);
    return RationalTF(rng.uniform(0.2, 5.0) * num, stable_poly(rng, dn));
}

inline UncertaintyWeight random_weight(Rng& rng) {
    const double e_min = rng.uniform(0.0, 1.0);
    const double e_max = e_min + rng.log_uniform(0.2, 8.0);
    return UncertaintyWeight{rng.log_uniform(1.0, 1000.0), e_min, e_max};
}

inline PlantModel simple_min_phase_plant(double w_T = 100.0, double e_min = 0.2,
                                         double e_max = 5.0) {
    PlantModel p;
    p.nominal = RationalTF(Polynomial{5.0, 1.0}, Polynomial{6.0, 5.0, 1.0});
    p.weight = UncertaintyWeight{w_T, e_min, e_max};
    p.delta = DeltaInterval{-1.0 / e_max + 1e-6, 1.0};
    return p;
}

}  // namespace dobkit::testutil
