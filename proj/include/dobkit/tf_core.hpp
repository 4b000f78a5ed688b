#pragma once

#include <vector>

#include "dobkit/rational_tf.hpp"

namespace dobkit {

// All roots of p (degree >= 1), via balanced companion-matrix eigenvalues
// with one Newton polish step per root. Complex roots come back in exact
// conjugate pairs. Throws NoConvergence if the eigensolver fails.
std::vector<Complex> roots(const Polynomial& p);

std::vector<Complex> poles(const RationalTF& tf);
std::vector<Complex> zeros(const RationalTF& tf);
std::vector<Complex> poles(const DelayedTF& tf);
std::vector<Complex> zeros(const DelayedTF& tf);

// Poles/zeros within this band of the imaginary axis are marginal, not
// stable and not unstable.
inline constexpr double kAxisBand = 1e-9;

struct Classification {
    bool is_stable = false;         // every pole has Re < -kAxisBand
    bool is_minimum_phase = false;  // every zero has Re < kAxisBand and tau == 0
    int relative_degree = 0;
    bool marginal_pole = false;  // some pole within +-kAxisBand of the axis
    bool marginal_zero = false;
    bool has_rhp_pole = false;  // some pole with Re > kAxisBand
    bool has_rhp_zero = false;
};

Classification classify(const DelayedTF& tf);
Classification classify(const RationalTF& tf);

struct CancelResult {
    RationalTF tf;
    std::vector<std::pair<Complex, Complex>> cancelled;  // (zero, pole) pairs removed
};

// Removes num/den root pairs closer than tol * local scale. Pairs that
// straddle the imaginary axis are kept so RHP factors survive.
CancelResult cancel(const RationalTF& tf, double tol);

// Blaschke product prod (p_i - s)/(p_i + s) over points with Re > kAxisBand.
// Complex points must arrive in conjugate pairs. |B(jw)| = 1 for real w.
RationalTF blaschke(const std::vector<Complex>& points);

Complex eval_at(const DelayedTF& tf, const Complex& s);

ComplexResponse freq_response(const DelayedTF& tf, const std::vector<double>& grid);

}  // namespace dobkit
