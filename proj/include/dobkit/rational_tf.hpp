#pragma once

#include <optional>
#include <vector>

#include "dobkit/polynomial.hpp"

namespace dobkit {

// Rational transfer function num(s)/den(s), stored with a monic
// denominator. Common roots are never cancelled implicitly; see cancel().
class RationalTF {
public:
    RationalTF() : num_{1.0}, den_{1.0} {}
    RationalTF(Polynomial num, Polynomial den);

    static RationalTF constant(double k) { return RationalTF(Polynomial{k}, Polynomial{1.0}); }
    static RationalTF one() { return constant(1.0); }
    static RationalTF zero() { return constant(0.0); }

    const Polynomial& num() const { return num_; }
    const Polynomial& den() const { return den_; }

    bool is_zero() const { return num_.is_zero(); }
    // deg(den) - deg(num); >= 0 for proper transfer functions
    int relative_degree() const { return den_.degree() - num_.degree(); }

    Complex eval(const Complex& s) const;  // throws PoleHit near a denominator root

    RationalTF operator-() const { return RationalTF(-num_, den_); }
    friend RationalTF operator+(const RationalTF& a, const RationalTF& b);
    friend RationalTF operator-(const RationalTF& a, const RationalTF& b);
    friend RationalTF operator*(const RationalTF& a, const RationalTF& b);
    friend RationalTF operator/(const RationalTF& a, const RationalTF& b);  // throws DivByZeroTF
    friend RationalTF operator*(double k, const RationalTF& a);

private:
    Polynomial num_, den_;
};

enum class ComposeOp { add, sub, mul, div };
RationalTF compose(const RationalTF& a, const RationalTF& b, ComposeOp op);

// Transfer function with one dead-time term:
//
//   H(s) = (p0(s) + p1(s) e^{-tau s}) / (q0(s) + q1(s) e^{-tau s})
//
// The common cases are a plain rational (p1 = q1 = 0) and a delayed
// rational num e^{-tau s}/den (p0 = q1 = 0); the general form carries the
// sensitivity/co-sensitivity functions of delayed feedback loops exactly,
// with no rational approximation of the dead time. tau = 0 folds the
// delayed parts into the plain ones so the rational case is recovered bit
// for bit.
class DelayedTF {
public:
    DelayedTF() : DelayedTF(RationalTF::one(), 0.0) {}
    explicit DelayedTF(const RationalTF& r, double tau = 0.0);
    static DelayedTF delay_fraction(Polynomial p0, Polynomial p1, Polynomial q0, Polynomial q1,
                                    double tau);

    double tau() const { return tau_; }
    // true when the value is num/den or num e^{-tau s}/den
    bool is_simple() const { return p0_.is_zero() || p1_.is_zero(); }
    bool has_delay() const { return tau_ > 0.0; }

    // rational factor of a simple transfer function (throws otherwise)
    RationalTF rational() const;

    Complex eval(const Complex& s) const;  // throws PoleHit near a denominator root

    const Polynomial& p0() const { return p0_; }
    const Polynomial& p1() const { return p1_; }
    const Polynomial& q0() const { return q0_; }
    const Polynomial& q1() const { return q1_; }

    // q0 + q1: the characteristic polynomial when tau = 0
    Polynomial char_poly_no_delay() const { return q0_ + q1_; }

private:
    DelayedTF(Polynomial p0, Polynomial p1, Polynomial q0, Polynomial q1, double tau);
    void normalize();
    Polynomial p0_, p1_, q0_, q1_;
    double tau_ = 0.0;
};

// Frequency sweep result: values[i] = H(j grid[i]). Points where the
// evaluation ran into a pole are flagged rather than interpolated.
struct ComplexResponse {
    std::vector<double> grid;
    std::vector<Complex> values;
    std::vector<char> pole_hit;

    std::size_t size() const { return grid.size(); }
};

std::vector<double> logspace(double w_lo, double w_hi, int n);

}  // namespace dobkit
