#include "dobkit/rational_tf.hpp"

#include <cmath>
#include <limits>

#include "dobkit/errors.hpp"

namespace dobkit {

RationalTF::RationalTF(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw DivByZeroTF("RationalTF: denominator is the zero polynomial");
    const double lead = den_.leading();
    num_ = (1.0 / lead) * num_;
    den_ = (1.0 / lead) * den_;
}

Complex RationalTF::eval(const Complex& s) const {
    const Complex d = den_.eval(s);
    double scale = den_.eval_abs_scale(s);
    if (scale <= std::numeric_limits<double>::min()) scale = den_.max_abs_coeff();
    if (std::abs(d) < 1e-14 * scale) {
        throw PoleHit("RationalTF::eval: evaluation at or near a pole");
    }
    return num_.eval(s) / d;
}

RationalTF operator+(const RationalTF& a, const RationalTF& b) {
    return RationalTF(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

RationalTF operator-(const RationalTF& a, const RationalTF& b) {
    return RationalTF(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}

RationalTF operator*(const RationalTF& a, const RationalTF& b) {
    return RationalTF(a.num_ * b.num_, a.den_ * b.den_);
}

RationalTF operator/(const RationalTF& a, const RationalTF& b) {
    if (b.num_.is_zero()) throw DivByZeroTF("RationalTF: division by the zero transfer function");
    return RationalTF(a.num_ * b.den_, a.den_ * b.num_);
}

RationalTF operator*(double k, const RationalTF& a) {
    return RationalTF(k * a.num_, a.den_);
}

RationalTF compose(const RationalTF& a, const RationalTF& b, ComposeOp op) {
    switch (op) {
        case ComposeOp::add: return a + b;
        case ComposeOp::sub: return a - b;
        case ComposeOp::mul: return a * b;
        case ComposeOp::div: return a / b;
    }
    throw Error("compose: unknown op");
}

DelayedTF::DelayedTF(const RationalTF& r, double tau) {
    if (tau < 0.0) throw Error("DelayedTF: negative dead time");
    tau_ = tau;
    if (tau_ > 0.0) {
        p0_ = Polynomial{};
        p1_ = r.num();
        q0_ = r.den();
        q1_ = Polynomial{};
    } else {
        p0_ = r.num();
        p1_ = Polynomial{};
        q0_ = r.den();
        q1_ = Polynomial{};
    }
    normalize();
}

DelayedTF::DelayedTF(Polynomial p0, Polynomial p1, Polynomial q0, Polynomial q1, double tau)
    : p0_(std::move(p0)), p1_(std::move(p1)), q0_(std::move(q0)), q1_(std::move(q1)), tau_(tau) {
    normalize();
}

DelayedTF DelayedTF::delay_fraction(Polynomial p0, Polynomial p1, Polynomial q0, Polynomial q1,
                                    double tau) {
    if (tau < 0.0) throw Error("DelayedTF: negative dead time");
    return DelayedTF(std::move(p0), std::move(p1), std::move(q0), std::move(q1), tau);
}

void DelayedTF::normalize() {
    if (tau_ == 0.0 && !p1_.is_zero()) {
        p0_ = p0_ + p1_;
        p1_ = Polynomial{};
    }
    if (tau_ == 0.0 && !q1_.is_zero()) {
        q0_ = q0_ + q1_;
        q1_ = Polynomial{};
    }
    if (q0_.is_zero() && q1_.is_zero()) {
        throw DivByZeroTF("DelayedTF: zero denominator");
    }
    if (p1_.is_zero() && q1_.is_zero()) tau_ = 0.0;
    const double scale = std::max(q0_.max_abs_coeff(), q1_.max_abs_coeff());
    if (scale > 0.0 && scale != 1.0) {
        const double inv = 1.0 / scale;
        p0_ = inv * p0_;
        p1_ = inv * p1_;
        q0_ = inv * q0_;
        q1_ = inv * q1_;
    }
}

RationalTF DelayedTF::rational() const {
    if (!is_simple()) {
        throw Error("DelayedTF::rational: not a plain (possibly delayed) rational function");
    }
    const Polynomial& num = p1_.is_zero() ? p0_ : p1_;
    if (!q1_.is_zero()) {
        throw Error("DelayedTF::rational: dead time appears in the denominator");
    }
    return RationalTF(num, q0_);
}

Complex DelayedTF::eval(const Complex& s) const {
    const Complex e = (tau_ > 0.0) ? std::exp(-tau_ * s) : Complex(1.0, 0.0);
    const Complex den = q0_.eval(s) + q1_.eval(s) * e;
    double scale = q0_.eval_abs_scale(s) + q1_.eval_abs_scale(s);
    if (scale <= std::numeric_limits<double>::min()) {
        scale = std::max(q0_.max_abs_coeff(), q1_.max_abs_coeff());
    }
    if (std::abs(den) < 1e-14 * scale) {
        throw PoleHit("DelayedTF::eval: evaluation at or near a pole");
    }
    return (p0_.eval(s) + p1_.eval(s) * e) / den;
}

std::vector<double> logspace(double w_lo, double w_hi, int n) {
    if (!(w_lo > 0.0) || !(w_hi > w_lo) || n < 2) {
        throw Error("logspace: need 0 < w_lo < w_hi and n >= 2");
    }
    std::vector<double> g(static_cast<std::size_t>(n));
    const double l0 = std::log10(w_lo), l1 = std::log10(w_hi);
    for (int i = 0; i < n; ++i) {
        g[static_cast<std::size_t>(i)] = std::pow(10.0, l0 + (l1 - l0) * i / (n - 1));
    }
    g.front() = w_lo;
    g.back() = w_hi;
    return g;
}

}  // namespace dobkit
