#include "dobkit/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "dobkit/errors.hpp"

namespace dobkit {

Polynomial::Polynomial(std::initializer_list<double> coeffs) : c_(coeffs) {
    if (c_.empty()) c_ = {0.0};
    trim();
}

Polynomial::Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_ = {0.0};
    trim();
}

void Polynomial::trim() {
    double scale = max_abs_coeff();
    const double tol = 1e-12 * scale;
    while (c_.size() > 1 && std::abs(c_.back()) <= tol) {
        c_.pop_back();
    }
    if (c_.size() == 1 && std::abs(c_[0]) <= tol) c_[0] = 0.0;
}

double Polynomial::max_abs_coeff() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
}

double Polynomial::eval(double s) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
    return acc;
}

Complex Polynomial::eval(const Complex& s) const {
    Complex acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
    return acc;
}

double Polynomial::eval_abs_scale(const Complex& s) const {
    const double m = std::abs(s);
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * m + std::abs(*it);
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (degree() == 0) return Polynomial{0.0};
    std::vector<double> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return Polynomial(std::move(d));
}

Polynomial Polynomial::operator-() const {
    std::vector<double> d(c_);
    for (double& v : d) v = -v;
    return Polynomial(std::move(d));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> d(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t k = 0; k < d.size(); ++k) {
        d[k] = a.coeff(static_cast<int>(k)) + b.coeff(static_cast<int>(k));
    }
    return Polynomial(std::move(d));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    std::vector<double> d(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t k = 0; k < d.size(); ++k) {
        d[k] = a.coeff(static_cast<int>(k)) - b.coeff(static_cast<int>(k));
    }
    return Polynomial(std::move(d));
}

// Products and scalings keep their exact degree: the leading coefficient is
// a plain product of nonzero leadings, so no construction-time trimming is
// applied (it could misfire on wide coefficient spreads). Sums and
// differences still trim, which is where cancellation happens.
Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return Polynomial{};
    std::vector<double> d(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
        for (std::size_t j = 0; j < b.c_.size(); ++j) {
            d[i + j] += a.c_[i] * b.c_[j];
        }
    }
    if (d.back() == 0.0) return Polynomial(std::move(d));  // underflow fallback
    return Polynomial(std::move(d), Polynomial::NoTrim{});
}

Polynomial operator*(double k, const Polynomial& p) {
    if (k == 0.0) return Polynomial{};
    std::vector<double> d(p.c_);
    for (double& v : d) v *= k;
    return Polynomial(std::move(d), Polynomial::NoTrim{});
}

Polynomial polynomial_from_roots(const std::vector<Complex>& rts) {
    std::vector<Complex> acc{1.0};
    // multiply conjugate pairs as real quadratics to keep coefficients real
    std::vector<Complex> pending(rts);
    std::vector<Polynomial> factors;
    const double tol = 1e-9;
    while (!pending.empty()) {
        Complex r = pending.back();
        pending.pop_back();
        if (std::abs(r.imag()) <= tol * (1.0 + std::abs(r))) {
            factors.push_back(Polynomial{-r.real(), 1.0});
            continue;
        }
        auto it = std::find_if(pending.begin(), pending.end(), [&](const Complex& c) {
            return std::abs(c - std::conj(r)) <= 1e-6 * (1.0 + std::abs(r));
        });
        if (it == pending.end()) {
            throw NonConjugate("polynomial_from_roots: complex root without conjugate partner");
        }
        pending.erase(it);
        factors.push_back(Polynomial{std::norm(r), -2.0 * r.real(), 1.0});
    }
    Polynomial p{1.0};
    for (const auto& f : factors) p = p * f;
    return p;
}

}  // namespace dobkit
