#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace dobkit {

using Complex = std::complex<double>;

// Real polynomial in the Laplace variable s, coefficients ascending:
// coeffs[k] multiplies s^k. Trailing coefficients below 1e-12 of the
// max-magnitude coefficient are trimmed at construction; the zero
// polynomial is the single coefficient {0}.
class Polynomial {
public:
    Polynomial() : c_{0.0} {}
    Polynomial(std::initializer_list<double> coeffs);
    explicit Polynomial(std::vector<double> coeffs);

    static Polynomial constant(double v) { return Polynomial{v}; }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }
    double leading() const { return c_.back(); }
    double max_abs_coeff() const;
    const std::vector<double>& coeffs() const { return c_; }

    // coefficient of s^k; zero beyond the stored degree
    double coeff(int k) const {
        return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[static_cast<std::size_t>(k)] : 0.0;
    }

    double eval(double s) const;
    Complex eval(const Complex& s) const;
    // sum_k |c_k| |s|^k -- the natural magnitude scale of eval(s)
    double eval_abs_scale(const Complex& s) const;

    Polynomial derivative() const;

    Polynomial operator-() const;
    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(double k, const Polynomial& p);
    friend Polynomial operator*(const Polynomial& p, double k) { return k * p; }

    bool operator==(const Polynomial& other) const { return c_ == other.c_; }

private:
    struct NoTrim {};
    Polynomial(std::vector<double> coeffs, NoTrim) : c_(std::move(coeffs)) {}
    void trim();
    std::vector<double> c_;
};

// Monic polynomial with the given roots; complex roots must appear in
// conjugate pairs so the coefficients stay real.
Polynomial polynomial_from_roots(const std::vector<Complex>& roots);

}  // namespace dobkit
