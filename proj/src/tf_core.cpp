#include "dobkit/tf_core.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "dobkit/errors.hpp"
#include "dobkit/parallel.hpp"

namespace dobkit {

namespace {

// Parlett-Reinsch style balancing in powers of two; keeps eigenvalues exact.
void balance_in_place(Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    const double radix = 2.0;
    bool converged = false;
    int sweeps = 0;
    while (!converged && sweeps++ < 50) {
        converged = true;
        for (int i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0;
            const double s = c + r;
            while (c < r / radix) {
                c *= radix;
                r /= radix;
                f *= radix;
            }
            while (c >= r * radix) {
                c /= radix;
                r *= radix;
                f /= radix;
            }
            if ((c + r) < 0.95 * s && f != 1.0) {
                converged = false;
                a.row(i) /= f;
                a.col(i) *= f;
            }
        }
    }
}

// Greedy conjugate pairing: roots with significant imaginary part are
// matched with their nearest conjugate and symmetrized exactly.
std::vector<Complex> symmetrize_conjugates(std::vector<Complex> r) {
    const double tol = 1e-6;
    std::vector<Complex> out;
    std::vector<char> used(r.size(), 0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (used[i]) continue;
        const Complex z = r[i];
        const double scale = 1.0 + std::abs(z);
        if (std::abs(z.imag()) <= 1e-9 * scale) {
            out.emplace_back(z.real(), 0.0);
            used[i] = 1;
            continue;
        }
        std::size_t best = i;
        double best_d = std::numeric_limits<double>::max();
        for (std::size_t j = i + 1; j < r.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(r[j] - std::conj(z));
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best != i && best_d <= tol * scale) {
            const Complex avg = 0.5 * (z + std::conj(r[best]));
            out.push_back(avg);
            out.push_back(std::conj(avg));
            used[i] = used[best] = 1;
        } else {
            out.push_back(z);
            used[i] = 1;
        }
    }
    std::sort(out.begin(), out.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

}  // namespace

std::vector<Complex> roots(const Polynomial& p) {
    if (p.degree() < 1) throw Error("roots: degree must be >= 1");
    const int n = p.degree();
    const double lead = p.leading();

    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -p.coeff(i) / lead;

    balance_in_place(comp);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(comp, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw NoConvergence("roots: companion eigenvalue iteration did not converge");
    }

    std::vector<Complex> r(static_cast<std::size_t>(n));
    const Polynomial dp = p.derivative();
    for (int i = 0; i < n; ++i) {
        Complex z = solver.eigenvalues()[i];
        const Complex d = dp.eval(z);
        if (std::abs(d) > 1e-300) {
            const Complex step = p.eval(z) / d;
            if (std::abs(step) < 0.1 * (1.0 + std::abs(z))) z -= step;  // one Newton polish
        }
        r[static_cast<std::size_t>(i)] = z;
    }
    return symmetrize_conjugates(std::move(r));
}

std::vector<Complex> poles(const RationalTF& tf) {
    if (tf.den().degree() < 1) return {};
    return roots(tf.den());
}

std::vector<Complex> zeros(const RationalTF& tf) {
    if (tf.num().degree() < 1) return {};
    return roots(tf.num());
}

std::vector<Complex> poles(const DelayedTF& tf) { return poles(tf.rational()); }
std::vector<Complex> zeros(const DelayedTF& tf) { return zeros(tf.rational()); }

Classification classify(const RationalTF& tf) { return classify(DelayedTF(tf)); }

Classification classify(const DelayedTF& tf) {
    const RationalTF r = tf.rational();
    Classification c;
    c.relative_degree = r.relative_degree();
    c.is_stable = true;
    for (const Complex& pole : poles(r)) {
        if (pole.real() >= -kAxisBand) c.is_stable = false;
        if (std::abs(pole.real()) <= kAxisBand) c.marginal_pole = true;
        if (pole.real() > kAxisBand) c.has_rhp_pole = true;
    }
    c.is_minimum_phase = !tf.has_delay();
    for (const Complex& zero : zeros(r)) {
        if (zero.real() >= kAxisBand) c.is_minimum_phase = false;
        if (std::abs(zero.real()) <= kAxisBand) c.marginal_zero = true;
        if (zero.real() > kAxisBand) c.has_rhp_zero = true;
    }
    return c;
}

CancelResult cancel(const RationalTF& tf, double tol) {
    if (!(tol > 0.0)) throw Error("cancel: tol must be positive");
    CancelResult result;
    if (tf.num().degree() < 1 || tf.den().degree() < 1) {
        result.tf = tf;
        return result;
    }
    std::vector<Complex> zs = roots(tf.num());
    std::vector<Complex> ps = roots(tf.den());
    const double num_lead = tf.num().leading();

    std::vector<char> zero_gone(zs.size(), 0), pole_gone(ps.size(), 0);
    for (std::size_t i = 0; i < zs.size(); ++i) {
        for (std::size_t j = 0; j < ps.size(); ++j) {
            if (pole_gone[j]) continue;
            const double scale = 1.0 + std::max(std::abs(zs[i]), std::abs(ps[j]));
            if (std::abs(zs[i] - ps[j]) >= tol * scale) continue;
            // never cancel across the imaginary axis
            const bool same_side = (zs[i].real() < -kAxisBand && ps[j].real() < -kAxisBand) ||
                                   (zs[i].real() > kAxisBand && ps[j].real() > kAxisBand);
            if (!same_side) continue;
            zero_gone[i] = pole_gone[j] = 1;
            result.cancelled.emplace_back(zs[i], ps[j]);
            break;
        }
    }
    if (result.cancelled.empty()) {
        result.tf = tf;
        return result;
    }
    std::vector<Complex> kept_z, kept_p;
    for (std::size_t i = 0; i < zs.size(); ++i)
        if (!zero_gone[i]) kept_z.push_back(zs[i]);
    for (std::size_t j = 0; j < ps.size(); ++j)
        if (!pole_gone[j]) kept_p.push_back(ps[j]);
    result.tf = RationalTF(num_lead * polynomial_from_roots(kept_z), polynomial_from_roots(kept_p));
    return result;
}

RationalTF blaschke(const std::vector<Complex>& points) {
    Polynomial num{1.0}, den{1.0};
    std::vector<Complex> pending(points);
    while (!pending.empty()) {
        const Complex p = pending.back();
        pending.pop_back();
        if (p.real() <= kAxisBand) {
            throw NotRHP("blaschke: point is not strictly in the right half plane");
        }
        if (std::abs(p.imag()) <= 1e-9 * (1.0 + std::abs(p))) {
            num = num * Polynomial{p.real(), -1.0};
            den = den * Polynomial{p.real(), 1.0};
            continue;
        }
        auto it = std::find_if(pending.begin(), pending.end(), [&](const Complex& c) {
            return std::abs(c - std::conj(p)) <= 1e-6 * (1.0 + std::abs(p));
        });
        if (it == pending.end()) {
            throw NonConjugate("blaschke: complex point without conjugate partner");
        }
        pending.erase(it);
        // (p - s)(conj(p) - s) and (p + s)(conj(p) + s)
        num = num * Polynomial{std::norm(p), -2.0 * p.real(), 1.0};
        den = den * Polynomial{std::norm(p), 2.0 * p.real(), 1.0};
    }
    return RationalTF(num, den);
}

Complex eval_at(const DelayedTF& tf, const Complex& s) { return tf.eval(s); }

ComplexResponse freq_response(const DelayedTF& tf, const std::vector<double>& grid) {
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (!(grid[i] < grid[i + 1])) throw Error("freq_response: grid must be strictly increasing");
    }
    if (!grid.empty() && grid.front() < 0.0) throw Error("freq_response: negative frequency");

    ComplexResponse r;
    r.grid = grid;
    r.values.assign(grid.size(), Complex(0.0, 0.0));
    r.pole_hit.assign(grid.size(), 0);
    par::for_each_index(grid.size(), [&](std::size_t i) {
        try {
            r.values[i] = tf.eval(Complex(0.0, grid[i]));
        } catch (const PoleHit&) {
            r.values[i] = Complex(std::numeric_limits<double>::quiet_NaN(),
                                  std::numeric_limits<double>::quiet_NaN());
            r.pole_hit[i] = 1;
        }
    });
    return r;
}

}  // namespace dobkit
