#pragma once

// Slow, deliberately simple reference computations used as test oracles. None
// of this shares code with the library: plain adaptive Simpson, plain
// bisection, textbook series.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace reference {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                           double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, 50);
}

/// Simpson over consecutive pieces of a partition.
inline double simpson_pieces(const std::function<double(double)>& f, std::initializer_list<double> cuts,
                             double tol = 1e-12) {
    double total = 0.0;
    const double* prev = nullptr;
    for (const double& c : cuts) {
        if (prev) {
            total += simpson(f, *prev, c, tol);
        }
        prev = &c;
    }
    return total;
}

/// Root of g on [lo, hi] by pure bisection; g(lo) and g(hi) must differ in sign.
inline double bisect(const std::function<double(double)>& g, double lo, double hi, int iterations = 200) {
    double glo = g(lo);
    if (glo * g(hi) > 0.0) {
        throw std::runtime_error("reference::bisect: no sign change");
    }
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0.0) {
            return mid;
        }
        if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline constexpr double gamma_const = 0.57721566490153286060651209008240243;

/// E1 from its power series; fine for small x only.
inline double e1_series(double x) {
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= -x / k;
        const double add = term / k;
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) {
            break;
        }
    }
    return -gamma_const - std::log(x) - sum;
}

/// E1(x) = int_0^1 exp(-x/u)/u du, by adaptive Simpson.
inline double e1_quadrature(double x) {
    auto f = [x](double u) { return u <= 0.0 ? 0.0 : std::exp(-x / u) / u; };
    return simpson(f, 0.0, 1.0, 1e-14 * std::exp(-x));
}

inline double e1(double x) { return x < 0.05 ? e1_series(x) : e1_quadrature(x); }

/// Forward-KL worst case of Exp(1): (mu, mean). The constraint
/// log q + int f0 log(x + mu) = d with q = e^mu E1(mu) is bisected in log mu.
struct ForwardExp1 {
    double mu;
    double mean;
};

inline ForwardExp1 forward_exp1(double d) {
    auto h = [d](double log_mu) {
        const double mu = std::exp(log_mu);
        const double q = std::exp(mu) * e1(mu);
        return std::log(q) + (log_mu + q) - d;
    };
    const double log_mu = bisect(h, -30.0, 4.0);
    const double mu = std::exp(log_mu);
    const double q = std::exp(mu) * e1(mu);
    return {mu, 1.0 / q - mu};
}

/// Reverse-KL worst case of Exp(rate0) stays exponential with rate1 solving
/// log(rate1/rate0) + rate0/rate1 - 1 = d.
inline double reverse_rate(double rate0, double d) {
    auto g = [rate0, d](double r) { return std::log(r / rate0) + rate0 / r - 1.0 - d; };
    return bisect(g, rate0, rate0 * std::exp(d + 2.0));
}

/// Forward-KL worst case of Uniform(0,1): q = log((1+mu)/mu) and
/// int_0^1 log(x+mu) = (1+mu) log(1+mu) - mu log(mu) - 1.
inline ForwardExp1 forward_uniform1(double d) {
    auto h = [d](double log_mu) {
        const double mu = std::exp(log_mu);
        const double q = std::log1p(1.0 / mu);
        return std::log(q) + (1.0 + mu) * std::log1p(mu) - mu * log_mu - 1.0 - d;
    };
    const double mu = std::exp(bisect(h, -60.0, 5.0));
    return {mu, 1.0 / std::log1p(1.0 / mu) - mu};
}

} // namespace reference
