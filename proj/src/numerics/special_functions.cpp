#include "wcharvest/numerics.hpp"

#include "wcharvest/errors.hpp"

#include <cmath>
#include <string>

namespace wcharvest::numerics {

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();
constexpr double inv_e = 0.36787944117144232159552377016146087;
constexpr double e_const = 2.71828182845904523536028747135266250;

// -gamma - log(x) - sum_{k>=1} (-x)^k / (k * k!)
double e1_series(double x) {
    double term = 1.0;
    double sum = 0.0;
    for (int k = 1; k < 200; ++k) {
        term *= -x / k;
        const double contribution = term / k;
        sum += contribution;
        if (std::abs(contribution) < eps * std::abs(sum)) {
            break;
        }
    }
    return -euler_gamma - std::log(x) - sum;
}

// exp(x) E1(x) from the continued fraction 1/(x+1- 1/(x+3- 4/(x+5- ...))).
double e1_scaled_continued_fraction(double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < eps) {
            return h;
        }
    }
    throw ConvergenceError("exp_integral_e1: continued fraction did not converge at x = " + std::to_string(x));
}

void require_e1_domain(double x) {
    if (!std::isfinite(x) || x <= 0.0) {
        throw DomainError("exp_integral_e1: argument must be finite and > 0, got " + std::to_string(x));
    }
}

double halley_lambert(double w, double x) {
    for (int iter = 0; iter < 100; ++iter) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double wp1 = w + 1.0;
        if (f == 0.0 || wp1 == 0.0) {
            break;
        }
        const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        const double dw = f / denom;
        w -= dw;
        if (std::abs(dw) <= 4.0 * eps * (1.0 + std::abs(w))) {
            break;
        }
    }
    return w;
}

} // namespace

double exp_integral_e1(double x) {
    require_e1_domain(x);
    if (x < 1.0) {
        return e1_series(x);
    }
    return e1_scaled_continued_fraction(x) * std::exp(-x);
}

double exp_integral_e1_scaled(double x) {
    require_e1_domain(x);
    if (x < 1.0) {
        return std::exp(x) * e1_series(x);
    }
    return e1_scaled_continued_fraction(x);
}

double exp_integral_e1_scaled_from_log(double log_x) {
    if (std::isnan(log_x) || log_x == inf) {
        throw DomainError("exp_integral_e1_scaled_from_log: log argument must be finite");
    }
    if (log_x > -700.0) {
        return exp_integral_e1_scaled(std::exp(log_x));
    }
    // x < 1e-304: every series term beyond the logarithm is below rounding.
    return -euler_gamma - log_x;
}

double lambert_w(LambertBranch branch, double x) {
    if (!std::isfinite(x)) {
        throw DomainError("lambert_w: argument must be finite");
    }
    // Distance to the branch point, tolerant of the rounding in -1/e itself.
    const double shifted = std::fma(e_const, x, 1.0);
    if (shifted < -4.0 * eps) {
        throw DomainError("lambert_w: argument below -1/e: " + std::to_string(x));
    }
    const double p = std::sqrt(2.0 * std::max(shifted, 0.0));
    if (p == 0.0) {
        return -1.0;
    }

    if (branch == LambertBranch::principal) {
        if (x == 0.0) {
            return 0.0;
        }
        if (x > 1e100) {
            return wright_omega(std::log(x));
        }
        double w;
        if (x < -0.25) {
            w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
        } else if (x <= e_const) {
            const double l = std::log1p(x);
            w = l * (1.0 - std::log1p(l) / (2.0 + l));
        } else {
            const double l1 = std::log(x);
            const double l2 = std::log(l1);
            w = l1 - l2 + l2 / l1;
        }
        return halley_lambert(w, x);
    }

    if (x >= 0.0) {
        throw DomainError("lambert_w: minus_one branch needs -1/e <= x < 0, got " + std::to_string(x));
    }
    double w;
    if (x < -0.25) {
        w = -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p * p * p;
    } else {
        const double l1 = std::log(-x);
        const double l2 = std::log(-l1);
        w = l1 - l2 + l2 / l1;
    }
    return halley_lambert(w, x);
}

double wright_omega(double c) {
    if (!std::isfinite(c)) {
        throw DomainError("wright_omega: argument must be finite");
    }
    if (c < -36.0) {
        // omega = exp(c - omega) and omega < 2e-16 here.
        return std::exp(c);
    }

    double w;
    if (c < -2.0) {
        const double ec = std::exp(c);
        w = ec - ec * ec + 1.5 * ec * ec * ec;
    } else if (c <= 1.0) {
        const double y = c - 1.0;
        w = 1.0 + y * (1.0 / 2.0 + y * (1.0 / 16.0 + y * (-1.0 / 192.0 + y * (-1.0 / 3072.0 + y * 13.0 / 61440.0))));
    } else {
        const double lc = std::log(c);
        w = c - lc + lc / c;
    }

    // Fritsch-Shafer-Crowley iteration on w + log(w) = c (fourth order).
    for (int iter = 0; iter < 20; ++iter) {
        const double z = c - w - std::log(w);
        if (std::abs(z) <= 2.0 * eps * std::max(1.0, std::abs(c))) {
            break;
        }
        const double q = 2.0 * (1.0 + w) * (1.0 + w + 2.0 * z / 3.0);
        w *= 1.0 + z / (1.0 + w) * (q - z) / (q - 2.0 * z);
    }
    return w;
}

} // namespace wcharvest::numerics
