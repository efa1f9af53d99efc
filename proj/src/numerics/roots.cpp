#include "wcharvest/numerics.hpp"

#include "wcharvest/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wcharvest::numerics {

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();

double checked(const RealFunction& g, double x) {
    const double value = g(x);
    if (std::isnan(value)) {
        std::ostringstream msg;
        msg << "solve_scalar: function returned NaN at x = " << x;
        throw ConvergenceError(msg.str());
    }
    return value;
}

bool same_sign(double x, double y) { return (x > 0.0 && y > 0.0) || (x < 0.0 && y < 0.0); }

} // namespace

RootResult solve_scalar(const RealFunction& g, std::pair<double, double> bracket_hint,
                        const ScalarSolveOptions& options) {
    auto [a, b] = bracket_hint;
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
        throw DomainError("solve_scalar: bracket hint must be finite with lo < hi");
    }
    if (options.positive && a <= 0.0) {
        throw DomainError("solve_scalar: positive unknown needs a positive bracket hint");
    }
    const double tol = options.residual_tol;

    double fa = checked(g, a);
    double fb = checked(g, b);
    std::size_t iterations = 0;

    for (std::size_t k = 0; same_sign(fa, fb); ++k) {
        if (k == options.max_expansions || std::abs(a) > 1e300 || std::abs(b) > 1e300) {
            std::ostringstream msg;
            msg << "solve_scalar: no sign change in [" << a << ", " << b << "] after " << k
                << " expansions (g = " << fa << ", " << fb << ")";
            throw NoSignChangeError(msg.str());
        }
        // Widen on the side whose value is closer to zero.
        if (std::abs(fa) < std::abs(fb)) {
            a = options.positive ? 0.5 * a : a - (b - a);
            fa = checked(g, a);
        } else {
            b = options.positive ? 2.0 * b : b + (b - a);
            fb = checked(g, b);
        }
        ++iterations;
    }

    if (std::abs(fa) <= tol && std::abs(fa) <= std::abs(fb)) {
        return RootResult{a, fa, iterations, std::pair{a, b}};
    }
    if (std::abs(fb) <= tol) {
        return RootResult{b, fb, iterations, std::pair{a, b}};
    }

    // Brent: b is the best estimate, [b, c] always brackets the root.
    double c = a;
    double fc = fa;
    double d = b - a;
    double e = d;
    for (std::size_t it = 0; it < options.max_iterations; ++it, ++iterations) {
        if (same_sign(fb, fc)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * eps * std::abs(b) + 1e-300;
        const double m = 0.5 * (c - b);
        const std::pair<double, double> bracket{std::min(b, c), std::max(b, c)};
        if (std::abs(fb) <= tol) {
            return RootResult{b, fb, iterations, bracket};
        }
        if (std::abs(m) <= tol1) {
            std::ostringstream msg;
            msg << "solve_scalar: bracket collapsed at x = " << b << " with residual " << fb << " above tolerance "
                << tol;
            throw ConvergenceError(msg.str());
        }
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p;
            double q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                const double qa = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) {
                q = -q;
            } else {
                p = -p;
            }
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol1 ? d : (m > 0.0 ? tol1 : -tol1);
        fb = checked(g, b);
    }
    std::ostringstream msg;
    msg << "solve_scalar: no convergence after " << options.max_iterations << " iterations (x = " << b
        << ", residual " << fb << ")";
    throw ConvergenceError(msg.str());
}

RootResult solve_scalar(const RealFunction& g, std::pair<double, double> bracket_hint, double tol) {
    ScalarSolveOptions options;
    options.residual_tol = tol;
    return solve_scalar(g, bracket_hint, options);
}

std::pair<RootResult, RootResult> solve_2d(const System2& system, std::pair<double, double> start,
                                           const System2Options& options) {
    auto [u, v] = start;
    if (!std::isfinite(u) || !std::isfinite(v)) {
        throw DomainError("solve_2d: start point must be finite");
    }
    if (options.first_positive && u <= 0.0) {
        throw DomainError("solve_2d: first unknown must start positive");
    }

    auto evaluate = [&](double x, double y) {
        const auto r = system(x, y);
        if (!std::isfinite(r.first) || !std::isfinite(r.second)) {
            std::ostringstream msg;
            msg << "solve_2d: system not finite at (" << x << ", " << y << ")";
            throw ConvergenceError(msg.str());
        }
        return r;
    };
    auto norm = [](std::pair<double, double> r) { return std::max(std::abs(r.first), std::abs(r.second)); };

    auto residual = evaluate(u, v);
    std::size_t singular_streak = 0;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        if (norm(residual) <= options.residual_tol) {
            return {RootResult{u, residual.first, it, std::nullopt}, RootResult{v, residual.second, it, std::nullopt}};
        }

        const double hu = options.fd_relative_step * std::max(1.0, std::abs(u));
        const double hv = options.fd_relative_step * std::max(1.0, std::abs(v));
        const auto ru = evaluate(u + hu, v);
        const auto rv = evaluate(u, v + hv);
        const double j11 = (ru.first - residual.first) / hu;
        const double j21 = (ru.second - residual.second) / hu;
        const double j12 = (rv.first - residual.first) / hv;
        const double j22 = (rv.second - residual.second) / hv;
        const double det = j11 * j22 - j12 * j21;
        const double scale = std::max({j11 * j11, j12 * j12, j21 * j21, j22 * j22});

        double du;
        double dv;
        const bool singular = !(std::abs(det) > 1e-10 * scale) || scale == 0.0;
        if (!singular) {
            singular_streak = 0;
            du = -(j22 * residual.first - j12 * residual.second) / det;
            dv = -(-j21 * residual.first + j11 * residual.second) / det;
        } else {
            if (++singular_streak > 8) {
                std::ostringstream msg;
                msg << "solve_2d: Jacobian singular at (" << u << ", " << v << "), det = " << det
                    << ", residuals = (" << residual.first << ", " << residual.second << ")";
                throw SingularJacobianError(msg.str());
            }
            // Regularized (Levenberg-Marquardt) step plus a deterministic
            // nudge off the singular set.
            const double lambda = 1e-3 * scale + 1e-12;
            const double a11 = j11 * j11 + j21 * j21 + lambda;
            const double a12 = j11 * j12 + j21 * j22;
            const double a22 = j12 * j12 + j22 * j22 + lambda;
            const double g1 = j11 * residual.first + j21 * residual.second;
            const double g2 = j12 * residual.first + j22 * residual.second;
            const double adet = a11 * a22 - a12 * a12;
            du = -(a22 * g1 - a12 * g2) / adet + 1e-2 * std::max(1.0, std::abs(u));
            dv = -(-a12 * g1 + a11 * g2) / adet;
        }

        if (options.first_positive && u + du <= 0.0) {
            // Stay in the positive half-plane: at most a 90% decrease.
            const double shrink = 0.9 * u / -du;
            du *= shrink;
            dv *= shrink;
        }

        // Backtrack on the max-norm of the residual.
        const double current = norm(residual);
        double step = 1.0;
        std::pair<double, double> trial;
        bool accepted = false;
        for (int k = 0; k < 40; ++k, step *= 0.5) {
            try {
                trial = evaluate(u + step * du, v + step * dv);
            } catch (const ConvergenceError&) {
                continue;
            }
            if (singular || norm(trial) < current) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            std::ostringstream msg;
            msg << "solve_2d: line search failed at (" << u << ", " << v << "), residuals = (" << residual.first
                << ", " << residual.second << ")";
            throw ConvergenceError(msg.str());
        }
        u += step * du;
        v += step * dv;
        residual = trial;
    }
    std::ostringstream msg;
    msg << "solve_2d: no convergence after " << options.max_iterations << " iterations at (" << u << ", " << v
        << "), residuals = (" << residual.first << ", " << residual.second << ")";
    throw ConvergenceError(msg.str());
}

} // namespace wcharvest::numerics
