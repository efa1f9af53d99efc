#include "detail.hpp"

#include "wcharvest/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace wcharvest {

namespace {

// Tilt moments in terms of the tilt rate t = 1/s:
//   psi1 = int f0 exp(-t x),  zeta = int x f0 exp(-t x).
// Integrands are scaled by exp(t L) (L the support start) so they stay O(1).
struct TiltMoments {
    double log_psi1;
    double mean; // zeta / psi1
};

std::vector<double> tilt_points(const NominalModel& nominal, double t) {
    if (!(t > 0.0)) {
        return nominal.breakpoints();
    }
    return detail::merge_points(nominal,
                                detail::geometric_points(1.0 / t, nominal.support_lower(), nominal.integration_upper()));
}

TiltMoments tilt_moments(const NominalModel& nominal, double t, double rel_tol) {
    const double lower = nominal.support_lower();
    const auto points = tilt_points(nominal, t);
    numerics::QuadratureOptions opts;
    opts.abs_tol = 1e-300;
    opts.rel_tol = rel_tol;
    opts.max_evaluations = 2000000;
    auto weight = [&](double x) { return nominal.pdf(x) * std::exp(-t * (x - lower)); };
    const double psi = numerics::integrate_pieces(weight, points, opts).value;
    const double zeta = numerics::integrate_pieces([&](double x) { return x * weight(x); }, points, opts).value;
    return TiltMoments{std::log(psi) - t * lower, zeta / psi};
}

// D(f_t || f0) = -t mean(t) - log psi1(t); increasing in t, zero at t = 0.
double tilt_divergence(const NominalModel& nominal, double t, bool closed_form, double rel_tol) {
    if (closed_form) {
        const double r = t / nominal.rate();
        return std::log1p(r) - r / (1.0 + r);
    }
    const auto m = tilt_moments(nominal, t, rel_tol);
    return -t * m.mean - m.log_psi1;
}

struct TiltState {
    NominalModel nominal;
    double t;
    double log_psi1;
};

WorstCaseSolution tilted_solution(const NominalModel& nominal, double d, ReverseKlMode mode, double t,
                                  bool closed_form, const SolverOptions& options) {
    WorstCaseSolution solution{.nominal = nominal, .kind = DivergenceKind::reverse_kl, .mode = mode, .d = d};
    double log_psi1;
    if (closed_form) {
        const double rate = nominal.rate();
        const double z = rate + t;
        log_psi1 = std::log(rate / z);
        solution.mean = 1.0 / z;
        solution.pdf = [z](double x) { return x < 0.0 ? 0.0 : z * std::exp(-z * x); };
        solution.cdf = [z](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-z * x); };
    } else {
        const auto m = tilt_moments(nominal, t, 1e-13);
        log_psi1 = m.log_psi1;
        solution.mean = m.mean;
    }
    auto state = std::make_shared<TiltState>(TiltState{nominal, t, log_psi1});
    solution.log_ratio = [state](double x) { return -state->t * x - state->log_psi1; };
    if (!closed_form) {
        solution.pdf = [state](double x) {
            const double f0 = state->nominal.pdf(x);
            return f0 == 0.0 ? 0.0 : f0 * std::exp(-state->t * x - state->log_psi1);
        };
    }
    solution.quadrature_points = tilt_points(nominal, t);
    if (!closed_form) {
        const auto points = solution.quadrature_points;
        const auto pdf = solution.pdf;
        const double quad_tol = options.quad_tol;
        solution.cdf = [nominal, points, pdf, quad_tol](double x) {
            return detail::cumulative_pdf(nominal, pdf, points, x, 1e-3 * quad_tol);
        };
    }
    const double s = 1.0 / t;
    solution.s_star = s;
    solution.mu_star = s * log_psi1;
    solution.diagnostics.normalization_residual = detail::normalization_residual(solution, 1e-2 * options.quad_tol);
    const double achieved = detail::divergence_from_log_ratio(nominal, solution.log_ratio, DivergenceKind::reverse_kl,
                                                              solution.quadrature_points, 1e-2 * options.quad_tol);
    solution.diagnostics.divergence_residual = std::abs(achieved - d);
    return solution;
}

// xi and xi' depend on s only through sigma = rate * s: xi = g(sigma) / rate.
double xi_scaled(double sigma) { return sigma * std::log1p(1.0 / sigma) - sigma / (1.0 + sigma); }

double xi_prime_scaled(double sigma) {
    const double p1 = sigma + 1.0;
    return std::log1p(1.0 / sigma) - (2.0 + sigma) / (p1 * p1);
}

} // namespace

double reverse_xi(double s, double rate) {
    if (!(s > 0.0) || !(rate > 0.0)) {
        throw DomainError("reverse_xi: s and rate must be positive");
    }
    return xi_scaled(rate * s) / rate;
}

double reverse_xi_derivative(double s, double rate) {
    if (!(s > 0.0) || !(rate > 0.0)) {
        throw DomainError("reverse_xi_derivative: s and rate must be positive");
    }
    return xi_prime_scaled(rate * s);
}

numerics::RootResult reverse_xi_peak(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw DomainError("reverse_xi_peak: rate must be positive");
    }
    numerics::ScalarSolveOptions opts;
    opts.residual_tol = 1e-14;
    opts.positive = true;
    auto root = numerics::solve_scalar([rate](double s) { return reverse_xi_derivative(s, rate); },
                                       {0.1 / rate, 2.0 / rate}, opts);
    return root;
}

double reverse_kl_dual_residual(const NominalModel& nominal, double s, double d) {
    if (!(s > 0.0)) {
        throw DomainError("reverse_kl_dual_residual: s must be positive");
    }
    const auto m = tilt_moments(nominal, 1.0 / s, 1e-13);
    return -m.mean - s * m.log_psi1 - s * d;
}

WorstCaseSolution solve_reverse_kl(const NominalModel& nominal, double d, ReverseKlMode mode,
                                   const SolverOptions& options) {
    detail::require_radius(d);
    if (mode == ReverseKlMode::paper_exact && !nominal.is_exponential()) {
        throw DomainError("reverse-KL paper-exact mode is defined only for exponential nominals");
    }
    if (d == 0.0) {
        return detail::nominal_solution(nominal, DivergenceKind::reverse_kl, mode);
    }

    if (mode == ReverseKlMode::paper_exact) {
        const double rate = nominal.rate();
        const auto peak = reverse_xi_peak(rate);
        const double sigma_bar = rate * peak.root;
        const double xi_max = xi_scaled(sigma_bar);
        double sigma = sigma_bar;
        std::size_t iterations = peak.iterations;
        std::string path = "paper-exact xi(s) = d, clamped at s-bar";
        if (rate * d < xi_max) {
            // Larger root of xi = d: xi decreases from xi_max to 0 on (s-bar, inf).
            double hi = 2.0 * sigma_bar;
            while (xi_scaled(hi) >= rate * d) {
                hi *= 2.0;
            }
            numerics::ScalarSolveOptions opts;
            opts.residual_tol = options.root_tol;
            const auto root =
                numerics::solve_scalar([&](double sg) { return xi_scaled(sg) - rate * d; }, {sigma_bar, hi}, opts);
            sigma = root.root;
            iterations += root.iterations;
            path = "paper-exact xi(s) = d, larger root";
        }
        const double s = sigma / rate;
        auto solution = tilted_solution(nominal, d, mode, 1.0 / s, true, options);
        solution.diagnostics.iterations = iterations;
        solution.diagnostics.path = path;
        return solution;
    }

    const bool closed_form = options.use_closed_forms && nominal.is_exponential();
    numerics::ScalarSolveOptions opts;
    opts.residual_tol = options.root_tol;
    opts.positive = true;
    const double scale = 1.0 / nominal.mean();
    const auto root = numerics::solve_scalar(
        [&](double t) { return tilt_divergence(nominal, t, closed_form, 1e-13) - d; }, {0.5 * scale, 2.0 * scale},
        opts);
    auto solution = tilted_solution(nominal, d, mode, root.root, closed_form, options);
    solution.diagnostics.iterations = root.iterations;
    solution.diagnostics.path = closed_form ? "exponential closed form" : "generic quadrature";
    return solution;
}

} // namespace wcharvest
