#include "detail.hpp"

#include "wcharvest/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace wcharvest {

namespace {

using numerics::integrate_pieces;

// Integrals over the nominal with the 1/(x + mu) and log(x + mu) singularities
// at x = -mu handled analytically: with c = f0(0+) (zero if the support starts
// above 0),
//   int f0/(x+mu)     = int (f0 - c)/(x+mu)     + c [log(U+mu) - log mu]
//   int f0 log(x+mu)  = int (f0 - c) log(x+mu)  + c [F(U+mu) - F(mu)],
// F(y) = y log y - y. Only log(mu) is needed, so mu may underflow.
class ForwardIntegrals {
public:
    ForwardIntegrals(const NominalModel& nominal, double abs_tol)
        : nominal_(nominal), lower_(nominal.support_lower()), upper_(nominal.integration_upper()),
          c_(lower_ == 0.0 ? nominal.pdf_at_lower() : 0.0), opts_(detail::tight_quadrature(abs_tol)) {}

    // q(mu) up to x.
    double q(double log_mu, double x) const {
        const double mu = std::exp(log_mu);
        const auto points = pieces(mu, x);
        auto integrand = [&](double t) { return (nominal_.pdf(t) - c_) / (t + mu); };
        double value = integrate_pieces(integrand, points, opts_).value;
        if (c_ != 0.0) {
            value += c_ * (std::log(x + mu) - log_mu);
        }
        return value;
    }

    double q(double log_mu) const { return q(log_mu, upper_); }

    // int f0(x) log(x + mu) dx over the whole support.
    double log_moment(double log_mu) const {
        const double mu = std::exp(log_mu);
        const auto points = pieces(mu, upper_);
        auto integrand = [&](double t) {
            const double shifted = t + mu;
            return (nominal_.pdf(t) - c_) * (shifted > 0.0 ? std::log(shifted) : log_mu);
        };
        double value = integrate_pieces(integrand, points, opts_).value;
        if (c_ != 0.0) {
            const double top = upper_ + mu;
            value += c_ * ((top * std::log(top) - top) - mu * (log_mu - 1.0));
        }
        return value;
    }

    std::vector<double> pieces(double mu, double x) const {
        std::vector<double> points;
        for (double p : detail::merge_points(nominal_, detail::geometric_points(mu, lower_, upper_))) {
            if (p < x) {
                points.push_back(p);
            }
        }
        points.push_back(x);
        return points;
    }

private:
    const NominalModel& nominal_;
    double lower_;
    double upper_;
    double c_;
    numerics::QuadratureOptions opts_;
};

struct ForwardState {
    NominalModel nominal;
    double log_mu;
    double mu;
    double q;
};

} // namespace

WorstCaseSolution solve_forward_kl(const NominalModel& nominal, double d, const SolverOptions& options) {
    detail::require_radius(d);
    if (d == 0.0) {
        return detail::nominal_solution(nominal, DivergenceKind::forward_kl, ReverseKlMode::kkt);
    }

    numerics::ScalarSolveOptions root_opts;
    root_opts.residual_tol = options.root_tol;
    const double center = std::log(nominal.mean());
    const std::pair<double, double> hint{center - 1.0, center + 1.0};

    const bool closed_form = options.use_closed_forms && nominal.is_exponential();
    WorstCaseSolution solution{.nominal = nominal, .kind = DivergenceKind::forward_kl, .d = d};
    auto state = std::make_shared<ForwardState>(ForwardState{nominal, 0.0, 0.0, 0.0});

    if (closed_form) {
        const double rate = nominal.rate();
        const double log_rate = std::log(rate);
        // q(mu)/rate = exp(u) E1(u) with u = rate * mu; constraint
        // q/rate + log(mu q) = d.
        auto constraint = [&](double log_mu) {
            const double log_u = log_mu + log_rate;
            const double scaled = numerics::exp_integral_e1_scaled_from_log(log_u);
            return scaled + log_u + std::log(scaled) - d;
        };
        const auto root = numerics::solve_scalar(constraint, hint, root_opts);
        state->log_mu = root.root;
        state->mu = std::exp(root.root);
        state->q = rate * numerics::exp_integral_e1_scaled_from_log(root.root + log_rate);
        solution.diagnostics.iterations = root.iterations;
        solution.diagnostics.path = "exponential closed form";

        solution.cdf = [state](double x) {
            if (x <= 0.0) {
                return 0.0;
            }
            const double rate = state->nominal.rate();
            // 1 - E1(rate (x + mu)) / E1(rate mu)
            const double tail = std::exp(-rate * x) * numerics::exp_integral_e1_scaled(rate * (x + state->mu)) /
                                (state->q / rate);
            return std::clamp(1.0 - tail, 0.0, 1.0);
        };
    } else {
        const ForwardIntegrals integrals(nominal, 0.1 * options.root_tol);
        auto constraint = [&](double log_mu) {
            return std::log(integrals.q(log_mu)) + integrals.log_moment(log_mu) - d;
        };
        const auto root = numerics::solve_scalar(constraint, hint, root_opts);
        state->log_mu = root.root;
        state->mu = std::exp(root.root);
        state->q = integrals.q(root.root);
        solution.diagnostics.iterations = root.iterations;
        solution.diagnostics.path = "generic quadrature";

        const double quad_tol = options.quad_tol;
        solution.cdf = [state, quad_tol](double x) {
            const double lower = state->nominal.support_lower();
            const double upper = state->nominal.integration_upper();
            if (x <= lower) {
                return 0.0;
            }
            if (x >= upper) {
                return 1.0;
            }
            const ForwardIntegrals partial(state->nominal, 1e-3 * quad_tol);
            return std::clamp(partial.q(state->log_mu, x) / state->q, 0.0, 1.0);
        };
    }

    solution.mu_star = state->mu;
    solution.mean = 1.0 / state->q - state->mu;
    solution.pdf = [state](double x) {
        const double f0 = state->nominal.pdf(x);
        return f0 == 0.0 ? 0.0 : f0 / (state->q * (x + state->mu));
    };
    solution.log_ratio = [state](double x) {
        const double shifted = x + state->mu;
        return -(std::log(state->q) + (shifted > 0.0 ? std::log(shifted) : state->log_mu));
    };
    solution.quadrature_points = detail::merge_points(
        nominal, detail::geometric_points(state->mu, nominal.support_lower(), nominal.integration_upper()));

    // Normalization re-evaluated with the singularity-subtracted integral so
    // that it stays meaningful when mu is below the double range.
    const ForwardIntegrals check(nominal, options.quad_tol * 1e-2);
    solution.diagnostics.normalization_residual = std::abs(check.q(state->log_mu) / state->q - 1.0);
    const double achieved = detail::divergence_from_log_ratio(nominal, solution.log_ratio, DivergenceKind::forward_kl,
                                                              solution.quadrature_points, options.quad_tol * 1e-2);
    solution.diagnostics.divergence_residual = std::abs(achieved - d);
    return solution;
}

} // namespace wcharvest
