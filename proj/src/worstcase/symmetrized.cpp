#include "detail.hpp"

#include "wcharvest/errors.hpp"

#include <cmath>
#include <memory>

namespace wcharvest {

namespace {

// Internally the multipliers are carried as slope = 2/s and offset = 2 mu/s,
// so f = f0 / omega(slope x + offset). At d = 0 this is (0, 1), whereas
// (s, mu) runs off to infinity.
struct SymmetrizedSystem {
    const NominalModel& nominal;
    std::vector<double> points;
    numerics::QuadratureOptions opts;
    double d;

    // (int f - 1, D_sym(f0, f) - d). With log omega = c - omega:
    //   D(f0||f) = int f0 log omega,  D(f||f0) = -int f0 log(omega) / omega.
    std::pair<double, double> operator()(double slope, double offset) const {
        auto mass = [&](double x) {
            const double f0 = nominal.pdf(x);
            return f0 == 0.0 ? 0.0 : f0 / numerics::wright_omega(slope * x + offset);
        };
        auto sym = [&](double x) {
            const double f0 = nominal.pdf(x);
            if (f0 == 0.0) {
                return 0.0;
            }
            const double c = slope * x + offset;
            const double w = numerics::wright_omega(c);
            return 0.5 * f0 * (c - w) * (1.0 - 1.0 / w);
        };
        return {numerics::integrate_pieces(mass, points, opts).value - 1.0,
                numerics::integrate_pieces(sym, points, opts).value - d};
    }
};

struct SymState {
    NominalModel nominal;
    double slope;
    double offset;
};

} // namespace

WorstCaseSolution solve_symmetrized(const NominalModel& nominal, double d, const SolverOptions& options) {
    detail::require_radius(d);
    if (d == 0.0) {
        return detail::nominal_solution(nominal, DivergenceKind::symmetrized, ReverseKlMode::kkt);
    }

    // Warm start: slope from the reverse-KL tilt rate at the same d (the two
    // worst cases agree to second order in the perturbation), offset from the
    // normalization equation at that slope.
    const auto reverse = solve_reverse_kl(nominal, d, ReverseKlMode::kkt, options);
    const double slope0 = 2.0 / *reverse.s_star;

    const auto points = detail::merge_points(
        nominal, detail::geometric_points(0.5 / slope0, nominal.support_lower(), nominal.integration_upper()));
    const SymmetrizedSystem system{nominal, points, detail::tight_quadrature(1e-3 * options.system_tol), d};

    numerics::System2Options sys_opts;
    sys_opts.residual_tol = options.system_tol;
    sys_opts.first_positive = true;

    std::pair<numerics::RootResult, numerics::RootResult> roots;
    std::string path = "2-D Newton (warm start)";
    try {
        numerics::ScalarSolveOptions offset_opts;
        offset_opts.residual_tol = 1e-3 * options.system_tol;
        const auto offset0 = numerics::solve_scalar(
            [&](double offset) { return system(slope0, offset).first; }, {0.0, 1.0}, offset_opts);
        roots = numerics::solve_2d([&](double a, double b) { return system(a, b); }, {slope0, offset0.root}, sys_opts);
    } catch (const ConvergenceError&) {
        // (s, mu) = (1, nominal mean)
        path = "2-D Newton (fallback start)";
        roots = numerics::solve_2d([&](double a, double b) { return system(a, b); }, {2.0, 2.0 * nominal.mean()},
                                   sys_opts);
    }

    auto state = std::make_shared<SymState>(SymState{nominal, roots.first.root, roots.second.root});
    WorstCaseSolution solution{.nominal = nominal, .kind = DivergenceKind::symmetrized, .d = d};
    solution.s_star = 2.0 / state->slope;
    solution.mu_star = state->offset / state->slope;
    solution.pdf = [state](double x) {
        const double f0 = state->nominal.pdf(x);
        return f0 == 0.0 ? 0.0 : f0 / numerics::wright_omega(state->slope * x + state->offset);
    };
    solution.log_ratio = [state](double x) {
        const double c = state->slope * x + state->offset;
        return numerics::wright_omega(c) - c;
    };
    solution.quadrature_points = points;

    const auto tight = detail::tight_quadrature(1e-2 * options.quad_tol);
    solution.mean =
        numerics::integrate_pieces([&](double x) { return x * solution.pdf(x); }, points, tight).value;
    const auto pdf = solution.pdf;
    const double quad_tol = options.quad_tol;
    solution.cdf = [nominal, points, pdf, quad_tol](double x) {
        return detail::cumulative_pdf(nominal, pdf, points, x, 1e-3 * quad_tol);
    };

    solution.diagnostics.iterations = roots.first.iterations;
    solution.diagnostics.path = path;
    solution.diagnostics.normalization_residual = detail::normalization_residual(solution, 1e-2 * options.quad_tol);
    const double achieved = detail::divergence_from_log_ratio(nominal, solution.log_ratio, DivergenceKind::symmetrized,
                                                              points, 1e-2 * options.quad_tol);
    solution.diagnostics.divergence_residual = std::abs(achieved - d);
    return solution;
}

} // namespace wcharvest
