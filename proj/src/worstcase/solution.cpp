#include "detail.hpp"

#include "wcharvest/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wcharvest {

namespace {

std::string normalized(std::string_view text) {
    std::string out(text);
    std::replace(out.begin(), out.end(), '_', '-');
    return out;
}

} // namespace

std::string_view to_string(DivergenceKind kind) {
    switch (kind) {
    case DivergenceKind::forward_kl:
        return "forward-kl";
    case DivergenceKind::reverse_kl:
        return "reverse-kl";
    case DivergenceKind::symmetrized:
        return "symmetrized";
    }
    return "unknown";
}

std::string_view to_string(ReverseKlMode mode) {
    return mode == ReverseKlMode::kkt ? "kkt" : "paper-exact";
}

DivergenceKind parse_divergence_kind(std::string_view text) {
    const std::string key = normalized(text);
    if (key == "forward-kl") {
        return DivergenceKind::forward_kl;
    }
    if (key == "reverse-kl") {
        return DivergenceKind::reverse_kl;
    }
    if (key == "symmetrized") {
        return DivergenceKind::symmetrized;
    }
    throw InputError("unknown divergence kind `" + std::string(text) + "` (forward-kl, reverse-kl, symmetrized)");
}

ReverseKlMode parse_reverse_mode(std::string_view text) {
    const std::string key = normalized(text);
    if (key == "kkt") {
        return ReverseKlMode::kkt;
    }
    if (key == "paper-exact") {
        return ReverseKlMode::paper_exact;
    }
    throw InputError("unknown reverse-KL mode `" + std::string(text) + "` (kkt, paper-exact)");
}

namespace detail {

void require_radius(double d) {
    if (!std::isfinite(d) || d < 0.0) {
        throw DomainError("divergence radius d must be finite and >= 0");
    }
}

numerics::QuadratureOptions tight_quadrature(double abs_tol) {
    numerics::QuadratureOptions q;
    q.abs_tol = abs_tol;
    q.rel_tol = 0.0;
    q.max_evaluations = 2000000;
    return q;
}

WorstCaseSolution nominal_solution(const NominalModel& nominal, DivergenceKind kind, ReverseKlMode mode) {
    WorstCaseSolution s{.nominal = nominal, .kind = kind, .mode = mode};
    s.mean = nominal.mean();
    s.pdf = [nominal](double x) { return nominal.pdf(x); };
    s.cdf = [nominal](double x) { return nominal.cdf(x); };
    s.log_ratio = [](double) { return 0.0; };
    s.quadrature_points = nominal.breakpoints();
    s.diagnostics.path = "zero-radius";
    return s;
}

std::vector<double> merge_points(const NominalModel& nominal, std::vector<double> extra) {
    std::vector<double> points = nominal.breakpoints();
    const double lo = points.front();
    const double hi = points.back();
    for (double p : extra) {
        if (std::isfinite(p) && p > lo && p < hi) {
            points.push_back(p);
        }
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return points;
}

std::vector<double> geometric_points(double scale, double lo, double hi) {
    std::vector<double> out;
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        return out;
    }
    for (double p = scale; p < hi; p *= 4.0) {
        if (p > lo) {
            out.push_back(p);
        }
    }
    return out;
}

double divergence_from_log_ratio(const NominalModel& nominal, const std::function<double(double)>& log_ratio,
                                 DivergenceKind kind, const std::vector<double>& points, double tol) {
    bool infinite = false;
    auto forward = [&](double x) {
        const double f0 = nominal.pdf(x);
        if (f0 == 0.0) {
            return 0.0;
        }
        const double lr = log_ratio(x);
        if (lr == -numerics::inf) {
            infinite = true;
            return 0.0;
        }
        return -f0 * lr;
    };
    auto reverse = [&](double x) {
        const double f0 = nominal.pdf(x);
        const double lr = log_ratio(x);
        if (f0 == 0.0 || lr == -numerics::inf) {
            return 0.0;
        }
        if (lr == numerics::inf) {
            infinite = true;
            return 0.0;
        }
        return f0 * std::exp(lr) * lr;
    };
    const auto opts = tight_quadrature(tol);
    double value = 0.0;
    if (kind != DivergenceKind::reverse_kl) {
        value += numerics::integrate_pieces(forward, points, opts).value;
    }
    if (kind != DivergenceKind::forward_kl) {
        value += numerics::integrate_pieces(reverse, points, opts).value;
    }
    if (infinite) {
        return numerics::inf;
    }
    return kind == DivergenceKind::symmetrized ? 0.5 * value : value;
}

double normalization_residual(const WorstCaseSolution& solution, double tol) {
    const auto& nominal = solution.nominal;
    auto integrand = [&](double x) {
        const double f0 = nominal.pdf(x);
        return f0 == 0.0 ? 0.0 : f0 * std::exp(solution.log_ratio(x));
    };
    const double total = numerics::integrate_pieces(integrand, solution.quadrature_points, tight_quadrature(tol)).value;
    return std::abs(total - 1.0);
}

double cumulative_pdf(const NominalModel& nominal, const std::function<double(double)>& pdf,
                      const std::vector<double>& points, double x, double tol) {
    const double lo = points.front();
    if (x <= lo) {
        return 0.0;
    }
    if (x >= points.back()) {
        return 1.0;
    }
    std::vector<double> upto;
    for (double p : points) {
        if (p < x) {
            upto.push_back(p);
        }
    }
    upto.push_back(x);
    (void)nominal;
    const double value = numerics::integrate_pieces(pdf, upto, tight_quadrature(tol)).value;
    return std::clamp(value, 0.0, 1.0);
}

} // namespace detail

WorstCaseSolution solve(const UncertaintySet& set, ReverseKlMode mode, const SolverOptions& options) {
    switch (set.kind) {
    case DivergenceKind::forward_kl:
        return solve_forward_kl(set.nominal, set.d, options);
    case DivergenceKind::reverse_kl:
        return solve_reverse_kl(set.nominal, set.d, mode, options);
    case DivergenceKind::symmetrized:
        return solve_symmetrized(set.nominal, set.d, options);
    }
    throw DomainError("unknown divergence kind");
}

double worst_cdf(const WorstCaseSolution& solution, double x) {
    if (!(x > solution.nominal.support_lower())) {
        return 0.0;
    }
    return std::clamp(solution.cdf(x), 0.0, 1.0);
}

double energy_outage(const WorstCaseSolution& solution, double threshold) {
    if (!std::isfinite(threshold) || threshold < 0.0) {
        throw DomainError("energy_outage: threshold must be finite and >= 0");
    }
    return worst_cdf(solution, threshold);
}

double achieved_divergence(const WorstCaseSolution& solution, const UncertaintySet& set, double tol) {
    return detail::divergence_from_log_ratio(set.nominal, solution.log_ratio, set.kind, solution.quadrature_points,
                                             tol);
}

double divergence(const NominalModel& nominal, const NominalModel& other, DivergenceKind kind, double tol) {
    // Integrate each direction over the support of the density in front of the log.
    auto one_way = [tol](const NominalModel& p, const NominalModel& q) {
        bool infinite = false;
        auto integrand = [&](double x) {
            const double px = p.pdf(x);
            if (px == 0.0) {
                return 0.0;
            }
            const double qx = q.pdf(x);
            if (qx == 0.0) {
                infinite = true;
                return 0.0;
            }
            return px * (std::log(px) - std::log(qx));
        };
        auto points = p.breakpoints();
        // Resolve kinks of the other density inside p's range too.
        for (double b : q.breakpoints()) {
            if (b > points.front() && b < points.back()) {
                points.push_back(b);
            }
        }
        std::sort(points.begin(), points.end());
        points.erase(std::unique(points.begin(), points.end()), points.end());
        const double value = numerics::integrate_pieces(integrand, points, detail::tight_quadrature(tol)).value;
        return infinite ? numerics::inf : value;
    };
    switch (kind) {
    case DivergenceKind::forward_kl:
        return one_way(nominal, other);
    case DivergenceKind::reverse_kl:
        return one_way(other, nominal);
    case DivergenceKind::symmetrized:
        return 0.5 * (one_way(nominal, other) + one_way(other, nominal));
    }
    throw DomainError("unknown divergence kind");
}

} // namespace wcharvest
