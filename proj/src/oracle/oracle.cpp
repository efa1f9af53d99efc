#include "wcharvest/oracle.hpp"

#include "wcharvest/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace wcharvest::oracle {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void renormalize(std::vector<double>& ps) {
    const double total = std::accumulate(ps.begin(), ps.end(), 0.0);
    if (!(total > 0.0)) {
        throw DomainError("grid distribution has zero mass");
    }
    for (double& p : ps) {
        p /= total;
    }
}

// Per-cell divergence term and its first two derivatives in p.
struct Term {
    double value;
    double d1;
    double d2;
};

Term term(DivergenceKind kind, double q, double p) {
    const double log_ratio = std::log(p / q);
    const Term fwd{-q * log_ratio, -q / p, q / (p * p)};
    const Term rev{p * log_ratio, log_ratio + 1.0, 1.0 / p};
    switch (kind) {
    case DivergenceKind::forward_kl:
        return fwd;
    case DivergenceKind::reverse_kl:
        return rev;
    case DivergenceKind::symmetrized:
        return {0.5 * (fwd.value + rev.value), 0.5 * (fwd.d1 + rev.d1), 0.5 * (fwd.d2 + rev.d2)};
    }
    return fwd;
}

class Barrier {
public:
    Barrier(std::vector<double> xs, std::vector<double> qs, DivergenceKind kind, double d)
        : xs_(std::move(xs)), qs_(std::move(qs)), kind_(kind), d_(d),
          weight_(1.0 / static_cast<double>(xs_.size())) {}

    /// Sum of barrier weights; the duality gap at a centered point is this over t.
    double barrier_mass() const { return 2.0; }

    std::size_t size() const { return xs_.size(); }

    double divergence(const std::vector<double>& p) const {
        double total = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            total += term(kind_, qs_[i], p[i]).value;
        }
        return total;
    }

    // +inf outside the domain.
    double objective(const std::vector<double>& p, double t) const {
        double lin = 0.0;
        double logs = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!(p[i] > 0.0)) {
                return inf;
            }
            lin += xs_[i] * p[i];
            logs += std::log(p[i]);
        }
        const double slack = d_ - divergence(p);
        if (!(slack > 0.0)) {
            return inf;
        }
        return t * lin - std::log(slack) - weight_ * logs;
    }

    struct Step {
        std::vector<double> direction;
        double decrement_sq;
    };

    // Newton step for the equality-constrained barrier problem. The Hessian is
    // diag(h) + u u^T, inverted with Sherman-Morrison.
    Step newton(const std::vector<double>& p, double t) const {
        const std::size_t n = p.size();
        const double slack = d_ - divergence(p);
        std::vector<double> g(n);
        std::vector<double> h(n);
        std::vector<double> u(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Term tm = term(kind_, qs_[i], p[i]);
            u[i] = tm.d1 / slack;
            g[i] = t * xs_[i] + u[i] - weight_ / p[i];
            h[i] = tm.d2 / slack + weight_ / (p[i] * p[i]);
        }
        // Solve H y = v for v = g and v = 1.
        double uhu = 0.0;
        double uhg = 0.0;
        double uh1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            uhu += u[i] * u[i] / h[i];
            uhg += u[i] * g[i] / h[i];
            uh1 += u[i] / h[i];
        }
        const double denom = 1.0 + uhu;
        std::vector<double> a(n);
        std::vector<double> b(n);
        double sum_a = 0.0;
        double sum_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = (g[i] - u[i] * uhg / denom) / h[i];
            b[i] = (1.0 - u[i] * uh1 / denom) / h[i];
            sum_a += a[i];
            sum_b += b[i];
        }
        const double nu = -sum_a / sum_b;
        // lambda^2 = dir^T H dir, evaluated in the form that cannot go negative.
        std::vector<double> dir(n);
        double dec = 0.0;
        double u_dir = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dir[i] = -(a[i] + nu * b[i]);
            dec += h[i] * dir[i] * dir[i];
            u_dir += u[i] * dir[i];
        }
        dec += u_dir * u_dir;
        return Step{std::move(dir), dec};
    }

    // KKT residual r_i = x_i + eta D'_i - lambda_i + nu with the barrier duals
    // lambda_i = w / (t p_i). eta and nu are fitted by p-weighted least squares
    // instead of eta = 1/(t slack), whose slack carries roundoff from d - D(p).
    // Reported as max_i p_i |r_i|.
    double stationarity(const std::vector<double>& p, double t) const {
        const std::size_t n = p.size();
        std::vector<double> a(n);
        std::vector<double> c(n);
        double saa = 0.0, sa = 0.0, s1 = 0.0, sac = 0.0, sc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = term(kind_, qs_[i], p[i]).d1;
            c[i] = xs_[i] - weight_ / (t * p[i]);
            saa += p[i] * a[i] * a[i];
            sa += p[i] * a[i];
            s1 += p[i];
            sac += p[i] * a[i] * c[i];
            sc += p[i] * c[i];
        }
        const double det = saa * s1 - sa * sa;
        const double eta = (-sac * s1 + sa * sc) / det;
        const double nu = (-sc - eta * sa) / s1;
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            worst = std::max(worst, p[i] * std::abs(c[i] + eta * a[i] + nu));
        }
        return worst;
    }

private:
    std::vector<double> xs_;
    std::vector<double> qs_;
    DivergenceKind kind_;
    double d_;
    // Positivity logs share a total weight of one, balancing the single slack log.
    double weight_;
};

} // namespace

double GridDistribution::mean() const {
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        total += xs[i] * ps[i];
    }
    return total;
}

GridDistribution discretize(const NominalModel& nominal, double x_max, std::size_t n) {
    if (n < 50) {
        throw DomainError("discretize: need n >= 50 grid points, got " + std::to_string(n));
    }
    if (!std::isfinite(x_max) || x_max <= 0.0) {
        throw DomainError("discretize: x_max must be finite and > 0");
    }
    const double lost = nominal.survival(x_max);
    if (lost > 1e-6) {
        std::ostringstream msg;
        msg << "discretize: x_max = " << x_max << " leaves " << lost << " of the nominal mass uncovered";
        throw DomainError(msg.str());
    }
    GridDistribution grid;
    grid.xs.resize(n);
    grid.ps.resize(n);
    const double h = x_max / static_cast<double>(n);
    double upper_survival = nominal.survival(0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double lo = h * static_cast<double>(k);
        const double hi = h * static_cast<double>(k + 1);
        const double next_survival = nominal.survival(hi);
        grid.xs[k] = 0.5 * (lo + hi);
        grid.ps[k] = std::max(0.0, upper_survival - next_survival);
        upper_survival = next_survival;
    }
    renormalize(grid.ps);
    return grid;
}

GridDistribution discretize(const NominalModel& nominal, std::size_t n) {
    return discretize(nominal, nominal.quantile(1.0 - 1e-9), n);
}

GridDistribution sample_density(const GridDistribution& grid, const std::function<double(double)>& pdf) {
    GridDistribution out{grid.xs, std::vector<double>(grid.xs.size())};
    for (std::size_t i = 0; i < grid.xs.size(); ++i) {
        out.ps[i] = std::max(0.0, pdf(grid.xs[i]));
    }
    renormalize(out.ps);
    return out;
}

double divergence(const GridDistribution& nominal, const GridDistribution& other, DivergenceKind kind) {
    if (nominal.xs != other.xs || nominal.ps.size() != other.ps.size() || nominal.ps.size() != nominal.xs.size()) {
        throw DomainError("oracle divergence: grids differ");
    }
    // sum a log(a/b) with 0 log 0 = 0
    auto one_way = [](const std::vector<double>& a, const std::vector<double>& b) {
        double total = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0.0) {
                continue;
            }
            if (b[i] == 0.0) {
                return inf;
            }
            total += a[i] * std::log(a[i] / b[i]);
        }
        return total;
    };
    switch (kind) {
    case DivergenceKind::forward_kl:
        return one_way(nominal.ps, other.ps);
    case DivergenceKind::reverse_kl:
        return one_way(other.ps, nominal.ps);
    case DivergenceKind::symmetrized:
        return 0.5 * (one_way(nominal.ps, other.ps) + one_way(other.ps, nominal.ps));
    }
    throw DomainError("unknown divergence kind");
}

OracleSolution solve_discrete(const GridDistribution& nominal, DivergenceKind kind, double d,
                              const OracleOptions& options) {
    if (!std::isfinite(d) || d < 0.0) {
        throw DomainError("solve_discrete: d must be finite and >= 0");
    }
    if (!(options.tol > 0.0)) {
        throw DomainError("solve_discrete: tol must be > 0");
    }
    if (nominal.xs.size() != nominal.ps.size() || nominal.xs.empty()) {
        throw DomainError("solve_discrete: malformed grid");
    }

    OracleSolution out;
    if (d == 0.0) {
        out.worst = nominal;
        out.worst_mean = nominal.mean();
        out.simplex_residual = std::abs(std::accumulate(nominal.ps.begin(), nominal.ps.end(), 0.0) - 1.0);
        return out;
    }

    // Optimize over the cells the nominal charges.
    std::vector<std::size_t> active;
    std::vector<double> xs;
    std::vector<double> qs;
    for (std::size_t i = 0; i < nominal.ps.size(); ++i) {
        if (nominal.ps[i] > 0.0) {
            active.push_back(i);
            xs.push_back(nominal.xs[i]);
            qs.push_back(nominal.ps[i]);
        }
    }
    const Barrier barrier(xs, qs, kind, d);
    const double m = barrier.barrier_mass();

    std::vector<double> p = qs; // strictly feasible: divergence 0 < d
    std::vector<double> trial(p.size());
    double t = 1.0;
    for (;;) {
        ++out.outer_iterations;
        // Centering by damped Newton.
        for (;;) {
            if (++out.newton_iterations > options.max_newton_iterations) {
                std::ostringstream msg;
                msg << "oracle: Newton budget exhausted at t = " << t << ", divergence " << barrier.divergence(p);
                throw ConvergenceError(msg.str());
            }
            const auto step = barrier.newton(p, t);
            if (!(step.decrement_sq >= 0.0) || !std::isfinite(step.decrement_sq)) {
                std::ostringstream msg;
                msg << "oracle: invalid Newton decrement at t = " << t;
                throw ConvergenceError(msg.str());
            }
            if (0.5 * step.decrement_sq <= 1e-10) {
                break;
            }
            const double phi = barrier.objective(p, t);
            double alpha = 1.0;
            bool moved = false;
            for (int k = 0; k < 80; ++k, alpha *= 0.5) {
                for (std::size_t i = 0; i < p.size(); ++i) {
                    trial[i] = p[i] + alpha * step.direction[i];
                }
                const double phi_trial = barrier.objective(trial, t);
                if (phi_trial <= phi - 0.25 * alpha * step.decrement_sq + 1e-14 * std::abs(phi)) {
                    moved = true;
                    break;
                }
            }
            if (!moved) {
                break; // roundoff floor reached
            }
            p.swap(trial);
        }
        if (m / t <= options.tol) {
            break;
        }
        t *= options.barrier_growth;
    }

    // Report on the full grid.
    out.worst.xs = nominal.xs;
    out.worst.ps.assign(nominal.ps.size(), 0.0);
    for (std::size_t k = 0; k < active.size(); ++k) {
        out.worst.ps[active[k]] = p[k];
    }
    out.worst_mean = out.worst.mean();
    out.simplex_residual = std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0);
    out.divergence = barrier.divergence(p);
    out.duality_gap = m / t;
    out.stationarity_residual = barrier.stationarity(p, t);
    return out;
}

} // namespace wcharvest::oracle
