#pragma once

#include "wcharvest/nominal.hpp"
#include "wcharvest/numerics.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wcharvest {

enum class DivergenceKind {
    forward_kl, ///< D(f0 || f) <= d
    reverse_kl, ///< D(f || f0) <= d
    symmetrized ///< (D(f0 || f) + D(f || f0)) / 2 <= d
};

/// How the reverse-KL dual variable is determined.
enum class ReverseKlMode {
    /// Exact complementary-slackness boundary D(f || f0) = d.
    kkt,
    /// xi(s) = d with xi(s) = s log(Z/rate) - 1/Z, Z = 1/s + rate, larger root,
    /// clamped at the peak of xi. Gives a constant floor for large d.
    /// Exponential nominals only.
    paper_exact
};

std::string_view to_string(DivergenceKind kind);
std::string_view to_string(ReverseKlMode mode);
/// Accepts "forward-kl", "reverse-kl", "symmetrized" (and '_' spellings).
DivergenceKind parse_divergence_kind(std::string_view text);
/// Accepts "kkt", "paper-exact" (and '_' spelling).
ReverseKlMode parse_reverse_mode(std::string_view text);

/// Ambiguity set: every density within divergence d (nats) of the nominal.
struct UncertaintySet {
    NominalModel nominal;
    DivergenceKind kind = DivergenceKind::forward_kl;
    double d = 0.0;
};

struct SolverOptions {
    /// Absolute tolerance for diagnostic integrals (normalization, divergence, cdf).
    double quad_tol = 1e-9;
    /// Residual tolerance of the scalar dual equations.
    double root_tol = 1e-10;
    /// Max-norm residual tolerance of the symmetrized 2-D system.
    double system_tol = 1e-8;
    /// Use closed forms for exponential nominals. Disable to force the
    /// quadrature-based path.
    bool use_closed_forms = true;
};

struct SolveDiagnostics {
    double normalization_residual = 0.0; ///< |int f - 1|
    double divergence_residual = 0.0;    ///< |achieved divergence - d|
    std::size_t iterations = 0;
    std::string path; ///< which solver branch produced the result
};

/// Worst-case (mean-minimizing) density and its summary values. Immutable;
/// the callables share their captured state and are safe to call from many
/// threads.
struct WorstCaseSolution {
    NominalModel nominal;
    DivergenceKind kind = DivergenceKind::forward_kl;
    ReverseKlMode mode = ReverseKlMode::kkt;
    double d = 0.0;
    double mean = 0.0;
    std::optional<double> mu_star;
    std::optional<double> s_star;
    std::function<double(double)> pdf;
    std::function<double(double)> cdf;
    /// log(f(x) / f0(x)) on the nominal support.
    std::function<double(double)> log_ratio;
    /// Break points that resolve the density's structure for quadrature.
    std::vector<double> quadrature_points;
    SolveDiagnostics diagnostics;
};

/// min E_f[X] subject to D(f0 || f) <= d. The worst case is
/// f(x) = f0(x) / (q(mu) (x + mu)) with q(mu) = int f0(x) / (x + mu) dx and mu
/// the root of int f0(x) log(q(mu) (x + mu)) dx = d. The root is searched in
/// log(mu) because mu falls below the double range for d beyond about 5.
WorstCaseSolution solve_forward_kl(const NominalModel& nominal, double d, const SolverOptions& options = {});

/// min E_f[X] subject to D(f || f0) <= d. The worst case is the exponential
/// tilt f(x) = exp(-x/s) f0(x) / psi1(s); see ReverseKlMode for how s is set.
WorstCaseSolution solve_reverse_kl(const NominalModel& nominal, double d, ReverseKlMode mode = ReverseKlMode::kkt,
                                   const SolverOptions& options = {});

/// min E_f[X] subject to D_sym(f0, f) <= d. The worst case is
/// f(x) = f0(x) / omega(2 (x + mu) / s), omega the Wright omega function, with
/// (s, mu) solving {int f = 1, D_sym = d}.
WorstCaseSolution solve_symmetrized(const NominalModel& nominal, double d, const SolverOptions& options = {});

/// Dispatch on set.kind (mode only matters for reverse KL).
WorstCaseSolution solve(const UncertaintySet& set, ReverseKlMode mode = ReverseKlMode::kkt,
                        const SolverOptions& options = {});

/// F(x) of the worst-case distribution.
double worst_cdf(const WorstCaseSolution& solution, double x);

/// P(harvested energy <= threshold) under the worst case.
double energy_outage(const WorstCaseSolution& solution, double threshold);

/// Divergence of the solution from the set's nominal, of the set's kind,
/// evaluated by quadrature. +inf when the densities' supports make it
/// unbounded.
double achieved_divergence(const WorstCaseSolution& solution, const UncertaintySet& set, double tol = 1e-10);

/// Divergence between two models: forward is D(nominal || other), reverse is
/// D(other || nominal). +inf on a support mismatch.
double divergence(const NominalModel& nominal, const NominalModel& other, DivergenceKind kind, double tol = 1e-11);

/// Residual of the reverse-KL dual equation
///   -zeta(s)/psi1(s) - s log psi1(s) - s d,
/// psi1(s) = int exp(-x/s) f0, zeta(s) = int x exp(-x/s) f0, by quadrature.
double reverse_kl_dual_residual(const NominalModel& nominal, double s, double d);

/// xi(s) = s log(Z/rate) - 1/Z with Z = 1/s + rate.
double reverse_xi(double s, double rate);
/// xi'(s) = log(1 + 1/(rate s)) - (2 + rate s) / (rate s + 1)^2.
double reverse_xi_derivative(double s, double rate);
/// The maximizer s-bar of xi (root of xi'), found by bracketed root search.
numerics::RootResult reverse_xi_peak(double rate);

} // namespace wcharvest
