#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>

namespace wcharvest::numerics {

using RealFunction = std::function<double(double)>;

inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;
inline constexpr double inf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0.
///
/// Power series below x = 1, modified-Lentz continued fraction above. Relative
/// error is around 1e-15 on both sides of the switch. Throws DomainError for
/// x <= 0 or non-finite x.
double exp_integral_e1(double x);

/// exp(x) * E1(x), finite for every x > 0 (E1 itself underflows past x ~ 740).
double exp_integral_e1_scaled(double x);

/// exp(x) * E1(x) given only log(x). Stays accurate when x itself is below
/// the smallest representable double (log_x down to about -1e300).
double exp_integral_e1_scaled_from_log(double log_x);

enum class LambertBranch { principal, minus_one };

/// Real Lambert W: the w on the given branch with w * exp(w) = x.
/// principal needs x >= -1/e; minus_one needs -1/e <= x < 0.
double lambert_w(LambertBranch branch, double x);

/// Wright omega: the w > 0 with w + log(w) = c, i.e. W0(exp(c)) without ever
/// forming exp(c). Below c ~ -745 the result underflows to 0.
double wright_omega(double c);

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    std::size_t evaluations = 0;
};

struct QuadratureOptions {
    double abs_tol = 1e-9;
    double rel_tol = 0.0;
    std::size_t max_evaluations = 400000;
};

/// [lower, upper] with upper possibly +inf.
struct Interval {
    double lower = 0.0;
    double upper = inf;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration. A right-infinite
/// interval is mapped onto [0, 1) by x = a + t / (1 - t); the endpoint t = 1
/// is never sampled. Succeeds when the summed error estimate is at most
/// max(abs_tol, rel_tol * |value|); throws ConvergenceError otherwise.
QuadratureResult integrate(const RealFunction& f, Interval support, const QuadratureOptions& options = {});
QuadratureResult integrate(const RealFunction& f, Interval support, double tol);

/// Same as integrate() but starts refinement from the pieces delimited by
/// `points` (ascending; the last point may be +inf). Use it to place known
/// kinks or near-singular regions on piece boundaries.
QuadratureResult integrate_pieces(const RealFunction& f, std::span<const double> points,
                                  const QuadratureOptions& options = {});

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

struct RootResult {
    double root = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
    std::optional<std::pair<double, double>> bracket;
};

struct ScalarSolveOptions {
    double residual_tol = 1e-10;
    /// The unknown must stay strictly positive: the bracket is widened
    /// multiplicatively (lo / 2, hi * 2) instead of additively.
    bool positive = false;
    std::size_t max_expansions = 80;
    std::size_t max_iterations = 300;
};

/// Brent-style bracketed root finder (bisection, secant and inverse quadratic
/// steps). If the hint does not straddle a sign change, the bracket is doubled
/// until it does; NoSignChangeError after max_expansions.
RootResult solve_scalar(const RealFunction& g, std::pair<double, double> bracket_hint,
                        const ScalarSolveOptions& options = {});
RootResult solve_scalar(const RealFunction& g, std::pair<double, double> bracket_hint, double tol);

/// Right-hand side of a 2x2 system: returns (G1(u, v), G2(u, v)).
using System2 = std::function<std::pair<double, double>(double, double)>;

struct System2Options {
    double residual_tol = 1e-8;
    std::size_t max_iterations = 100;
    /// Keep the first unknown strictly positive.
    bool first_positive = false;
    double fd_relative_step = 1e-7;
};

/// Damped Newton iteration with a forward-difference Jacobian.
/// Returns one RootResult per unknown; each residual is the matching
/// equation's value at the returned point.
std::pair<RootResult, RootResult> solve_2d(const System2& system, std::pair<double, double> start,
                                           const System2Options& options = {});

} // namespace wcharvest::numerics
