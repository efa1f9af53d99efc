#pragma once

#include "wcharvest/nominal.hpp"
#include "wcharvest/worstcase.hpp"

#include <cstddef>
#include <functional>
#include <vector>

/// Independent check of the worst-case solvers. The problem is discretized on
/// an energy grid and solved as a finite convex program by a primal log-barrier
/// method (positivity logs weighted 1/n), with no use of the dual closed forms.
namespace wcharvest::oracle {

struct GridDistribution {
    std::vector<double> xs; ///< cell midpoints, strictly ascending
    std::vector<double> ps; ///< probabilities, sum 1

    double mean() const;
};

/// Cells of width x_max / n on [0, x_max]; weights are the nominal's cdf
/// differences, renormalized. Throws DomainError for n < 50 and when more than
/// 1e-6 of the nominal mass lies beyond x_max.
GridDistribution discretize(const NominalModel& nominal, double x_max, std::size_t n);
/// x_max = the nominal's 1 - 1e-9 quantile.
GridDistribution discretize(const NominalModel& nominal, std::size_t n);

/// Sample a density at the grid's points and renormalize.
GridDistribution sample_density(const GridDistribution& grid, const std::function<double(double)>& pdf);

/// Discrete divergence sum p log(p/q) (0 log 0 = 0); forward means D(q || p)
/// with q the first argument. +inf when dominance fails. Throws DomainError
/// if the grids differ.
double divergence(const GridDistribution& nominal, const GridDistribution& other, DivergenceKind kind);

struct OracleOptions {
    /// Target duality gap 2/t of the barrier method (objective accuracy).
    double tol = 1e-9;
    double barrier_growth = 10.0;
    std::size_t max_newton_iterations = 5000;
};

struct OracleSolution {
    double worst_mean = 0.0;
    GridDistribution worst;
    double simplex_residual = 0.0;     ///< |sum p - 1|
    double divergence = 0.0;           ///< achieved discrete divergence
    double stationarity_residual = 0.0; ///< max_i p_i |dL/dp_i|, barrier duals, Lagrangian in log p
    double duality_gap = 0.0;          ///< m / t at exit
    std::size_t newton_iterations = 0;
    std::size_t outer_iterations = 0;
};

/// min sum x_i p_i over the simplex subject to divergence(nominal, p) <= d.
/// Cells where the nominal weight is zero are held at zero.
OracleSolution solve_discrete(const GridDistribution& nominal, DivergenceKind kind, double d,
                              const OracleOptions& options = {});

} // namespace wcharvest::oracle
