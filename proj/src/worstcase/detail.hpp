#pragma once

#include "wcharvest/worstcase.hpp"

#include <string>
#include <vector>

namespace wcharvest::detail {

/// d = 0: the nominal itself, with zero multipliers unset.
WorstCaseSolution nominal_solution(const NominalModel& nominal, DivergenceKind kind, ReverseKlMode mode);

void require_radius(double d);

/// Merge the nominal's break points with extra interior points; result is
/// sorted, unique and clipped to the nominal's integration range.
std::vector<double> merge_points(const NominalModel& nominal, std::vector<double> extra);

/// Geometric points scale * 4^k strictly inside (lo, hi).
std::vector<double> geometric_points(double scale, double lo, double hi);

/// Divergence of the given kind computed from f0 and log(f/f0).
double divergence_from_log_ratio(const NominalModel& nominal, const std::function<double(double)>& log_ratio,
                                 DivergenceKind kind, const std::vector<double>& points, double tol);

/// |int f0 exp(log_ratio) - 1| by quadrature over the solution's points.
double normalization_residual(const WorstCaseSolution& solution, double tol);

/// Cumulative quadrature of solution.pdf from the lower support end.
double cumulative_pdf(const NominalModel& nominal, const std::function<double(double)>& pdf,
                      const std::vector<double>& points, double x, double tol);

numerics::QuadratureOptions tight_quadrature(double abs_tol);

} // namespace wcharvest::detail
