#pragma once

#include "wcharvest/worstcase.hpp"

#include <string_view>

namespace wcharvest::knownclass {

/// Which forward-KL boundary to report for the exponential class.
enum class ForwardFormula {
    /// lambda1 = lambda0 x*, x* >= 1 the root of x - log x = d + 1, i.e.
    /// -W_{-1}(-exp(-d-1)): the true edge of the feasible set.
    exact_root,
    /// max[-lambda0 W0(-exp(-d-1)), lambda0 (1 + d)], evaluated as printed.
    /// Lies inside the feasible set for d > 0.
    paper_formula
};

std::string_view to_string(ForwardFormula formula);

struct KnownClassSolution {
    /// lambda1* (per unit energy) for the exponential class, beta* (energy)
    /// for the uniform class.
    double boundary_parameter = 0.0;
    double mean = 0.0;
    ForwardFormula formula_used = ForwardFormula::exact_root;
};

/// D(Exp(rate0) || Exp(rate1)) = log(rate0/rate1) + (rate1 - rate0)/rate0.
double exp_forward_divergence(double rate0, double rate1);
/// D(Exp(rate1) || Exp(rate0)) = log(rate1/rate0) + rate0/rate1 - 1.
double exp_reverse_divergence(double rate0, double rate1);
/// Half-sum of the two: (rate1/rate0 + rate0/rate1 - 2) / 2.
double exp_symmetrized_divergence(double rate0, double rate1);

KnownClassSolution exp_class_forward(double rate0, double d, ForwardFormula formula = ForwardFormula::exact_root);
KnownClassSolution exp_class_reverse(double rate0, double d);
KnownClassSolution exp_class_symmetrized(double rate0, double d);

/// U(0, alpha) nominal, U(0, beta) actual, reverse KL: beta* = alpha exp(-d).
KnownClassSolution uniform_class_reverse(double alpha, double d);

/// Divergence between U(0, alpha) (nominal) and U(0, beta) (actual). Returns
/// +inf when the density in front of the logarithm is not dominated by the
/// other one, e.g. forward KL and symmetrized for beta < alpha.
double uniform_class_dominance_check(double alpha, double beta, DivergenceKind kind);

} // namespace wcharvest::knownclass
