#include "wcharvest/knownclass.hpp"

#include "wcharvest/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wcharvest::knownclass {

namespace {

void require(double rate0, double d) {
    if (!std::isfinite(rate0) || rate0 <= 0.0) {
        throw DomainError("known class: nominal parameter must be finite and > 0");
    }
    if (!std::isfinite(d) || d < 0.0) {
        throw DomainError("known class: radius d must be finite and >= 0");
    }
}

KnownClassSolution exponential(double rate1, ForwardFormula used) { return {rate1, 1.0 / rate1, used}; }

} // namespace

std::string_view to_string(ForwardFormula formula) {
    return formula == ForwardFormula::exact_root ? "exact_root" : "paper_formula";
}

double exp_forward_divergence(double rate0, double rate1) {
    return std::log(rate0 / rate1) + (rate1 - rate0) / rate0;
}

double exp_reverse_divergence(double rate0, double rate1) { return std::log(rate1 / rate0) + rate0 / rate1 - 1.0; }

double exp_symmetrized_divergence(double rate0, double rate1) {
    return 0.5 * (rate1 / rate0 + rate0 / rate1 - 2.0);
}

KnownClassSolution exp_class_forward(double rate0, double d, ForwardFormula formula) {
    require(rate0, d);
    if (d == 0.0) {
        return exponential(rate0, formula);
    }
    const double arg = -std::exp(-d - 1.0);
    if (formula == ForwardFormula::paper_formula) {
        const double w0 = numerics::lambert_w(numerics::LambertBranch::principal, arg);
        return exponential(std::max(-rate0 * w0, rate0 * (1.0 + d)), formula);
    }
    // x - log x = d + 1 on x >= 1  <=>  -x exp(-x) = -exp(-d-1), lower branch.
    const double x = -numerics::lambert_w(numerics::LambertBranch::minus_one, arg);
    return exponential(rate0 * x, formula);
}

KnownClassSolution exp_class_reverse(double rate0, double d) {
    require(rate0, d);
    if (d == 0.0) {
        return exponential(rate0, ForwardFormula::exact_root);
    }
    // y = rate0/rate1 in (0, 1]: y - log y = d + 1, principal branch.
    const double w0 = numerics::lambert_w(numerics::LambertBranch::principal, -std::exp(-1.0 - d));
    return exponential(std::max(-rate0 / w0, rate0 / (1.0 + d)), ForwardFormula::exact_root);
}

KnownClassSolution exp_class_symmetrized(double rate0, double d) {
    require(rate0, d);
    const double rate1 = rate0 * (d + 1.0) + rate0 * std::sqrt(d * (d + 2.0));
    return exponential(rate1, ForwardFormula::exact_root);
}

KnownClassSolution uniform_class_reverse(double alpha, double d) {
    require(alpha, d);
    const double beta = alpha * std::exp(-d);
    return KnownClassSolution{beta, 0.5 * beta, ForwardFormula::exact_root};
}

double uniform_class_dominance_check(double alpha, double beta, DivergenceKind kind) {
    if (!std::isfinite(alpha) || !std::isfinite(beta) || alpha <= 0.0 || beta <= 0.0) {
        throw DomainError("uniform dominance check: alpha and beta must be finite and > 0");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    // D(U(0,a) || U(0,b)) = log(b/a) when a <= b, infinite otherwise.
    const double forward = alpha <= beta ? std::log(beta / alpha) : inf;
    const double reverse = beta <= alpha ? std::log(alpha / beta) : inf;
    switch (kind) {
    case DivergenceKind::forward_kl:
        return forward;
    case DivergenceKind::reverse_kl:
        return reverse;
    case DivergenceKind::symmetrized:
        return 0.5 * (forward + reverse);
    }
    throw DomainError("unknown divergence kind");
}

} // namespace wcharvest::knownclass
