#include "wcharvest/numerics.hpp"

#include "wcharvest/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

namespace wcharvest::numerics {

namespace {

// Kronrod 15-point abscissae and weights; the even-indexed entries 1, 3, 5, 7
// are the embedded 7-point Gauss nodes.
constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr double eps = std::numeric_limits<double>::epsilon();
constexpr double tiny = std::numeric_limits<double>::min();

struct Piece {
    double lo;
    double hi;
    double value;
    double error;
    bool mapped; // integrand is the [a, inf) -> [0, 1) transform
};

struct ByError {
    bool operator()(const Piece& x, const Piece& y) const { return x.error < y.error; }
};

class Integrator {
public:
    Integrator(const RealFunction& f, double map_origin) : f_(f), origin_(map_origin) {}

    Piece rule(double lo, double hi, bool mapped) {
        const double center = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        const double fc = eval(center, mapped);
        double resk = fc * kronrod_w[7];
        double resg = fc * gauss_w[3];
        double resabs = std::abs(resk);
        std::array<double, 7> fl{};
        std::array<double, 7> fr{};
        for (std::size_t j = 0; j < 7; ++j) {
            const double dx = half * kronrod_x[j];
            fl[j] = eval(center - dx, mapped);
            fr[j] = eval(center + dx, mapped);
            const double pair = fl[j] + fr[j];
            resk += kronrod_w[j] * pair;
            resabs += kronrod_w[j] * (std::abs(fl[j]) + std::abs(fr[j]));
            if (j % 2 == 1) {
                resg += gauss_w[j / 2] * pair;
            }
        }
        const double mean = 0.5 * resk;
        double resasc = kronrod_w[7] * std::abs(fc - mean);
        for (std::size_t j = 0; j < 7; ++j) {
            resasc += kronrod_w[j] * (std::abs(fl[j] - mean) + std::abs(fr[j] - mean));
        }
        resk *= half;
        resg *= half;
        resabs *= std::abs(half);
        resasc *= std::abs(half);

        double err = std::abs(resk - resg);
        if (resasc != 0.0 && err != 0.0) {
            err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
        }
        if (resabs > tiny / (50.0 * eps)) {
            err = std::max(50.0 * eps * resabs, err);
        }
        return Piece{lo, hi, resk, err, mapped};
    }

    std::size_t evaluations() const { return evaluations_; }

private:
    double eval(double x, bool mapped) {
        ++evaluations_;
        double value;
        double at = x;
        if (mapped) {
            const double one_minus = 1.0 - x;
            at = origin_ + x / one_minus;
            value = f_(at) / (one_minus * one_minus);
        } else {
            value = f_(x);
        }
        if (!std::isfinite(value)) {
            std::ostringstream msg;
            msg << "integrate: integrand is not finite at x = " << at;
            throw ConvergenceError(msg.str());
        }
        return value;
    }

    const RealFunction& f_;
    double origin_;
    std::size_t evaluations_ = 0;
};

} // namespace

QuadratureResult integrate_pieces(const RealFunction& f, std::span<const double> points,
                                  const QuadratureOptions& options) {
    if (points.size() < 2) {
        throw DomainError("integrate: need at least two break points");
    }
    if (!(options.abs_tol > 0.0) && !(options.rel_tol > 0.0)) {
        throw DomainError("integrate: tolerance must be positive");
    }
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (!std::isfinite(points[i]) || !(points[i] <= points[i + 1])) {
            throw DomainError("integrate: break points must be finite, ascending (last may be +inf)");
        }
    }

    const bool right_infinite = std::isinf(points.back());
    const double origin = right_infinite ? points[points.size() - 2] : 0.0;
    Integrator integrator(f, origin);

    std::priority_queue<Piece, std::vector<Piece>, ByError> active;
    std::vector<Piece> frozen;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const bool mapped = right_infinite && i + 2 == points.size();
        const double lo = mapped ? 0.0 : points[i];
        const double hi = mapped ? 1.0 : points[i + 1];
        if (lo == hi) {
            continue;
        }
        active.push(integrator.rule(lo, hi, mapped));
    }

    auto totals = [&] {
        double value = 0.0;
        double error = 0.0;
        auto copy = active;
        while (!copy.empty()) {
            value += copy.top().value;
            error += copy.top().error;
            copy.pop();
        }
        for (const auto& p : frozen) {
            value += p.value;
            error += p.error;
        }
        return std::pair{value, error};
    };

    auto [value, error] = totals();
    std::size_t since_resum = 0;
    while (error > std::max(options.abs_tol, options.rel_tol * std::abs(value))) {
        if (active.empty()) {
            std::ostringstream msg;
            msg << "integrate: error estimate " << error << " stuck above tolerance (roundoff limit)";
            throw ConvergenceError(msg.str());
        }
        if (integrator.evaluations() + 30 > options.max_evaluations) {
            std::ostringstream msg;
            msg << "integrate: evaluation budget " << options.max_evaluations << " exhausted with error estimate "
                << error;
            throw ConvergenceError(msg.str());
        }
        const Piece worst = active.top();
        active.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi) ||
            worst.hi - worst.lo <= 100.0 * eps * std::max(std::abs(worst.lo), std::abs(worst.hi))) {
            frozen.push_back(worst);
            double frozen_error = 0.0;
            for (const auto& piece : frozen) {
                frozen_error += piece.error;
            }
            if (frozen_error > std::max(options.abs_tol, options.rel_tol * std::abs(value))) {
                std::ostringstream msg;
                msg << "integrate: error estimate " << frozen_error << " stuck above tolerance (roundoff limit)";
                throw ConvergenceError(msg.str());
            }
            continue;
        }
        const Piece left = integrator.rule(worst.lo, mid, worst.mapped);
        const Piece right = integrator.rule(mid, worst.hi, worst.mapped);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        active.push(left);
        active.push(right);
        if (++since_resum == 64) {
            std::tie(value, error) = totals();
            since_resum = 0;
        }
    }
    std::tie(value, error) = totals();
    return QuadratureResult{value, error, integrator.evaluations()};
}

QuadratureResult integrate(const RealFunction& f, Interval support, const QuadratureOptions& options) {
    if (std::isnan(support.lower) || std::isnan(support.upper) || std::isinf(support.lower)) {
        throw DomainError("integrate: lower limit must be finite");
    }
    if (support.upper < support.lower) {
        throw DomainError("integrate: upper limit below lower limit");
    }
    const std::array<double, 2> points{support.lower, support.upper};
    return integrate_pieces(f, points, options);
}

QuadratureResult integrate(const RealFunction& f, Interval support, double tol) {
    QuadratureOptions options;
    options.abs_tol = tol;
    return integrate(f, support, options);
}

} // namespace wcharvest::numerics
