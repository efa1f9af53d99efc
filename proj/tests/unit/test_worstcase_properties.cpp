#include "wcharvest/worstcase.hpp"

#include <doctest.h>

#include <cmath>
#include <string>
#include <thread>
#include <vector>

using namespace wcharvest;

namespace {

const DivergenceKind all_kinds[] = {DivergenceKind::forward_kl, DivergenceKind::reverse_kl,
                                    DivergenceKind::symmetrized};

std::vector<NominalModel> nominals() {
    std::vector<double> xs;
    std::vector<double> ps;
    for (int i = 0; i <= 150; ++i) {
        xs.push_back(0.1 * i);
        ps.push_back(std::exp(-0.1 * i) * (1.0 + 0.1 * i));
    }
    return {NominalModel::exponential(1.0), NominalModel::exponential(2.0), NominalModel::uniform(1.0),
            NominalModel::tabulated(xs, ps)};
}

std::vector<double> x_grid(const NominalModel& nominal, int n) {
    const double top = nominal.is_exponential() ? 8.0 / nominal.rate() : nominal.integration_upper();
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) {
        xs.push_back(top * (i + 0.5) / n);
    }
    return xs;
}

} // namespace

TEST_SUITE("worstcase properties") {

TEST_CASE("mean is nonincreasing in d") {
    for (const auto& nominal : nominals()) {
        for (auto kind : all_kinds) {
            CAPTURE(nominal.describe());
            CAPTURE(std::string(to_string(kind)));
            double previous = nominal.mean();
            for (int i = 1; i <= 20; ++i) {
                const double d = 0.15 * i;
                const double mean = solve(UncertaintySet{nominal, kind, d}).mean;
                CHECK(mean <= previous);
                previous = mean;
            }
        }
    }
}

TEST_CASE("zero radius is the identity") {
    for (const auto& nominal : nominals()) {
        for (auto kind : all_kinds) {
            const auto s = solve(UncertaintySet{nominal, kind, 0.0});
            CHECK(std::abs(s.mean - nominal.mean()) <= 1e-9);
            for (double x : x_grid(nominal, 50)) {
                CHECK(s.pdf(x) == nominal.pdf(x));
            }
        }
    }
}

TEST_CASE("KKT structure, pointwise on 200 points") {
    for (const auto& nominal : nominals()) {
        CAPTURE(nominal.describe());
        for (double d : {0.1, 0.6, 1.5}) {
            CAPTURE(d);
            const auto fwd = solve_forward_kl(nominal, d);
            const double q = 1.0 / (fwd.mean + *fwd.mu_star);
            for (double x : x_grid(nominal, 200)) {
                const double f0 = nominal.pdf(x);
                CHECK(std::abs(fwd.pdf(x) * q * (x + *fwd.mu_star) - f0) <= 1e-8 * std::max(f0, 1e-300));
            }

            const auto rev = solve_reverse_kl(nominal, d);
            const auto xs = x_grid(nominal, 200);
            const double constant = std::log(rev.pdf(xs[0])) - std::log(nominal.pdf(xs[0])) + xs[0] / *rev.s_star;
            for (double x : xs) {
                const double tilt = std::log(rev.pdf(x)) - std::log(nominal.pdf(x)) + x / *rev.s_star;
                CHECK(std::abs(tilt - constant) <= 1e-8 * std::max(1.0, std::abs(constant)));
            }

            const auto sym = solve_symmetrized(nominal, d);
            for (double x : xs) {
                const double ratio = nominal.pdf(x) / sym.pdf(x);
                const double rhs = 2.0 * (x + *sym.mu_star) / *sym.s_star;
                CHECK(std::abs(ratio + std::log(ratio) - rhs) <= 1e-8 * std::max(1.0, std::abs(rhs)));
            }
        }
    }
}

TEST_CASE("worst case CDF dominates the nominal CDF") {
    for (const auto& nominal : nominals()) {
        for (auto kind : all_kinds) {
            for (double d : {0.05, 0.5, 2.0}) {
                const auto s = solve(UncertaintySet{nominal, kind, d});
                double previous = 0.0;
                for (double x : x_grid(nominal, 1000)) {
                    const double F = worst_cdf(s, x);
                    CHECK(F >= nominal.cdf(x) - 1e-10);
                    CHECK(F >= previous - 1e-12);
                    previous = F;
                }
            }
        }
    }
}

TEST_CASE("forward KL mean decays to zero") {
    const auto nominal = NominalModel::exponential(1.0);
    const double m2 = solve_forward_kl(nominal, 2.0).mean;
    const double m4 = solve_forward_kl(nominal, 4.0).mean;
    const double m8 = solve_forward_kl(nominal, 8.0).mean;
    CHECK(m2 > m4);
    CHECK(m4 > m8);
    CHECK(m2 < 0.15);
    CHECK(m8 > 0.0);
    // mu underflows long before the mean does
    CHECK(solve_forward_kl(nominal, 8.0).diagnostics.divergence_residual < 1e-8);
}

TEST_CASE("generic quadrature agrees with the exponential closed forms") {
    SolverOptions generic;
    generic.use_closed_forms = false;
    for (double rate : {1.0, 2.5}) {
        const auto nominal = NominalModel::exponential(rate);
        for (double d : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0}) {
            CAPTURE(rate);
            CAPTURE(d);
            const auto fast = solve_forward_kl(nominal, d);
            const auto slow = solve_forward_kl(nominal, d, generic);
            CHECK(slow.diagnostics.path != fast.diagnostics.path);
            CHECK(std::abs(slow.mean / fast.mean - 1.0) <= 1e-6);
            CHECK(std::abs(*slow.mu_star / *fast.mu_star - 1.0) <= 1e-6);

            const auto rfast = solve_reverse_kl(nominal, d);
            const auto rslow = solve_reverse_kl(nominal, d, ReverseKlMode::kkt, generic);
            CHECK(std::abs(rslow.mean / rfast.mean - 1.0) <= 1e-6);
            CHECK(std::abs(*rslow.s_star / *rfast.s_star - 1.0) <= 1e-6);

            for (double x : {0.0, 0.1 / rate, 1.0 / rate, 5.0 / rate}) {
                CHECK(std::abs(slow.pdf(x) / fast.pdf(x) - 1.0) <= 1e-6);
                CHECK(std::abs(rslow.pdf(x) / rfast.pdf(x) - 1.0) <= 1e-6);
                CHECK(std::abs(worst_cdf(slow, x) - worst_cdf(fast, x)) <= 1e-7);
            }
        }
    }
}

TEST_CASE("solutions are safe to share across threads") {
    const auto s = solve_symmetrized(NominalModel::exponential(1.0), 0.4);
    std::vector<double> serial(64);
    for (std::size_t i = 0; i < serial.size(); ++i) {
        serial[i] = worst_cdf(s, 0.1 * static_cast<double>(i));
    }
    std::vector<double> parallel(serial.size());
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < 4; ++t) {
        threads.emplace_back([&, t] {
            for (std::size_t i = t; i < parallel.size(); i += 4) {
                parallel[i] = worst_cdf(s, 0.1 * static_cast<double>(i));
            }
        });
    }
    for (auto& th : threads) {
        th.join();
    }
    CHECK(parallel == serial);
}

}
