#include "reference.hpp"

#include "wcharvest/errors.hpp"
#include "wcharvest/nominal.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

using namespace wcharvest;

namespace {

std::string data_file(const char* name) { return std::string(WCH_TEST_DATA_DIR) + "/" + name; }

std::string load_error(const char* name) {
    try {
        NominalModel::load_table(data_file(name));
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_SUITE("nominal") {

TEST_CASE("pdf values") {
    CHECK(NominalModel::exponential(1.0).pdf(0.0) == 1.0);
    CHECK(NominalModel::uniform(2.0).pdf(3.0) == 0.0);
    CHECK(NominalModel::uniform(2.0).pdf(1.0) == 0.5);
    CHECK(NominalModel::exponential(2.0).pdf(1.0) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-15));
    CHECK(NominalModel::exponential(2.0).pdf(-1.0) == 0.0);
}

TEST_CASE("cdf values") {
    CHECK(NominalModel::exponential(1.0).cdf(1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
    CHECK(NominalModel::uniform(2.0).cdf(1.0) == 0.5);
    CHECK(NominalModel::uniform(2.0).cdf(2.0) == 1.0);
    CHECK(NominalModel::uniform(2.0).cdf(-0.1) == 0.0);
    CHECK(NominalModel::exponential(3.0).survival(2.0) == doctest::Approx(std::exp(-6.0)).epsilon(1e-15));
}

TEST_CASE("means") {
    CHECK(NominalModel::exponential(1.0).mean() == 1.0);
    CHECK(NominalModel::uniform(2.0).mean() == 1.0);
    CHECK(NominalModel::exponential(0.5).mean() == 2.0);
}

TEST_CASE("invalid parameters") {
    CHECK_THROWS_AS(NominalModel::exponential(0.0), InputError);
    CHECK_THROWS_AS(NominalModel::exponential(-1.0), InputError);
    CHECK_THROWS_AS(NominalModel::uniform(std::nan("")), InputError);
}

TEST_CASE("cdf is the integral of the pdf at 100 quantiles") {
    const auto table = NominalModel::load_table(data_file("gamma2_table.csv"));
    for (const auto& model : {NominalModel::exponential(1.0), NominalModel::exponential(2.5), NominalModel::uniform(2.0), table}) {
        CAPTURE(model.describe());
        const double lo = model.support_lower();
        for (int k = 1; k <= 100; ++k) {
            const double p = (k - 0.5) / 100.0;
            const double x = model.quantile(p);
            CHECK(model.cdf(x) == doctest::Approx(p).epsilon(1e-9));
            // Simpson over the table's nodes keeps the piecewise-linear pdf smooth per piece.
            double integral = 0.0;
            double a = lo;
            for (double b : model.breakpoints()) {
                if (b <= a) {
                    continue;
                }
                const double top = std::min(b, x);
                integral += reference::simpson([&](double t) { return model.pdf(t); }, a, top, 1e-13);
                a = top;
                if (a >= x) {
                    break;
                }
            }
            if (a < x) {
                integral += reference::simpson([&](double t) { return model.pdf(t); }, a, x, 1e-13);
            }
            CHECK(std::abs(model.cdf(x) - integral) < 1e-7);
        }
    }
}

TEST_CASE("tabulated table loads, renormalizes and interpolates") {
    const auto table = NominalModel::load_table(data_file("gamma2_table.csv"));
    CHECK(table.is_tabulated());
    const double total = reference::simpson([&](double x) { return table.pdf(x); }, 0.0, 30.0, 1e-13);
    CHECK(std::abs(total - 1.0) < 1e-9);
    CHECK(table.cdf(30.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(table.pdf(31.0) == 0.0);
    // piecewise-linear between nodes
    CHECK(table.pdf(1.05) == doctest::Approx(0.5 * (table.pdf(1.0) + table.pdf(1.1))).epsilon(1e-14));
    // Gamma(2,1) has mean 2; the linearized table is close
    CHECK(table.mean() == doctest::Approx(2.0).epsilon(2e-3));
    const double mean_integral = reference::simpson([&](double x) { return x * table.pdf(x); }, 0.0, 30.0, 1e-13);
    CHECK(std::abs(table.mean() - mean_integral) < 1e-9);
}

TEST_CASE("tabulated pdf with arbitrary scale is renormalized") {
    std::vector<double> xs;
    std::vector<double> ps;
    for (int i = 0; i <= 40; ++i) {
        xs.push_back(0.25 * i);
        ps.push_back(37.0 * (1.0 + std::sin(0.25 * i)));
    }
    const auto model = NominalModel::tabulated(xs, ps);
    double total = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        total += reference::simpson([&](double x) { return model.pdf(x); }, xs[i - 1], xs[i], 1e-14);
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
}

TEST_CASE("bad tables name the offending line") {
    const auto nonascending = load_error("bad_nonascending.csv");
    CHECK(nonascending.find("bad_nonascending.csv:5:") != std::string::npos);
    CHECK(nonascending.find("ascending") != std::string::npos);

    CHECK(load_error("bad_header.csv").find(":1:") != std::string::npos);
    CHECK(load_error("bad_number.csv").find("bad_number.csv:4:") != std::string::npos);
    CHECK(load_error("too_short.csv").find("at least 8") != std::string::npos);
    CHECK_THROWS_AS(NominalModel::load_table(data_file("missing.csv")), InputError);
}

TEST_CASE("tables from a stream") {
    std::istringstream in("x,pdf\n0,1\n1,1\n2,1\n3,1\n4,1\n5,1\n6,1\n7,1\n8,1\n");
    const auto model = NominalModel::read_table(in, "inline");
    CHECK(model.mean() == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(model.cdf(2.0) == doctest::Approx(0.25).epsilon(1e-14));

    std::istringstream negative("x,pdf\n0,1\n1,-1\n2,1\n3,1\n4,1\n5,1\n6,1\n7,1\n8,1\n");
    CHECK_THROWS_WITH_AS(NominalModel::read_table(negative, "neg"), doctest::Contains("neg:3:"), InputError);
}

}
