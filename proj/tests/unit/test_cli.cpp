#include "cli/cli.hpp"

#include <json.hpp>

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace wcharvest;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) {
            fields.push_back(field);
        }
        if (!line.empty() && line.back() == ',') {
            fields.emplace_back();
        }
        rows.push_back(fields);
    }
    return rows;
}

double num(const std::string& s) { return std::stod(s); }

std::string data_file(const char* name) { return std::string(WCH_TEST_DATA_DIR) + "/" + name; }

} // namespace

TEST_SUITE("cli") {

TEST_CASE("grid and nominal parsing") {
    CHECK(cli::parse_grid("0:1:0.25") == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(cli::parse_grid("0.1,0.5,2") == std::vector<double>{0.1, 0.5, 2.0});
    CHECK(cli::parse_grid("3") == std::vector<double>{3.0});
    CHECK(cli::parse_grid("0:3:0.05").size() == 61);
    CHECK_THROWS(cli::parse_grid("1:0:0.1"));
    CHECK_THROWS(cli::parse_grid("0:1:0"));
    CHECK_THROWS(cli::parse_grid("a,b"));
    CHECK_THROWS(cli::parse_grid(""));

    CHECK(cli::parse_nominal_spec("exp:2").rate() == 2.0);
    CHECK(cli::parse_nominal_spec("uniform:3").uniform_upper() == 3.0);
    CHECK(cli::parse_nominal_spec("table:" + data_file("exp1_table.csv")).is_tabulated());
    CHECK_THROWS(cli::parse_nominal_spec("gamma:2"));
    CHECK_THROWS(cli::parse_nominal_spec("exp:"));
    CHECK_THROWS(cli::parse_nominal_spec("exp:-1"));

    CHECK(cli::format_real(0.1) == "0.1");
    CHECK(cli::format_real(1.0 / 3.0) == "0.333333333333");
    CHECK(cli::format_real(HUGE_VAL) == "inf");
    CHECK(cli::format_optional(std::nullopt).empty());
}

TEST_CASE("solve") {
    auto r = run({"solve", "--nominal", "exp:1.0", "--kind", "forward-kl", "--d", "0"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["mean"].get<double>() == 1.0);
    CHECK(j["kind"] == "forward-kl");
    for (const char* key : {"d", "mu_star", "s_star", "normalization_residual", "divergence_residual", "iterations", "mode"}) {
        CHECK(j.contains(key));
    }

    r = run({"solve", "--nominal", "exp:1.0", "--kind", "reverse-kl", "--mode", "paper-exact", "--d", "2"});
    REQUIRE(r.code == 0);
    CHECK(std::abs(nlohmann::json::parse(r.out)["mean"].get<double>() - 0.31) <= 0.01);

    r = run({"solve", "--kind", "symmetrized", "--d", "0.1", "--format", "csv"});
    REQUIRE(r.code == 0);
    const auto rows = csv(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == "kind");
    CHECK(rows[1][0] == "symmetrized");
    CHECK(num(rows[1][2]) == doctest::Approx(solve_symmetrized(NominalModel::exponential(1.0), 0.1).mean).epsilon(1e-11));
}

TEST_CASE("solve input errors") {
    auto r = run({"solve", "--nominal", "table:" + data_file("bad_nonascending.csv"), "--d", "0.5"});
    CHECK(r.code == 2);
    CHECK(r.err.find("bad_nonascending.csv:5:") != std::string::npos);

    CHECK(run({"solve", "--d", "-1"}).code == 2);
    CHECK(run({"solve", "--d", "0:1:0.5"}).code == 2);
    CHECK(run({"solve", "--d", "0.5", "--kind", "hellinger"}).code == 2);
    CHECK(run({"solve", "--d", "0.5", "--format", "xml"}).code == 2);
    CHECK(run({"solve", "--d", "0.5", "--bogus"}).code == 2);
    CHECK(run({"solve"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"solve", "--nominal", "uniform:1", "--kind", "reverse-kl", "--mode", "paper-exact", "--d", "0.5"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("sweep") {
    auto r = run({"sweep", "--nominal", "exp:1.0", "--kind", "forward-kl", "--d", "0:1:0.5"});
    REQUIRE(r.code == 0);
    auto rows = csv(r.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"d", "mean", "mu_star", "s_star", "iterations", "divergence_residual", "error"});
    CHECK(num(rows[1][1]) > num(rows[2][1]));
    CHECK(num(rows[2][1]) > num(rows[3][1]));

    r = run({"sweep", "--kind", "reverse-kl", "--mode", "paper-exact", "--d", "0.1:3:0.1"});
    REQUIRE(r.code == 0);
    rows = csv(r.out);
    CHECK(std::abs(num(rows.back()[1]) - 0.31) <= 0.01);
    CHECK(num(rows.back()[1]) == num(rows[rows.size() - 2][1]));

    double means[3];
    const char* kinds[3] = {"forward-kl", "reverse-kl", "symmetrized"};
    for (int k = 0; k < 3; ++k) {
        means[k] = num(csv(run({"sweep", "--kind", kinds[k], "--d", "0.1"}).out)[1][1]);
    }
    CHECK(means[1] < means[2]);
    CHECK(means[2] < means[0]);

    const auto first = run({"sweep", "--kind", "symmetrized", "--d", "0:2:0.1"});
    const auto second = run({"sweep", "--kind", "symmetrized", "--d", "0:2:0.1"});
    CHECK(first.out == second.out);

    // every emitted mean is the library's value, formatted
    const auto emitted = csv(first.out);
    for (std::size_t i = 1; i < emitted.size(); ++i) {
        const auto& row = emitted[i];
        CHECK(row[1] == cli::format_real(solve_symmetrized(NominalModel::exponential(1.0), num(row[0])).mean));
    }
}

TEST_CASE("cdf") {
    auto r = run({"cdf", "--d", "0", "--x", "0:5:0.5"});
    REQUIRE(r.code == 0);
    auto rows = csv(r.out);
    CHECK(rows[0] == std::vector<std::string>{"x", "F_nominal", "F_worst"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][1] == rows[i][2]);
    }

    const auto low = csv(run({"cdf", "--d", "0.1", "--x", "0:6:0.25"}).out);
    const auto high = csv(run({"cdf", "--d", "0.5", "--x", "0:6:0.25"}).out);
    CHECK(num(high[1][2]) == 0.0);
    for (std::size_t i = 1; i < low.size(); ++i) {
        CHECK(num(high[i][2]) >= num(low[i][2]));
        CHECK(num(low[i][2]) >= num(low[i][1]));
        if (i > 1) {
            CHECK(num(low[i][2]) >= num(low[i - 1][2]));
        }
    }
    CHECK(run({"cdf", "--d", "0.1", "--x", "3,1"}).code == 2);
}

TEST_CASE("knownclass") {
    auto r = run({"knownclass", "--d", "0,1"});
    REQUIRE(r.code == 0);
    auto rows = csv(r.out);
    CHECK(rows[0] == std::vector<std::string>{"d", "lambda_ratio_forward_exact", "lambda_ratio_forward_paper",
                                              "lambda_ratio_reverse", "lambda_ratio_symmetrized"});
    for (std::size_t c = 1; c < 5; ++c) {
        CHECK(num(rows[1][c]) == 1.0);
    }
    CHECK(std::abs(num(rows[2][4]) - 3.7320508) <= 1e-6);
    CHECK(std::abs(num(rows[2][3]) - 6.305) <= 1e-2);
    CHECK(num(rows[2][2]) == 2.0);

    r = run({"knownclass", "--class", "uniform", "--param", "1", "--d", "0.693147180559945"});
    REQUIRE(r.code == 0);
    rows = csv(r.out);
    CHECK(rows[0] == std::vector<std::string>{"d", "beta", "mean"});
    CHECK(num(rows[1][2]) == doctest::Approx(0.25).epsilon(1e-12));

    for (const char* kind : {"forward-kl", "symmetrized"}) {
        r = run({"knownclass", "--class", "uniform", "--kind", kind});
        CHECK(r.code == 4);
        CHECK(r.out.empty());
        CHECK(r.err.find("infinite divergence") != std::string::npos);
        CHECK(run({"knownclass", "--class", "uniform", "--kind", kind, "--param", "2", "--beta", "1"}).code == 4);
    }
    CHECK(run({"knownclass", "--class", "uniform", "--param", "2", "--beta", "1"}).code == 0);
    CHECK(run({"knownclass", "--class", "gamma"}).code == 2);
}

TEST_CASE("check") {
    auto r = run({"check", "--kinds", "reverse-kl,symmetrized", "--d", "0,0.5"});
    CHECK(r.code == 0);
    auto rows = csv(r.out);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == std::vector<std::string>{"kind", "d", "closed_form_mean", "oracle_mean", "relative_gap", "status"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][5] == "pass");
        if (num(rows[i][1]) == 0.0) {
            CHECK(num(rows[i][4]) <= 3e-3);
        }
    }

    // a tiny grid widens the gaps but still reports
    r = run({"check", "--kinds", "reverse-kl", "--d", "1", "--n", "50"});
    CHECK((r.code == 0 || r.code == 1));
    rows = csv(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(num(rows[1][4]) > 0.01);
    CHECK(run({"check", "--n", "10"}).code == 2);
}

TEST_CASE("figures") {
    const auto dir = std::filesystem::temp_directory_path() / "wcharvest_figures_test";
    std::filesystem::remove_all(dir);
    auto r = run({"figures", "--which", "all", "--output-dir", dir.string(), "--d", "0,1"});
    REQUIRE(r.code == 0);
    for (int k = 1; k <= 4; ++k) {
        CHECK(std::filesystem::exists(dir / ("figure" + std::to_string(k) + ".csv")));
    }
    std::ifstream fig2(dir / "figure2.csv");
    std::stringstream buffer;
    buffer << fig2.rdbuf();
    const auto rows = csv(buffer.str());
    CHECK(rows[0] == std::vector<std::string>{"d", "forward_kl", "reverse_kl_kkt", "reverse_kl_paper_exact", "symmetrized"});
    CHECK(num(rows[1][1]) == 1.0);
    std::filesystem::remove_all(dir);

    r = run({"figures", "--which", "2", "--d", "3"});
    REQUIRE(r.code == 0);
    CHECK(std::abs(num(csv(r.out)[1][3]) - 0.31) <= 0.01);

    r = run({"figures", "--which", "4", "--d", "1"});
    CHECK(std::abs(num(csv(r.out)[1][4]) - (2.0 + std::sqrt(3.0))) <= 1e-9);

    r = run({"figures", "--which", "1", "--d", "0.5", "--x", "0,1"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("reverse-kl-paper-exact,0.5,1,") != std::string::npos);
    CHECK(r.out.find("reverse-kl-kkt,0.5,1,") != std::string::npos);

    CHECK(run({"figures", "--which", "5"}).code == 2);
    CHECK(run({"figures", "--which", "all"}).code == 2);
}

TEST_CASE("output file") {
    const auto path = std::filesystem::temp_directory_path() / "wcharvest_cli_out.json";
    auto r = run({"solve", "--d", "0.2", "--output", path.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream in(path);
    CHECK(nlohmann::json::parse(in)["d"].get<double>() == 0.2);
    std::filesystem::remove(path);
}

}
