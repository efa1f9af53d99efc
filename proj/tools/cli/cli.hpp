#pragma once

#include "wcharvest/nominal.hpp"
#include "wcharvest/worstcase.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wcharvest::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_check_failed = 1,
    exit_invalid_input = 2,
    exit_no_convergence = 3,
    exit_infinite_divergence = 4,
};

enum class OutputFormat { json, csv };

/// Everything a subcommand needs, after flag parsing and validation.
struct RunConfig {
    std::string nominal_spec = "exp:1.0";
    DivergenceKind kind = DivergenceKind::forward_kl;
    ReverseKlMode mode = ReverseKlMode::kkt;
    std::vector<double> d_grid;
    std::vector<double> x_grid;
    OutputFormat format = OutputFormat::json;
    std::string output_path; ///< empty: standard output
    SolverOptions solver;
    // check
    std::size_t grid_n = 2000;
    std::optional<double> grid_x_max;
    double band = 0.01;
    std::vector<DivergenceKind> check_kinds;
};

/// `exp:RATE`, `uniform:UPPER` or `table:PATH`.
NominalModel parse_nominal_spec(const std::string& spec);

/// `start:stop:step` (inclusive of stop), a comma list, or a single value.
std::vector<double> parse_grid(const std::string& text);

/// `%.12g`; "inf"/"-inf"/"nan" for non-finite values.
std::string format_real(double value);
std::string format_optional(const std::optional<double>& value);

/// Run the command line; all output goes to `out` (or --output files) and
/// diagnostics to `err`. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace wcharvest::cli
