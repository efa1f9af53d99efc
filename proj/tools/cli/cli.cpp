#include "cli.hpp"

#include "wcharvest/errors.hpp"
#include "wcharvest/knownclass.hpp"
#include "wcharvest/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

namespace wcharvest::cli {

namespace {

using Json = nlohmann::ordered_json;

Json json_number(double value) { return std::isfinite(value) ? Json(value) : Json(nullptr); }
Json json_number(const std::optional<double>& value) { return value ? json_number(*value) : Json(nullptr); }

/// Run fn(i) for i in [0, n) on a small thread pool. Results stay indexed, so
/// emission order never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                fn(i);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
}

/// Writes to --output when given, else to the command's stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) {
                throw InputError("cannot open output file " + path);
            }
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }

private:
    std::ofstream file_;
    std::ostream* out_;
};

void require_nonnegative_grid(const std::vector<double>& grid, const char* what) {
    if (grid.empty()) {
        throw InputError(std::string(what) + " grid is empty");
    }
    for (double v : grid) {
        if (!(v >= 0.0)) {
            throw InputError(std::string(what) + " grid entries must be >= 0");
        }
    }
}

double single_d(const RunConfig& cfg) {
    require_nonnegative_grid(cfg.d_grid, "d");
    if (cfg.d_grid.size() != 1) {
        throw InputError("this command takes a single --d value");
    }
    return cfg.d_grid.front();
}

WorstCaseSolution solve_one(const NominalModel& nominal, const RunConfig& cfg, double d) {
    return solve(UncertaintySet{nominal, cfg.kind, d}, cfg.mode, cfg.solver);
}

std::string mode_label(const RunConfig& cfg) {
    return cfg.kind == DivergenceKind::reverse_kl ? std::string(to_string(cfg.mode)) : std::string("default");
}

// ---------------------------------------------------------------------------

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
    const auto nominal = parse_nominal_spec(cfg.nominal_spec);
    const double d = single_d(cfg);
    const auto solution = solve_one(nominal, cfg, d);
    const auto& diag = solution.diagnostics;

    Sink sink(cfg.output_path, out);
    auto& os = sink.stream();
    if (cfg.format == OutputFormat::json) {
        Json report;
        report["kind"] = std::string(to_string(cfg.kind));
        report["d"] = d;
        report["mean"] = json_number(solution.mean);
        report["mu_star"] = json_number(solution.mu_star);
        report["s_star"] = json_number(solution.s_star);
        report["normalization_residual"] = json_number(diag.normalization_residual);
        report["divergence_residual"] = json_number(diag.divergence_residual);
        report["iterations"] = diag.iterations;
        report["mode"] = mode_label(cfg);
        report["path"] = diag.path;
        report["nominal"] = nominal.describe();
        os << report.dump() << '\n';
    } else {
        os << "kind,d,mean,mu_star,s_star,normalization_residual,divergence_residual,iterations,mode\n";
        os << to_string(cfg.kind) << ',' << format_real(d) << ',' << format_real(solution.mean) << ','
           << format_optional(solution.mu_star) << ',' << format_optional(solution.s_star) << ','
           << format_real(diag.normalization_residual) << ',' << format_real(diag.divergence_residual) << ','
           << diag.iterations << ',' << mode_label(cfg) << '\n';
    }
    return exit_ok;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto nominal = parse_nominal_spec(cfg.nominal_spec);
    require_nonnegative_grid(cfg.d_grid, "d");

    struct Row {
        std::optional<WorstCaseSolution> solution;
        std::string error;
    };
    std::vector<Row> rows(cfg.d_grid.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        try {
            rows[i].solution = solve_one(nominal, cfg, cfg.d_grid[i]);
        } catch (const std::exception& e) {
            rows[i].error = e.what();
        }
    });

    Sink sink(cfg.output_path, out);
    auto& os = sink.stream();
    os << "d,mean,mu_star,s_star,iterations,divergence_residual,error\n";
    std::size_t succeeded = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        os << format_real(cfg.d_grid[i]) << ',';
        if (rows[i].solution) {
            const auto& s = *rows[i].solution;
            ++succeeded;
            os << format_real(s.mean) << ',' << format_optional(s.mu_star) << ',' << format_optional(s.s_star) << ','
               << s.diagnostics.iterations << ',' << format_real(s.diagnostics.divergence_residual) << ",\n";
        } else {
            std::string message = rows[i].error;
            std::replace(message.begin(), message.end(), ',', ';');
            std::replace(message.begin(), message.end(), '\n', ' ');
            os << ",,,,," << message << '\n';
            err << "sweep: d = " << format_real(cfg.d_grid[i]) << " failed: " << rows[i].error << '\n';
        }
    }
    return succeeded > 0 ? exit_ok : exit_no_convergence;
}

int cmd_cdf(const RunConfig& cfg, std::ostream& out) {
    const auto nominal = parse_nominal_spec(cfg.nominal_spec);
    const double d = single_d(cfg);
    require_nonnegative_grid(cfg.x_grid, "x");
    if (!std::is_sorted(cfg.x_grid.begin(), cfg.x_grid.end())) {
        throw InputError("x grid must be ascending");
    }
    const auto solution = solve_one(nominal, cfg, d);
    std::vector<double> worst(cfg.x_grid.size());
    parallel_for(worst.size(), [&](std::size_t i) { worst[i] = worst_cdf(solution, cfg.x_grid[i]); });

    Sink sink(cfg.output_path, out);
    auto& os = sink.stream();
    os << "x,F_nominal,F_worst\n";
    for (std::size_t i = 0; i < cfg.x_grid.size(); ++i) {
        os << format_real(cfg.x_grid[i]) << ',' << format_real(nominal.cdf(cfg.x_grid[i])) << ','
           << format_real(worst[i]) << '\n';
    }
    return exit_ok;
}

void write_exponential_class_table(std::ostream& os, double rate0, const std::vector<double>& d_grid) {
    using namespace knownclass;
    os << "d,lambda_ratio_forward_exact,lambda_ratio_forward_paper,lambda_ratio_reverse,lambda_ratio_symmetrized\n";
    for (double d : d_grid) {
        os << format_real(d) << ','
           << format_real(exp_class_forward(rate0, d, ForwardFormula::exact_root).boundary_parameter / rate0) << ','
           << format_real(exp_class_forward(rate0, d, ForwardFormula::paper_formula).boundary_parameter / rate0)
           << ',' << format_real(exp_class_reverse(rate0, d).boundary_parameter / rate0) << ','
           << format_real(exp_class_symmetrized(rate0, d).boundary_parameter / rate0) << '\n';
    }
}

struct KnownClassArgs {
    std::string family = "exp";
    double parameter = 1.0;
    std::optional<double> beta;
};

int cmd_knownclass(const RunConfig& cfg, const KnownClassArgs& args, std::ostream& out, std::ostream& err) {
    if (!(args.parameter > 0.0) || !std::isfinite(args.parameter)) {
        throw InputError("--param must be finite and > 0");
    }
    if (args.family == "exp") {
        require_nonnegative_grid(cfg.d_grid, "d");
        Sink sink(cfg.output_path, out);
        write_exponential_class_table(sink.stream(), args.parameter, cfg.d_grid);
        return exit_ok;
    }
    if (args.family != "uniform") {
        throw InputError("--class must be exp or uniform");
    }
    const double alpha = args.parameter;
    if (args.beta) {
        const double value = knownclass::uniform_class_dominance_check(alpha, *args.beta, cfg.kind);
        if (std::isinf(value)) {
            err << "infinite divergence: " << to_string(cfg.kind) << " between U(0," << format_real(alpha)
                << ") and U(0," << format_real(*args.beta) << ") is unbounded (no dominance)\n";
            return exit_infinite_divergence;
        }
        Sink sink(cfg.output_path, out);
        sink.stream() << "kind,alpha,beta,divergence\n"
                      << to_string(cfg.kind) << ',' << format_real(alpha) << ',' << format_real(*args.beta) << ','
                      << format_real(value) << '\n';
        return exit_ok;
    }
    if (cfg.kind != DivergenceKind::reverse_kl) {
        err << "infinite divergence: for a uniform class every U(0, beta) with beta < alpha leaves the nominal "
               "undominated, so "
            << to_string(cfg.kind) << " is unbounded; only reverse-kl has a finite worst case\n";
        return exit_infinite_divergence;
    }
    require_nonnegative_grid(cfg.d_grid, "d");
    Sink sink(cfg.output_path, out);
    auto& os = sink.stream();
    os << "d,beta,mean\n";
    for (double d : cfg.d_grid) {
        const auto s = knownclass::uniform_class_reverse(alpha, d);
        os << format_real(d) << ',' << format_real(s.boundary_parameter) << ',' << format_real(s.mean) << '\n';
    }
    return exit_ok;
}

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto nominal = parse_nominal_spec(cfg.nominal_spec);
    require_nonnegative_grid(cfg.d_grid, "d");
    const auto grid = cfg.grid_x_max ? oracle::discretize(nominal, *cfg.grid_x_max, cfg.grid_n)
                                     : oracle::discretize(nominal, cfg.grid_n);

    struct Case {
        DivergenceKind kind;
        double d;
        double closed = 0.0;
        double oracle = 0.0;
        std::string error;
        bool oracle_failed = false;
    };
    std::vector<Case> cases;
    for (auto kind : cfg.check_kinds) {
        for (double d : cfg.d_grid) {
            cases.push_back(Case{kind, d});
        }
    }
    parallel_for(cases.size(), [&](std::size_t i) {
        auto& c = cases[i];
        try {
            c.closed = solve(UncertaintySet{nominal, c.kind, c.d}, ReverseKlMode::kkt, cfg.solver).mean;
        } catch (const std::exception& e) {
            c.error = std::string("solver: ") + e.what();
            return;
        }
        try {
            c.oracle = oracle::solve_discrete(grid, c.kind, c.d).worst_mean;
        } catch (const std::exception& e) {
            c.error = std::string("oracle: ") + e.what();
            c.oracle_failed = true;
        }
    });

    Sink sink(cfg.output_path, out);
    auto& os = sink.stream();
    os << "kind,d,closed_form_mean,oracle_mean,relative_gap,status\n";
    bool any_fail = false;
    bool oracle_failed = false;
    for (const auto& c : cases) {
        os << to_string(c.kind) << ',' << format_real(c.d) << ',';
        if (!c.error.empty()) {
            any_fail = true;
            oracle_failed = oracle_failed || c.oracle_failed;
            os << ",,,error\n";
            err << "check: " << to_string(c.kind) << " d = " << format_real(c.d) << ": " << c.error << '\n';
            continue;
        }
        const double gap = std::abs(c.closed - c.oracle) / c.oracle;
        const bool pass = gap <= cfg.band;
        any_fail = any_fail || !pass;
        os << format_real(c.closed) << ',' << format_real(c.oracle) << ',' << format_real(gap) << ','
           << (pass ? "pass" : "FAIL") << '\n';
    }
    if (oracle_failed) {
        return exit_no_convergence;
    }
    return any_fail ? exit_check_failed : exit_ok;
}

// ---------------------------------------------------------------------------
// Figures (nominal Exp(1))

void figure_cdf(std::ostream& os, const std::vector<double>& d_values, const std::vector<double>& xs,
                const std::vector<std::pair<std::string, std::function<WorstCaseSolution(double)>>>& series) {
    const auto nominal = NominalModel::exponential(1.0);
    os << "series,d,x,F\n";
    for (double x : xs) {
        os << "nominal,0," << format_real(x) << ',' << format_real(nominal.cdf(x)) << '\n';
    }
    for (const auto& [label, solver] : series) {
        for (double d : d_values) {
            const auto solution = solver(d);
            std::vector<double> values(xs.size());
            parallel_for(xs.size(), [&](std::size_t i) { values[i] = worst_cdf(solution, xs[i]); });
            for (std::size_t i = 0; i < xs.size(); ++i) {
                os << label << ',' << format_real(d) << ',' << format_real(xs[i]) << ',' << format_real(values[i])
                   << '\n';
            }
        }
    }
}

void figure_means(std::ostream& os, const std::vector<double>& d_values, const SolverOptions& options) {
    const auto nominal = NominalModel::exponential(1.0);
    struct Row {
        double forward, kkt, paper, sym;
    };
    std::vector<Row> rows(d_values.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        const double d = d_values[i];
        rows[i] = Row{solve_forward_kl(nominal, d, options).mean,
                      solve_reverse_kl(nominal, d, ReverseKlMode::kkt, options).mean,
                      solve_reverse_kl(nominal, d, ReverseKlMode::paper_exact, options).mean,
                      solve_symmetrized(nominal, d, options).mean};
    });
    os << "d,forward_kl,reverse_kl_kkt,reverse_kl_paper_exact,symmetrized\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        os << format_real(d_values[i]) << ',' << format_real(rows[i].forward) << ',' << format_real(rows[i].kkt)
           << ',' << format_real(rows[i].paper) << ',' << format_real(rows[i].sym) << '\n';
    }
}

struct FigureArgs {
    std::string which = "all";
    std::string output_dir;
    std::string d_override;
    std::string x_grid = "0:5:0.05";
};

int cmd_figures(const RunConfig& cfg, const FigureArgs& args, std::ostream& out) {
    std::vector<int> figures;
    if (args.which == "all") {
        figures = {1, 2, 3, 4};
    } else if (args.which.size() == 1 && args.which[0] >= '1' && args.which[0] <= '4') {
        figures = {args.which[0] - '0'};
    } else {
        throw InputError("--which must be 1, 2, 3, 4 or all");
    }
    if (figures.size() > 1 && args.output_dir.empty()) {
        throw InputError("--which all needs --output-dir");
    }
    const auto xs = parse_grid(args.x_grid);
    require_nonnegative_grid(xs, "x");
    const auto nominal = NominalModel::exponential(1.0);
    const auto& options = cfg.solver;

    for (int figure : figures) {
        const bool cdf_figure = figure == 1 || figure == 3;
        const auto d_values = parse_grid(args.d_override.empty() ? (cdf_figure ? "0.05,0.1,0.5" : "0:3:0.05")
                                                                 : args.d_override);
        require_nonnegative_grid(d_values, "d");

        std::ofstream file;
        std::ostream* os = &out;
        if (!args.output_dir.empty()) {
            std::filesystem::create_directories(args.output_dir);
            const auto path = std::filesystem::path(args.output_dir) / ("figure" + std::to_string(figure) + ".csv");
            file.open(path, std::ios::binary);
            if (!file) {
                throw InputError("cannot open " + path.string());
            }
            os = &file;
        }

        auto forward = [&](double d) { return solve_forward_kl(nominal, d, options); };
        auto kkt = [&](double d) { return solve_reverse_kl(nominal, d, ReverseKlMode::kkt, options); };
        auto paper = [&](double d) { return solve_reverse_kl(nominal, d, ReverseKlMode::paper_exact, options); };
        auto sym = [&](double d) { return solve_symmetrized(nominal, d, options); };
        switch (figure) {
        case 1:
            figure_cdf(*os, d_values, xs, {{"forward-kl", forward}, {"reverse-kl-kkt", kkt}, {"reverse-kl-paper-exact", paper}});
            break;
        case 2:
            figure_means(*os, d_values, options);
            break;
        case 3:
            figure_cdf(*os, d_values, xs, {{"symmetrized", sym}, {"forward-kl", forward}, {"reverse-kl-kkt", kkt}});
            break;
        case 4:
            write_exponential_class_table(*os, 1.0, d_values);
            break;
        }
    }
    return exit_ok;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Worst-case average harvested energy under KL / symmetrized divergence uncertainty"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string kind_text = "forward-kl";
    std::string mode_text = "kkt";
    std::string format_text = "json";
    std::string d_text;
    std::string x_text;
    std::string kinds_text = "forward-kl,reverse-kl,symmetrized";
    bool generic = false;
    KnownClassArgs known;
    FigureArgs figure_args;

    auto add_solver_flags = [&](CLI::App* sub) {
        sub->add_option("--nominal", cfg.nominal_spec, "exp:RATE, uniform:UPPER or table:PATH")->capture_default_str();
        sub->add_option("--kind", kind_text, "forward-kl, reverse-kl or symmetrized")->capture_default_str();
        sub->add_option("--mode", mode_text, "reverse-KL mode: kkt or paper-exact")->capture_default_str();
        sub->add_option("--quad-tol", cfg.solver.quad_tol, "quadrature tolerance")->capture_default_str();
        sub->add_option("--root-tol", cfg.solver.root_tol, "scalar root residual tolerance")->capture_default_str();
        sub->add_option("--system-tol", cfg.solver.system_tol, "2-D system residual tolerance")->capture_default_str();
        sub->add_flag("--generic", generic, "use quadrature even where closed forms exist");
        sub->add_option("--output,-o", cfg.output_path, "output file (default: stdout)");
    };

    auto* solve_cmd = app.add_subcommand("solve", "worst case at a single radius d");
    add_solver_flags(solve_cmd);
    solve_cmd->add_option("--d", d_text, "radius d >= 0 (nats)")->required();
    solve_cmd->add_option("--format", format_text, "json or csv")->capture_default_str();

    auto* sweep_cmd = app.add_subcommand("sweep", "worst-case mean over a d grid (CSV)");
    add_solver_flags(sweep_cmd);
    sweep_cmd->add_option("--d", d_text, "d grid: start:stop:step or comma list")->required();

    auto* cdf_cmd = app.add_subcommand("cdf", "nominal and worst-case CDF on an x grid (CSV)");
    add_solver_flags(cdf_cmd);
    cdf_cmd->add_option("--d", d_text, "radius d >= 0")->required();
    cdf_cmd->add_option("--x", x_text, "x grid: start:stop:step or comma list")->required();

    auto* known_cmd = app.add_subcommand("knownclass", "worst case when the class of the true law is known (CSV)");
    known_cmd->add_option("--class", known.family, "exp or uniform")->capture_default_str();
    known_cmd->add_option("--param", known.parameter, "nominal rate (exp) or upper end alpha (uniform)")
        ->capture_default_str();
    std::string known_kind_text = "reverse-kl";
    known_cmd->add_option("--kind", known_kind_text, "uniform class: divergence kind")->capture_default_str();
    known_cmd->add_option("--d", d_text, "d grid")->default_str("0:3:0.05");
    known_cmd->add_option("--beta", known.beta, "uniform class: evaluate the divergence to U(0, beta)");
    known_cmd->add_option("--output,-o", cfg.output_path, "output file (default: stdout)");

    auto* check_cmd = app.add_subcommand("check", "cross-check closed forms against the discretized oracle (CSV)");
    check_cmd->add_option("--nominal", cfg.nominal_spec, "nominal spec")->capture_default_str();
    check_cmd->add_option("--kinds", kinds_text, "comma list of kinds")->capture_default_str();
    check_cmd->add_option("--d", d_text, "d values")->default_str("0.05,0.1,0.2,0.5,1,2");
    check_cmd->add_option("--n", cfg.grid_n, "oracle grid size")->capture_default_str();
    check_cmd->add_option("--x-max", cfg.grid_x_max, "oracle grid end (default: 1-1e-9 quantile)");
    check_cmd->add_option("--band", cfg.band, "allowed relative gap")->capture_default_str();
    check_cmd->add_option("--output,-o", cfg.output_path, "output file (default: stdout)");

    auto* fig_cmd = app.add_subcommand("figures", "curve data for an Exp(1) nominal (CSV)");
    fig_cmd->add_option("--which", figure_args.which, "1, 2, 3, 4 or all")->capture_default_str();
    fig_cmd->add_option("--output-dir", figure_args.output_dir, "directory for figureN.csv");
    fig_cmd->add_option("--d", figure_args.d_override, "override the d grid");
    fig_cmd->add_option("--x", figure_args.x_grid, "x grid of the CDF figures")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_invalid_input;
    }

    try {
        cfg.kind = parse_divergence_kind(*known_cmd ? known_kind_text : kind_text);
        cfg.mode = parse_reverse_mode(mode_text);
        cfg.solver.use_closed_forms = !generic;
        if (format_text == "json") {
            cfg.format = OutputFormat::json;
        } else if (format_text == "csv") {
            cfg.format = OutputFormat::csv;
        } else {
            throw InputError("--format must be json or csv");
        }
        if (!(cfg.solver.quad_tol > 0.0) || !(cfg.solver.root_tol > 0.0) || !(cfg.solver.system_tol > 0.0)) {
            throw InputError("tolerances must be > 0");
        }

        if (*known_cmd && d_text.empty()) {
            d_text = "0:3:0.05";
        }
        if (*check_cmd && d_text.empty()) {
            d_text = "0.05,0.1,0.2,0.5,1,2";
        }
        if (!d_text.empty()) {
            cfg.d_grid = parse_grid(d_text);
        }
        if (!x_text.empty()) {
            cfg.x_grid = parse_grid(x_text);
        }

        if (*solve_cmd) {
            return cmd_solve(cfg, out);
        }
        if (*sweep_cmd) {
            return cmd_sweep(cfg, out, err);
        }
        if (*cdf_cmd) {
            return cmd_cdf(cfg, out);
        }
        if (*known_cmd) {
            return cmd_knownclass(cfg, known, out, err);
        }
        if (*check_cmd) {
            std::stringstream list(kinds_text);
            std::string item;
            while (std::getline(list, item, ',')) {
                cfg.check_kinds.push_back(parse_divergence_kind(item));
            }
            if (cfg.check_kinds.empty()) {
                throw InputError("--kinds is empty");
            }
            return cmd_check(cfg, out, err);
        }
        if (*fig_cmd) {
            return cmd_figures(cfg, figure_args, out);
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid_input;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid_input;
    } catch (const InfiniteDivergenceError& e) {
        err << "infinite divergence: " << e.what() << '\n';
        return exit_infinite_divergence;
    } catch (const ConvergenceError& e) {
        err << "no convergence: " << e.what() << '\n';
        return exit_no_convergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid_input;
    }
    return exit_invalid_input;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("wcharvest");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace wcharvest::cli
