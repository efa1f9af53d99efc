#pragma once

#include <filesystem>
#include <istream>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace wcharvest {

/// Exp(rate): pdf rate * exp(-rate x) on [0, inf).
struct ExponentialNominal {
    double rate;
};

/// U(0, upper).
struct UniformNominal {
    double upper;
};

/// Piecewise-linear pdf through (x_i, pdf_i), zero outside [x_0, x_{n-1}],
/// renormalized to unit mass when constructed.
struct TabulatedNominal {
    std::vector<double> xs;
    std::vector<double> pdfs;
    std::vector<double> cumulative; // cdf at each node
    double mean;
};

/// The nominal energy-harvesting distribution f0. Immutable after
/// construction; copies share the tabulated grid.
class NominalModel {
public:
    static NominalModel exponential(double rate);
    static NominalModel uniform(double upper);
    /// Throws InputError unless there are at least 8 points, xs strictly
    /// ascending and >= 0, and pdfs finite, >= 0 with positive total mass.
    static NominalModel tabulated(std::vector<double> xs, std::vector<double> pdfs);

    /// CSV with a `x,pdf` header row. Errors name the offending line.
    static NominalModel read_table(std::istream& in, const std::string& source_name = "<stream>");
    static NominalModel load_table(const std::filesystem::path& path);

    double pdf(double x) const;
    double cdf(double x) const;
    /// 1 - cdf(x), without cancellation in the exponential tail.
    double survival(double x) const;
    double mean() const;
    /// Inverse cdf for p in [0, 1).
    double quantile(double p) const;

    double support_lower() const;
    /// Right end of the region that integrals are taken over: the support end
    /// for bounded models, and the point where the pdf drops below 1e-16 of its
    /// peak for the exponential.
    double integration_upper() const;
    /// Break points for piecewise quadrature against f0 (includes both ends).
    std::vector<double> breakpoints() const;
    /// Right limit of the pdf at the lower end of the support.
    double pdf_at_lower() const;

    bool is_exponential() const { return std::holds_alternative<ExponentialNominal>(variant_); }
    bool is_uniform() const { return std::holds_alternative<UniformNominal>(variant_); }
    bool is_tabulated() const { return std::holds_alternative<std::shared_ptr<const TabulatedNominal>>(variant_); }
    /// Rate of an exponential model; throws DomainError for other variants.
    double rate() const;
    double uniform_upper() const;

    /// Short description such as "exp:1" or "table:42-points".
    std::string describe() const;

private:
    using Variant = std::variant<ExponentialNominal, UniformNominal, std::shared_ptr<const TabulatedNominal>>;
    explicit NominalModel(Variant v) : variant_(std::move(v)) {}
    Variant variant_;
};

} // namespace wcharvest
