#include "wcharvest/nominal.hpp"

#include "wcharvest/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wcharvest {

namespace {

// log(1e16): exp(-rate x) falls below 1e-16 of the peak past this rate * x.
constexpr double exponential_tail_span = 36.841361487904734;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

bool parse_double(const std::string& text, double& out) {
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (begin != end && *begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end;
}

} // namespace

NominalModel NominalModel::exponential(double rate) {
    if (!std::isfinite(rate) || rate <= 0.0) {
        throw InputError("exponential nominal needs a finite rate > 0");
    }
    return NominalModel(ExponentialNominal{rate});
}

NominalModel NominalModel::uniform(double upper) {
    if (!std::isfinite(upper) || upper <= 0.0) {
        throw InputError("uniform nominal needs a finite upper end > 0");
    }
    return NominalModel(UniformNominal{upper});
}

NominalModel NominalModel::tabulated(std::vector<double> xs, std::vector<double> pdfs) {
    if (xs.size() != pdfs.size()) {
        throw InputError("tabulated nominal: x and pdf columns differ in length");
    }
    if (xs.size() < 8) {
        throw InputError("tabulated nominal: need at least 8 points, got " + std::to_string(xs.size()));
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || xs[i] < 0.0) {
            throw InputError("tabulated nominal: x must be finite and >= 0 (point " + std::to_string(i) + ")");
        }
        if (i > 0 && !(xs[i] > xs[i - 1])) {
            throw InputError("tabulated nominal: x must be strictly ascending (point " + std::to_string(i) + ")");
        }
        if (!std::isfinite(pdfs[i]) || pdfs[i] < 0.0) {
            throw InputError("tabulated nominal: pdf must be finite and >= 0 (point " + std::to_string(i) + ")");
        }
    }

    auto table = std::make_shared<TabulatedNominal>();
    table->cumulative.assign(xs.size(), 0.0);
    double mass = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        mass += 0.5 * (pdfs[i - 1] + pdfs[i]) * (xs[i] - xs[i - 1]);
        table->cumulative[i] = mass;
    }
    if (!(mass > 0.0)) {
        throw InputError("tabulated nominal: pdf has zero total mass");
    }
    double first_moment = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        pdfs[i] /= mass;
        table->cumulative[i] /= mass;
    }
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double h = xs[i] - xs[i - 1];
        first_moment +=
            h / 6.0 * (xs[i - 1] * (2.0 * pdfs[i - 1] + pdfs[i]) + xs[i] * (pdfs[i - 1] + 2.0 * pdfs[i]));
    }
    table->cumulative.back() = 1.0;
    table->mean = first_moment;
    table->xs = std::move(xs);
    table->pdfs = std::move(pdfs);
    return NominalModel(std::shared_ptr<const TabulatedNominal>(std::move(table)));
}

NominalModel NominalModel::read_table(std::istream& in, const std::string& source_name) {
    std::vector<double> xs;
    std::vector<double> pdfs;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    auto fail = [&](const std::string& what) {
        throw InputError(source_name + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const std::string trimmed = trim(line);
        if (trimmed.empty()) {
            continue;
        }
        const auto comma = trimmed.find(',');
        if (comma == std::string::npos || trimmed.find(',', comma + 1) != std::string::npos) {
            fail("expected exactly two comma-separated fields");
        }
        const std::string left = trim(std::string_view(trimmed).substr(0, comma));
        const std::string right = trim(std::string_view(trimmed).substr(comma + 1));
        if (!header_seen) {
            if (left != "x" || right != "pdf") {
                fail("expected header `x,pdf`");
            }
            header_seen = true;
            continue;
        }
        double x;
        double p;
        if (!parse_double(left, x) || !parse_double(right, p)) {
            fail("cannot parse numbers from `" + trimmed + "`");
        }
        if (!std::isfinite(x) || x < 0.0) {
            fail("x must be finite and >= 0");
        }
        if (!xs.empty() && !(x > xs.back())) {
            fail("x values must be strictly ascending");
        }
        if (!std::isfinite(p) || p < 0.0) {
            fail("pdf must be finite and >= 0");
        }
        xs.push_back(x);
        pdfs.push_back(p);
    }
    if (!header_seen) {
        throw InputError(source_name + ": empty table (expected header `x,pdf`)");
    }
    if (xs.size() < 8) {
        throw InputError(source_name + ": need at least 8 data rows, got " + std::to_string(xs.size()));
    }
    try {
        return tabulated(std::move(xs), std::move(pdfs));
    } catch (const InputError& e) {
        throw InputError(source_name + ": " + e.what());
    }
}

NominalModel NominalModel::load_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open table file " + path.string());
    }
    return read_table(in, path.string());
}

double NominalModel::pdf(double x) const {
    return std::visit(
        overloaded{
            [x](const ExponentialNominal& e) { return x < 0.0 ? 0.0 : e.rate * std::exp(-e.rate * x); },
            [x](const UniformNominal& u) { return (x < 0.0 || x > u.upper) ? 0.0 : 1.0 / u.upper; },
            [x](const std::shared_ptr<const TabulatedNominal>& t) {
                const auto& xs = t->xs;
                if (x < xs.front() || x > xs.back()) {
                    return 0.0;
                }
                const auto it = std::upper_bound(xs.begin(), xs.end(), x);
                if (it == xs.end()) {
                    return t->pdfs.back();
                }
                const auto i = static_cast<std::size_t>(it - xs.begin()) - 1;
                const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
                return (1.0 - w) * t->pdfs[i] + w * t->pdfs[i + 1];
            },
        },
        variant_);
}

double NominalModel::cdf(double x) const {
    return std::visit(
        overloaded{
            [x](const ExponentialNominal& e) { return x <= 0.0 ? 0.0 : -std::expm1(-e.rate * x); },
            [x](const UniformNominal& u) { return x <= 0.0 ? 0.0 : (x >= u.upper ? 1.0 : x / u.upper); },
            [x](const std::shared_ptr<const TabulatedNominal>& t) {
                const auto& xs = t->xs;
                if (x <= xs.front()) {
                    return 0.0;
                }
                if (x >= xs.back()) {
                    return 1.0;
                }
                const auto i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
                const double h = xs[i + 1] - xs[i];
                const double dx = x - xs[i];
                const double slope = (t->pdfs[i + 1] - t->pdfs[i]) / h;
                return std::min(1.0, t->cumulative[i] + t->pdfs[i] * dx + 0.5 * slope * dx * dx);
            },
        },
        variant_);
}

double NominalModel::survival(double x) const {
    if (const auto* e = std::get_if<ExponentialNominal>(&variant_)) {
        return x <= 0.0 ? 1.0 : std::exp(-e->rate * x);
    }
    return 1.0 - cdf(x);
}

double NominalModel::mean() const {
    return std::visit(overloaded{
                          [](const ExponentialNominal& e) { return 1.0 / e.rate; },
                          [](const UniformNominal& u) { return 0.5 * u.upper; },
                          [](const std::shared_ptr<const TabulatedNominal>& t) { return t->mean; },
                      },
                      variant_);
}

double NominalModel::quantile(double p) const {
    if (!(p >= 0.0 && p < 1.0)) {
        throw DomainError("quantile: probability must lie in [0, 1)");
    }
    return std::visit(overloaded{
                          [p](const ExponentialNominal& e) { return -std::log1p(-p) / e.rate; },
                          [p](const UniformNominal& u) { return p * u.upper; },
                          [this, p](const std::shared_ptr<const TabulatedNominal>& t) {
                              double lo = t->xs.front();
                              double hi = t->xs.back();
                              for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
                                  const double mid = 0.5 * (lo + hi);
                                  (cdf(mid) < p ? lo : hi) = mid;
                              }
                              return hi;
                          },
                      },
                      variant_);
}

double NominalModel::support_lower() const {
    if (const auto* t = std::get_if<std::shared_ptr<const TabulatedNominal>>(&variant_)) {
        return (*t)->xs.front();
    }
    return 0.0;
}

double NominalModel::integration_upper() const {
    return std::visit(overloaded{
                          [](const ExponentialNominal& e) { return exponential_tail_span / e.rate; },
                          [](const UniformNominal& u) { return u.upper; },
                          [](const std::shared_ptr<const TabulatedNominal>& t) { return t->xs.back(); },
                      },
                      variant_);
}

std::vector<double> NominalModel::breakpoints() const {
    if (const auto* t = std::get_if<std::shared_ptr<const TabulatedNominal>>(&variant_)) {
        return (*t)->xs;
    }
    return {0.0, integration_upper()};
}

double NominalModel::pdf_at_lower() const {
    return std::visit(overloaded{
                          [](const ExponentialNominal& e) { return e.rate; },
                          [](const UniformNominal& u) { return 1.0 / u.upper; },
                          [](const std::shared_ptr<const TabulatedNominal>& t) { return t->pdfs.front(); },
                      },
                      variant_);
}

double NominalModel::rate() const {
    if (const auto* e = std::get_if<ExponentialNominal>(&variant_)) {
        return e->rate;
    }
    throw DomainError("rate() requested from a non-exponential nominal");
}

double NominalModel::uniform_upper() const {
    if (const auto* u = std::get_if<UniformNominal>(&variant_)) {
        return u->upper;
    }
    throw DomainError("uniform_upper() requested from a non-uniform nominal");
}

std::string NominalModel::describe() const {
    std::ostringstream out;
    std::visit(overloaded{
                   [&](const ExponentialNominal& e) { out << "exp:" << e.rate; },
                   [&](const UniformNominal& u) { out << "uniform:" << u.upper; },
                   [&](const std::shared_ptr<const TabulatedNominal>& t) { out << "table:" << t->xs.size() << "-points"; },
               },
               variant_);
    return out.str();
}

} // namespace wcharvest
