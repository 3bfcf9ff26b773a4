#include "warptree/design.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "warptree/error.hpp"
#include "warptree/format.hpp"

namespace warptree {

namespace {

void require_unit(double t, const char* what) {
    if (!(t >= 0.0 && t <= 1.0)) fail(ErrorCode::domain, std::string(what) + " outside [0,1]: " + format_double(t));
}

std::string join(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& name : names) out += (out.empty() ? "" : ", ") + name;
    return out;
}

}  // namespace

DesignCdf::DesignCdf(std::string name, Map cdf, Map inverse, Map density, std::vector<double> kinks)
    : name_(std::move(name)), cdf_(std::move(cdf)), inverse_(std::move(inverse)), density_(std::move(density)),
      kinks_(std::move(kinks)) {}

double DesignCdf::cdf(double x) const {
    require_unit(x, "design point");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    return std::clamp(cdf_(x), 0.0, 1.0);
}

double DesignCdf::inverse(double u) const {
    require_unit(u, "probability");
    if (u == 0.0) return 0.0;
    if (u == 1.0) return 1.0;
    return std::clamp(inverse_(u), 0.0, 1.0);
}

double DesignCdf::density(double x) const {
    require_unit(x, "design point");
    return density_(x);
}

double invert_by_bisection(const std::function<double(double)>& cdf, double u, double tol) {
    require_unit(u, "probability");
    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < u) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

DesignCdf uniform_design() {
    return DesignCdf("uniform", [](double x) { return x; }, [](double u) { return u; }, [](double) { return 1.0; });
}

DesignCdf power_design(int p) {
    if (p != 2 && p != 3) fail(ErrorCode::invalid_argument, "power design supports p in {2,3}");
    auto inverse = p == 2 ? DesignCdf::Map([](double u) { return std::sqrt(u); })
                          : DesignCdf::Map([](double u) { return std::cbrt(u); });
    return DesignCdf(
        "power" + std::to_string(p), [p](double x) { return std::pow(x, p); }, std::move(inverse),
        [p](double x) { return p * std::pow(x, p - 1); });
}

DesignCdf piecewise_linear_design() {
    return DesignCdf(
        "piecewise_linear", [](double x) { return x <= 0.5 ? 1.5 * x : 0.75 + 0.5 * (x - 0.5); },
        [](double u) { return u <= 0.75 ? u / 1.5 : 2.0 * u - 1.0; }, [](double x) { return x < 0.5 ? 1.5 : 0.5; },
        {0.5});
}

DesignCdf smoothstep_design() {
    return DesignCdf(
        "smoothstep", [](double x) { return x * x * (3.0 - 2.0 * x); },
        [](double u) { return 0.5 - std::sin(std::asin(1.0 - 2.0 * u) / 3.0); },
        [](double x) { return 6.0 * x * (1.0 - x); });
}

std::vector<std::string> design_names() {
    return {"uniform", "power2", "power3", "piecewise_linear", "smoothstep"};
}

DesignCdf make_design(const std::string& name) {
    if (name == "uniform") return uniform_design();
    if (name == "power2") return power_design(2);
    if (name == "power3") return power_design(3);
    if (name == "piecewise_linear") return piecewise_linear_design();
    if (name == "smoothstep") return smoothstep_design();
    fail(ErrorCode::catalog, "unknown design '" + name + "'; valid: " + join(design_names()));
}

TestFunction::TestFunction(std::string name, Map eval, double sup_bound, std::string smoothness,
                           std::vector<double> breakpoints)
    : name_(std::move(name)), eval_(std::move(eval)), sup_bound_(sup_bound), smoothness_(std::move(smoothness)),
      breakpoints_(std::move(breakpoints)) {}

TestFunction sinusoid_function() {
    return TestFunction(
        "sinusoid", [](double x) { return std::sin(2.0 * std::numbers::pi * x); }, 1.0, "lipschitz");
}

TestFunction step_function() {
    return TestFunction(
        "step", [](double x) { return x < 1.0 / 3.0 ? 0.0 : 1.0; }, 1.0, "jump", {1.0 / 3.0});
}

TestFunction warped_sinusoid_function(const DesignCdf& design) {
    return TestFunction(
        "warped_sinusoid", [design](double x) { return std::sin(2.0 * std::numbers::pi * design.cdf(x)); }, 1.0,
        "warped-lipschitz");
}

TestFunction constant_function(double c) {
    return TestFunction(
        "constant", [c](double) { return c; }, std::abs(c), "constant");
}

std::vector<std::string> function_names() { return {"sinusoid", "step", "warped_sinusoid", "constant"}; }

TestFunction make_function(const std::string& name, const DesignCdf& design) {
    if (name == "sinusoid") return sinusoid_function();
    if (name == "step") return step_function();
    if (name == "warped_sinusoid") return warped_sinusoid_function(design);
    if (name == "constant") return constant_function();
    fail(ErrorCode::catalog, "unknown function '" + name + "'; valid: " + join(function_names()));
}

double default_bound(const TestFunction& f, double sigma) { return 2.0 * f.sup_bound() + 4.0 * sigma; }

Sample generate_sample(const DesignCdf& design, const TestFunction& f, double sigma, double bound, std::int64_t n,
                       std::uint64_t seed) {
    if (n < 1) fail(ErrorCode::invalid_argument, "sample size must be >= 1");
    if (!(sigma >= 0.0)) fail(ErrorCode::invalid_argument, "noise level must be >= 0");
    if (bound <= 0.0) bound = default_bound(f, sigma);
    const double noise_cap = bound - f.sup_bound();
    if (sigma > 0.0 && noise_cap <= 0.0) fail(ErrorCode::invalid_argument, "bound M leaves no room for noise");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, sigma > 0.0 ? sigma : 1.0);

    Sample z;
    z.x.reserve(static_cast<std::size_t>(n));
    z.y.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const double x = design.inverse(unit(rng));
        double noise = 0.0;
        if (sigma > 0.0) {
            do noise = gauss(rng);
            while (std::abs(noise) > noise_cap);
        }
        z.x.push_back(x);
        z.y.push_back(std::clamp(f(x) + noise, -bound, bound));
    }
    z.meta = {design.name(), f.name(), sigma, bound, n, seed};
    return z;
}

Sample stratified_sample(const DesignCdf& design, const TestFunction& f, std::int64_t n) {
    if (n < 1) fail(ErrorCode::invalid_argument, "sample size must be >= 1");
    Sample z;
    for (std::int64_t i = 0; i < n; ++i) {
        const double x = design.inverse((static_cast<double>(i) + 0.5) / static_cast<double>(n));
        z.x.push_back(x);
        z.y.push_back(f(x));
    }
    z.meta = {design.name(), f.name(), 0.0, f.sup_bound(), n, 0};
    return z;
}

nlohmann::json meta_to_json(const SampleMeta& meta) {
    return {{"design", meta.design}, {"function", meta.function}, {"sigma", meta.sigma},
            {"M", meta.bound},       {"n", meta.n},               {"seed", meta.seed}};
}

SampleMeta meta_from_json(const nlohmann::json& doc) {
    try {
        return {doc.at("design").get<std::string>(), doc.at("function").get<std::string>(),
                doc.at("sigma").get<double>(),       doc.at("M").get<double>(),
                doc.at("n").get<std::int64_t>(),     doc.at("seed").get<std::uint64_t>()};
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, std::string("sample sidecar: ") + e.what());
    }
}

void write_sample_csv(const Sample& z, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write " + path.string());
    out << "x,y\n";
    for (std::size_t i = 0; i < z.size(); ++i) out << format_double(z.x[i]) << ',' << format_double(z.y[i]) << '\n';
    if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

namespace {

bool parse_double(std::string_view text, double& value) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    if (text.empty()) return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(value);
}

}  // namespace

Sample read_sample_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot read " + path.string());
    std::string line;
    std::size_t row = 1;
    if (!std::getline(in, line)) fail(ErrorCode::parse, path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,y") fail(ErrorCode::parse, path.string() + ": row 1: expected header 'x,y'");
    Sample z;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        double x = 0.0, y = 0.0;
        if (comma == std::string::npos || !parse_double(std::string_view(line).substr(0, comma), x) ||
            !parse_double(std::string_view(line).substr(comma + 1), y))
            fail(ErrorCode::parse, path.string() + ": row " + std::to_string(row) + ": expected two numbers");
        if (!(x >= 0.0 && x <= 1.0))
            fail(ErrorCode::parse, path.string() + ": row " + std::to_string(row) + ": x outside [0,1]");
        z.x.push_back(x);
        z.y.push_back(y);
    }
    z.meta.n = static_cast<std::int64_t>(z.size());
    return z;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
    auto path = csv;
    return path.replace_extension(".json");
}

}  // namespace warptree
