#pragma once

// Known design distributions G_X on [0,1], regression test functions and
// bounded-response sample generation for Y = f(X) + e.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace warptree {

/// A continuous CDF on [0,1] with G(0) = 0 and G(1) = 1.
class DesignCdf {
public:
    using Map = std::function<double(double)>;

    DesignCdf(std::string name, Map cdf, Map inverse, Map density, std::vector<double> kinks = {});

    const std::string& name() const noexcept { return name_; }
    /// Throws Error{domain} outside [0,1].
    double cdf(double x) const;
    double inverse(double u) const;
    double density(double x) const;
    /// Points in (0,1) where the density is discontinuous.
    const std::vector<double>& kinks() const noexcept { return kinks_; }
    /// G_X([a,b]) = G(b) - G(a).
    double mass(double a, double b) const { return cdf(b) - cdf(a); }

private:
    std::string name_;
    Map cdf_;
    Map inverse_;
    Map density_;
    std::vector<double> kinks_;
};

/// Solves G(x) = u for nondecreasing G on [0,1].
double invert_by_bisection(const std::function<double(double)>& cdf, double u, double tol = 1e-14);

DesignCdf uniform_design();
DesignCdf power_design(int p);
/// Two slopes: density 3/2 on [0,1/2), 1/2 on [1/2,1].
DesignCdf piecewise_linear_design();
/// Smoothstep G(x) = 3x^2 - 2x^3.
DesignCdf smoothstep_design();

std::vector<std::string> design_names();
/// Throws Error{catalog} listing the valid names.
DesignCdf make_design(const std::string& name);

class TestFunction {
public:
    using Map = std::function<double(double)>;

    TestFunction(std::string name, Map eval, double sup_bound, std::string smoothness, std::vector<double> breakpoints = {});

    const std::string& name() const noexcept { return name_; }
    double operator()(double x) const { return eval_(x); }
    double sup_bound() const noexcept { return sup_bound_; }
    const std::string& smoothness() const noexcept { return smoothness_; }
    /// Jump locations in (0,1), in x coordinates.
    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

private:
    std::string name_;
    Map eval_;
    double sup_bound_;
    std::string smoothness_;
    std::vector<double> breakpoints_;
};

TestFunction sinusoid_function();
TestFunction step_function();
/// f = g o G with g(u) = sin(2 pi u), regular in the warped coordinate.
TestFunction warped_sinusoid_function(const DesignCdf& design);
TestFunction constant_function(double c = 1.0);

std::vector<std::string> function_names();
TestFunction make_function(const std::string& name, const DesignCdf& design);

struct SampleMeta {
    std::string design;
    std::string function;
    double sigma = 0.0;
    double bound = 0.0;  // M
    std::int64_t n = 0;
    std::uint64_t seed = 0;
};

struct Sample {
    std::vector<double> x;
    std::vector<double> y;
    SampleMeta meta;

    std::size_t size() const noexcept { return x.size(); }
};

/// Default bound M = 2 ||f||_inf + 4 sigma.
double default_bound(const TestFunction& f, double sigma);

/// x_i = G^{-1}(U_i); y_i = f(x_i) + e_i with Gaussian noise truncated to
/// |e| <= M - ||f||_inf, then clamped to [-M, M]. bound <= 0 selects the default.
Sample generate_sample(const DesignCdf& design, const TestFunction& f, double sigma, double bound,
                       std::int64_t n, std::uint64_t seed);

/// Deterministic sample with x_i = G^{-1}((i + 1/2)/n), noiseless.
Sample stratified_sample(const DesignCdf& design, const TestFunction& f, std::int64_t n);

nlohmann::json meta_to_json(const SampleMeta& meta);
SampleMeta meta_from_json(const nlohmann::json& doc);

/// CSV with header `x,y`, values at full precision.
void write_sample_csv(const Sample& z, const std::filesystem::path& path);
/// Reports the offending row on malformed input.
Sample read_sample_csv(const std::filesystem::path& path);
/// Sidecar path for a sample CSV (same stem, .json).
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

}  // namespace warptree
