#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "support.hpp"
#include "warptree/design.hpp"

using namespace warptree;
namespace fs = std::filesystem;

namespace {

// Kolmogorov distance between the empirical CDF of `u` and the uniform CDF.
double ks_uniform(std::vector<double> u) {
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        d = std::max({d, (i + 1) / n - u[i], u[i] - i / n});
    return d;
}

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("warptree_design_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("cdf examples") {
    CHECK(uniform_design().cdf(0.3) == 0.3);
    CHECK(power_design(2).cdf(0.5) == 0.25);
    for (const auto& name : design_names()) {
        const auto d = make_design(name);
        CHECK(d.cdf(1.0) == 1.0);
        CHECK(d.cdf(0.0) == 0.0);
        CHECK(d.inverse(1.0) == 1.0);
        CHECK(d.inverse(0.0) == 0.0);
    }
    CHECK_ERROR_CODE(uniform_design().cdf(1.5), ErrorCode::domain);
    CHECK_ERROR_CODE(uniform_design().cdf(-0.1), ErrorCode::domain);
    CHECK_ERROR_CODE(power_design(3).inverse(2.0), ErrorCode::domain);
    CHECK_ERROR_CODE(smoothstep_design().density(std::nan("")), ErrorCode::domain);
}

TEST_CASE("inverse examples") {
    CHECK(uniform_design().inverse(0.7) == 0.7);
    CHECK(power_design(2).inverse(0.25) == 0.5);
    const auto pl = piecewise_linear_design();
    const double x = pl.inverse(0.5);
    CHECK(std::abs(pl.cdf(x) - 0.5) <= 1e-10);
    const double oracle = invert_by_bisection([&](double t) { return pl.cdf(t); }, 0.5);
    CHECK(std::abs(x - oracle) <= 1e-12);
}

TEST_CASE("round trip and monotonicity on a fine grid") {
    for (const auto& name : design_names()) {
        const auto d = make_design(name);
        double previous = 0.0;
        for (int i = 0; i <= 10000; ++i) {
            const double u = i / 10000.0;
            REQUIRE(std::abs(d.cdf(d.inverse(u)) - u) <= 1e-12);
            const double g = d.cdf(u);
            REQUIRE(g >= previous);
            previous = g;
        }
    }
}

TEST_CASE("closed-form inverses agree with bisection") {
    for (const auto& name : design_names()) {
        const auto d = make_design(name);
        for (double u : {0.01, 0.2, 0.37, 0.5, 0.81, 0.999}) {
            const double oracle = invert_by_bisection([&](double t) { return d.cdf(t); }, u);
            CHECK(std::abs(d.inverse(u) - oracle) <= 1e-10);
        }
    }
}

TEST_CASE("density integrates to the cdf") {
    for (const auto& name : design_names()) {
        const auto d = make_design(name);
        // Midpoint rule on 2^14 cells.
        const int cells = 1 << 14;
        double acc = 0.0;
        for (int i = 0; i < cells; ++i) acc += d.density((i + 0.5) / cells) / cells;
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("unknown catalog names list the valid ones") {
    try {
        make_design("gamma");
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::catalog);
        CHECK(std::string(e.what()).find("power2") != std::string::npos);
    }
    CHECK_ERROR_CODE(make_function("cubic", uniform_design()), ErrorCode::catalog);
}

TEST_CASE("test functions respect their sup bound") {
    for (const auto& dname : design_names()) {
        const auto d = make_design(dname);
        for (const auto& fname : function_names()) {
            const auto f = make_function(fname, d);
            for (int i = 0; i <= 1000; ++i) REQUIRE(std::abs(f(i / 1000.0)) <= f.sup_bound() + 1e-15);
        }
    }
    const auto step = step_function();
    CHECK(step(1.0 / 3.0 - 1e-12) == 0.0);
    CHECK(step(1.0 / 3.0) == 1.0);
    CHECK(step.breakpoints() == std::vector<double>{1.0 / 3.0});
    const auto w = warped_sinusoid_function(power_design(2));
    CHECK(w(0.5) == doctest::Approx(std::sin(2.0 * M_PI * 0.25)));
}

TEST_CASE("noiseless samples reproduce f exactly") {
    const auto d = power_design(3);
    const auto f = sinusoid_function();
    const auto z = generate_sample(d, f, 0.0, 0.0, 500, 3);
    REQUIRE(z.size() == 500);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(z.y[i] == f(z.x[i]));
}

TEST_CASE("fixed seed gives identical samples") {
    const auto d = smoothstep_design();
    const auto f = step_function();
    const auto a = generate_sample(d, f, 0.3, 0.0, 1000, 99);
    const auto b = generate_sample(d, f, 0.3, 0.0, 1000, 99);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    const auto c = generate_sample(d, f, 0.3, 0.0, 1000, 100);
    CHECK(a.x != c.x);
}

TEST_CASE("sample validation") {
    const auto d = uniform_design();
    const auto f = constant_function();
    CHECK_ERROR_CODE(generate_sample(d, f, 0.1, 0.0, 0, 1), ErrorCode::invalid_argument);
    CHECK_ERROR_CODE(generate_sample(d, f, -0.1, 0.0, 10, 1), ErrorCode::invalid_argument);
}

TEST_CASE("responses stay within the bound") {
    const auto d = uniform_design();
    const auto f = sinusoid_function();
    for (double bound : {0.0, 1.2, 3.0}) {
        const auto z = generate_sample(d, f, 0.5, bound, 20000, 4);
        const double m = bound > 0.0 ? bound : default_bound(f, 0.5);
        CHECK(z.meta.bound == m);
        for (std::size_t i = 0; i < z.size(); ++i) {
            REQUIRE(std::abs(z.y[i]) <= m);
            REQUIRE(z.x[i] >= 0.0);
            REQUIRE(z.x[i] <= 1.0);
        }
    }
    CHECK(default_bound(f, 0.25) == 3.0);
}

TEST_CASE("uniform design: empirical cdf within DKW distance") {
    const auto z = generate_sample(uniform_design(), constant_function(), 0.0, 0.0, 100000, 17);
    CHECK(ks_uniform(z.x) < 0.01);
}

TEST_CASE("warped design points are uniform for every design") {
    const double n = 100000;
    for (const auto& name : design_names()) {
        const auto d = make_design(name);
        const auto z = generate_sample(d, constant_function(), 0.0, 0.0, 100000, 23);
        std::vector<double> u(z.size());
        std::transform(z.x.begin(), z.x.end(), u.begin(), [&](double x) { return d.cdf(x); });
        CHECK_MESSAGE(ks_uniform(u) < 1.36 / std::sqrt(n), name);
    }
}

TEST_CASE("truncated noise is centred") {
    const double sigma = 0.5;
    const auto f = constant_function(0.0);
    const auto z = generate_sample(uniform_design(), f, sigma, 0.0, 100000, 31);
    double mean = 0.0;
    for (double y : z.y) mean += y;
    mean /= static_cast<double>(z.size());
    CHECK(std::abs(mean) < 3.0 * sigma / std::sqrt(100000.0));
}

TEST_CASE("stratified sample places x at warped midpoints") {
    const auto d = power_design(2);
    const auto z = stratified_sample(d, sinusoid_function(), 8);
    REQUIRE(z.size() == 8);
    for (int i = 0; i < 8; ++i) CHECK(d.cdf(z.x[i]) == doctest::Approx((i + 0.5) / 8).epsilon(1e-14));
}

TEST_CASE("CSV and sidecar round trip") {
    const auto dir = scratch_dir("roundtrip");
    const auto z = generate_sample(piecewise_linear_design(), step_function(), 0.2, 0.0, 257, 8);
    write_sample_csv(z, dir / "s.csv");
    const auto back = read_sample_csv(dir / "s.csv");
    CHECK(back.x == z.x);
    CHECK(back.y == z.y);
    CHECK(sidecar_path(dir / "s.csv") == dir / "s.json");

    const auto meta = meta_from_json(meta_to_json(z.meta));
    CHECK(meta.design == "piecewise_linear");
    CHECK(meta.function == "step");
    CHECK(meta.sigma == 0.2);
    CHECK(meta.n == 257);
    CHECK(meta.seed == 8);
    CHECK(meta.bound == z.meta.bound);
    const auto keys = meta_to_json(z.meta);
    for (const char* key : {"design", "function", "sigma", "M", "n", "seed"}) CHECK(keys.contains(key));
}

TEST_CASE("malformed CSV reports the row") {
    const auto dir = scratch_dir("malformed");
    {
        std::ofstream out(dir / "bad.csv");
        out << "x,y\n0.1,2\n0.2,abc\n";
    }
    try {
        read_sample_csv(dir / "bad.csv");
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::parse);
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    {
        std::ofstream out(dir / "header.csv");
        out << "a,b\n0.1,2\n";
    }
    CHECK_ERROR_CODE(read_sample_csv(dir / "header.csv"), ErrorCode::parse);
    {
        std::ofstream out(dir / "range.csv");
        out << "x,y\n1.5,2\n";
    }
    CHECK_ERROR_CODE(read_sample_csv(dir / "range.csv"), ErrorCode::parse);
    CHECK_ERROR_CODE(read_sample_csv(dir / "missing.csv"), ErrorCode::io);
}
