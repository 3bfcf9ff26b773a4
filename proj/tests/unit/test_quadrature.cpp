#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>

#include "support.hpp"
#include "warptree/quadrature.hpp"

using namespace warptree;

TEST_CASE("Gauss-Legendre rules") {
    for (int order : {1, 2, 5, 16, 32}) {
        const auto& rule = gauss_legendre(order);
        REQUIRE(rule.nodes.size() == static_cast<std::size_t>(order));
        CHECK(std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0) == doctest::Approx(2.0).epsilon(1e-14));
        // exact for monomials up to degree 2*order - 1
        for (int p = 0; p < 2 * order; ++p) {
            double acc = 0.0;
            for (int i = 0; i < order; ++i) acc += rule.weights[i] * std::pow(rule.nodes[i], p);
            const double exact = p % 2 == 1 ? 0.0 : 2.0 / (p + 1);
            REQUIRE(std::abs(acc - exact) < 1e-13);
        }
    }
    const auto& two = gauss_legendre(2);
    CHECK(two.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK_ERROR_CODE(gauss_legendre(0), ErrorCode::invalid_argument);
}

TEST_CASE("smooth integrals") {
    CHECK(std::abs(integrate([](double x) { return std::exp(x); }, 0.0, 1.0) - (std::exp(1.0) - 1.0)) < 1e-12);
    CHECK(std::abs(integrate([](double x) { return std::sin(20.0 * x); }, 0.0, 3.0) - (1.0 - std::cos(60.0)) / 20.0) <
          1e-10);
    CHECK(std::abs(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0) - 2.0 / 3.0) < 1e-10);
    CHECK(integrate([](double) { return 1.0; }, 0.4, 0.4) == 0.0);
}

TEST_CASE("breakpoints handle jumps exactly") {
    auto step = [](double x) { return x < 1.0 / 3.0 ? 0.0 : 1.0; };
    CHECK(std::abs(integrate(step, 0.0, 1.0, {1.0 / 3.0}) - 2.0 / 3.0) < 1e-14);
    // without the breakpoint adaptivity still converges
    CHECK(std::abs(integrate(step, 0.0, 1.0) - 2.0 / 3.0) < 1e-9);
    // breakpoints outside the range are ignored
    CHECK(std::abs(integrate([](double x) { return x; }, 0.0, 0.5, {-1.0, 0.25, 0.7}) - 0.125) < 1e-15);
}

TEST_CASE("doubling the order changes little") {
    auto fn = [](double x) { return std::cos(7.0 * x) * std::exp(-x); };
    const double a = integrate(fn, 0.0, 1.0, {}, {16, 1e-12});
    const double b = integrate(fn, 0.0, 1.0, {}, {32, 1e-12});
    CHECK(std::abs(a - b) < 1e-12);
}

TEST_CASE("non-convergent integrands are reported") {
    CHECK_ERROR_CODE(integrate([](double) { return std::nan(""); }, 0.0, 1.0), ErrorCode::quadrature);
    // Pseudo-random integrand: never settles under refinement.
    auto noise = [](double x) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof bits);
        bits ^= bits >> 33;
        bits *= 0xff51afd7ed558ccdULL;
        bits ^= bits >> 33;
        return static_cast<double>(bits >> 11) * 0x1.0p-53;
    };
    CHECK_ERROR_CODE(integrate(noise, 0.0, 1.0), ErrorCode::quadrature);
    CHECK_ERROR_CODE(integrate([](double x) { return x; }, 1.0, 0.0), ErrorCode::invalid_argument);
}
