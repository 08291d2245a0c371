#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "holoflow/field.hpp"

using namespace holoflow;

namespace {

// independent oracle: centered differences of eval
Complex central_diff(const FieldExpr& f, Complex z, double h) {
    return (f.eval(z + Complex{h, 0}) - f.eval(z - Complex{h, 0})) / (2 * h);
}

Complex central_diff2(const FieldExpr& f, Complex z, double h) {
    return (f.eval(z + Complex{h, 0}) - 2.0 * f.eval(z) + f.eval(z - Complex{h, 0})) / (h * h);
}

}  // namespace

TEST_CASE("parse and eval basics") {
    FieldExpr f = FieldExpr::parse("x*exp(x)");
    CHECK(std::abs(f.eval({0, 0})) == 0.0);

    // paper's Re/Im decomposition of x e^x at x1=-2, x2=0.1
    double x1 = -2, x2 = 0.1;
    Complex got = f.eval({x1, x2});
    Complex want{std::exp(x1) * (x1 * std::cos(x2) - x2 * std::sin(x2)),
                 std::exp(x1) * (x1 * std::sin(x2) + x2 * std::cos(x2))};
    CHECK(std::abs(got - want) <= 1e-15);

    FieldExpr lin = FieldExpr::parse("i*x");
    CHECK(std::abs(lin.eval({1, 0}) - Complex{0, 1}) == 0.0);

    FieldExpr quartic = FieldExpr::parse("x^2*(x-1)*(x-i)*(x-1-i)");
    CHECK(std::abs(quartic.eval({1, 1})) <= 1e-14);
    CHECK(std::abs(quartic.eval({0, 1})) <= 1e-14);
}

TEST_CASE("syntax errors carry byte offsets") {
    CHECK_THROWS_AS(FieldExpr::parse("x**"), SyntaxError);
    try {
        FieldExpr::parse("x**");
    } catch (const SyntaxError& e) {
        CHECK(e.offset == 2);
    }
    CHECK_THROWS_AS(FieldExpr::parse(""), SyntaxError);
    CHECK_THROWS_AS(FieldExpr::parse("x+"), SyntaxError);
    CHECK_THROWS_AS(FieldExpr::parse("(x"), SyntaxError);
    CHECK_THROWS_AS(FieldExpr::parse("exp x"), SyntaxError);
    CHECK_THROWS_AS(FieldExpr::parse("y+1"), UnknownIdentifier);
    CHECK_THROWS_AS(FieldExpr::parse("sinh(x)"), UnknownIdentifier);
}

TEST_CASE("constants and number forms") {
    CHECK(FieldExpr::parse("pi").eval({0, 0}).real() == doctest::Approx(std::numbers::pi));
    CHECK(FieldExpr::parse("e").eval({0, 0}).real() == doctest::Approx(std::numbers::e));
    CHECK(FieldExpr::parse("2e3").eval({0, 0}).real() == 2000.0);
    CHECK(FieldExpr::parse("2*e").eval({0, 0}).real() == doctest::Approx(2 * std::numbers::e));
    CHECK(FieldExpr::parse("1e-05").eval({0, 0}).real() == 1e-5);
    CHECK(FieldExpr::parse(".5+x").eval({0, 0}).real() == 0.5);
}

TEST_CASE("division diagnostics") {
    CHECK(!FieldExpr::parse("x^2+1").has_division());
    CHECK(FieldExpr::parse("1/x").has_division());
    CHECK(FieldExpr::parse("x^-1").has_division());
    CHECK_THROWS_AS(FieldExpr::parse("1/x").eval({0, 0}), DivisionByZero);
}

TEST_CASE("derivative examples") {
    // (x e^x)' at 0 is 1 (paper classifies 0 as a repelling node)
    FieldExpr f = FieldExpr::parse("x*exp(x)");
    CHECK(std::abs(f.derivative(1).eval({0, 0}) - Complex{1, 0}) <= 1e-15);

    FieldExpr c = FieldExpr::parse("5");
    CHECK(std::abs(c.derivative(1).eval({2, 3})) == 0.0);

    // ((x-1)^2 (x+1)^2)'' at 1 -> 8, oracle: centered second difference, h=1e-5
    FieldExpr g = FieldExpr::parse("(x-1)^2*(x+1)^2");
    Complex d2 = g.derivative(2).eval({1, 0});
    Complex oracle = central_diff2(g, {1, 0}, 1e-5);
    CHECK(std::abs(d2 - Complex{8, 0}) <= 1e-12);
    CHECK(std::abs(d2 - oracle) <= 1e-4 * (1 + std::abs(d2)));
}

TEST_CASE("derivative-difference agreement on random polynomial fields") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_real_distribution<double> pos(-2.0, 2.0);
    for (int trial = 0; trial < 60; ++trial) {
        // random cubic with complex coefficients
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "(%.6f+%.6f*i)+(%.6f+%.6f*i)*x+(%.6f+%.6f*i)*x^2+(%.6f+%.6f*i)*x^3",
                      coef(rng), coef(rng), coef(rng), coef(rng), coef(rng), coef(rng), coef(rng),
                      coef(rng));
        FieldExpr f = FieldExpr::parse(buf);
        FieldExpr d = f.derivative(1);
        for (int k = 0; k < 4; ++k) {
            Complex z{pos(rng), pos(rng)};
            if (std::abs(z) > 2) continue;
            Complex exact = d.eval(z);
            Complex approx = central_diff(f, z, 1e-6);
            CHECK(std::abs(exact - approx) <= 1e-6 * (1 + std::abs(exact)));
        }
    }
}

TEST_CASE("parse/print round-trip is structural identity") {
    const char* corpus[] = {
        "x*exp(x)",
        "i*x",
        "x^2*(x-1)*(x-i)*(x-1-i)",
        "exp(i*1.5707963267948966)*(x-1)^2*(x+1)^2",
        "1+x^2",
        "-x^2",
        "-(x+1)^3",
        "2*-x",
        "x--3",
        "sin(cos(x))-cos(sin(x))",
        "x/(1+x^2)",
        "x^-2",
        "(x^2)^3",
        "pi*e*i*x",
        "0.5*x+.25",
        "1e-05*x",
    };
    for (const char* src : corpus) {
        FieldExpr a = FieldExpr::parse(src);
        FieldExpr b = FieldExpr::parse(a.str());
        CHECK_MESSAGE(a.structurally_equal(b), src, " printed as ", a.str());
    }
    // derivatives round-trip too
    for (const char* src : corpus) {
        FieldExpr d = FieldExpr::parse(src).derivative(1);
        FieldExpr b = FieldExpr::parse(d.str());
        CHECK_MESSAGE(d.structurally_equal(b), "derivative of ", src, " printed as ", d.str());
    }
}

TEST_CASE("counterexample decomposition identity in the strip") {
    FieldExpr f = FieldExpr::parse("x*exp(x)");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-9.0, -1.0);
    std::uniform_real_distribution<double> uy(0.0, 0.1);
    for (int k = 0; k < 1000; ++k) {
        double x1 = ux(rng), x2 = uy(rng);
        Complex got = f.eval({x1, x2});
        Complex want{std::exp(x1) * (x1 * std::cos(x2) - x2 * std::sin(x2)),
                     std::exp(x1) * (x1 * std::sin(x2) + x2 * std::cos(x2))};
        CHECK(std::abs(got - want) <= 1e-12 * std::abs(want));
    }
}

TEST_CASE("polynomial coefficient extraction") {
    auto coeffs = FieldExpr::parse("x^2*(x-1)*(x-i)*(x-1-i)").polynomial_coefficients();
    REQUIRE(coeffs);
    CHECK(coeffs->size() == 6);
    CHECK(std::abs((*coeffs)[5] - Complex{1, 0}) <= 1e-15);
    CHECK(!FieldExpr::parse("x*exp(x)").polynomial_coefficients());

    // repeated-squaring power evaluation agrees with the expanded product
    FieldExpr p = FieldExpr::parse("(x-1)^8");
    Complex z{1.3, -0.4};
    Complex direct = std::pow(z - Complex{1, 0}, 8);
    CHECK(std::abs(p.eval(z) - direct) <= 1e-12 * std::abs(direct));
}

TEST_CASE("negation helper") {
    FieldExpr f = FieldExpr::parse("x^2-1");
    FieldExpr g = f.negated();
    Complex z{0.7, 0.3};
    CHECK(std::abs(g.eval(z) + f.eval(z)) <= 1e-15);
}
