#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "holoflow/equilibria.hpp"
#include "holoflow/errors.hpp"

using namespace holoflow;

namespace {
constexpr double kPi = std::numbers::pi;

bool has_zero_near(const std::vector<Complex>& zeros, Complex z, double tol = 1e-9) {
    return std::any_of(zeros.begin(), zeros.end(),
                       [&](Complex w) { return std::abs(w - z) <= tol; });
}
}  // namespace

TEST_CASE("find_zeros on the paper fields") {
    FieldExpr quartic = FieldExpr::parse("x^2*(x-1)*(x-i)*(x-1-i)");
    auto zeros = find_zeros(quartic, {-2, -2, 3, 3});
    REQUIRE(zeros.size() == 4);
    CHECK(has_zero_near(zeros, {0, 0}));
    CHECK(has_zero_near(zeros, {1, 0}));
    CHECK(has_zero_near(zeros, {0, 1}));
    CHECK(has_zero_near(zeros, {1, 1}));

    FieldExpr xe = FieldExpr::parse("x*exp(x)");
    auto z2 = find_zeros(xe, {-5, -5, 5, 5});
    REQUIRE(z2.size() == 1);
    CHECK(std::abs(z2[0]) <= 1e-12);

    FieldExpr falpha = FieldExpr::parse("exp(i*0.9)*(x-1)^2*(x+1)^2");
    auto z3 = find_zeros(falpha, {-3, -3, 3, 3});
    REQUIRE(z3.size() == 2);
    CHECK(has_zero_near(z3, {-1, 0}));
    CHECK(has_zero_near(z3, {1, 0}));
}

TEST_CASE("argument principle count matches degree for random polynomials") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> pos(-1.0, 1.0);
    std::uniform_int_distribution<int> deg(1, 6);
    int trials = 0;
    for (int t = 0; t < 100; ++t) {
        int n = deg(rng);
        // construct from roots with a minimum separation so polishing to 1e-9
        // is well posed
        std::vector<Complex> roots;
        int guard = 0;
        while (static_cast<int>(roots.size()) < n && guard++ < 400) {
            Complex r{pos(rng), pos(rng)};
            bool ok = true;
            for (Complex q : roots)
                if (std::abs(q - r) < 0.25) ok = false;
            if (ok) roots.push_back(r);
        }
        if (static_cast<int>(roots.size()) < n) continue;
        std::string src = "1";
        for (Complex r : roots) {
            char term[96];
            std::snprintf(term, sizeof(term), "*(x-(%.9f)-(%.9f)*i)", r.real(), r.imag());
            src += term;
        }
        FieldExpr f = FieldExpr::parse(src);
        Window w{-1.7, -1.7, 1.7, 1.7};
        CHECK(argument_principle_count(f, w) == n);
        auto zeros = find_zeros(f, w);
        REQUIRE(zeros.size() == roots.size());
        std::sort(roots.begin(), roots.end(), complex_less);
        for (std::size_t k = 0; k < zeros.size(); ++k)
            CHECK(std::abs(zeros[k] - roots[k]) <= 1e-9);
        ++trials;
    }
    CHECK(trials >= 95);
}

TEST_CASE("zero_order") {
    FieldExpr quartic = FieldExpr::parse("x^2*(x-1)*(x-i)*(x-1-i)");
    CHECK(zero_order(quartic, {0, 0}) == 2);
    CHECK(zero_order(quartic, {1, 0}) == 1);
    CHECK(zero_order(FieldExpr::parse("x*exp(x)"), {0, 0}) == 1);
    // constructed double root
    CHECK(zero_order(FieldExpr::parse("(x-1-i)^2*(x+2)"), {1, 1}) == 2);
    CHECK(zero_order(FieldExpr::parse("(x-1)^3"), {1, 0}) == 3);
    // sin(x) - x vanishes to third order
    CHECK(zero_order(FieldExpr::parse("sin(x)-x"), {0, 0}) == 3);
    CHECK_THROWS_AS(zero_order(FieldExpr::parse("x^13"), {0, 0}), OrderOverflow);
}

TEST_CASE("classification of the paper examples") {
    FieldExpr xe = FieldExpr::parse("x*exp(x)");
    Equilibrium e = classify(xe, {0, 0});
    CHECK(e.cls == EqClass::UnstableNode);
    CHECK(std::abs(e.derivative_at - Complex{1, 0}) <= 1e-14);

    FieldExpr quartic = FieldExpr::parse("x^2*(x-1)*(x-i)*(x-1-i)");
    Equilibrium n = classify(quartic, {1, 1});
    CHECK(n.cls == EqClass::StableNode);
    CHECK(std::abs(n.derivative_at - Complex{-2, 0}) <= 1e-12);
    CHECK(classify(quartic, {1, 0}).cls == EqClass::StableFocus);
    CHECK(classify(quartic, {0, 1}).cls == EqClass::StableFocus);
    Equilibrium m = classify(quartic, {0, 0});
    CHECK(m.cls == EqClass::Multiple);
    CHECK(m.order == 2);
    REQUIRE(m.sector_directions);
    CHECK(m.sector_directions->size() == 2);
    CHECK((*m.sector_directions)[0] == doctest::Approx(kPi / 4).epsilon(1e-12));
    CHECK((*m.sector_directions)[1] == doctest::Approx(5 * kPi / 4).epsilon(1e-12));

    Equilibrium c = classify(FieldExpr::parse("i*x"), {0, 0});
    CHECK(c.cls == EqClass::Center);
    REQUIRE(c.period);
    CHECK(*c.period == doctest::Approx(2 * kPi).epsilon(1e-14));
}

TEST_CASE("period values and residue cross-check") {
    CHECK(period(FieldExpr::parse("i*x"), {0, 0}) == doctest::Approx(2 * kPi).epsilon(1e-12));
    // F'(0) = -i for i*x*(x-1): |Im| = 1 so T = 2*pi
    CHECK(period(FieldExpr::parse("i*x*(x-1)"), {0, 0}) ==
          doctest::Approx(2 * kPi).epsilon(1e-12));
    // 1+x^2 at i: F'(i) = 2i, T = pi; oracle is the closed-form tan flow
    CHECK(period(FieldExpr::parse("1+x^2"), {0, 1}) == doctest::Approx(kPi).epsilon(1e-12));
    CHECK_THROWS_AS(period(FieldExpr::parse("x"), {0, 0}), NotACenter);
}

TEST_CASE("sector directions formula") {
    CHECK_THROWS_AS(sector_directions(FieldExpr::parse("x"), {0, 0}, 1), NotMultiple);

    auto d1 = sector_directions(FieldExpr::parse("x^2"), {0, 0}, 2);
    REQUIRE(d1.size() == 2);
    CHECK(d1[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d1[1] == doctest::Approx(kPi).epsilon(1e-12));

    auto d2 = sector_directions(FieldExpr::parse("(x-1)^2*(x+1)^2"), {1, 0}, 2);
    REQUIRE(d2.size() == 2);
    CHECK(d2[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d2[1] == doctest::Approx(kPi).epsilon(1e-12));

    // rotated field rotates the directions
    auto d3 = sector_directions(FieldExpr::parse("exp(i*pi/2)*(x-1)^2*(x+1)^2"), {1, 0}, 2);
    REQUIRE(d3.size() == 2);
    CHECK(d3[0] == doctest::Approx(kPi / 2).epsilon(1e-10));
    CHECK(d3[1] == doctest::Approx(3 * kPi / 2).epsilon(1e-10));
}

TEST_CASE("sector direction structure for m = 2,3,4") {
    for (int m = 2; m <= 4; ++m) {
        std::string src = "(x-(0.3)-(0.2)*i)^" + std::to_string(m);
        FieldExpr f = FieldExpr::parse(src);
        auto dirs = sector_directions(f, {0.3, 0.2}, m);
        REQUIRE(static_cast<int>(dirs.size()) == 2 * m - 2);
        double gap = kPi / (m - 1);
        for (std::size_t k = 0; k + 1 < dirs.size(); ++k)
            CHECK(dirs[k + 1] - dirs[k] == doctest::Approx(gap).epsilon(1e-9));
    }
}

TEST_CASE("scaling invariances of classification") {
    // positive scaling keeps the class, scales the period reciprocally
    Equilibrium base = classify(FieldExpr::parse("i*x*(x-1)"), {0, 0});
    Equilibrium scaled = classify(FieldExpr::parse("2.5*i*x*(x-1)"), {0, 0});
    CHECK(base.cls == EqClass::Center);
    CHECK(scaled.cls == EqClass::Center);
    CHECK(*scaled.period == doctest::Approx(*base.period / 2.5).epsilon(1e-12));

    // multiplying by e^{i pi} reverses time: stable <-> unstable
    CHECK(classify(FieldExpr::parse("x*(x-1)"), {0, 0}).cls == EqClass::StableNode);
    CHECK(classify(FieldExpr::parse("exp(i*pi)*x*(x-1)"), {0, 0}).cls == EqClass::UnstableNode);
    CHECK(classify(FieldExpr::parse("x^2*(x-1)*(x-i)*(x-1-i)"), {1, 0}).cls ==
          EqClass::StableFocus);
    CHECK(classify(FieldExpr::parse("exp(i*pi)*x^2*(x-1)*(x-i)*(x-1-i)"), {1, 0}).cls ==
          EqClass::UnstableFocus);
}

TEST_CASE("near-degenerate flag") {
    // Re(lambda)/|lambda| = 1e-8 sits between the center and focus tolerances
    Equilibrium e = classify(FieldExpr::parse("(1e-08+i)*x"), {0, 0});
    CHECK(e.cls == EqClass::UnstableFocus);
    CHECK(e.near_degenerate);
    Equilibrium f = classify(FieldExpr::parse("(0.5+i)*x"), {0, 0});
    CHECK(!f.near_degenerate);
}

TEST_CASE("window boundary dilation and winding mismatch") {
    // zero exactly on the window edge: the window is dilated, the zero kept
    FieldExpr f = FieldExpr::parse("x*(x-1)");
    auto zeros = find_zeros(f, {-1, -1, 1, 1});
    CHECK(zeros.size() == 2);

    CHECK_THROWS_AS(find_zeros(FieldExpr::parse("0*x"), {-1, -1, 1, 1}), Error);
}
