#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "holoflow/equilibria.hpp"
#include "holoflow/errors.hpp"
#include "holoflow/integrate.hpp"

using namespace holoflow;

namespace {
constexpr double kPi = std::numbers::pi;

IntegrationControls controls(double window_radius = 6.0) {
    IntegrationControls c;
    c.window_radius = window_radius;
    return c;
}

// independent oracle: int_1^inf e^-x/x dx by Simpson on a truncated range
double quad_real_oracle() {
    double sum = 0;
    const int n = 200000;
    const double a = 1.0, b = 45.0;
    double h = (b - a) / n;
    auto fn = [](double x) { return std::exp(-x) / x; };
    for (int k = 0; k < n; ++k) {
        double x0 = a + k * h;
        sum += h / 6 * (fn(x0) + 4 * fn(x0 + 0.5 * h) + fn(x0 + h));
    }
    return sum;
}
}  // namespace

TEST_CASE("blow-up of x^2 from 1: closed form x(t) = 1/(1-t)") {
    FieldExpr f = FieldExpr::parse("x^2");
    OrbitTrace tr = integrate(f, {1, 0}, Direction::Forward, controls());
    REQUIRE(tr.forward_fate.kind == Fate::Kind::BlowUp);
    CHECK(tr.t_plus == doctest::Approx(1.0).epsilon(1e-6));

    // trace matches the closed form pointwise
    for (const auto& s : tr.samples) {
        if (s.t <= 0 || s.t > 0.9) continue;
        Complex exact{1.0 / (1.0 - s.t), 0};
        CHECK(std::abs(s.z - exact) <= 1e-8 * (1 + std::abs(exact)));
    }
}

TEST_CASE("blow-up of 1+x^2 from 0 at pi/2 (tan flow)") {
    FieldExpr f = FieldExpr::parse("1+x^2");
    OrbitTrace tr = integrate(f, {0, 0}, Direction::Forward, controls());
    REQUIRE(tr.forward_fate.kind == Fate::Kind::BlowUp);
    CHECK(tr.t_plus == doctest::Approx(kPi / 2).epsilon(1e-6));
    for (const auto& s : tr.samples) {
        if (s.t <= 0 || s.t > 1.2) continue;
        Complex exact{std::tan(s.t), 0};
        CHECK(std::abs(s.z - exact) <= 1e-8 * (1 + std::abs(exact)));
    }
}

TEST_CASE("periodic orbit of i*x") {
    FieldExpr f = FieldExpr::parse("i*x");
    auto eqs = find_equilibria(f, {-2, -2, 2, 2});
    OrbitTrace tr = integrate(f, {1, 0}, Direction::Forward, controls(3), eqs);
    REQUIRE(tr.forward_fate.kind == Fate::Kind::PeriodicAround);
    CHECK(tr.forward_fate.equilibrium == 0);
    CHECK(tr.forward_fate.period == doctest::Approx(2 * kPi).epsilon(1e-8));
    // closed-form conformance: x(t) = e^{it}
    for (const auto& s : tr.samples) {
        Complex exact{std::cos(s.t), std::sin(s.t)};
        CHECK(std::abs(s.z - exact) <= 1e-8);
    }
}

TEST_CASE("linear field never blows up") {
    FieldExpr f = FieldExpr::parse("x");
    IntegrationControls c = controls(3);
    OrbitTrace tr = integrate(f, {1, 0}, Direction::Forward, c);
    CHECK(tr.forward_fate.kind == Fate::Kind::Undetermined);
    CHECK(tr.forward_fate.reason == "unbounded-slow");
    CHECK(std::isinf(tr.t_plus));
    // closed form e^t
    for (const auto& s : tr.samples) {
        if (s.t > 17) break;
        CHECK(std::abs(s.z - Complex{std::exp(s.t), 0}) <= 1e-7 * std::exp(s.t));
    }
}

TEST_CASE("x*exp(x) fates: basin, slow escapes (the counterexample geometry)") {
    FieldExpr f = FieldExpr::parse("x*exp(x)");
    auto eqs = find_equilibria(f, {-6, -6, 6, 6});

    // start near the real axis inside the left half plane: forward the orbit
    // crawls to -infinity in unbounded time
    IntegrationControls c = controls(8.5);
    c.t_max = 1e6;
    OrbitTrace fwd = integrate(f, {-2, 0.05}, Direction::Forward, c, eqs);
    REQUIRE(fwd.forward_fate.kind == Fate::Kind::Undetermined);
    CHECK(fwd.forward_fate.reason == "unbounded-slow");

    // the basin of the repelling node reaches far up: backward converges to 0
    OrbitTrace n = integrate(f, {1.5, 0.4}, Direction::Backward, c, eqs);
    REQUIRE(n.backward_fate.kind == Fate::Kind::ConvergesTo);
    CHECK(n.backward_fate.equilibrium == eqs[0].id);

    // above the boundary separatrix: unbounded in both directions, no blow-up
    OrbitTrace above = integrate(f, {1.5, 3.0}, Direction::Backward, c, eqs);
    CHECK(above.backward_fate.kind == Fate::Kind::Undetermined);

    // the positive ray blows up forward (the exponential integral converges)
    OrbitTrace ray = integrate(f, {1.0, 0.0}, Direction::Forward, c, eqs);
    REQUIRE(ray.forward_fate.kind == Fate::Kind::BlowUp);
    double oracle = quad_real_oracle();
    CHECK(ray.t_plus == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("blow-up monotonicity for f = x^k") {
    for (int k = 2; k <= 4; ++k) {
        FieldExpr f = FieldExpr::parse("x^" + std::to_string(k));
        for (double z0 : {0.7, 1.0, 1.8}) {
            OrbitTrace tr = integrate(f, {z0, 0}, Direction::Forward, controls(3));
            REQUIRE(tr.forward_fate.kind == Fate::Kind::BlowUp);
            double expected = 1.0 / ((k - 1) * std::pow(z0, k - 1));
            CHECK(tr.t_plus == doctest::Approx(expected).epsilon(1e-6));
        }
    }
}

TEST_CASE("time symmetry: forward then backward returns to the start") {
    FieldExpr f = FieldExpr::parse("i*x*(x-1)");
    IntegrationControls c = controls(4);
    c.detect_periodic = false;
    c.t_max = 2.0;
    OrbitTrace fwd = integrate(f, {0.3, 0.2}, Direction::Forward, c);
    Complex end = fwd.samples.back().z;
    double span = fwd.samples.back().t;
    double path_len = 0;
    for (std::size_t i = 0; i + 1 < fwd.samples.size(); ++i)
        path_len += std::abs(fwd.samples[i + 1].z - fwd.samples[i].z);
    IntegrationControls cb = c;
    cb.t_max = span;
    OrbitTrace bwd = integrate(f, end, Direction::Backward, cb);
    Complex back = bwd.samples.front().z;
    CHECK(std::abs(back - Complex{0.3, 0.2}) <= 1e-7 * (1 + path_len));
}

TEST_CASE("detect_blow_up on synthetic episodes") {
    // x^2 from 1: crossing time at |z|=rho is exactly 1 - 1/rho
    EscapeEpisode ep;
    for (double rho = 100; rho <= 1e8; rho *= 2) {
        ep.radii.push_back(rho);
        ep.times.push_back(1.0 - 1.0 / rho);
    }
    ep.hit_extrap_radius = true;
    auto est = detect_blow_up(ep);
    REQUIRE(est);
    CHECK(est->t_star == doctest::Approx(1.0).epsilon(1e-9));

    // linear field: t(rho) = ln rho, increments constant, no contraction
    EscapeEpisode lin;
    for (double rho = 100; rho <= 1e8; rho *= 2) {
        lin.radii.push_back(rho);
        lin.times.push_back(std::log(rho));
    }
    lin.hit_extrap_radius = true;
    CHECK(!detect_blow_up(lin));

    // too little data
    EscapeEpisode tiny;
    tiny.radii = {100, 200};
    tiny.times = {0.9, 0.95};
    CHECK(!detect_blow_up(tiny));
}

TEST_CASE("fate trichotomy soundness: periodic implies unit winding") {
    FieldExpr f = FieldExpr::parse("1+x^2");
    auto eqs = find_equilibria(f, {-3, -3, 3, 3});
    OrbitTrace tr = integrate(f, {0, 1.8}, Direction::Forward, controls(4), eqs);
    REQUIRE(tr.forward_fate.kind == Fate::Kind::PeriodicAround);
    // enclosed center is i (id of the upper zero)
    int id_upper = -1;
    for (const auto& e : eqs)
        if (std::abs(e.location - Complex{0, 1}) < 1e-9) id_upper = e.id;
    CHECK(tr.forward_fate.equilibrium == id_upper);
    CHECK(tr.forward_fate.error_estimate <= 1e-8 * (1 + 1.8));

    // winding of the closed trace around i is +-1
    double acc = 0;
    for (std::size_t k = 0; k + 1 < tr.samples.size(); ++k)
        acc += std::arg((tr.samples[k + 1].z - Complex{0, 1}) /
                        (tr.samples[k].z - Complex{0, 1}));
    CHECK(std::abs(std::abs(acc / (2 * kPi)) - 1.0) < 0.05);
    CHECK(tr.forward_fate.period == doctest::Approx(kPi).epsilon(1e-7));
}

TEST_CASE("StartAtEquilibrium") {
    FieldExpr f = FieldExpr::parse("i*x");
    auto eqs = find_equilibria(f, {-2, -2, 2, 2});
    CHECK_THROWS_AS(integrate(f, {0, 0}, Direction::Forward, controls(3), eqs),
                    StartAtEquilibrium);
}

TEST_CASE("find_crossing") {
    // rigid rotation: from 1, the segment [0.5i, 1.5i] on the imaginary axis
    // is hit at t = pi/2 where the flow is horizontal
    FieldExpr f = FieldExpr::parse("i*x");
    IntegrationControls c = controls(3);
    c.detect_periodic = false;
    c.t_max = 4;
    OrbitTrace tr = integrate(f, {1, 0}, Direction::Forward, c);
    auto cr = find_crossing(f, tr, {{0.0, 0.5}, {0.0, 1.5}});
    REQUIRE(cr);
    CHECK(cr->t == doctest::Approx(kPi / 2).epsilon(1e-9));
    // the across-line component is bisected to 1e-12; along the orbit the
    // dense output carries O(h^4) interpolation error
    CHECK(std::abs(cr->z - Complex{0, 1}) <= 5e-8);

    // x^2 from -1 flows toward 0; vertical segment at Re = -0.5 is crossed at
    // t = 1/(-1) - 1/(-0.5) resolved by the flow: 1/x(t) = 1/x0 - t
    FieldExpr g = FieldExpr::parse("x^2");
    IntegrationControls cg = controls(3);
    cg.t_max = 40;
    OrbitTrace tg = integrate(g, {-1, 0}, Direction::Forward, cg);
    auto cg1 = find_crossing(g, tg, {{-0.5, -0.4}, {-0.5, 0.4}});
    REQUIRE(cg1);
    CHECK(std::abs(cg1->z - Complex{-0.5, 0}) <= 1e-10);
    CHECK(cg1->t == doctest::Approx(1.0).epsilon(1e-8));

    // segment parallel to the flow
    CHECK_THROWS_AS(find_crossing(f, tr, {{1.0, 0.0}, {1.0, 0.5}}), NotTransversal);
}

TEST_CASE("orbit csv format") {
    FieldExpr f = FieldExpr::parse("x");
    IntegrationControls c = controls(3);
    c.t_max = 0.5;
    OrbitTrace tr = integrate(f, {1, 0}, Direction::Forward, c);
    std::string csv = orbit_csv(tr);
    CHECK(csv.rfind("t,re,im\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') ==
          static_cast<long>(tr.samples.size()) + 1);
}
