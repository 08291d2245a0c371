#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "holoflow/analysis.hpp"
#include "holoflow/errors.hpp"
#include "holoflow/separatrix.hpp"

using namespace holoflow;

namespace {
constexpr double kPi = std::numbers::pi;

SeparatrixOptions options_for(Window w) {
    SeparatrixOptions opt;
    opt.cell.escape_radius = 1e3 * w.diameter();
    opt.dedupe_window = w;
    opt.trace.escape_radius = 1e3 * w.diameter();
    double m = 0;
    for (Complex corner : {Complex{w.xmin, w.ymin}, Complex{w.xmax, w.ymin},
                           Complex{w.xmin, w.ymax}, Complex{w.xmax, w.ymax}})
        m = std::max(m, std::abs(corner));
    opt.cell.window_radius = m;
    opt.trace.window_radius = m;
    return opt;
}
}  // namespace

TEST_CASE("compute_basin for the center of i*x*(x-1): the Re<1/2 half plane") {
    FieldExpr f = FieldExpr::parse("i*x*(x-1)");
    Window w{-2, -2, 3, 2};
    auto eqs = find_equilibria(f, w);
    const Equilibrium& center = eqs[0];
    REQUIRE(center.cls == EqClass::Center);

    SeparatrixOptions opt = options_for(w);
    opt.cell.t_max = 40;
    BasinGrid grid = compute_basin(f, center, eqs, w, 400, 320, opt);

    // orbits are Apollonius circles; the basin is exactly Re < 1/2
    int wrong = 0, checked = 0;
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) {
            Complex z = grid.cell_center(ix, iy);
            if (std::abs(z.real() - 0.5) <= grid.cell_w()) continue;  // one-cell fuzz allowed
            const CellInfo& c = grid.at(ix, iy);
            if (c.label == CellLabel::EquilibriumCell || c.label == CellLabel::Unresolved)
                continue;
            ++checked;
            bool want_in = z.real() < 0.5;
            bool is_in = c.label == CellLabel::InBasin;
            if (want_in != is_in) ++wrong;
        }
    CHECK(checked > 100000);
    CHECK(wrong == 0);
}

TEST_CASE("extract_boundary finds the line Re=1/2 and tracing yields one double-sided record") {
    FieldExpr f = FieldExpr::parse("i*x*(x-1)");
    Window w{-2, -2, 3, 2};
    auto eqs = find_equilibria(f, w);
    const Equilibrium& center = eqs[0];
    SeparatrixOptions opt = options_for(w);
    opt.cell.t_max = 40;
    opt.max_seeds = 24;
    BasinGrid grid = compute_basin(f, center, eqs, w, 160, 128, opt);

    BoundaryExtraction ext = extract_boundary(f, center, eqs, grid, -1, opt);
    CHECK(!ext.empty_boundary);
    REQUIRE(!ext.seeds.empty());
    for (const auto& s : ext.seeds) CHECK(std::abs(s.seed.real() - 0.5) <= 1e-5);

    auto records = trace_and_classify(f, center, eqs, ext.seeds, opt);
    REQUIRE(records.size() == 1);
    CHECK(records[0].side == Side::Double);
    REQUIRE(records[0].transit_time);
    CHECK(*records[0].transit_time == doctest::Approx(2 * kPi).epsilon(1e-3 / (2 * kPi)));
}

TEST_CASE("1+x^2 center basin at i: boundary on the real axis") {
    FieldExpr f = FieldExpr::parse("1+x^2");
    Window w{-3, -2.2, 3, 2.2};
    auto eqs = find_equilibria(f, w);
    const Equilibrium* upper = nullptr;
    for (const auto& e : eqs)
        if (std::abs(e.location - Complex{0, 1}) < 1e-9) upper = &e;
    REQUIRE(upper);
    SeparatrixOptions opt = options_for(w);
    opt.cell.t_max = 40;
    opt.max_seeds = 16;
    BasinGrid grid = compute_basin(f, *upper, eqs, w, 150, 110, opt);
    BoundaryExtraction ext = extract_boundary(f, *upper, eqs, grid, -1, opt);
    REQUIRE(!ext.seeds.empty());
    for (const auto& s : ext.seeds) CHECK(std::abs(s.seed.imag()) <= 1e-5);
}

TEST_CASE("sectors of x^2 fill the half planes and carry the gamma pair") {
    FieldExpr f = FieldExpr::parse("x^2");
    Window w{-2, -2, 2, 2};
    auto eqs = find_equilibria(f, w);
    REQUIRE(eqs.size() == 1);
    REQUIRE(eqs[0].cls == EqClass::Multiple);

    SeparatrixOptions opt = options_for(w);
    opt.max_seeds = 24;
    BasinGrid grid = compute_basin(f, eqs[0], eqs, w, 120, 120, opt);

    int upper_sector = -1, lower_sector = -1;
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) {
            Complex z = grid.cell_center(ix, iy);
            const CellInfo& c = grid.at(ix, iy);
            if (std::abs(z.imag()) < 2 * grid.cell_h()) continue;
            if (c.label != CellLabel::InSector) continue;
            if (z.imag() > 0) upper_sector = c.sector;
            else lower_sector = c.sector;
        }
    CHECK(upper_sector >= 0);
    CHECK(lower_sector >= 0);
    CHECK(upper_sector != lower_sector);

    // homoclinic coverage off the axis
    int missing = 0;
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) {
            Complex z = grid.cell_center(ix, iy);
            if (std::abs(z.imag()) < 2.5 * grid.cell_h()) continue;
            if (grid.at(ix, iy).label != CellLabel::InSector) ++missing;
        }
    CHECK(missing <= 2);

    BoundaryExtraction ext = extract_boundary(f, eqs[0], eqs, grid, upper_sector, opt);
    auto records = trace_and_classify(f, eqs[0], eqs, ext.seeds, opt);
    auto pairs = sector_pair(f, eqs[0], eqs, grid, records, opt, upper_sector);
    REQUIRE(pairs.size() == 1);
    const SeparatrixRecord* g1 = nullptr;
    const SeparatrixRecord* g2 = nullptr;
    for (const auto& r : records) {
        if (r.id == pairs[0].gamma1) g1 = &r;
        if (r.id == pairs[0].gamma2) g2 = &r;
    }
    REQUIRE(g1);
    REQUIRE(g2);
    CHECK(g1->side == Side::Positive);
    CHECK(g2->side == Side::Negative);
    CHECK(records.size() == 2);  // exactly {gamma1, gamma2}, no C_n
}

TEST_CASE("node basin of x*(x-1): the slit ray (1,oo), component (iii)/(B)") {
    FieldExpr f = FieldExpr::parse("x*(x-1)");
    Window w{-2, -2, 3, 2};
    auto eqs = find_equilibria(f, w);
    const Equilibrium* origin = nullptr;
    for (const auto& e : eqs)
        if (std::abs(e.location) < 1e-9) origin = &e;
    REQUIRE(origin);
    REQUIRE(origin->cls == EqClass::StableNode);

    SeparatrixOptions opt = options_for(w);
    opt.max_seeds = 20;
    BasinGrid grid = compute_basin(f, *origin, eqs, w, 150, 110, opt);

    // the boundary is a slit with the basin on both sides: cell marching
    // cannot see it
    BoundaryExtraction ext = extract_boundary(f, *origin, eqs, grid, -1, opt);
    CHECK(ext.seeds.empty());
    CHECK(ext.empty_boundary);

    auto records = slit_search(f, *origin, eqs, grid, opt);
    REQUIRE(records.size() == 1);
    CHECK(std::abs(records[0].seed.imag()) <= 1e-6);
    CHECK(records[0].seed.real() > 1.0);
    CHECK(records[0].side == Side::Positive);
    CHECK(records[0].attached_backward >= 0);

    auto comps = assemble_components(records, eqs, *origin, grid);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].type == ComponentType::EquilibriumOneOrbit);
    CHECK(std::string(node_focus_tag(comps[0].type)) == "(B)");
}

TEST_CASE("flow invariance of basin labels") {
    FieldExpr f = FieldExpr::parse("i*x*(x-1)");
    Window w{-2, -2, 3, 2};
    auto eqs = find_equilibria(f, w);
    SeparatrixOptions opt = options_for(w);
    opt.cell.t_max = 40;
    BasinGrid grid = compute_basin(f, eqs[0], eqs, w, 80, 64, opt);

    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> pick_x(0, grid.nx - 1), pick_y(0, grid.ny - 1);
    std::uniform_real_distribution<double> tshort(0.05, 0.8);
    IntegrationControls ic = opt.cell;
    ic.detect_periodic = false;
    ic.record_samples = true;
    int done = 0;
    for (int trial = 0; trial < 4000 && done < 200; ++trial) {
        int ix = pick_x(rng), iy = pick_y(rng);
        if (grid.at(ix, iy).label != CellLabel::InBasin) continue;
        Complex z = grid.cell_center(ix, iy);
        IntegrationControls cc = ic;
        cc.t_max = tshort(rng);
        OrbitTrace tr = integrate(f, z, Direction::Forward, cc, eqs);
        Complex landed = tr.samples.back().z;
        CellInfo c = classify_point(f, eqs[0], eqs, landed, opt);
        CHECK(c.label == CellLabel::InBasin);
        ++done;
    }
    CHECK(done == 200);
}

TEST_CASE("time reversal swaps sides and stability, keeps geometry") {
    FieldExpr f = FieldExpr::parse("x*(x-1)");
    FieldExpr g = f.negated();
    AnalyzeOptions opt;
    opt.window = Window{-2, -2, 3, 2};
    opt.nx = 120;
    opt.ny = 100;
    AnalysisResult rf = analyze(f, opt);
    AnalysisResult rg = analyze(g, opt);
    Census cf = census(rf), cg = census(rg);
    CHECK(cf.positive == cg.negative);
    CHECK(cf.negative == cg.positive);
    REQUIRE(!cf.records.empty());
    double worst = 0;
    for (const auto* a : cf.records) {
        double best = 1e300;
        for (const auto* b : cg.records)
            best = std::min(best, sampled_hausdorff(a->orbit, b->orbit, rf.window));
        worst = std::max(worst, best);
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("empty boundary is a signal, not an error") {
    // the linear center: every orbit is periodic around 0, the basin fills the
    // window
    FieldExpr f = FieldExpr::parse("i*x");
    Window w{-1.5, -1.5, 1.5, 1.5};
    auto eqs = find_equilibria(f, w);
    SeparatrixOptions opt = options_for(w);
    opt.cell.t_max = 30;
    BasinGrid grid = compute_basin(f, eqs[0], eqs, w, 64, 64, opt);
    BoundaryExtraction ext = extract_boundary(f, eqs[0], eqs, grid, -1, opt);
    CHECK(ext.empty_boundary);
    CHECK(ext.seeds.empty());
}

TEST_CASE("heteroclinic probe: x^2 has no heteroclinic cells") {
    FieldExpr f = FieldExpr::parse("x^2");
    Window w{-2, -2, 2, 2};
    auto eqs = find_equilibria(f, w);
    SeparatrixOptions opt = options_for(w);
    HeteroclinicProbe probe =
        heteroclinic_region_probe(f, eqs, eqs[0].id, eqs[0].id, w, 40, 40, opt);
    CHECK(!probe.hetero_cells_found);
    CHECK(probe.records.empty());
}

TEST_CASE("heteroclinic probe on the quartic pair (0, 1+i)") {
    FieldExpr f = FieldExpr::parse("x^2*(x-1)*(x-i)*(x-1-i)");
    Window w{-2, -2, 3, 3};
    auto eqs = find_equilibria(f, w);
    int id0 = -1, id11 = -1;
    for (const auto& e : eqs) {
        if (std::abs(e.location) < 1e-9) id0 = e.id;
        if (std::abs(e.location - Complex{1, 1}) < 1e-9) id11 = e.id;
    }
    REQUIRE(id0 >= 0);
    REQUIRE(id11 >= 0);
    SeparatrixOptions opt = options_for(w);
    opt.max_seeds = 16;
    HeteroclinicProbe probe = heteroclinic_region_probe(f, eqs, id0, id11, w, 70, 70, opt);
    CHECK(probe.hetero_cells_found);
    CHECK(!probe.records.empty());
}

TEST_CASE("F_{pi/2} probe detects the double-sided separatrix through i") {
    FieldExpr f = FieldExpr::parse("exp(i*pi/2)*(x-1)^2*(x+1)^2");
    Window w{-3, -3, 3, 3};
    auto eqs = find_equilibria(f, w);
    REQUIRE(eqs.size() == 2);
    SeparatrixOptions opt = options_for(w);
    opt.max_seeds = 20;
    HeteroclinicProbe probe =
        heteroclinic_region_probe(f, eqs, eqs[0].id, eqs[1].id, w, 70, 70, opt);
    CHECK(!probe.hetero_cells_found);
    bool through_i = false;
    for (const auto& r : probe.records) {
        if (r.side == Side::Double && distance_to_polyline({0, 1}, r.orbit, w) < 1e-3)
            through_i = true;
    }
    CHECK(through_i);
}
