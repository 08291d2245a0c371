#include "holoflow/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>

#include "holoflow/analysis.hpp"
#include "holoflow/errors.hpp"
#include "holoflow/transit.hpp"

namespace holoflow {

namespace {

constexpr double kPi = std::numbers::pi;

struct Check {
    std::string detail;
    bool ok = true;

    void expect(bool cond, const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
        if (!cond) {
            detail += " [FAILED]";
            ok = false;
        }
    }
    void expect_near(double value, double target, double tol, const std::string& what) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s=%.10g (want %.10g +- %.2g)", what.c_str(), value,
                      target, tol);
        expect(std::abs(value - target) <= tol, buf);
    }
};

using Criterion = std::function<void(Check&)>;

AnalyzeOptions desk_options(Window w, int nx, int ny) {
    AnalyzeOptions opt;
    opt.window = w;
    opt.nx = nx;
    opt.ny = ny;
    return opt;
}

const ConfigurationReport* report_for(const AnalysisResult& res, Complex loc, int sector = -1) {
    for (const auto& rep : res.reports) {
        if (std::abs(rep.equilibrium.location - loc) > 1e-6) continue;
        if (sector >= 0 && rep.sector_index != sector) continue;
        return &rep;
    }
    return nullptr;
}

const TheoremVerdict* verdict(const ConfigurationReport& rep, const std::string& name) {
    for (const auto& v : rep.verdicts)
        if (v.name == name) return &v;
    return nullptr;
}

// ---------------------------------------------------------------------------
// 1. quartic example: equilibria, classes, sectors
// ---------------------------------------------------------------------------
void criterion_quartic(Check& c) {
    FieldExpr f = FieldExpr::parse("x^2*(x-1)*(x-i)*(x-1-i)");
    auto eqs = find_equilibria(f, Window{-2, -2, 3, 3});
    c.expect(eqs.size() == 4, "four equilibria");
    if (eqs.size() != 4) return;
    auto find = [&](Complex loc) -> const Equilibrium* {
        for (const auto& e : eqs)
            if (std::abs(e.location - loc) < 1e-9) return &e;
        return nullptr;
    };
    const Equilibrium* e0 = find({0, 0});
    const Equilibrium* e1 = find({1, 0});
    const Equilibrium* ei = find({0, 1});
    const Equilibrium* e11 = find({1, 1});
    c.expect(e0 && e1 && ei && e11, "locations within 1e-9 of {0,1,i,1+i}");
    if (!(e0 && e1 && ei && e11)) return;
    c.expect(e0->order == 2 && e0->cls == EqClass::Multiple, "0 is an order-2 multiple point");
    c.expect(e1->cls == EqClass::StableFocus, "1 attracting focus");
    c.expect(ei->cls == EqClass::StableFocus, "i attracting focus");
    c.expect(e11->cls == EqClass::StableNode, "1+i attracting node");
    c.expect(e0->sector_directions && e0->sector_directions->size() == 2,
             "two sectors at the multiple point");
}

// ---------------------------------------------------------------------------
// 2. counterexample x*exp(x)
// ---------------------------------------------------------------------------
void criterion_counterexample(Check& c) {
    FieldExpr f = FieldExpr::parse("x*exp(x)");
    AnalyzeOptions opt = desk_options({-6, -6, 6, 6}, 220, 220);
    AnalysisResult res = analyze(f, opt);
    c.expect(res.equilibria.size() == 1 && res.equilibria[0].cls == EqClass::UnstableNode,
             "0 is a repelling node");
    const ConfigurationReport* rep = report_for(res, {0, 0});
    c.expect(rep != nullptr, "node basin report");
    if (!rep) return;

    int negatives = 0;
    const SeparatrixRecord* upper = nullptr;
    for (const auto& r : rep->records) {
        if (r.side == Side::Negative) {
            ++negatives;
            c.expect(r.t_minus_star && *r.t_minus_star < 0, "finite backward blow-up time");
            c.expect(r.orbit.forward_fate.kind == Fate::Kind::Undetermined &&
                         r.orbit.forward_fate.reason == "unbounded-slow",
                     "forward Undetermined(unbounded-slow)");
            if (r.seed.imag() > 0) upper = &r;
        }
    }
    c.expect(negatives == 2, "both boundary orbits negative (" + std::to_string(negatives) + ")");
    c.expect(upper != nullptr, "upper boundary orbit present");
    if (!upper) return;

    // divergence probe against the exponential-integral comparator
    std::function<double(double)> comparator = [](double y) {
        double upper_limit = std::abs(y);
        return quad_real([](double u) { return std::exp(u) / u; }, 1.0, upper_limit, 1e-10) -
               2.0 * std::numbers::e;
    };
    double checkpoints[] = {-3, -4, -5};
    auto probe = divergence_probe(f, upper->orbit, Direction::Forward, EscapeCoord::RealPart,
                                  -1.0, checkpoints, &comparator);
    c.expect(probe.size() == 3, "probe reaches Re(z) in {-3,-4,-5}");
    double prev = 0;
    for (const auto& p : probe) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "tau(Re=%g)=%.6g >= comparator %.6g", p.threshold,
                      p.cumulative_time, *p.comparator);
        c.expect(p.cumulative_time >= *p.comparator && p.cumulative_time > prev, buf);
        prev = p.cumulative_time;
    }
}

// ---------------------------------------------------------------------------
// 3. F_alpha sweep
// ---------------------------------------------------------------------------
void criterion_f_alpha(Check& c) {
    AnalyzeOptions opt = desk_options({-3, -3, 3, 3}, 180, 180);
    std::vector<double> alphas = {0.0, kPi / 4, kPi / 2, 3 * kPi / 4};
    std::vector<AnalysisResult> results;
    nlohmann::json j = run_sweep("exp(i*A)*(x-1)^2*(x+1)^2", "A", alphas, opt, &results);

    for (std::size_t k = 0; k < alphas.size(); ++k) {
        Census cen = census(results[k]);
        char buf[200];
        if (std::abs(alphas[k] - kPi / 2) > 1e-12) {
            std::snprintf(buf, sizeof(buf),
                          "alpha=%.4g: 6 one-sided separatrices 3+3 (got %d: %d+%d, %d double)",
                          alphas[k], cen.unique, cen.positive, cen.negative, cen.double_sided);
            c.expect(cen.positive == 3 && cen.negative == 3 && cen.double_sided == 0, buf);
        } else {
            // the configuration change: one double-sided separatrix through i,
            // total count down by one, blow-up count conserved at six
            bool through_i = false;
            for (const auto* r : cen.records)
                if (r->side == Side::Double &&
                    distance_to_polyline({0, 1}, r->orbit, results[k].window) < 1e-3)
                    through_i = true;
            std::snprintf(buf, sizeof(buf),
                          "alpha=pi/2: double-sided through i (%s), counts %d+%d+%dd",
                          through_i ? "yes" : "no", cen.positive, cen.negative, cen.double_sided);
            c.expect(through_i, buf);
            c.expect(cen.double_sided == 1, "exactly one double-sided separatrix");
            c.expect(cen.unique == 5, "separatrix count drops by one (6 -> 5)");
            c.expect(cen.positive + cen.negative + 2 * cen.double_sided == 6,
                     "blow-up count stays 6");
        }
    }
}

// ---------------------------------------------------------------------------
// 4. center equality case i*x*(x-1)
// ---------------------------------------------------------------------------
void criterion_center_equality(Check& c) {
    FieldExpr f = FieldExpr::parse("i*x*(x-1)");
    AnalyzeOptions opt = desk_options({-2, -2, 3, 2}, 200, 160);
    AnalysisResult res = analyze(f, opt);
    const ConfigurationReport* rep = report_for(res, {0, 0});
    c.expect(rep && rep->kind == RegionKind::CenterBasin, "center basin report at 0");
    if (!rep) return;
    c.expect(rep->equilibrium.period && std::abs(*rep->equilibrium.period - 2 * kPi) < 1e-9,
             "T(0) = 2*pi");

    c.expect(rep->records.size() == 1, "single boundary orbit (" +
                                           std::to_string(rep->records.size()) + " records)");
    if (rep->records.empty()) return;
    const SeparatrixRecord& r = rep->records.front();
    c.expect(std::abs(r.seed.real() - 0.5) < 1e-5, "boundary on the line Re = 1/2");
    c.expect(r.side == Side::Double, "double-sided separatrix");
    if (r.transit_time) c.expect_near(*r.transit_time, 2 * kPi, 1e-3, "tau");
    else c.expect(false, "transit time attached");

    const TheoremVerdict* v = verdict(*rep, "center-transit-budget");
    c.expect(v && v->pass, "sum tau <= T(0) verdict passes");
    if (v) c.expect_near(v->measured, 2 * kPi, 1e-3, "sum tau (equality case)");
}

// ---------------------------------------------------------------------------
// 5. center case 1+x^2 at i
// ---------------------------------------------------------------------------
void criterion_center_tan(Check& c) {
    FieldExpr f = FieldExpr::parse("1+x^2");
    EquilibriaOptions eopt;
    double T = period(f, {0, 1}, eopt);
    c.expect_near(T, kPi, 1e-9, "T(i) from 2*pi*i/F'(i)");
    Complex residue = residue_period(f, {0, 1}, 0.3);
    c.expect_near(std::abs(residue - Complex{kPi, 0}), 0.0, 1e-9, "|residue quadrature - pi|");

    AnalyzeOptions opt = desk_options({-3, -2.2, 3, 2.2}, 200, 160);
    AnalysisResult res = analyze(f, opt);
    const ConfigurationReport* rep = report_for(res, {0, 1});
    c.expect(rep != nullptr, "center basin report at i");
    if (!rep) return;
    bool found = false;
    for (const auto& r : rep->records) {
        if (std::abs(r.seed.imag()) < 1e-4) {
            found = true;
            c.expect(r.side == Side::Double, "real axis double-sided");
            if (r.transit_time) c.expect_near(*r.transit_time, kPi, 1e-3, "tau(real axis)");
        }
    }
    c.expect(found, "real-axis separatrix found");

    IntegrationControls ic;
    ic.window_radius = 5;
    OrbitTrace tr = integrate(f, {0, 0}, Direction::Forward, ic, res.equilibria);
    c.expect(tr.forward_fate.kind == Fate::Kind::BlowUp, "blow-up from 0");
    c.expect_near(tr.t_plus, kPi / 2, 1e-6, "t* (tan flow)");
}

// ---------------------------------------------------------------------------
// 6. sector case x^2
// ---------------------------------------------------------------------------
void criterion_sector_x2(Check& c) {
    FieldExpr f = FieldExpr::parse("x^2");
    EquilibriaOptions eopt;
    auto dirs = sector_directions(f, {0, 0}, 2, eopt);
    c.expect(dirs.size() == 2, "two definite directions");
    if (dirs.size() == 2) {
        c.expect_near(dirs[0], 0.0, 1e-9, "direction 0");
        c.expect_near(dirs[1], kPi, 1e-9, "direction pi");
    }

    AnalyzeOptions opt = desk_options({-2, -2, 2, 2}, 160, 160);
    AnalysisResult res = analyze(f, opt);
    c.expect(res.reports.size() == 2, "two sector reports");

    // homoclinic cells fill both half-planes
    const ConfigurationReport* rep0 = nullptr;
    for (const auto& rep : res.reports)
        if (rep.sector_index == 0) rep0 = &rep;
    c.expect(rep0 != nullptr, "sector 0 report");
    if (!rep0) return;
    const BasinGrid& g = rep0->grid;
    int in_cells = 0, resolved = 0;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const CellInfo& cell = g.at(ix, iy);
            Complex z = g.cell_center(ix, iy);
            if (std::abs(z.imag()) < 2.5 * g.cell_h()) continue;  // the axis itself
            if (cell.label == CellLabel::Unresolved) continue;
            ++resolved;
            if (cell.label == CellLabel::InSector) ++in_cells;
        }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "homoclinic cells fill both half-planes (%d/%d)", in_cells,
                  resolved);
    c.expect(resolved > 0 && in_cells >= resolved - 2, buf);

    for (const auto& rep : res.reports) {
        const SeparatrixRecord* g1 = nullptr;
        const SeparatrixRecord* g2 = nullptr;
        for (const auto& r : rep.records) {
            if (r.id == rep.gamma1) g1 = &r;
            if (r.id == rep.gamma2) g2 = &r;
        }
        c.expect(g1 && g1->side == Side::Positive, "gamma1 positive");
        c.expect(g2 && g2->side == Side::Negative, "gamma2 negative");
        c.expect(rep.records.size() == 2, "report contains exactly {a, gamma1, gamma2}");
    }

    IntegrationControls ic;
    ic.window_radius = 3;
    OrbitTrace tr = integrate(f, {1, 0}, Direction::Forward, ic, res.equilibria);
    c.expect(tr.forward_fate.kind == Fate::Kind::BlowUp, "gamma1 blow-up from z0=1");
    c.expect_near(tr.t_plus, 1.0, 1e-6, "t*(z0=1)");
}

// ---------------------------------------------------------------------------
// 7. node case x*(x-1), basin of 0
// ---------------------------------------------------------------------------
void criterion_node_basin(Check& c) {
    FieldExpr f = FieldExpr::parse("x*(x-1)");
    AnalyzeOptions opt = desk_options({-2, -2, 3, 2}, 200, 160);
    AnalysisResult res = analyze(f, opt);
    const ConfigurationReport* rep = report_for(res, {0, 0});
    c.expect(rep && rep->kind == RegionKind::NodeFocusBasin, "basin report at 0");
    if (!rep) return;
    c.expect(rep->components.size() == 1, "one path component (" +
                                              std::to_string(rep->components.size()) + ")");
    if (rep->components.size() == 1) {
        const PathComponent& comp = rep->components.front();
        c.expect(comp.type == ComponentType::EquilibriumOneOrbit,
                 std::string("type (iii)/(B), got ") + to_string(comp.type));
        c.expect(comp.equilibrium_ids.size() == 1, "attached equilibrium is 1");
    }
    bool positive_found = false;
    for (const auto& r : rep->records)
        if (r.side == Side::Positive) positive_found = true;
    c.expect(positive_found, "boundary orbit is a positive separatrix");

    IntegrationControls ic;
    ic.window_radius = 4;
    OrbitTrace tr = integrate(f, {2, 0}, Direction::Forward, ic, res.equilibria);
    c.expect(tr.forward_fate.kind == Fate::Kind::BlowUp, "forward blow-up from 2");
    c.expect_near(tr.t_plus, std::log(2.0), 1e-6, "clock time to infinity");
}

// ---------------------------------------------------------------------------
// 8. clock-contour and Cauchy properties
// ---------------------------------------------------------------------------
void criterion_clock_contour(Check& c) {
    std::mt19937_64 rng(20260809);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    const char* corpus[] = {"i*x", "x^2", "1+x^2", "i*x*(x-1)", "x*(x-1)", "x*exp(x)"};
    int done = 0;
    double worst = 0;
    for (int trial = 0; trial < 400 && done < 200; ++trial) {
        const char* src = corpus[trial % 6];
        FieldExpr f = FieldExpr::parse(src);
        Complex z0{1.2 * unit(rng), 1.2 * unit(rng)};
        if (std::abs(f.eval(z0)) < 1e-3) continue;
        IntegrationControls ic;
        ic.t_max = 40;
        ic.window_radius = 4;
        ic.detect_periodic = false;
        std::vector<Equilibrium> none;
        OrbitTrace tr;
        try {
            tr = integrate(f, z0, Direction::Forward, ic, none);
        } catch (const Error&) {
            continue;
        }
        double span = tr.resolved_t_max();
        if (span < 0.2) continue;
        double t2 = std::min(span, 1.0);
        double residual;
        try {
            residual = clock_contour_check(f, tr, 0, t2);
        } catch (const Error&) {
            continue;
        }
        worst = std::max(worst, residual);
        ++done;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d orbit pieces, worst clock-contour residual %.3g", done,
                  worst);
    c.expect(done >= 200 && worst <= 1e-6, buf);

    // Cauchy null-homotopy on zero-free rectangles of a random polynomial field
    FieldExpr f = FieldExpr::parse("(x-2)*(x+2)*(x-2*i)");
    double worst_ratio = 0;
    int rects = 0;
    for (int trial = 0; trial < 300 && rects < 100; ++trial) {
        double cx = 1.4 * unit(rng), cy = 1.4 * unit(rng);
        double hw = 0.2 + 0.3 * std::abs(unit(rng)), hh = 0.2 + 0.3 * std::abs(unit(rng));
        Window w{cx - hw, cy - hh, cx + hw, cy + hh};
        bool clean = true;
        for (Complex zero : {Complex{2, 0}, Complex{-2, 0}, Complex{0, 2}})
            if (w.contains(zero, -0.15)) clean = false;
        if (!clean) continue;
        std::vector<Complex> loop = {{w.xmin, w.ymin}, {w.xmax, w.ymin}, {w.xmax, w.ymax},
                                     {w.xmin, w.ymax}, {w.xmin, w.ymin}};
        TransitResult r = contour_integral_reciprocal(f, loop);
        double len = 2 * (w.width() + w.height());
        double minf = 1e300;
        for (int k = 0; k < 200; ++k) {
            double u = k / 200.0;
            Complex p;
            double per = u * len;
            if (per < w.width()) p = {w.xmin + per, w.ymin};
            else if (per < w.width() + w.height()) p = {w.xmax, w.ymin + per - w.width()};
            else if (per < 2 * w.width() + w.height())
                p = {w.xmax - (per - w.width() - w.height()), w.ymax};
            else p = {w.xmin, w.ymax - (per - 2 * w.width() - w.height())};
            minf = std::min(minf, std::abs(f.eval(p)));
        }
        worst_ratio = std::max(worst_ratio, std::abs(r.value) / (len / minf));
        ++rects;
    }
    std::snprintf(buf, sizeof(buf), "%d rectangles, worst |loop integral| ratio %.3g", rects,
                  worst_ratio);
    c.expect(rects >= 100 && worst_ratio <= 1e-8, buf);
}

// ---------------------------------------------------------------------------
// 9. boundary continuity on i*x*(x-1)
// ---------------------------------------------------------------------------
void criterion_boundary_continuity(Check& c) {
    FieldExpr f = FieldExpr::parse("i*x*(x-1)");
    auto eqs = find_equilibria(f, Window{-2, -2, 3, 2});

    // x, y on the boundary line Re=1/2 with tau(x,y) = 1: flow moves downward
    double sa = 0.5 * std::tan(0.25);
    Complex x{0.5, sa};
    Complex y{0.5, -sa};

    IntegrationControls ic;
    ic.window_radius = 4;
    double prev = 1e300;
    int monotone_breaks = 0;
    double final_disc = 1e300;
    for (int k = 3; k <= 10; ++k) {
        double delta = std::pow(2.0, -k);
        Complex xk = x - Complex{delta, 0};  // interior of the basin of 0
        OrbitTrace tr = integrate(f, xk, Direction::Forward, ic, eqs);
        Segment section{y - Complex{0.3, 0}, y + Complex{0.3, 0}};
        auto crossing = find_crossing(f, tr, section);
        if (!crossing) {
            c.expect(false, "crossing found for k=" + std::to_string(k));
            return;
        }
        double disc = std::abs(crossing->t - 1.0);
        if (disc > prev + 1e-12) ++monotone_breaks;
        prev = disc;
        final_disc = disc;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "discrepancy at k=10 is %.3g", final_disc);
    c.expect(final_disc < 1e-3, buf);
    c.expect(monotone_breaks <= 1,
             "non-increasing in k (breaks: " + std::to_string(monotone_breaks) + ")");
}

// ---------------------------------------------------------------------------
// 10. time-reversal metamorphic test
// ---------------------------------------------------------------------------
void criterion_time_reversal(Check& c) {
    struct Case {
        const char* src;
        Window w;
    };
    Case cases[] = {
        {"i*x*(x-1)", {-2, -2, 3, 2}},
        {"x*(x-1)", {-2, -2, 3, 2}},
        {"x^2", {-2, -2, 2, 2}},
        {"x*exp(x)", {-6, -6, 6, 6}},
    };
    for (const auto& cs : cases) {
        FieldExpr f = FieldExpr::parse(cs.src);
        FieldExpr g = f.negated();
        AnalyzeOptions opt = desk_options(cs.w, 140, 140);
        AnalysisResult rf = analyze(f, opt);
        AnalysisResult rg = analyze(g, opt);

        // classes swap stability
        c.expect(rf.equilibria.size() == rg.equilibria.size(),
                 std::string(cs.src) + ": same equilibria");
        for (std::size_t k = 0; k < rf.equilibria.size(); ++k) {
            EqClass a = rf.equilibria[k].cls, b = rg.equilibria[k].cls;
            auto swapped = [](EqClass x) {
                switch (x) {
                    case EqClass::StableNode: return EqClass::UnstableNode;
                    case EqClass::UnstableNode: return EqClass::StableNode;
                    case EqClass::StableFocus: return EqClass::UnstableFocus;
                    case EqClass::UnstableFocus: return EqClass::StableFocus;
                    default: return x;
                }
            };
            c.expect(b == swapped(a), std::string(cs.src) + ": class swaps at #" +
                                          std::to_string(k));
        }

        Census cf = census(rf), cg = census(rg);
        c.expect(cf.positive == cg.negative && cf.negative == cg.positive &&
                     cf.double_sided == cg.double_sided,
                 std::string(cs.src) + ": sides swap (" + std::to_string(cf.positive) + "+" +
                     std::to_string(cf.negative) + " vs " + std::to_string(cg.positive) + "+" +
                     std::to_string(cg.negative) + ")");

        // geometry unchanged: every unique orbit has a reversed partner within
        // 1e-4 sampled Hausdorff distance
        double worst = 0;
        for (const auto* a : cf.records) {
            double best = 1e300;
            for (const auto* b : cg.records)
                best = std::min(best, sampled_hausdorff(a->orbit, b->orbit, rf.window));
            worst = std::max(worst, best);
        }
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s: worst matched Hausdorff %.3g", cs.src, worst);
        c.expect(cf.records.empty() || worst <= 1e-4, buf);
    }
}

}  // namespace

std::vector<CriterionResult> run_acceptance() {
    struct Entry {
        const char* name;
        Criterion fn;
    };
    Entry entries[] = {
        {"quartic-example", criterion_quartic},
        {"counterexample-x-exp-x", criterion_counterexample},
        {"f-alpha-sweep", criterion_f_alpha},
        {"center-equality-ix(x-1)", criterion_center_equality},
        {"center-tan-1+x^2", criterion_center_tan},
        {"sector-x^2", criterion_sector_x2},
        {"node-x(x-1)", criterion_node_basin},
        {"clock-contour-cauchy", criterion_clock_contour},
        {"boundary-continuity", criterion_boundary_continuity},
        {"time-reversal", criterion_time_reversal},
    };

    std::vector<CriterionResult> results;
    int index = 1;
    for (auto& e : entries) {
        CriterionResult r;
        r.index = index++;
        r.name = e.name;
        auto start = std::chrono::steady_clock::now();
        Check check;
        try {
            e.fn(check);
            r.pass = check.ok;
            r.detail = check.detail;
        } catch (const std::exception& ex) {
            r.pass = false;
            r.detail = std::string("exception: ") + ex.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace holoflow
