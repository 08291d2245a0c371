#include "holoflow/separatrix.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstdio>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <set>

#include "holoflow/errors.hpp"

namespace holoflow {

namespace {

double window_radius_of(Window w) {
    double m = 0;
    m = std::max(m, std::abs(Complex{w.xmin, w.ymin}));
    m = std::max(m, std::abs(Complex{w.xmax, w.ymin}));
    m = std::max(m, std::abs(Complex{w.xmin, w.ymax}));
    m = std::max(m, std::abs(Complex{w.xmax, w.ymax}));
    return m;
}

int sector_of_angle(double theta, const std::vector<double>& dirs) {
    // sector k lies between dirs[k] and dirs[k+1] (cyclic)
    int n = static_cast<int>(dirs.size());
    for (int k = n - 1; k >= 0; --k)
        if (theta >= dirs[k]) return k;
    return n - 1;  // wrapped below dirs[0]
}

double farthest_angle(const OrbitTrace& trace, Complex a) {
    double best = -1;
    Complex zb{};
    for (const auto& s : trace.samples) {
        double d = std::abs(s.z - a);
        if (d > best) {
            best = d;
            zb = s.z;
        }
    }
    double th = std::arg(zb - a);
    if (th < 0) th += kTwoPi;
    return th;
}

// +1 where orbits leave the equilibrium along direction d, -1 where they
// enter: sign of the radial velocity of the leading term along the ray.
int ray_sign(const Equilibrium& e, double d) {
    double v = std::cos(std::arg(e.leading_coefficient) + (e.order - 1) * d);
    return v >= 0 ? 1 : -1;
}

bool budget_limited(const Fate& f) {
    return f.kind == Fate::Kind::Undetermined && f.reason == "budget-exhausted";
}

bool definite_fate(const Fate& f) {
    return f.kind == Fate::Kind::ConvergesTo || f.kind == Fate::Kind::PeriodicAround ||
           f.kind == Fate::Kind::BlowUp ||
           (f.kind == Fate::Kind::Undetermined && !budget_limited(f));
}

struct SideCertificate {
    std::optional<double> t_star;  // elapsed, positive
    double error = 0;
    bool shadow = false;
};

SideCertificate certify_side(const Fate& fate, const EscapeEpisode& episode) {
    SideCertificate c;
    if (fate.kind == Fate::Kind::BlowUp) {
        c.t_star = std::abs(fate.blow_up_time);
        c.error = fate.error_estimate;
        return c;
    }
    if (auto est = detect_blow_up(episode)) {
        c.t_star = est->t_star;
        c.error = est->error;
        c.shadow = true;
    }
    return c;
}

bool matches_region(const CellInfo& c, const Equilibrium& target, int sector) {
    if (sector < 0)
        return c.label == CellLabel::InBasin && c.eq == target.id;
    return c.label == CellLabel::InSector && c.eq == target.id && c.sector == sector;
}

bool usable_outside(const CellInfo& c, const Equilibrium& target, int sector) {
    // Unresolved counts: near the boundary the budget runs out honestly, and
    // the bisection classifier does the precise work afterwards
    if (c.label == CellLabel::EquilibriumCell) return false;
    return !matches_region(c, target, sector);
}

// ---------------------------------------------------------------------------
// straddle tracing: two points bracketing a boundary orbit march in lockstep;
// whenever they separate, the bracket is re-bisected with the region
// predicate. This follows separatrices that plain shadows peel away from
// (exponential fields), and produces the dyadic data for blow-up
// certification.
// ---------------------------------------------------------------------------

struct StraddleOutcome {
    std::optional<double> t_star;  // elapsed blow-up time, positive
    double error = 0;
    std::vector<TimePoint> samples;  // (elapsed >= 0, z)
    bool lost = false;
    std::string note;
};

StraddleOutcome straddle_trace(const FieldExpr& f, std::span<const Equilibrium> eqs,
                               Complex in_pt, Complex out_pt, Direction dir,
                               const std::function<bool(Complex)>& inside,
                               const SeparatrixOptions& opt) {
    StraddleOutcome out;
    Complex a = in_pt, b = out_pt;

    auto bisect = [&](double tol) -> bool {
        if (!inside(a)) std::swap(a, b);
        if (!inside(a) || inside(b)) return false;
        int guard = 0;
        while (std::abs(b - a) > tol && guard++ < 100) {
            Complex mid = 0.5 * (a + b);
            if (inside(mid)) a = mid;
            else b = mid;
        }
        return true;
    };
    if (!bisect(1e-14 * (1 + std::abs(a)))) {
        out.lost = true;
        out.note = "initial bracket does not straddle the boundary";
        return out;
    }

    PairState st{a, b};
    double t = 0;
    Complex m = 0.5 * (st.a + st.b);
    double dt = std::clamp(0.01 * (1 + std::abs(m)) / (1 + std::abs(f.eval(m))), 1e-12, 1.0);
    EscapeEpisode episode;
    double rho0 = std::max({2.0 * opt.trace.window_radius, 2.0 * std::abs(m), 1.0});
    double next_threshold = rho0;
    double split_radius = 0.6 * opt.trace.escape_radius;

    out.samples.push_back({0, m});
    double prev_abs = std::abs(m);
    double prev_t = 0;

    std::size_t steps = 0;
    while (t < opt.trace.t_max && steps < opt.trace.max_steps) {
        ++steps;
        if (!episode.times.empty() || std::abs(m) >= next_threshold) {
            double fm = std::abs(f.eval(m));
            if (fm > 0) dt = std::min(dt, opt.trace.blow_up_step_factor * std::abs(m) / fm);
        }
        double h = pair_step(f, dir, st, dt, opt.trace.rtol);
        if (h == 0) {
            episode.overflow = true;
            break;
        }
        t += h;
        m = 0.5 * (st.a + st.b);
        if (out.samples.size() < 200000) out.samples.push_back({t, m});

        double cur_abs = std::abs(m);
        while (cur_abs >= next_threshold) {
            double tc = t;
            if (cur_abs != prev_abs && prev_abs < next_threshold)
                tc = prev_t + (t - prev_t) * (next_threshold - prev_abs) / (cur_abs - prev_abs);
            episode.radii.push_back(next_threshold);
            episode.times.push_back(tc);
            next_threshold *= 2;
        }
        prev_abs = cur_abs;
        prev_t = t;

        // capture: the boundary orbit ends at an equilibrium
        for (const auto& e : eqs) {
            if (std::abs(m - e.location) < 1e-7 * (1 + std::abs(e.location))) {
                out.note = "boundary orbit reaches an equilibrium";
                auto est = detect_blow_up(episode);
                if (est) {
                    out.t_star = est->t_star;
                    out.error = est->error;
                }
                return out;
            }
        }

        if (cur_abs >= split_radius || cur_abs >= opt.trace.extrap_radius) {
            // hand off to a single-midpoint trace: from here the relative
            // bracket width keeps the shadow on the orbit past the
            // extrapolation radius for polynomial growth
            IntegrationControls c = opt.trace;
            c.t_max = opt.trace.t_max - t;
            c.record_samples = true;
            OrbitTrace cont = integrate(f, m, dir, c, eqs);
            const Fate& fate =
                dir == Direction::Forward ? cont.forward_fate : cont.backward_fate;
            const EscapeEpisode& ep =
                dir == Direction::Forward ? cont.forward_episode : cont.backward_episode;
            for (const auto& s : cont.samples) {
                if (out.samples.size() >= 400000) break;
                double elapsed = std::abs(s.t);
                if (elapsed == 0) continue;
                out.samples.push_back({t + elapsed, s.z});
            }
            SideCertificate cert = certify_side(fate, ep);
            if (cert.t_star) {
                out.t_star = t + *cert.t_star;
                out.error = cert.error;
            } else if (auto est = detect_blow_up(episode)) {
                out.t_star = est->t_star;
                out.error = est->error;
            } else {
                out.note = "handoff trace did not certify a blow-up";
            }
            return out;
        }

        if (std::abs(st.a - st.b) > 1e-9 * (1 + cur_abs)) {
            a = st.a;
            b = st.b;
            if (!bisect(1e-14 * (1 + cur_abs))) {
                out.lost = true;
                out.note = "straddle lost at |z|=" + std::to_string(cur_abs);
                auto est = detect_blow_up(episode);
                if (est) {
                    out.t_star = est->t_star;
                    out.error = est->error;
                    out.lost = false;
                }
                return out;
            }
            st = {a, b};
            m = 0.5 * (a + b);
        }
    }

    if (auto est = detect_blow_up(episode)) {
        out.t_star = est->t_star;
        out.error = est->error;
    } else {
        out.note = episode.overflow ? "field overflow without certification"
                                    : "budget exhausted without certification";
    }
    return out;
}

SeparatrixRecord make_record(const FieldExpr& f, Complex seed, OrbitTrace&& orbit) {
    (void)f;
    SeparatrixRecord rec;
    rec.seed = seed;
    rec.orbit = std::move(orbit);
    SideCertificate fwd = certify_side(rec.orbit.forward_fate, rec.orbit.forward_episode);
    SideCertificate bwd = certify_side(rec.orbit.backward_fate, rec.orbit.backward_episode);
    if (fwd.t_star) {
        rec.t_plus_star = *fwd.t_star;
        rec.forward_shadow = fwd.shadow;
    }
    if (bwd.t_star) {
        rec.t_minus_star = -*bwd.t_star;
        rec.backward_shadow = bwd.shadow;
    }
    if (!rec.t_plus_star && rec.orbit.forward_fate.kind == Fate::Kind::ConvergesTo)
        rec.attached_forward = rec.orbit.forward_fate.equilibrium;
    if (!rec.t_minus_star && rec.orbit.backward_fate.kind == Fate::Kind::ConvergesTo)
        rec.attached_backward = rec.orbit.backward_fate.equilibrium;
    return rec;
}

void finalize_side(SeparatrixRecord& rec) {
    if (rec.t_plus_star && rec.t_minus_star) {
        rec.side = Side::Double;
        rec.transit_time = *rec.t_plus_star - *rec.t_minus_star;
    } else if (rec.t_plus_star) {
        rec.side = Side::Positive;
    } else if (rec.t_minus_star) {
        rec.side = Side::Negative;
    } else {
        bool fdef = rec.orbit.forward_fate.kind == Fate::Kind::ConvergesTo ||
                    rec.orbit.forward_fate.kind == Fate::Kind::PeriodicAround;
        bool bdef = rec.orbit.backward_fate.kind == Fate::Kind::ConvergesTo ||
                    rec.orbit.backward_fate.kind == Fate::Kind::PeriodicAround;
        rec.side = (fdef && bdef) ? Side::None : Side::Undetermined;
    }
    rec.note = "fwd " + to_string(rec.orbit.forward_fate) + "; bwd " +
               to_string(rec.orbit.backward_fate);
}

}  // namespace

const char* to_string(Side s) {
    switch (s) {
        case Side::Positive: return "positive";
        case Side::Negative: return "negative";
        case Side::Double: return "double";
        case Side::None: return "none";
        case Side::Undetermined: return "undetermined";
    }
    return "?";
}

const char* to_string(ComponentType t) {
    switch (t) {
        case ComponentType::SingleOrbit: return "(i)";
        case ComponentType::SingleEquilibrium: return "(ii)";
        case ComponentType::EquilibriumOneOrbit: return "(iii)";
        case ComponentType::EquilibriumTwoOrbits: return "(iv)";
    }
    return "?";
}

const char* node_focus_tag(ComponentType t) {
    switch (t) {
        case ComponentType::SingleOrbit: return "(A)";
        case ComponentType::EquilibriumOneOrbit: return "(B)";
        case ComponentType::EquilibriumTwoOrbits: return "(C)";
        default: return "-";
    }
}

const char* to_string(RegionKind k) {
    switch (k) {
        case RegionKind::CenterBasin: return "CenterBasin";
        case RegionKind::NodeFocusBasin: return "NodeFocusBasin";
        case RegionKind::EllipticSector: return "EllipticSector";
    }
    return "?";
}

CellInfo classify_point(const FieldExpr& f, const Equilibrium& target,
                        std::span<const Equilibrium> equilibria, Complex z,
                        const SeparatrixOptions& opt) {
    CellInfo info;
    IntegrationControls c = opt.cell;
    try {
        switch (target.cls) {
            case EqClass::Center: {
                OrbitTrace tr = integrate(f, z, Direction::Forward, c, equilibria);
                const Fate& fate = tr.forward_fate;
                if (fate.kind == Fate::Kind::PeriodicAround && fate.equilibrium == target.id) {
                    info.label = CellLabel::InBasin;
                    info.eq = static_cast<std::int16_t>(target.id);
                } else if (budget_limited(fate)) {
                    info.label = CellLabel::Unresolved;
                } else {
                    info.label = CellLabel::Outside;
                }
                break;
            }
            case EqClass::StableNode:
            case EqClass::UnstableNode:
            case EqClass::StableFocus:
            case EqClass::UnstableFocus: {
                Direction dir = target.stable() ? Direction::Forward : Direction::Backward;
                OrbitTrace tr = integrate(f, z, dir, c, equilibria);
                const Fate& fate = target.stable() ? tr.forward_fate : tr.backward_fate;
                if (fate.converges_to(target.id)) {
                    info.label = CellLabel::InBasin;
                    info.eq = static_cast<std::int16_t>(target.id);
                } else if (budget_limited(fate)) {
                    info.label = CellLabel::Unresolved;
                } else {
                    info.label = CellLabel::Outside;
                }
                break;
            }
            case EqClass::Multiple: {
                IntegrationControls cc = c;
                cc.record_samples = true;  // farthest point attributes the sector
                OrbitTrace tr = trace_orbit(f, z, cc, equilibria);
                bool fwd = tr.forward_fate.converges_to(target.id);
                bool bwd = tr.backward_fate.converges_to(target.id);
                if (fwd && bwd) {
                    info.label = CellLabel::InSector;
                    info.eq = static_cast<std::int16_t>(target.id);
                    double th = farthest_angle(tr, target.location);
                    info.sector = static_cast<std::int16_t>(
                        sector_of_angle(th, *target.sector_directions));
                } else if ((!fwd && definite_fate(tr.forward_fate)) ||
                           (!bwd && definite_fate(tr.backward_fate))) {
                    info.label = CellLabel::Outside;
                } else {
                    info.label = CellLabel::Unresolved;
                }
                break;
            }
        }
    } catch (const StartAtEquilibrium&) {
        info.label = CellLabel::EquilibriumCell;
    }
    return info;
}

BasinGrid compute_basin(const FieldExpr& f, const Equilibrium& target,
                        std::span<const Equilibrium> equilibria, Window window,
                        int nx, int ny, const SeparatrixOptions& opt_in) {
    if (nx < 4 || ny < 4) throw Error("grid resolution too small");
    BasinGrid grid;
    grid.window = window;
    grid.nx = nx;
    grid.ny = ny;
    grid.cells.assign(static_cast<std::size_t>(nx) * ny, CellInfo{});

    SeparatrixOptions opt = opt_in;
    if (opt.cell.escape_radius <= 0) opt.cell.escape_radius = 1e3 * window.diameter();
    opt.cell.window_radius = window_radius_of(window);

    double eq_radius = 0.75 * std::hypot(grid.cell_w(), grid.cell_h());

    parallel_for(grid.cells.size(), [&](std::size_t idx) {
        int iy = static_cast<int>(idx) / nx;
        int ix = static_cast<int>(idx) % nx;
        Complex z = grid.cell_center(ix, iy);
        for (const auto& e : equilibria) {
            if (std::abs(z - e.location) < eq_radius) {
                grid.cells[idx].label = CellLabel::EquilibriumCell;
                grid.cells[idx].eq = static_cast<std::int16_t>(e.id);
                return;
            }
        }
        grid.cells[idx] = classify_point(f, target, equilibria, z, opt);
    }, opt.threads);
    return grid;
}

BoundaryExtraction extract_boundary(const FieldExpr& f, const Equilibrium& target,
                                    std::span<const Equilibrium> equilibria,
                                    const BasinGrid& grid, int sector,
                                    const SeparatrixOptions& opt_in) {
    SeparatrixOptions opt = opt_in;
    if (opt.cell.escape_radius <= 0) opt.cell.escape_radius = 1e3 * grid.window.diameter();
    opt.cell.window_radius = window_radius_of(grid.window);

    struct Pair {
        Complex in, out;
    };
    std::vector<Pair> pairs;
    bool any_in = false;
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const CellInfo& c = grid.at(ix, iy);
            bool in = matches_region(c, target, sector);
            any_in = any_in || in;
            const int dx[2] = {1, 0}, dy[2] = {0, 1};
            for (int d = 0; d < 2; ++d) {
                int jx = ix + dx[d], jy = iy + dy[d];
                if (jx >= grid.nx || jy >= grid.ny) continue;
                const CellInfo& n = grid.at(jx, jy);
                bool n_in = matches_region(n, target, sector);
                if (in && usable_outside(n, target, sector))
                    pairs.push_back({grid.cell_center(ix, iy), grid.cell_center(jx, jy)});
                else if (n_in && usable_outside(c, target, sector))
                    pairs.push_back({grid.cell_center(jx, jy), grid.cell_center(ix, iy)});
            }
        }
    }

    BoundaryExtraction out;
    if (pairs.empty()) {
        out.empty_boundary = any_in;  // region fills the window: report, not error
        return out;
    }

    std::size_t stride = std::max<std::size_t>(1, pairs.size() / opt.max_seeds);
    std::vector<Pair> chosen;
    for (std::size_t k = 0; k < pairs.size(); k += stride) chosen.push_back(pairs[k]);

    std::vector<std::optional<BoundarySeed>> refined(chosen.size());
    parallel_for(chosen.size(), [&](std::size_t k) {
        Complex a = chosen[k].in, b = chosen[k].out;
        while (std::abs(b - a) > opt.seed_spatial_tol) {
            Complex mid = 0.5 * (a + b);
            CellInfo c = classify_point(f, target, equilibria, mid, opt);
            if (matches_region(c, target, sector)) a = mid;
            else b = mid;
        }
        // a degenerate bracket that never actually crossed the boundary is
        // dropped (both endpoints in the region)
        CellInfo outside = classify_point(f, target, equilibria, b, opt);
        if (matches_region(outside, target, sector)) return;
        refined[k] = BoundarySeed{0.5 * (a + b), a, b, sector};
    }, opt.threads);
    for (auto& s : refined)
        if (s) out.seeds.push_back(*s);
    return out;
}

double distance_to_polyline(Complex p, const OrbitTrace& trace, const Window& window) {
    double best = std::numeric_limits<double>::infinity();
    const auto& s = trace.samples;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        if (!window.contains(s[k].z) || !window.contains(s[k + 1].z)) continue;
        Complex a = s[k].z, d = s[k + 1].z - s[k].z;
        double len2 = std::norm(d);
        double u = len2 == 0 ? 0.0 : std::clamp((std::conj(d) * (p - a)).real() / len2, 0.0, 1.0);
        best = std::min(best, std::abs(p - (a + u * d)));
    }
    return best;
}

namespace {

// chord sagitta of the sampled polyline can exceed the dedupe tolerance;
// candidate segments are re-measured on the Hermite dense output
double orbit_distance(const FieldExpr& f, Complex p, const OrbitTrace& trace,
                      const Window& window, double coarse_gate) {
    double best = std::numeric_limits<double>::infinity();
    const auto& s = trace.samples;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        if (!window.contains(s[k].z) || !window.contains(s[k + 1].z)) continue;
        Complex a = s[k].z, d = s[k + 1].z - s[k].z;
        double len2 = std::norm(d);
        double u = len2 == 0 ? 0.0 : std::clamp((std::conj(d) * (p - a)).real() / len2, 0.0, 1.0);
        double coarse = std::abs(p - (a + u * d));
        if (coarse > coarse_gate) {
            best = std::min(best, coarse);
            continue;
        }
        double h = s[k + 1].t - s[k].t;
        Complex fa = f.eval(s[k].z), fb = f.eval(s[k + 1].z);
        for (int j = 0; j <= 8; ++j) {
            double ss = j / 8.0, s2 = ss * ss, s3 = s2 * ss;
            Complex zh = (2 * s3 - 3 * s2 + 1) * s[k].z + (s3 - 2 * s2 + ss) * h * fa +
                         (-2 * s3 + 3 * s2) * s[k + 1].z + (s3 - s2) * h * fb;
            best = std::min(best, std::abs(p - zh));
        }
    }
    return best;
}

}  // namespace

double sampled_hausdorff(const OrbitTrace& a, const OrbitTrace& b, const Window& window) {
    double h = 0;
    for (const auto& s : a.samples)
        if (window.contains(s.z)) h = std::max(h, distance_to_polyline(s.z, b, window));
    for (const auto& s : b.samples)
        if (window.contains(s.z)) h = std::max(h, distance_to_polyline(s.z, a, window));
    return h;
}

std::vector<SeparatrixRecord> trace_and_classify(const FieldExpr& f,
                                                 const Equilibrium& target,
                                                 std::span<const Equilibrium> equilibria,
                                                 std::span<const BoundarySeed> seeds,
                                                 const SeparatrixOptions& opt_in) {
    SeparatrixOptions opt = opt_in;
    opt.trace.record_samples = true;
    if (opt.cell.escape_radius <= 0 && opt.dedupe_window.valid())
        opt.cell.escape_radius = 1e3 * opt.dedupe_window.diameter();

    struct Work {
        SeparatrixRecord rec;
        BoundarySeed bs;
    };
    std::vector<Work> raw(seeds.size());

    parallel_for(seeds.size(), [&](std::size_t k) {
        BoundarySeed bs = seeds[k];
        // tighten the bracket so shadow orbits track the boundary orbit deep
        // into its escape before peeling off
        Complex a = bs.in_point, b = bs.out_point;
        while (std::abs(b - a) > opt.shadow_refine_tol * (1 + std::abs(a))) {
            Complex mid = 0.5 * (a + b);
            CellInfo c = classify_point(f, target, equilibria, mid, opt);
            if (matches_region(c, target, bs.sector)) a = mid;
            else b = mid;
        }
        bs.in_point = a;
        bs.out_point = b;
        bs.seed = 0.5 * (a + b);
        raw[k].rec = make_record(f, bs.seed, trace_orbit(f, bs.seed, opt.trace, equilibria));
        raw[k].bs = bs;
    }, opt.threads);

    // deduplicate: two seeds describe one orbit when one's trace passes within
    // dedupe_tol of the other's seed; proximity is tested inside the dedupe
    // window only, since distinct orbits can bunch together near infinity
    std::sort(raw.begin(), raw.end(), [](const Work& x, const Work& y) {
        return complex_less(x.rec.seed, y.rec.seed);
    });
    const Window& w = opt.dedupe_window;
    std::vector<Work> kept;
    auto quality = [](const SeparatrixRecord& r) {
        int q = 0;
        if (r.t_plus_star) q += r.forward_shadow ? 2 : 3;
        if (r.t_minus_star) q += r.backward_shadow ? 2 : 3;
        if (r.attached_forward >= 0 || r.attached_backward >= 0) q += 1;
        return q;
    };
    // both seeds must lie on the other's trace: a large shadow loop passes
    // legitimately close to the neighbouring separatrix, so a one-sided test
    // would merge distinct orbits
    for (auto& work : raw) {
        bool merged = false;
        for (auto& k : kept) {
            if (orbit_distance(f, work.rec.seed, k.rec.orbit, w, 100 * opt.dedupe_tol) <
                    opt.dedupe_tol &&
                orbit_distance(f, k.rec.seed, work.rec.orbit, w, 100 * opt.dedupe_tol) <
                    opt.dedupe_tol) {
                if (quality(work.rec) > quality(k.rec)) k = std::move(work);
                merged = true;
                break;
            }
        }
        if (!merged) kept.push_back(std::move(work));
    }

    // straddle the remaining uncertified sides that showed an escape episode
    parallel_for(kept.size(), [&](std::size_t k) {
        Work& work = kept[k];
        auto inside = [&](Complex z) {
            return matches_region(classify_point(f, target, equilibria, z, opt), target,
                                  work.bs.sector);
        };
        for (Direction dir : {Direction::Forward, Direction::Backward}) {
            bool fwd = dir == Direction::Forward;
            auto& cert = fwd ? work.rec.t_plus_star : work.rec.t_minus_star;
            const EscapeEpisode& ep =
                fwd ? work.rec.orbit.forward_episode : work.rec.orbit.backward_episode;
            if (cert || ep.times.empty()) continue;
            StraddleOutcome res = straddle_trace(f, equilibria, work.bs.in_point,
                                                 work.bs.out_point, dir, inside, opt);
            if (!res.t_star) continue;
            double signed_t = fwd ? *res.t_star : -*res.t_star;
            cert = signed_t;
            (fwd ? work.rec.forward_shadow : work.rec.backward_shadow) = true;
            Fate fate;
            fate.kind = Fate::Kind::BlowUp;
            fate.blow_up_time = signed_t;
            fate.error_estimate = res.error;
            // the straddled march is the best available path of the boundary
            // orbit: it replaces the peeled shadow on this side
            std::vector<TimePoint> merged;
            for (const auto& s : work.rec.orbit.samples)
                if (fwd ? s.t <= 0 : s.t >= 0) merged.push_back(s);
            for (const auto& s : res.samples) {
                if (s.t == 0) continue;
                merged.push_back({fwd ? s.t : -s.t, s.z});
            }
            std::sort(merged.begin(), merged.end(),
                      [](const TimePoint& x, const TimePoint& y) { return x.t < y.t; });
            work.rec.orbit.samples = std::move(merged);
            if (fwd) {
                work.rec.orbit.forward_fate = fate;
                work.rec.orbit.t_plus = signed_t;
            } else {
                work.rec.orbit.backward_fate = fate;
                work.rec.orbit.t_minus = signed_t;
            }
        }
    }, opt.threads);

    std::vector<SeparatrixRecord> records;
    records.reserve(kept.size());
    for (auto& work : kept) {
        finalize_side(work.rec);
        work.rec.id = static_cast<int>(records.size());
        records.push_back(std::move(work.rec));
    }
    return records;
}

std::vector<SeparatrixRecord> slit_search(const FieldExpr& f, const Equilibrium& target,
                                          std::span<const Equilibrium> equilibria,
                                          const BasinGrid& grid,
                                          const SeparatrixOptions& opt_in) {
    // Basin boundaries can be slits with the basin on both sides (the node
    // case x(x-1): the ray (1, oo)). Cell marching cannot see them, but every
    // such orbit is attached to an equilibrium on the boundary; orbits seeded
    // around that equilibrium separate into escape-direction families, and
    // the family edges are the slit orbits.
    std::vector<SeparatrixRecord> out;
    if (target.cls == EqClass::Center || target.cls == EqClass::Multiple) return out;

    SeparatrixOptions opt = opt_in;
    if (opt.cell.escape_radius <= 0) opt.cell.escape_radius = 1e3 * grid.window.diameter();
    opt.cell.window_radius = window_radius_of(grid.window);
    opt.trace.record_samples = true;

    Direction dir = target.stable() ? Direction::Forward : Direction::Backward;
    double probe_radius = std::min(0.25 * opt.cell.escape_radius,
                                   1e3 * (1 + std::abs(target.location)));

    for (const auto& b : equilibria) {
        if (b.id == target.id) continue;
        if (!grid.window.contains(b.location)) continue;
        int ix = static_cast<int>((b.location.real() - grid.window.xmin) / grid.cell_w());
        int iy = static_cast<int>((b.location.imag() - grid.window.ymin) / grid.cell_h());
        int in_cells = 0;
        for (int dy = -2; dy <= 2; ++dy)
            for (int dx = -2; dx <= 2; ++dx) {
                int jx = ix + dx, jy = iy + dy;
                if (jx < 0 || jy < 0 || jx >= grid.nx || jy >= grid.ny) continue;
                if (matches_region(grid.at(jx, jy), target, -1)) ++in_cells;
            }
        if (in_cells == 0) continue;

        double r = std::max(3.0 * std::hypot(grid.cell_w(), grid.cell_h()),
                            0.02 * (1 + std::abs(b.location)));

        // excursion size and escape direction of the ray orbit at angle theta
        IntegrationControls pc = opt.cell;
        pc.escape_radius = probe_radius;
        pc.extrap_radius = probe_radius;
        pc.t_max = std::min(pc.t_max, 200.0);
        pc.record_samples = true;
        pc.detect_periodic = false;
        struct Probe {
            double excursion = 0;
            bool blow_up = false;  // certified within the capped horizon
        };
        auto probe = [&](double theta) {
            Probe p;
            Complex seed = b.location + r * Complex{std::cos(theta), std::sin(theta)};
            try {
                OrbitTrace tr = integrate(f, seed, dir, pc, equilibria);
                for (const auto& s : tr.samples) p.excursion = std::max(p.excursion, std::abs(s.z));
                const Fate& fate = dir == Direction::Forward ? tr.forward_fate : tr.backward_fate;
                p.blow_up = fate.kind == Fate::Kind::BlowUp;
            } catch (const Error&) {
            }
            return p;
        };

        const int M = 256;
        std::vector<Probe> scan(M);
        parallel_for(M, [&](std::size_t j) { scan[j] = probe(kTwoPi * j / M); }, opt.threads);

        double peak_floor = 2.0 * opt.cell.window_radius;
        for (int j = 0; j < M; ++j) {
            int jp = (j + M - 1) % M, jn = (j + 1) % M;
            bool peak = scan[j].excursion >= peak_floor &&
                        scan[j].excursion >= scan[jp].excursion &&
                        scan[j].excursion > scan[jn].excursion;
            if (!peak) continue;
            pc.escape_radius = probe_radius;
            pc.extrap_radius = probe_radius;

            // phase A: ternary steps on the unimodal excursion until a probe
            // certifies a blow-up within the capped horizon (the slit
            // signature: nearby rays chase the slit orbit out to the cap with
            // contracting crossing times). Angles stay unwrapped so the
            // bracket never straddles the 0/2pi seam.
            double lo = kTwoPi * (j - 1) / M, hi = kTwoPi * (j + 1) / M;
            double theta_hit = kTwoPi * j / M;
            bool found = scan[j].blow_up;
            int guard = 0;
            while (!found && hi - lo > 1e-13 && guard++ < 200) {
                double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
                Probe p1 = probe(m1), p2 = probe(m2);
                if (p1.blow_up) {
                    found = true;
                    theta_hit = m1;
                    break;
                }
                if (p2.blow_up) {
                    found = true;
                    theta_hit = m2;
                    break;
                }
                if (p1.excursion < p2.excursion) lo = m1;
                else hi = m2;
            }
            if (!found) continue;

            // phase B: the blow-up interval around the slit is symmetric to
            // leading order and shrinks like 1/cap; bisect both edges, take
            // the midpoint, then raise the cap and repeat
            auto edge = [&](double inside, double outside) {
                int g = 0;
                while (std::abs(outside - inside) > 1e-13 && g++ < 100) {
                    double mid = 0.5 * (inside + outside);
                    if (probe(mid).blow_up) inside = mid;
                    else outside = mid;
                }
                return 0.5 * (inside + outside);
            };
            double left = lo, right = hi, theta = theta_hit;
            for (int stage = 0; stage < 7; ++stage) {
                // re-acquire a certified angle inside the current bracket
                double a = left, bnd = right;
                double hit = theta;
                bool ok = probe(hit).blow_up;
                int g = 0;
                while (!ok && bnd - a > 1e-13 && g++ < 80) {
                    double m1 = a + (bnd - a) / 3, m2 = bnd - (bnd - a) / 3;
                    Probe p1 = probe(m1), p2 = probe(m2);
                    if (p1.blow_up) { ok = true; hit = m1; break; }
                    if (p2.blow_up) { ok = true; hit = m2; break; }
                    if (p1.excursion < p2.excursion) a = m1;
                    else bnd = m2;
                }
                if (!ok) break;
                left = edge(hit, left);
                right = edge(hit, right);
                theta = 0.5 * (left + right);
                if (right - left < 1e-12) break;
                double next_cap = std::min(pc.escape_radius * 8, 0.5 * opt.trace.extrap_radius);
                if (next_cap == pc.escape_radius) break;
                pc.escape_radius = next_cap;
                pc.extrap_radius = next_cap;
            }
            Complex seed = b.location + r * Complex{std::cos(theta), std::sin(theta)};

            // keep only slits adjoining the target's basin
            bool adjoins = false;
            for (double off : {left - 1e-4, right + 1e-4}) {
                Complex p = b.location + r * Complex{std::cos(off), std::sin(off)};
                if (matches_region(classify_point(f, target, equilibria, p, opt), target, -1))
                    adjoins = true;
            }
            if (!adjoins) continue;

            SeparatrixRecord rec =
                make_record(f, seed, trace_orbit(f, seed, opt.trace, equilibria));
            finalize_side(rec);
            rec.note += "; slit anchored at equilibrium " + std::to_string(b.id);
            bool dup = false;
            for (const auto& prev : out)
                if (orbit_distance(f, rec.seed, prev.orbit, grid.window, 100 * opt.dedupe_tol) <
                        opt.dedupe_tol &&
                    orbit_distance(f, prev.seed, rec.orbit, grid.window, 100 * opt.dedupe_tol) <
                        opt.dedupe_tol)
                    dup = true;
            if (!dup) out.push_back(std::move(rec));
        }
    }
    return out;
}

std::vector<PathComponent> assemble_components(std::span<const SeparatrixRecord> records,
                                               std::span<const Equilibrium> equilibria,
                                               const Equilibrium& target, const BasinGrid& grid) {
    std::size_t R = records.size(), E = equilibria.size();
    std::vector<int> parent(R + E);
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&](int a, int b) { parent[find(a)] = find(b); };

    std::set<int> used_eqs;
    for (std::size_t i = 0; i < R; ++i) {
        const auto& r = records[i];
        // an orbit attached at both ends is bounded, hence not a boundary
        // orbit of these regions; such records are numerical artifacts and
        // stay out of the component graph
        if (r.attached_forward >= 0 && r.attached_backward >= 0) continue;
        for (int att : {r.attached_forward, r.attached_backward}) {
            if (att < 0) continue;
            unite(static_cast<int>(i), static_cast<int>(R + att));
            used_eqs.insert(att);
        }
    }

    // bare equilibria sitting on the region boundary (type (ii))
    for (const auto& e : equilibria) {
        if (e.id == target.id || used_eqs.count(e.id)) continue;
        if (!grid.window.contains(e.location)) continue;
        int ix = static_cast<int>((e.location.real() - grid.window.xmin) / grid.cell_w());
        int iy = static_cast<int>((e.location.imag() - grid.window.ymin) / grid.cell_h());
        bool any_in = false, any_out = false;
        for (int dy = -2; dy <= 2; ++dy)
            for (int dx = -2; dx <= 2; ++dx) {
                int jx = ix + dx, jy = iy + dy;
                if (jx < 0 || jy < 0 || jx >= grid.nx || jy >= grid.ny) continue;
                const CellInfo& c = grid.at(jx, jy);
                if ((c.label == CellLabel::InBasin || c.label == CellLabel::InSector) &&
                    c.eq == target.id)
                    any_in = true;
                else if (c.label == CellLabel::Outside)
                    any_out = true;
            }
        if (any_in && any_out) used_eqs.insert(e.id);
    }

    std::map<int, PathComponent> comps;
    for (std::size_t i = 0; i < R; ++i)
        comps[find(static_cast<int>(i))].record_ids.push_back(records[i].id);
    for (int e : used_eqs) comps[find(static_cast<int>(R + e))].equilibrium_ids.push_back(e);

    std::vector<PathComponent> out;
    for (auto& [root, comp] : comps) {
        std::size_t ne = comp.equilibrium_ids.size(), nr = comp.record_ids.size();
        if (ne > 1) throw MalformedComponent("component with more than one equilibrium");
        if (ne == 1 && nr > 2)
            throw MalformedComponent("more than two orbits attached to one equilibrium");
        if (ne == 0) comp.type = ComponentType::SingleOrbit;
        else if (nr == 0) comp.type = ComponentType::SingleEquilibrium;
        else if (nr == 1) comp.type = ComponentType::EquilibriumOneOrbit;
        else comp.type = ComponentType::EquilibriumTwoOrbits;
        out.push_back(std::move(comp));
    }
    std::sort(out.begin(), out.end(), [](const PathComponent& a, const PathComponent& b) {
        int ra = a.record_ids.empty() ? -1 : a.record_ids.front();
        int rb = b.record_ids.empty() ? -1 : b.record_ids.front();
        if (ra != rb) return ra < rb;
        int ea = a.equilibrium_ids.empty() ? -1 : a.equilibrium_ids.front();
        int eb = b.equilibrium_ids.empty() ? -1 : b.equilibrium_ids.front();
        return ea < eb;
    });
    return out;
}

std::vector<TheoremVerdict> verify_theorems(const ConfigurationReport& report) {
    std::vector<TheoremVerdict> out;
    const auto& recs = report.records;
    auto count_side = [&](Side s) {
        return static_cast<int>(std::count_if(
            recs.begin(), recs.end(), [&](const SeparatrixRecord& r) { return r.side == s; }));
    };

    switch (report.kind) {
        case RegionKind::CenterBasin: {
            TheoremVerdict v;
            v.name = "center-all-double-sided";
            v.measured = count_side(Side::Double);
            v.bound = static_cast<double>(recs.size());
            v.pass = v.measured == v.bound;
            v.detail = std::to_string(static_cast<int>(v.measured)) + "/" +
                       std::to_string(recs.size()) + " records double-sided";
            out.push_back(v);

            TheoremVerdict s;
            s.name = "center-transit-budget";
            double sum = 0;
            for (const auto& r : recs)
                if (r.transit_time) sum += *r.transit_time;
            s.measured = sum;
            s.bound = report.equilibrium.period ? *report.equilibrium.period : 0.0;
            s.pass = sum <= s.bound * (1 + 1e-3);
            s.detail = "sum of transit times vs period";
            out.push_back(s);
            break;
        }
        case RegionKind::NodeFocusBasin: {
            bool stable = report.equilibrium.stable();
            Side want = stable ? Side::Positive : Side::Negative;
            TheoremVerdict v;
            v.name = "node-focus-side-matches-stability";
            v.measured = count_side(want);
            v.bound = static_cast<double>(recs.size());
            v.pass = v.measured == v.bound;
            v.detail = std::string("all separatrices ") + to_string(want) + " for a " +
                       (stable ? "stable" : "unstable") + " equilibrium";
            out.push_back(v);

            TheoremVerdict o;
            o.name = "node-focus-no-opposite-blow-up";
            o.measured = count_side(Side::Double);
            o.bound = 0;
            o.pass = o.measured == 0;
            o.detail = "blow-up need not occur in both time directions";
            out.push_back(o);
            break;
        }
        case RegionKind::EllipticSector: {
            TheoremVerdict v;
            v.name = "sector-gamma-pair";
            const SeparatrixRecord* g1 = nullptr;
            const SeparatrixRecord* g2 = nullptr;
            for (const auto& r : recs) {
                if (r.id == report.gamma1) g1 = &r;
                if (r.id == report.gamma2) g2 = &r;
            }
            v.pass = g1 && g2 && g1->side == Side::Positive && g2->side == Side::Negative;
            v.measured = (g1 ? 1 : 0) + (g2 ? 1 : 0);
            v.bound = 2;
            v.detail = "gamma1 positive, gamma2 negative";
            out.push_back(v);

            TheoremVerdict c;
            c.name = "sector-others-double-sided";
            int others = 0, doubles = 0;
            for (const auto& r : recs) {
                if (r.id == report.gamma1 || r.id == report.gamma2) continue;
                ++others;
                if (r.side == Side::Double) ++doubles;
            }
            c.measured = doubles;
            c.bound = others;
            c.pass = doubles == others;
            c.detail = "remaining boundary orbits double-sided";
            out.push_back(c);
            break;
        }
    }
    return out;
}

std::vector<SectorPair> sector_pair(const FieldExpr& f, const Equilibrium& target,
                                    std::span<const Equilibrium> equilibria,
                                    const BasinGrid& grid,
                                    std::vector<SeparatrixRecord>& records,
                                    const SeparatrixOptions& opt_in, int only_sector) {
    if (target.cls != EqClass::Multiple || !target.sector_directions)
        throw NotMultiple("sector_pair requires a multiple equilibrium");
    SeparatrixOptions opt = opt_in;
    if (opt.cell.escape_radius <= 0) opt.cell.escape_radius = 1e3 * grid.window.diameter();
    opt.cell.window_radius = window_radius_of(grid.window);
    opt.trace.record_samples = true;

    const auto& dirs = *target.sector_directions;
    int n = static_cast<int>(dirs.size());

    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& e : equilibria)
        if (e.id != target.id) nearest = std::min(nearest, std::abs(e.location - target.location));
    double r_probe = std::min(std::isfinite(nearest) ? 0.2 * nearest : 1e30,
                              0.05 * grid.window.diameter());

    auto ray_has_sector_cells = [&](double d) {
        Complex u{std::cos(d), std::sin(d)};
        for (double r = r_probe; r < 0.5 * grid.window.diameter(); r *= 1.4) {
            Complex p = target.location + r * u;
            if (!grid.window.contains(p)) break;
            int ix = static_cast<int>((p.real() - grid.window.xmin) / grid.cell_w());
            int iy = static_cast<int>((p.imag() - grid.window.ymin) / grid.cell_h());
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int jx = ix + dx, jy = iy + dy;
                    if (jx < 0 || jy < 0 || jx >= grid.nx || jy >= grid.ny) continue;
                    const CellInfo& c = grid.at(jx, jy);
                    if (c.label == CellLabel::InSector && c.eq == target.id) return true;
                }
        }
        return false;
    };

    auto approach_angle = [&](const SeparatrixRecord& r, bool backward_end) {
        double best = std::numeric_limits<double>::infinity();
        Complex zb{};
        for (const auto& s : r.orbit.samples) {
            if (backward_end ? s.t > 0 : s.t < 0) continue;
            double d = std::abs(s.z - target.location);
            if (d > 1e-12 && d < best) {
                best = d;
                zb = s.z;
            }
        }
        double th = std::arg(zb - target.location);
        if (th < 0) th += kTwoPi;
        return th;
    };

    double gap = std::numbers::pi / (target.order - 1);
    auto angle_close = [&](double a, double b) {
        double d = std::fmod(std::abs(a - b), kTwoPi);
        d = std::min(d, kTwoPi - d);
        return d < 0.45 * gap;
    };

    auto find_record = [&](double direction, bool leaving) -> int {
        for (const auto& r : records) {
            if (leaving) {
                if (r.attached_backward == target.id &&
                    angle_close(approach_angle(r, true), direction))
                    return r.id;
            } else {
                if (r.attached_forward == target.id &&
                    angle_close(approach_angle(r, false), direction))
                    return r.id;
            }
        }
        return -1;
    };

    auto probe_ray = [&](double direction, bool leaving) -> int {
        Complex seed =
            target.location + r_probe * Complex{std::cos(direction), std::sin(direction)};
        SeparatrixRecord rec = make_record(f, seed, trace_orbit(f, seed, opt.trace, equilibria));
        finalize_side(rec);
        rec.note += "; ray probe";
        if (leaving && rec.attached_backward != target.id) return -1;
        if (!leaving && rec.attached_forward != target.id) return -1;
        rec.id = records.empty() ? 0 : records.back().id + 1;
        records.push_back(std::move(rec));
        return records.back().id;
    };

    std::vector<SectorPair> pairs;
    for (int k = 0; k < n; ++k) {
        if (only_sector >= 0 && k != only_sector) continue;
        double d_lo = dirs[k];
        double d_hi = k + 1 < n ? dirs[k + 1] : dirs[0] + kTwoPi;
        if (!ray_has_sector_cells(d_lo) && !ray_has_sector_cells(std::fmod(d_hi, kTwoPi)))
            throw SectorSeedFailure("no homoclinic cell adjoins the sector rays in the window");
        double d_leave, d_enter;
        if (ray_sign(target, d_lo) > 0) {
            d_leave = d_lo;
            d_enter = std::fmod(d_hi, kTwoPi);
        } else {
            d_leave = std::fmod(d_hi, kTwoPi);
            d_enter = d_lo;
        }
        SectorPair p;
        p.sector = k;
        p.gamma1 = find_record(d_leave, true);
        if (p.gamma1 < 0) p.gamma1 = probe_ray(d_leave, true);
        p.gamma2 = find_record(d_enter, false);
        if (p.gamma2 < 0) p.gamma2 = probe_ray(d_enter, false);
        pairs.push_back(p);
    }
    return pairs;
}

HeteroclinicProbe heteroclinic_region_probe(const FieldExpr& f,
                                            std::span<const Equilibrium> equilibria,
                                            int id_a, int id_b, Window window, int nx, int ny,
                                            const SeparatrixOptions& opt_in) {
    SeparatrixOptions opt = opt_in;
    if (opt.cell.escape_radius <= 0) opt.cell.escape_radius = 1e3 * window.diameter();
    opt.cell.window_radius = window_radius_of(window);

    const Equilibrium* ea = nullptr;
    const Equilibrium* eb = nullptr;
    for (const auto& e : equilibria) {
        if (e.id == id_a) ea = &e;
        if (e.id == id_b) eb = &e;
    }
    if (!ea || !eb) throw Error("heteroclinic probe needs both equilibria");
    if (id_a == id_b) {
        HeteroclinicProbe probe;
        probe.note = "no heteroclinic region between an equilibrium and itself";
        return probe;
    }

    struct CellFate {
        int fwd = -3, bwd = -3;  // equilibrium ids, -1 none, -2 undetermined
    };
    std::vector<CellFate> fates(static_cast<std::size_t>(nx) * ny);
    BasinGrid geom;
    geom.window = window;
    geom.nx = nx;
    geom.ny = ny;
    geom.cells.assign(fates.size(), CellInfo{});
    double eq_radius = 0.75 * std::hypot(geom.cell_w(), geom.cell_h());

    IntegrationControls cc = opt.cell;
    cc.record_samples = false;
    parallel_for(fates.size(), [&](std::size_t idx) {
        int iy = static_cast<int>(idx) / nx, ix = static_cast<int>(idx) % nx;
        Complex z = geom.cell_center(ix, iy);
        for (const auto& e : equilibria)
            if (std::abs(z - e.location) < eq_radius) return;
        try {
            OrbitTrace tr = trace_orbit(f, z, cc, equilibria);
            auto code = [](const Fate& ft) {
                if (ft.kind == Fate::Kind::ConvergesTo) return ft.equilibrium;
                if (ft.kind == Fate::Kind::Undetermined) return -2;
                return -1;
            };
            fates[idx] = {code(tr.forward_fate), code(tr.backward_fate)};
        } catch (const StartAtEquilibrium&) {
        }
    }, opt.threads);

    auto heteroclinic = [&](const CellFate& c) {
        return (c.bwd == id_a && c.fwd == id_b) || (c.bwd == id_b && c.fwd == id_a);
    };
    auto owned_by = [&](const CellFate& c, int id) { return c.fwd == id || c.bwd == id; };

    HeteroclinicProbe probe;
    for (const auto& c : fates)
        if (heteroclinic(c)) probe.hetero_cells_found = true;

    std::vector<std::pair<Complex, Complex>> pairs;
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            std::size_t idx = static_cast<std::size_t>(iy) * nx + ix;
            const int dx[2] = {1, 0}, dy[2] = {0, 1};
            for (int d = 0; d < 2; ++d) {
                int jx = ix + dx[d], jy = iy + dy[d];
                if (jx >= nx || jy >= ny) continue;
                std::size_t jdx = static_cast<std::size_t>(jy) * nx + jx;
                const CellFate& ci = fates[idx];
                const CellFate& cj = fates[jdx];
                if (ci.fwd == -3 || cj.fwd == -3 || ci.fwd == -2 || cj.fwd == -2 ||
                    ci.bwd == -2 || cj.bwd == -2)
                    continue;
                bool boundary;
                if (probe.hetero_cells_found)
                    boundary = heteroclinic(ci) != heteroclinic(cj);
                else
                    boundary = (owned_by(ci, id_a) && owned_by(cj, id_b)) ||
                               (owned_by(ci, id_b) && owned_by(cj, id_a));
                if (boundary)
                    pairs.push_back({geom.cell_center(ix, iy), geom.cell_center(jx, jy)});
            }
        }

    if (pairs.empty()) {
        probe.note = probe.hetero_cells_found ? "heteroclinic cells found but no boundary pairs"
                                              : "no heteroclinic cells between the pair";
        return probe;
    }

    std::size_t stride = std::max<std::size_t>(1, pairs.size() / opt.max_seeds);
    IntegrationControls tc = opt.trace;
    tc.record_samples = true;
    std::vector<SeparatrixRecord> raw;
    for (std::size_t k = 0; k < pairs.size(); k += stride) {
        Complex seed = 0.5 * (pairs[k].first + pairs[k].second);
        SeparatrixRecord rec = make_record(f, seed, trace_orbit(f, seed, tc, equilibria));
        finalize_side(rec);
        rec.note = "heteroclinic-region boundary (measurement only); " + rec.note;
        raw.push_back(std::move(rec));
    }

    std::vector<SeparatrixRecord> kept;
    for (auto& rec : raw) {
        bool merged = false;
        for (auto& k : kept)
            if (orbit_distance(f, rec.seed, k.orbit, window, 100 * opt.dedupe_tol) <
                    opt.dedupe_tol &&
                orbit_distance(f, k.seed, rec.orbit, window, 100 * opt.dedupe_tol) <
                    opt.dedupe_tol) {
                merged = true;
                break;
            }
        if (!merged) kept.push_back(std::move(rec));
    }
    for (std::size_t i = 0; i < kept.size(); ++i) kept[i].id = static_cast<int>(i);
    probe.records = std::move(kept);
    probe.note = probe.hetero_cells_found ? "boundary of the heteroclinic region"
                                          : "interface between the two regions";
    return probe;
}

}  // namespace holoflow
