#include "holoflow/analysis.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "holoflow/acceptance.hpp"
#include "holoflow/errors.hpp"
#include "holoflow/svg.hpp"
#include "holoflow/transit.hpp"

namespace holoflow {

// ---------------------------------------------------------------------------
// worker pool
// ---------------------------------------------------------------------------

int worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    int n = hw == 0 ? 4 : static_cast<int>(hw);
    if (const char* env = std::getenv("HOLOFLOW_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return std::max(1, n);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads) {
    if (n == 0) return;
    int workers = threads > 0 ? threads : worker_count();
    workers = static_cast<int>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto run = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers - 1; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

namespace {

double max_corner_abs(Window w) {
    double m = 0;
    m = std::max(m, std::abs(Complex{w.xmin, w.ymin}));
    m = std::max(m, std::abs(Complex{w.xmax, w.ymin}));
    m = std::max(m, std::abs(Complex{w.xmin, w.ymax}));
    m = std::max(m, std::abs(Complex{w.xmax, w.ymax}));
    return m;
}

SeparatrixOptions make_sep_options(const AnalyzeOptions& opt, Window w) {
    SeparatrixOptions s;
    s.threads = opt.threads;
    s.max_seeds = opt.max_seeds;
    s.dedupe_window = w;

    double esc = opt.escape_radius > 0 ? opt.escape_radius : 1e3 * w.diameter();
    s.cell.rtol = opt.rtol;
    s.cell.t_max = opt.cell_t_max;
    s.cell.max_steps = 60000;
    s.cell.escape_radius = esc;
    s.cell.extrap_radius = opt.extrap_radius;
    s.cell.window_radius = max_corner_abs(w);
    s.cell.record_samples = false;

    s.trace.rtol = opt.rtol;
    s.trace.t_max = opt.t_max;
    s.trace.escape_radius = esc;
    s.trace.extrap_radius = opt.extrap_radius;
    s.trace.window_radius = max_corner_abs(w);
    s.trace.record_samples = true;
    return s;
}

ConfigurationReport build_basin_report(const FieldExpr& f, const Equilibrium& eq,
                                       std::span<const Equilibrium> eqs, Window w,
                                       const AnalyzeOptions& opt, const SeparatrixOptions& sopt0) {
    SeparatrixOptions sopt = sopt0;
    if (eq.cls == EqClass::Center && eq.period)
        sopt.cell.t_max = std::min(sopt.cell.t_max, std::max(20.0, 6.0 * *eq.period));

    ConfigurationReport rep;
    rep.equilibrium = eq;
    rep.kind = eq.cls == EqClass::Center ? RegionKind::CenterBasin : RegionKind::NodeFocusBasin;
    rep.window = w;
    rep.field_source = f.source();
    rep.grid = compute_basin(f, eq, eqs, w, opt.nx, opt.ny, sopt);
    BoundaryExtraction ext = extract_boundary(f, eq, eqs, rep.grid, -1, sopt);
    rep.records = trace_and_classify(f, eq, eqs, ext.seeds, sopt);

    // slit boundaries (basin on both sides) are invisible to cell marching
    if (rep.kind == RegionKind::NodeFocusBasin) {
        auto slits = slit_search(f, eq, eqs, rep.grid, sopt);
        for (auto& s : slits) {
            bool merged = false;
            for (const auto& r : rep.records)
                if (distance_to_polyline(s.seed, r.orbit, w) < sopt.dedupe_tol &&
                    distance_to_polyline(r.seed, s.orbit, w) < sopt.dedupe_tol) {
                    merged = true;
                    break;
                }
            if (!merged) {
                s.id = static_cast<int>(rep.records.size());
                rep.records.push_back(std::move(s));
            }
        }
    }
    rep.empty_boundary = ext.empty_boundary && rep.records.empty();
    rep.components = assemble_components(rep.records, eqs, eq, rep.grid);
    rep.verdicts = verify_theorems(rep);
    return rep;
}

std::vector<ConfigurationReport> build_sector_reports(const FieldExpr& f, const Equilibrium& eq,
                                                      std::span<const Equilibrium> eqs, Window w,
                                                      const AnalyzeOptions& opt,
                                                      const SeparatrixOptions& sopt) {
    std::vector<ConfigurationReport> out;
    BasinGrid grid = compute_basin(f, eq, eqs, w, opt.nx, opt.ny, sopt);
    int nsec = 2 * eq.order - 2;
    for (int k = 0; k < nsec; ++k) {
        ConfigurationReport rep;
        rep.equilibrium = eq;
        rep.kind = RegionKind::EllipticSector;
        rep.sector_index = k;
        rep.window = w;
        rep.field_source = f.source();
        rep.grid = grid;
        BoundaryExtraction ext = extract_boundary(f, eq, eqs, grid, k, sopt);
        rep.empty_boundary = ext.empty_boundary;
        rep.records = trace_and_classify(f, eq, eqs, ext.seeds, sopt);
        auto pairs = sector_pair(f, eq, eqs, grid, rep.records, sopt, k);
        if (!pairs.empty()) {
            rep.gamma1 = pairs.front().gamma1;
            rep.gamma2 = pairs.front().gamma2;
        }
        rep.components = assemble_components(rep.records, eqs, eq, rep.grid);
        rep.verdicts = verify_theorems(rep);
        out.push_back(std::move(rep));
    }
    return out;
}

}  // namespace

AnalysisResult analyze(const FieldExpr& f, const AnalyzeOptions& opt) {
    AnalysisResult res;
    res.field = f;
    if (f.has_division())
        res.diagnostics.push_back(
            "expression contains a division: F is assumed entire, any poles are outside the "
            "supported class");

    Window w;
    if (opt.window) {
        w = *opt.window;
    } else {
        Window probe{-8, -8, 8, 8};
        auto eqs = find_equilibria(f, probe);
        if (eqs.empty()) {
            w = probe;
        } else {
            double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
            for (const auto& e : eqs) {
                xmin = std::min(xmin, e.location.real());
                xmax = std::max(xmax, e.location.real());
                ymin = std::min(ymin, e.location.imag());
                ymax = std::max(ymax, e.location.imag());
            }
            double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
            double hx = std::max(2.0 * (xmax - xmin), 3.0);
            double hy = std::max(2.0 * (ymax - ymin), 3.0);
            w = {cx - hx, cy - hy, cx + hx, cy + hy};
        }
    }
    if (!w.valid()) throw Error("analysis window is degenerate");
    res.window = w;
    res.equilibria = find_equilibria(f, w);

    SeparatrixOptions sopt = make_sep_options(opt, w);
    for (const auto& eq : res.equilibria) {
        if (eq.cls == EqClass::Multiple) {
            auto reps = build_sector_reports(f, eq, res.equilibria, w, opt, sopt);
            for (auto& r : reps) res.reports.push_back(std::move(r));
        } else {
            res.reports.push_back(build_basin_report(f, eq, res.equilibria, w, opt, sopt));
        }
    }
    return res;
}

Census census(const AnalysisResult& res, double dedupe_tol) {
    Census c;
    std::vector<const SeparatrixRecord*> unique;
    for (const auto& rep : res.reports) {
        for (const auto& rec : rep.records) {
            bool merged = false;
            for (const auto* u : unique) {
                if (distance_to_polyline(rec.seed, u->orbit, res.window) < dedupe_tol &&
                    distance_to_polyline(u->seed, rec.orbit, res.window) < dedupe_tol) {
                    merged = true;
                    break;
                }
            }
            if (!merged) unique.push_back(&rec);
        }
    }
    for (const auto* u : unique) {
        switch (u->side) {
            case Side::Positive: ++c.positive; break;
            case Side::Negative: ++c.negative; break;
            case Side::Double: ++c.double_sided; break;
            default: ++c.other; break;
        }
    }
    c.records = std::move(unique);
    c.unique = c.positive + c.negative + c.double_sided;
    return c;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

nlohmann::json complex_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

nlohmann::json window_json(Window w) {
    return {{"xmin", w.xmin}, {"ymin", w.ymin}, {"xmax", w.xmax}, {"ymax", w.ymax}};
}

nlohmann::json equilibrium_json(const Equilibrium& e) {
    nlohmann::json j;
    j["id"] = e.id;
    j["location"] = complex_json(e.location);
    j["order"] = e.order;
    j["class"] = to_string(e.cls);
    j["period"] = e.period ? nlohmann::json(*e.period) : nlohmann::json();
    j["sector_directions"] =
        e.sector_directions ? nlohmann::json(*e.sector_directions) : nlohmann::json();
    j["derivative_at"] = complex_json(e.derivative_at);
    j["leading_coefficient"] = complex_json(e.leading_coefficient);
    j["near_degenerate"] = e.near_degenerate;
    return j;
}

}  // namespace

nlohmann::json report_to_json(const ConfigurationReport& rep) {
    nlohmann::json j;
    j["field_source"] = rep.field_source;
    j["window"] = window_json(rep.window);
    j["equilibrium"] = equilibrium_json(rep.equilibrium);
    j["region_kind"] = to_string(rep.kind);
    if (rep.kind == RegionKind::EllipticSector) {
        j["sector_index"] = rep.sector_index;
        j["gamma1"] = rep.gamma1;
        j["gamma2"] = rep.gamma2;
    }
    j["empty_boundary"] = rep.empty_boundary;

    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : rep.components) {
        nlohmann::json cj;
        cj["type"] = to_string(c.type);
        if (rep.kind == RegionKind::NodeFocusBasin) cj["node_focus_tag"] = node_focus_tag(c.type);
        cj["orbit_ids"] = c.record_ids;
        cj["attached_equilibria"] = c.equilibrium_ids;
        comps.push_back(std::move(cj));
    }
    j["components"] = std::move(comps);

    nlohmann::json seps = nlohmann::json::array();
    for (const auto& r : rep.records) {
        nlohmann::json rj;
        rj["id"] = r.id;
        rj["side"] = to_string(r.side);
        rj["transit_time"] = r.transit_time ? nlohmann::json(*r.transit_time) : nlohmann::json();
        if (r.t_minus_star || r.t_plus_star) {
            rj["blow_up_times"] = nlohmann::json::array(
                {r.t_minus_star ? nlohmann::json(*r.t_minus_star) : nlohmann::json(),
                 r.t_plus_star ? nlohmann::json(*r.t_plus_star) : nlohmann::json()});
        } else {
            rj["blow_up_times"] = nlohmann::json();
        }
        rj["seed"] = complex_json(r.seed);
        rj["shadow_certified"] = nlohmann::json::array({r.backward_shadow, r.forward_shadow});
        rj["attached"] = nlohmann::json::array({r.attached_backward, r.attached_forward});
        rj["note"] = r.note;
        seps.push_back(std::move(rj));
    }
    j["separatrices"] = std::move(seps);

    nlohmann::json verds = nlohmann::json::array();
    for (const auto& v : rep.verdicts) {
        verds.push_back({{"name", v.name},
                         {"pass", v.pass},
                         {"measured", v.measured},
                         {"bound", v.bound},
                         {"detail", v.detail}});
    }
    j["theorem_verdicts"] = std::move(verds);
    return j;
}

nlohmann::json analysis_to_json(const AnalysisResult& res) {
    nlohmann::json j;
    j["field_source"] = res.field.source();
    j["window"] = window_json(res.window);
    nlohmann::json eqs = nlohmann::json::array();
    for (const auto& e : res.equilibria) eqs.push_back(equilibrium_json(e));
    j["equilibria"] = std::move(eqs);
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : res.reports) reps.push_back(report_to_json(r));
    j["reports"] = std::move(reps);
    j["diagnostics"] = res.diagnostics;
    return j;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

std::string substitute_parameter(const std::string& source, const std::string& name,
                                 double value) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "(%.17g)", value);
    std::string out;
    std::size_t i = 0;
    while (i < source.size()) {
        if (std::isalpha(static_cast<unsigned char>(source[i]))) {
            std::size_t j = i;
            while (j < source.size() && std::isalpha(static_cast<unsigned char>(source[j]))) ++j;
            std::string word = source.substr(i, j - i);
            out += (word == name) ? buf : word;
            i = j;
        } else {
            out += source[i++];
        }
    }
    return out;
}

nlohmann::json run_sweep(const std::string& source_template, const std::string& name,
                         std::span<const double> values, const AnalyzeOptions& opt,
                         std::vector<AnalysisResult>* keep_results) {
    nlohmann::json j;
    j["field_template"] = source_template;
    j["param"] = name;
    nlohmann::json vals = nlohmann::json::array();
    nlohmann::json changes = nlohmann::json::array();
    Census prev;
    bool have_prev = false;
    double prev_value = 0;
    for (double v : values) {
        FieldExpr f = FieldExpr::parse(substitute_parameter(source_template, name, v));
        AnalysisResult res = analyze(f, opt);
        Census c = census(res);
        nlohmann::json vj;
        vj["value"] = v;
        vj["separatrices"] = c.unique;
        vj["positive"] = c.positive;
        vj["negative"] = c.negative;
        vj["double_sided"] = c.double_sided;
        vj["undetermined"] = c.other;
        nlohmann::json dbl = nlohmann::json::array();
        for (const auto* r : c.records)
            if (r->side == Side::Double)
                dbl.push_back({{"seed", complex_json(r->seed)},
                               {"transit_time", r->transit_time ? nlohmann::json(*r->transit_time)
                                                                : nlohmann::json()}});
        vj["double_sided_records"] = std::move(dbl);
        vals.push_back(std::move(vj));

        if (have_prev && (prev.positive != c.positive || prev.negative != c.negative ||
                          prev.double_sided != c.double_sided)) {
            changes.push_back(
                {{"from_value", prev_value},
                 {"to_value", v},
                 {"before",
                  {{"positive", prev.positive}, {"negative", prev.negative},
                   {"double_sided", prev.double_sided}}},
                 {"after",
                  {{"positive", c.positive}, {"negative", c.negative},
                   {"double_sided", c.double_sided}}}});
        }
        prev = c;
        prev.records.clear();
        have_prev = true;
        prev_value = v;
        if (keep_results) keep_results->push_back(std::move(res));
    }
    j["values"] = std::move(vals);
    j["changes"] = std::move(changes);
    return j;
}

// ---------------------------------------------------------------------------
// CLI front end
// ---------------------------------------------------------------------------

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path dir = target.parent_path();
    if (dir.empty()) dir = ".";
    fs::path tmp = dir / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string());
        out << contents;
    }
    fs::rename(tmp, target);
}

namespace {

int run_orbit(const RunConfig& cfg) {
    FieldExpr f = FieldExpr::parse(cfg.field_source);
    Window w = cfg.options.window ? *cfg.options.window : Window{-8, -8, 8, 8};
    std::vector<Equilibrium> eqs;
    try {
        eqs = find_equilibria(f, w);
    } catch (const Error&) {
        // orbit integration works without the equilibria context
    }
    IntegrationControls c;
    c.rtol = cfg.options.rtol;
    c.t_max = cfg.options.t_max;
    c.escape_radius =
        cfg.options.escape_radius > 0 ? cfg.options.escape_radius : 1e3 * w.diameter();
    c.extrap_radius = cfg.options.extrap_radius;
    c.window_radius = max_corner_abs(w);

    OrbitTrace tr;
    if (cfg.direction == "forward")
        tr = integrate(f, cfg.from, Direction::Forward, c, eqs);
    else if (cfg.direction == "backward")
        tr = integrate(f, cfg.from, Direction::Backward, c, eqs);
    else
        tr = trace_orbit(f, cfg.from, c, eqs);

    std::cout << "orbit from " << cfg.from.real() << (cfg.from.imag() < 0 ? "-" : "+")
              << std::abs(cfg.from.imag()) << "i\n";
    if (cfg.direction != "backward") std::cout << "  forward:  " << to_string(tr.forward_fate) << "\n";
    if (cfg.direction != "forward") std::cout << "  backward: " << to_string(tr.backward_fate) << "\n";

    if (!cfg.csv_path.empty()) write_file_atomic(cfg.csv_path, orbit_csv(tr));
    if (!cfg.json_path.empty()) {
        nlohmann::json j;
        j["field_source"] = cfg.field_source;
        j["from"] = complex_json(cfg.from);
        j["forward_fate"] = to_string(tr.forward_fate);
        j["backward_fate"] = to_string(tr.backward_fate);
        j["t_plus"] = std::isfinite(tr.t_plus) ? nlohmann::json(tr.t_plus) : nlohmann::json();
        j["t_minus"] = std::isfinite(tr.t_minus) ? nlohmann::json(tr.t_minus) : nlohmann::json();
        write_file_atomic(cfg.json_path, j.dump(2) + "\n");
    }
    return 0;
}

int run_transit(const RunConfig& cfg) {
    FieldExpr f = FieldExpr::parse(cfg.field_source);
    nlohmann::json j;
    j["field_source"] = cfg.field_source;
    if (!cfg.polyline.empty()) {
        TransitResult r = contour_integral_reciprocal(f, cfg.polyline);
        j["method"] = "contour";
        j["value"] = complex_json(r.value);
        j["error_estimate"] = r.error_estimate;
        std::cout << "contour integral of 1/F: " << r.value.real() << " + " << r.value.imag()
                  << "i (err " << r.error_estimate << ")\n";
    } else if (cfg.have_clock_interval) {
        Window w = cfg.options.window ? *cfg.options.window : Window{-8, -8, 8, 8};
        std::vector<Equilibrium> eqs;
        try {
            eqs = find_equilibria(f, w);
        } catch (const Error&) {
        }
        IntegrationControls c;
        c.rtol = cfg.options.rtol;
        c.t_max = cfg.options.t_max;
        c.escape_radius =
            cfg.options.escape_radius > 0 ? cfg.options.escape_radius : 1e3 * w.diameter();
        c.window_radius = max_corner_abs(w);
        OrbitTrace tr = trace_orbit(f, cfg.from, c, eqs);
        TransitResult clock = transit_time_clock(tr, cfg.t1, cfg.t2);
        double residual = clock_contour_check(f, tr, cfg.t1, cfg.t2);
        j["method"] = "clock";
        j["value"] = complex_json(clock.value);
        j["clock_contour_residual"] = residual;
        std::cout << "clock transit " << clock.value.real() << ", clock-contour residual "
                  << residual << "\n";
    } else {
        throw Error("transit needs --polyline or --from with --t1/--t2");
    }
    if (!cfg.json_path.empty()) write_file_atomic(cfg.json_path, j.dump(2) + "\n");
    return 0;
}

}  // namespace

int run(const RunConfig& cfg) {
    try {
        switch (cfg.subcommand) {
            case Subcommand::Equilibria: {
                FieldExpr f = FieldExpr::parse(cfg.field_source);
                Window w = cfg.options.window ? *cfg.options.window : Window{-8, -8, 8, 8};
                auto eqs = find_equilibria(f, w);
                for (const auto& e : eqs) {
                    std::printf("#%d  (%.12g, %.12g)  order %d  %s", e.id, e.location.real(),
                                e.location.imag(), e.order, to_string(e.cls));
                    if (e.period) std::printf("  T=%.12g", *e.period);
                    if (e.near_degenerate) std::printf("  [near-degenerate]");
                    std::printf("\n");
                }
                if (!cfg.json_path.empty()) {
                    nlohmann::json j;
                    j["field_source"] = cfg.field_source;
                    j["window"] = window_json(w);
                    nlohmann::json arr = nlohmann::json::array();
                    for (const auto& e : eqs) arr.push_back(equilibrium_json(e));
                    j["equilibria"] = std::move(arr);
                    write_file_atomic(cfg.json_path, j.dump(2) + "\n");
                }
                return 0;
            }
            case Subcommand::Orbit: return run_orbit(cfg);
            case Subcommand::Transit: return run_transit(cfg);
            case Subcommand::Portrait:
            case Subcommand::Separatrices: {
                FieldExpr f = FieldExpr::parse(cfg.field_source);
                AnalysisResult res = analyze(f, cfg.options);
                for (const auto& d : res.diagnostics) std::cerr << "warning: " << d << "\n";
                int failed = 0;
                for (const auto& rep : res.reports) {
                    std::printf("%s at (%.9g, %.9g)%s: %zu separatrix record(s)\n",
                                to_string(rep.kind), rep.equilibrium.location.real(),
                                rep.equilibrium.location.imag(),
                                rep.kind == RegionKind::EllipticSector
                                    ? (" sector " + std::to_string(rep.sector_index)).c_str()
                                    : "",
                                rep.records.size());
                    for (const auto& v : rep.verdicts) {
                        std::printf("  [%s] %s (measured %.12g, bound %.12g)\n",
                                    v.pass ? "pass" : "FAIL", v.name.c_str(), v.measured, v.bound);
                        if (!v.pass) ++failed;
                    }
                }
                if (!cfg.json_path.empty())
                    write_file_atomic(cfg.json_path, analysis_to_json(res).dump(2) + "\n");
                if (!cfg.svg_path.empty()) write_file_atomic(cfg.svg_path, render_svg(res));
                if (cfg.strict && failed > 0) return 3;
                return 0;
            }
            case Subcommand::Sweep: {
                if (cfg.param_name.empty()) throw Error("sweep needs --param NAME=v1,v2,...");
                nlohmann::json j =
                    run_sweep(cfg.field_source, cfg.param_name, cfg.param_values, cfg.options);
                for (const auto& v : j["values"]) {
                    std::printf("%s=%.12g: %d separatrices (%d positive, %d negative, %d double)\n",
                                cfg.param_name.c_str(), v["value"].get<double>(),
                                v["separatrices"].get<int>(), v["positive"].get<int>(),
                                v["negative"].get<int>(), v["double_sided"].get<int>());
                }
                std::printf("%zu configuration change(s) across the sweep\n",
                            j["changes"].size());
                if (!cfg.json_path.empty()) write_file_atomic(cfg.json_path, j.dump(2) + "\n");
                return 0;
            }
            case Subcommand::Verify: {
                auto results = run_acceptance();
                int failed = 0;
                for (const auto& r : results) {
                    std::printf("[%s] %2d  %-34s %s\n", r.pass ? "PASS" : "FAIL", r.index,
                                r.name.c_str(), r.detail.c_str());
                    if (!r.pass) ++failed;
                }
                std::printf("%zu criteria, %d failed\n", results.size(), failed);
                if (cfg.strict && failed > 0) return 3;
                return 0;
            }
        }
    } catch (const SyntaxError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const UnknownIdentifier& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace holoflow
