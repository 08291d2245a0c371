#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "holoflow/acceptance.hpp"
#include "holoflow/analysis.hpp"
#include "holoflow/svg.hpp"
#include "holoflow/transit.hpp"

namespace py = pybind11;
using namespace holoflow;

namespace {

Window window_from(const std::vector<double>& v) {
    if (v.size() != 4) throw Error("window wants [xmin, ymin, xmax, ymax]");
    Window w{v[0], v[1], v[2], v[3]};
    if (!w.valid()) throw Error("window is degenerate");
    return w;
}

py::dict equilibrium_dict(const Equilibrium& e) {
    py::dict d;
    d["id"] = e.id;
    d["location"] = Complex(e.location);
    d["order"] = e.order;
    d["class"] = std::string(to_string(e.cls));
    if (e.period) d["period"] = *e.period;
    else d["period"] = py::none();
    if (e.sector_directions) d["sector_directions"] = *e.sector_directions;
    else d["sector_directions"] = py::none();
    d["derivative_at"] = Complex(e.derivative_at);
    d["leading_coefficient"] = Complex(e.leading_coefficient);
    d["near_degenerate"] = e.near_degenerate;
    return d;
}

py::dict fate_dict(const Fate& f) {
    py::dict d;
    d["kind"] = to_string(f);
    switch (f.kind) {
        case Fate::Kind::ConvergesTo: d["equilibrium"] = f.equilibrium; break;
        case Fate::Kind::PeriodicAround:
            d["equilibrium"] = f.equilibrium;
            d["period"] = f.period;
            break;
        case Fate::Kind::BlowUp:
            d["t_star"] = f.blow_up_time;
            d["error"] = f.error_estimate;
            break;
        case Fate::Kind::Undetermined: d["reason"] = f.reason; break;
        default: break;
    }
    return d;
}

IntegrationControls controls_from(double rtol, double t_max, double escape_radius,
                                  double window_radius) {
    IntegrationControls c;
    c.rtol = rtol;
    c.t_max = t_max;
    if (escape_radius > 0) c.escape_radius = escape_radius;
    c.window_radius = window_radius;
    return c;
}

}  // namespace

PYBIND11_MODULE(_holoflow, m) {
    m.doc() = "holomorphic flow analysis: equilibria, transit times, blow-up detection, "
              "separatrix configurations";

    py::register_exception<Error>(m, "HoloflowError");

    py::class_<FieldExpr>(m, "FieldExpr")
        .def(py::init([](const std::string& src) { return FieldExpr::parse(src); }),
             py::arg("source"))
        .def("__call__", [](const FieldExpr& f, Complex z) { return f.eval(z); })
        .def("eval", [](const FieldExpr& f, Complex z) { return f.eval(z); })
        .def("derivative", [](const FieldExpr& f, int k) { return f.derivative(k); },
             py::arg("k") = 1)
        .def("__str__", &FieldExpr::str)
        .def_property_readonly("source", &FieldExpr::source)
        .def_property_readonly("has_division", &FieldExpr::has_division)
        .def("negated", &FieldExpr::negated);

    m.def(
        "find_equilibria",
        [](const std::string& source, const std::vector<double>& window) {
            FieldExpr f = FieldExpr::parse(source);
            auto eqs = find_equilibria(f, window_from(window));
            py::list out;
            for (const auto& e : eqs) out.append(equilibrium_dict(e));
            return out;
        },
        py::arg("source"), py::arg("window"));

    m.def(
        "integrate_orbit",
        [](const std::string& source, Complex z0, const std::string& direction,
           const std::vector<double>& window, double rtol, double t_max, double escape_radius,
           bool keep_samples) {
            FieldExpr f = FieldExpr::parse(source);
            Window w = window_from(window);
            std::vector<Equilibrium> eqs;
            try {
                eqs = find_equilibria(f, w);
            } catch (const Error&) {
            }
            double wr = std::max({std::abs(Complex{w.xmin, w.ymin}),
                                  std::abs(Complex{w.xmax, w.ymax}),
                                  std::abs(Complex{w.xmin, w.ymax}),
                                  std::abs(Complex{w.xmax, w.ymin})});
            IntegrationControls c = controls_from(rtol, t_max, escape_radius, wr);
            if (c.escape_radius == 1e3) c.escape_radius = 1e3 * w.diameter();
            OrbitTrace tr;
            if (direction == "forward") tr = integrate(f, z0, Direction::Forward, c, eqs);
            else if (direction == "backward") tr = integrate(f, z0, Direction::Backward, c, eqs);
            else tr = trace_orbit(f, z0, c, eqs);
            py::dict d;
            d["forward_fate"] = fate_dict(tr.forward_fate);
            d["backward_fate"] = fate_dict(tr.backward_fate);
            d["t_plus"] = tr.t_plus;
            d["t_minus"] = tr.t_minus;
            if (keep_samples) {
                py::list samples;
                for (const auto& s : tr.samples) samples.append(py::make_tuple(s.t, s.z));
                d["samples"] = samples;
            }
            return d;
        },
        py::arg("source"), py::arg("z0"), py::arg("direction") = "both",
        py::arg("window") = std::vector<double>{-8, -8, 8, 8}, py::arg("rtol") = 1e-10,
        py::arg("t_max") = 1e6, py::arg("escape_radius") = 0.0, py::arg("keep_samples") = true);

    m.def(
        "contour_integral",
        [](const std::string& source, const std::vector<Complex>& path) {
            FieldExpr f = FieldExpr::parse(source);
            TransitResult r = contour_integral_reciprocal(f, path);
            return py::make_tuple(r.value, r.error_estimate);
        },
        py::arg("source"), py::arg("path"));

    m.def(
        "residue_period",
        [](const std::string& source, Complex a, double radius) {
            return residue_period(FieldExpr::parse(source), a, radius);
        },
        py::arg("source"), py::arg("a"), py::arg("radius"));

    m.def(
        "period",
        [](const std::string& source, Complex a) {
            return period(FieldExpr::parse(source), a);
        },
        py::arg("source"), py::arg("a"));

    m.def(
        "sector_directions",
        [](const std::string& source, Complex a, int m) {
            return sector_directions(FieldExpr::parse(source), a, m);
        },
        py::arg("source"), py::arg("a"), py::arg("m"));

    m.def(
        "analyze_json",
        [](const std::string& source, const std::vector<double>& window, int nx, int ny,
           int max_seeds, int threads) {
            FieldExpr f = FieldExpr::parse(source);
            AnalyzeOptions opt;
            if (!window.empty()) opt.window = window_from(window);
            opt.nx = nx;
            opt.ny = ny;
            opt.max_seeds = max_seeds;
            opt.threads = threads;
            AnalysisResult res = analyze(f, opt);
            return analysis_to_json(res).dump();
        },
        py::arg("source"), py::arg("window") = std::vector<double>{}, py::arg("nx") = 160,
        py::arg("ny") = 140, py::arg("max_seeds") = 48, py::arg("threads") = 0);

    m.def(
        "render_svg",
        [](const std::string& source, const std::vector<double>& window, int nx, int ny,
           int width_px) {
            FieldExpr f = FieldExpr::parse(source);
            AnalyzeOptions opt;
            if (!window.empty()) opt.window = window_from(window);
            opt.nx = nx;
            opt.ny = ny;
            AnalysisResult res = analyze(f, opt);
            return render_svg(res, width_px);
        },
        py::arg("source"), py::arg("window") = std::vector<double>{}, py::arg("nx") = 160,
        py::arg("ny") = 140, py::arg("width_px") = 900);

    m.def(
        "sweep_json",
        [](const std::string& source_template, const std::string& name,
           const std::vector<double>& values, const std::vector<double>& window, int nx, int ny,
           int max_seeds) {
            AnalyzeOptions opt;
            if (!window.empty()) opt.window = window_from(window);
            opt.nx = nx;
            opt.ny = ny;
            opt.max_seeds = max_seeds;
            return run_sweep(source_template, name, values, opt).dump();
        },
        py::arg("source_template"), py::arg("name"), py::arg("values"),
        py::arg("window") = std::vector<double>{}, py::arg("nx") = 160, py::arg("ny") = 140,
        py::arg("max_seeds") = 48);

    m.def("substitute_parameter", &substitute_parameter, py::arg("source"), py::arg("name"),
          py::arg("value"));
}
