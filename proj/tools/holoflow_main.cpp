#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "holoflow/analysis.hpp"
#include "holoflow/errors.hpp"

namespace {

bool parse_complex(const std::string& s, holoflow::Complex& out) {
    double re = 0, im = 0;
    char extra;
    if (std::sscanf(s.c_str(), "%lf,%lf %c", &re, &im, &extra) == 2) {
        out = {re, im};
        return true;
    }
    if (std::sscanf(s.c_str(), "%lf %c", &re, &extra) == 1) {
        out = {re, 0.0};
        return true;
    }
    return false;
}

bool parse_window(const std::string& s, holoflow::Window& w) {
    double a, b, c, d;
    char extra;
    if (std::sscanf(s.c_str(), "%lf,%lf,%lf,%lf %c", &a, &b, &c, &d, &extra) != 4) return false;
    w = {a, b, c, d};
    return w.valid();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"holoflow: equilibria, transit times and separatrix configurations of "
                 "holomorphic flows dx/dt = F(x) on the complex plane"};
    app.require_subcommand(1);

    std::string field, window_str, res_str, from_str, param_str, polyline_str, dir = "both";
    std::string json_path, svg_path, csv_path;
    double rtol = 1e-10, escape = 0, budget = 1e6, t1 = 0, t2 = 0;
    bool strict = false, have_t = false;

    auto add_common = [&](CLI::App* cmd, bool with_field) {
        if (with_field) cmd->add_option("field", field, "expression F(x)")->required();
        cmd->add_option("--window", window_str, "xmin,ymin,xmax,ymax");
        cmd->add_option("--res", res_str, "nx,ny (each >= 16)");
        cmd->add_option("--rtol", rtol, "integrator relative tolerance");
        cmd->add_option("--escape-radius", escape, "escape radius override");
        cmd->add_option("--budget", budget, "flow-time budget");
        cmd->add_option("--json", json_path, "write a JSON report");
    };

    CLI::App* c_eq = app.add_subcommand("equilibria", "find and classify the zeros of F");
    add_common(c_eq, true);

    CLI::App* c_orbit = app.add_subcommand("orbit", "integrate one orbit");
    add_common(c_orbit, true);
    c_orbit->add_option("--from", from_str, "initial point re[,im]")->required();
    c_orbit->add_option("--dir", dir, "forward|backward|both");
    c_orbit->add_option("--csv", csv_path, "write the accepted steps as CSV");

    CLI::App* c_transit = app.add_subcommand("transit", "transit times along paths and orbits");
    add_common(c_transit, true);
    c_transit->add_option("--polyline", polyline_str, "semicolon-separated re,im path points");
    c_transit->add_option("--from", from_str, "orbit start for clock transit");
    c_transit->add_option("--t1", t1, "clock interval start");
    CLI::Option* t2opt = c_transit->add_option("--t2", t2, "clock interval end");

    CLI::App* c_sep = app.add_subcommand("separatrices",
                                         "basins, sectors and their separatrix configurations");
    add_common(c_sep, true);
    c_sep->add_option("--svg", svg_path, "write a phase portrait");
    c_sep->add_flag("--strict", strict, "exit 3 when a theorem verdict fails");

    CLI::App* c_port = app.add_subcommand("portrait", "phase portrait (same pipeline, SVG focus)");
    add_common(c_port, true);
    c_port->add_option("--svg", svg_path, "write a phase portrait")->required();

    CLI::App* c_sweep = app.add_subcommand("sweep", "re-run the pipeline over parameter values");
    add_common(c_sweep, true);
    c_sweep->add_option("--param", param_str, "NAME=v1,v2,...")->required();
    CLI::App* c_verify = app.add_subcommand("verify", "run the built-in verification corpus");
    c_verify->add_flag("--strict", strict, "exit 3 when a criterion fails");
    c_verify->add_option("--json", json_path, "write the table as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    holoflow::RunConfig cfg;
    cfg.field_source = field;
    cfg.strict = strict;
    cfg.json_path = json_path;
    cfg.svg_path = svg_path;
    cfg.csv_path = csv_path;
    cfg.options.rtol = rtol;
    cfg.options.escape_radius = escape;
    cfg.options.t_max = budget;
    cfg.direction = dir;

    if (!window_str.empty()) {
        holoflow::Window w;
        if (!parse_window(window_str, w)) {
            std::cerr << "error: bad --window (want xmin,ymin,xmax,ymax with xmin<xmax)\n";
            return 1;
        }
        cfg.options.window = w;
    }
    if (!res_str.empty()) {
        int nx = 0, ny = 0;
        if (std::sscanf(res_str.c_str(), "%d,%d", &nx, &ny) != 2 || nx < 16 || ny < 16) {
            std::cerr << "error: bad --res (want nx,ny with each >= 16)\n";
            return 1;
        }
        cfg.options.nx = nx;
        cfg.options.ny = ny;
    }
    if (!from_str.empty() && !parse_complex(from_str, cfg.from)) {
        std::cerr << "error: bad --from (want re or re,im)\n";
        return 1;
    }

    if (app.got_subcommand(c_eq)) cfg.subcommand = holoflow::Subcommand::Equilibria;
    else if (app.got_subcommand(c_orbit)) cfg.subcommand = holoflow::Subcommand::Orbit;
    else if (app.got_subcommand(c_transit)) {
        cfg.subcommand = holoflow::Subcommand::Transit;
        have_t = t2opt->count() > 0;
        cfg.t1 = t1;
        cfg.t2 = t2;
        cfg.have_clock_interval = have_t;
        if (!polyline_str.empty()) {
            std::string item;
            for (std::size_t i = 0; i <= polyline_str.size(); ++i) {
                if (i == polyline_str.size() || polyline_str[i] == ';') {
                    holoflow::Complex z;
                    if (!item.empty()) {
                        if (!parse_complex(item, z)) {
                            std::cerr << "error: bad --polyline point '" << item << "'\n";
                            return 1;
                        }
                        cfg.polyline.push_back(z);
                    }
                    item.clear();
                } else {
                    item += polyline_str[i];
                }
            }
        }
    } else if (app.got_subcommand(c_sep)) cfg.subcommand = holoflow::Subcommand::Separatrices;
    else if (app.got_subcommand(c_port)) cfg.subcommand = holoflow::Subcommand::Portrait;
    else if (app.got_subcommand(c_sweep)) {
        cfg.subcommand = holoflow::Subcommand::Sweep;
        auto eq = param_str.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --param wants NAME=v1,v2,...\n";
            return 1;
        }
        cfg.param_name = param_str.substr(0, eq);
        std::string rest = param_str.substr(eq + 1), item;
        for (std::size_t i = 0; i <= rest.size(); ++i) {
            if (i == rest.size() || rest[i] == ',') {
                if (!item.empty()) cfg.param_values.push_back(std::stod(item));
                item.clear();
            } else {
                item += rest[i];
            }
        }
        if (cfg.param_values.empty()) {
            std::cerr << "error: --param carries no values\n";
            return 1;
        }
    } else if (app.got_subcommand(c_verify)) cfg.subcommand = holoflow::Subcommand::Verify;

    return holoflow::run(cfg);
}
