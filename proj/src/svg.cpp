#include "holoflow/svg.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>

namespace holoflow {

namespace {

const char* kRegionFill[] = {"#aec7e8", "#ffbb78", "#98df8a", "#ff9896",
                             "#c5b0d5", "#c49c94", "#f7b6d2", "#dbdb8d"};
const char* kSectorFill[] = {"#9edae5", "#dbdb8d", "#c7c7c7", "#f7b6d2",
                             "#c5b0d5", "#98df8a", "#ffbb78", "#aec7e8"};

const char* side_color(Side s) {
    switch (s) {
        case Side::Positive: return "#d62728";
        case Side::Negative: return "#2ca02c";
        case Side::Double: return "#9467bd";
        default: return "#7f7f7f";
    }
}

struct Mapper {
    Window w;
    double sx, sy;
    int width, height;

    Mapper(Window win, int width_px) : w(win) {
        width = width_px;
        height = static_cast<int>(std::lround(width_px * w.height() / w.width()));
        sx = width / w.width();
        sy = height / w.height();
    }
    double px(double x) const { return (x - w.xmin) * sx; }
    double py(double y) const { return (w.ymax - y) * sy; }
};

void fmt(std::string& out, const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    out += buf;
}

}  // namespace

std::string render_svg(const AnalysisResult& res, int width_px) {
    Mapper m(res.window, width_px);
    std::string svg;
    fmt(svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
        "viewBox=\"0 0 %d %d\">\n",
        m.width, m.height, m.width, m.height);
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

    // region fills: horizontal runs of same-label cells merged into one rect
    for (const auto& rep : res.reports) {
        const BasinGrid& g = rep.grid;
        if (g.nx == 0) continue;
        bool sector_report = rep.kind == RegionKind::EllipticSector;
        const char* fill =
            sector_report
                ? kSectorFill[(rep.equilibrium.id * 3 + rep.sector_index) % 8]
                : kRegionFill[rep.equilibrium.id % 8];
        fmt(svg, "<g fill=\"%s\" fill-opacity=\"0.5\">\n", fill);
        double cw = g.cell_w() * m.sx, ch = g.cell_h() * m.sy;
        for (int iy = 0; iy < g.ny; ++iy) {
            int run_start = -1;
            for (int ix = 0; ix <= g.nx; ++ix) {
                bool in = false;
                if (ix < g.nx) {
                    const CellInfo& c = g.at(ix, iy);
                    in = sector_report
                             ? (c.label == CellLabel::InSector && c.eq == rep.equilibrium.id &&
                                c.sector == rep.sector_index)
                             : (c.label == CellLabel::InBasin && c.eq == rep.equilibrium.id);
                }
                if (in && run_start < 0) run_start = ix;
                if (!in && run_start >= 0) {
                    Complex lo = g.cell_center(run_start, iy);
                    fmt(svg, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\"/>\n",
                        m.px(lo.real()) - 0.5 * cw, m.py(lo.imag()) - 0.5 * ch,
                        cw * (ix - run_start), ch);
                    run_start = -1;
                }
            }
        }
        svg += "</g>\n";
    }

    // separatrix polylines; runs outside the window break the path
    for (const auto& rep : res.reports) {
        for (const auto& rec : rep.records) {
            const auto& samples = rec.orbit.samples;
            if (samples.size() < 2) continue;
            std::size_t stride = std::max<std::size_t>(1, samples.size() / 1200);
            std::string d;
            int used = 0;
            bool pen_down = false;
            for (std::size_t k = 0; k < samples.size(); k += stride) {
                Complex z = samples[k].z;
                if (!res.window.contains(z)) {
                    pen_down = false;
                    continue;
                }
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%s%.2f %.2f ", pen_down ? "L " : "M ",
                              m.px(z.real()), m.py(z.imag()));
                d += buf;
                pen_down = true;
                ++used;
            }
            if (used < 2) continue;
            fmt(svg,
                "<path class=\"separatrix\" d=\"%s\" fill=\"none\" stroke=\"%s\" "
                "stroke-width=\"1.6\"/>\n",
                d.c_str(), side_color(rec.side));
        }
    }

    // definite-direction rays at multiple equilibria
    for (const auto& e : res.equilibria) {
        if (!e.sector_directions) continue;
        double len = 0.1 * res.window.diameter();
        for (double d : *e.sector_directions) {
            Complex tip = e.location + len * Complex{std::cos(d), std::sin(d)};
            fmt(svg,
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#444444\" "
                "stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n",
                m.px(e.location.real()), m.py(e.location.imag()), m.px(tip.real()),
                m.py(tip.imag()));
        }
    }

    // equilibria markers
    for (const auto& e : res.equilibria) {
        fmt(svg,
            "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"#111111\" stroke=\"#ffffff\" "
            "stroke-width=\"1.2\"><title>%s</title></circle>\n",
            m.px(e.location.real()), m.py(e.location.imag()), to_string(e.cls));
    }

    svg += "</svg>\n";
    return svg;
}

}  // namespace holoflow
