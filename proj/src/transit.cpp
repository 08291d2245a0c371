#include "holoflow/transit.hpp"

#include <algorithm>
#include <cmath>

#include "holoflow/equilibria.hpp"
#include "holoflow/errors.hpp"

namespace holoflow {

namespace {

// Gauss-Kronrod 7-15 on [-1, 1]
constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};
constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct PanelResult {
    Complex value;
    double error;
};

template <class Fn>
PanelResult gk15(const Fn& fn, Complex a, Complex b) {
    Complex mid = 0.5 * (a + b);
    Complex half = 0.5 * (b - a);
    Complex k{0, 0}, g{0, 0};
    for (int i = 0; i < 8; ++i) {
        double x = kKronrodNodes[i];
        Complex v;
        if (i == 7) {
            v = fn(mid);
            k += kKronrodWeights[i] * v;
            g += kGaussWeights[3] * v;
        } else {
            Complex v1 = fn(mid - half * x), v2 = fn(mid + half * x);
            v = v1 + v2;
            k += kKronrodWeights[i] * v;
            if (i % 2 == 1) g += kGaussWeights[i / 2] * v;
        }
    }
    k *= half;
    g *= half;
    return {k, std::abs(k - g)};
}

template <class Fn>
Complex adaptive_segment(const Fn& fn, Complex a, Complex b, double tol, int depth,
                         double& err_acc) {
    PanelResult p = gk15(fn, a, b);
    if (p.error <= tol || depth > 30) {
        if (depth > 30 && p.error > tol * 100)
            throw Error("contour quadrature failed to converge");
        err_acc += p.error;
        return p.value;
    }
    Complex mid = 0.5 * (a + b);
    return adaptive_segment(fn, a, mid, 0.5 * tol, depth + 1, err_acc) +
           adaptive_segment(fn, mid, b, 0.5 * tol, depth + 1, err_acc);
}

double point_segment_distance(Complex p, Complex a, Complex b) {
    Complex d = b - a;
    double len2 = std::norm(d);
    if (len2 == 0) return std::abs(p - a);
    double u = std::clamp(((std::conj(d) * (p - a)).real()) / len2, 0.0, 1.0);
    return std::abs(p - (a + u * d));
}

}  // namespace

TransitResult contour_integral_reciprocal(const FieldExpr& f, std::span<const Complex> path,
                                          const ContourOptions& opt) {
    if (path.size() < 2) throw Error("path needs at least two points");
    if (opt.pole_guard > 0) {
        for (Complex zero : opt.zeros)
            for (std::size_t i = 0; i + 1 < path.size(); ++i)
                if (point_segment_distance(zero, path[i], path[i + 1]) < opt.pole_guard)
                    throw PoleProximity("path within pole_guard of a zero of F");
    }
    auto integrand = [&](Complex z) {
        Complex v = f.eval(z);
        if (v == Complex{0, 0}) throw PoleProximity("path hits a zero of F");
        return Complex{1, 0} / v;
    };

    double total_len = 0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) total_len += std::abs(path[i + 1] - path[i]);
    if (total_len == 0) return {Complex{0, 0}, TransitMethod::Contour, 0, "empty path"};

    // first pass for a magnitude estimate, second pass against the spec tolerance
    Complex value{0, 0};
    double err = 0;
    for (int pass = 0; pass < 2; ++pass) {
        double tol_total = std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
        value = {0, 0};
        err = 0;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            double frac = std::abs(path[i + 1] - path[i]) / total_len;
            value += adaptive_segment(integrand, path[i], path[i + 1],
                                      std::max(tol_total * frac, 1e-16), 0, err);
        }
    }
    TransitResult res;
    res.value = value;
    res.method = TransitMethod::Contour;
    res.error_estimate = err;
    res.path_descriptor = "polyline[" + std::to_string(path.size()) + "]";
    return res;
}

TransitResult transit_time_clock(const OrbitTrace& trace, double t1, double t2) {
    if (trace.samples.empty() || t1 < trace.resolved_t_min() - 1e-12 ||
        t2 > trace.resolved_t_max() + 1e-12)
        throw OutOfSpan("[t1,t2] outside the resolved trace span");
    TransitResult res;
    res.value = Complex{t2 - t1, 0.0};
    res.method = TransitMethod::Clock;
    res.error_estimate = 0;
    res.path_descriptor = "clock";
    return res;
}

std::vector<Complex> densified_polyline(const FieldExpr& f, const OrbitTrace& trace,
                                        double t1, double t2) {
    if (t2 < t1) std::swap(t1, t2);
    std::vector<Complex> pts;
    Complex za = trace_position(f, trace, t1);
    pts.push_back(za);
    double prev_t = t1;
    Complex prev_z = za;
    for (const auto& s : trace.samples) {
        if (s.t <= t1 || s.t >= t2) continue;
        double h = s.t - prev_t;
        Complex mid = 0.5 * (prev_z + s.z) + (h / 8.0) * (f.eval(prev_z) - f.eval(s.z));
        pts.push_back(mid);
        pts.push_back(s.z);
        prev_t = s.t;
        prev_z = s.z;
    }
    Complex zb = trace_position(f, trace, t2);
    double h = t2 - prev_t;
    if (h > 0) {
        Complex mid = 0.5 * (prev_z + zb) + (h / 8.0) * (f.eval(prev_z) - f.eval(zb));
        pts.push_back(mid);
    }
    pts.push_back(zb);
    return pts;
}

double clock_contour_check(const FieldExpr& f, const OrbitTrace& trace, double t1, double t2,
                           const ContourOptions& opt) {
    transit_time_clock(trace, t1, t2);  // span validation
    auto poly = densified_polyline(f, trace, t1, t2);
    TransitResult contour = contour_integral_reciprocal(f, poly, opt);
    return std::abs(contour.value - Complex{t2 - t1, 0.0});
}

Complex residue_period(const FieldExpr& f, Complex a, double radius) {
    if (radius <= 0) throw Error("radius must be positive");
    auto sample = [&](double theta) {
        Complex z = a + radius * Complex{std::cos(theta), std::sin(theta)};
        Complex v = f.eval(z);
        if (v == Complex{0, 0}) throw PoleProximity("circle hits a zero of F");
        // dz = i r e^{i theta} dtheta
        return Complex{0, 1} * (z - a) / v;
    };

    // winding of F along the circle counts enclosed zeros; more than the one
    // at a means the disk is contaminated
    {
        std::vector<Complex> loop;
        for (int k = 0; k < 64; ++k) {
            double th = kTwoPi * k / 64;
            loop.push_back(a + radius * Complex{std::cos(th), std::sin(th)});
        }
        int enclosed = winding_count_polyline(f, loop);
        double circle_scale = std::abs(f.eval(a + radius));
        bool zero_at_a = std::abs(f.eval(a)) < 1e-6 * (1 + circle_scale);
        if (!zero_at_a && enclosed != 0)
            throw PoleProximity("disk contains a stray zero");
        if (zero_at_a) {
            FieldExpr d = f;
            int order = 0;
            for (int k = 1; k <= 12 && order == 0; ++k) {
                d = d.derivative(1);
                if (std::abs(d.eval(a)) > 1e-8 * (1 + circle_scale)) order = k;
            }
            if (order > 0 && enclosed != order)
                throw PoleProximity("disk contains another zero of F");
        }
    }

    int n = 32;
    Complex prev_val{0, 0};
    for (int iter = 0; iter < 12; ++iter) {
        Complex sum{0, 0};
        for (int k = 0; k < n; ++k) sum += sample(kTwoPi * k / n);
        Complex val = sum * (kTwoPi / n);
        if (iter > 2 && std::abs(val - prev_val) <= std::max(1e-12, 1e-10 * std::abs(val)))
            return val;
        prev_val = val;
        n *= 2;
    }
    return prev_val;
}

std::vector<ProbePoint> divergence_probe(const FieldExpr& f, const OrbitTrace& trace,
                                         Direction side, EscapeCoord coord, double anchor,
                                         std::span<const double> checkpoints,
                                         const std::function<double(double)>* comparator) {
    const Fate& fate = side == Direction::Forward ? trace.forward_fate : trace.backward_fate;
    if (fate.kind != Fate::Kind::Undetermined)
        throw NotEscaping("fate is " + to_string(fate) + ", not a slow escape");

    auto coord_of = [&](Complex z) {
        return coord == EscapeCoord::RealPart ? z.real() : std::abs(z);
    };

    // walk away from t=0 on the requested side
    std::vector<TimePoint> walk;
    for (const auto& s : trace.samples) {
        if (side == Direction::Forward && s.t >= 0) walk.push_back(s);
        if (side == Direction::Backward && s.t <= 0) walk.push_back(s);
    }
    if (side == Direction::Backward) std::reverse(walk.begin(), walk.end());
    if (walk.size() < 2) throw NotEscaping("trace has no samples on the requested side");

    // escape direction inferred from the movement of the coordinate
    double c0 = coord_of(walk.front().z), c1 = coord_of(walk.back().z);
    bool increasing = c1 > c0;

    auto first_crossing_time = [&](double threshold) -> std::optional<double> {
        double c_first = coord_of(walk.front().z);
        if (increasing ? c_first >= threshold : c_first <= threshold) return walk.front().t;
        for (std::size_t k = 0; k + 1 < walk.size(); ++k) {
            double a = coord_of(walk[k].z), b = coord_of(walk[k + 1].z);
            bool crossed = increasing ? (a < threshold && b >= threshold)
                                      : (a > threshold && b <= threshold);
            if (!crossed) continue;
            // log-space interpolation is exact for exponential escapes and a
            // fine approximation otherwise
            double u;
            if (a > 0 && b > 0 && threshold > 0)
                u = (std::log(threshold) - std::log(a)) / (std::log(b) - std::log(a));
            else
                u = (threshold - a) / (b - a);
            return walk[k].t + u * (walk[k + 1].t - walk[k].t);
        }
        return std::nullopt;
    };

    auto t_anchor = first_crossing_time(anchor);
    if (!t_anchor) throw NotEscaping("trace never reaches the anchor coordinate");

    std::vector<ProbePoint> out;
    for (double threshold : checkpoints) {
        auto tc = first_crossing_time(threshold);
        if (!tc) break;
        ProbePoint p;
        p.threshold = threshold;
        p.cumulative_time = std::abs(*tc - *t_anchor);
        if (comparator && *comparator) p.comparator = (*comparator)(threshold);
        out.push_back(p);
    }
    (void)f;
    return out;
}

double quad_real(const std::function<double(double)>& fn, double a, double b, double tol) {
    std::function<double(double, double, double, double, double, int)> rec =
        [&](double x0, double x2, double f0, double f2, double eps, int depth) -> double {
        double x1 = 0.5 * (x0 + x2);
        double f1 = fn(x1);
        double h = x2 - x0;
        double coarse = 0.5 * h * (f0 + f2);
        double fine = 0.25 * h * (f0 + 2 * f1 + f2);
        if (depth > 40 || std::abs(fine - coarse) < eps) {
            // Richardson of trapezoid = Simpson
            return (4 * fine - coarse) / 3.0;
        }
        return rec(x0, x1, f0, f1, 0.5 * eps, depth + 1) +
               rec(x1, x2, f1, f2, 0.5 * eps, depth + 1);
    };
    return rec(a, b, fn(a), fn(b), tol, 0);
}

// cross-check hook used by equilibria::period
Complex residue_period_quadrature(const FieldExpr& f, Complex a, double radius) {
    return residue_period(f, a, radius);
}

}  // namespace holoflow
