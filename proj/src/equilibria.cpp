#include "holoflow/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "holoflow/errors.hpp"

namespace holoflow {

namespace {

double factorial(int k) {
    double v = 1;
    for (int j = 2; j <= k; ++j) v *= j;
    return v;
}

// Sum of principal log increments of F along a polyline loop; equals
// 2*pi*i*N for a closed loop around N zeros once every increment is small.
// Segments are split until |Im log ratio| < pi/2.
struct WindingAccumulator {
    const FieldExpr& f;
    double low_f_floor;
    Complex total{0, 0};

    void segment(Complex za, Complex zb, Complex fa, Complex fb, int depth) {
        if (std::abs(fa) < low_f_floor || std::abs(fb) < low_f_floor)
            throw PoleProximity("zero of F too close to contour");
        Complex ratio = fb / fa;
        if (std::abs(std::arg(ratio)) < 1.5707 && depth > -40) {
            total += std::log(ratio);
            return;
        }
        if (depth > 52) throw NonConvergence("argument principle refinement exhausted");
        Complex zm = 0.5 * (za + zb);
        Complex fm = f.eval(zm);
        segment(za, zm, fa, fm, depth + 1);
        segment(zm, zb, fm, fb, depth + 1);
    }
};

int winding_count(const FieldExpr& f, const std::vector<Complex>& loop, double low_f_floor) {
    WindingAccumulator acc{f, low_f_floor, {0, 0}};
    std::vector<Complex> values(loop.size());
    for (std::size_t i = 0; i < loop.size(); ++i) values[i] = f.eval(loop[i]);
    for (std::size_t i = 0; i + 1 < loop.size(); ++i)
        acc.segment(loop[i], loop[i + 1], values[i], values[i + 1], 0);
    acc.segment(loop.back(), loop.front(), values.back(), values.front(), 0);
    double turns = acc.total.imag() / kTwoPi;
    double rounded = std::round(turns);
    if (std::abs(turns - rounded) > 0.05)
        throw NonConvergence("argument principle count did not settle");
    return static_cast<int>(rounded);
}

std::vector<Complex> rectangle_loop(Window w, int per_edge) {
    std::vector<Complex> pts;
    pts.reserve(4 * per_edge);
    for (int k = 0; k < per_edge; ++k)
        pts.emplace_back(w.xmin + w.width() * k / per_edge, w.ymin);
    for (int k = 0; k < per_edge; ++k)
        pts.emplace_back(w.xmax, w.ymin + w.height() * k / per_edge);
    for (int k = 0; k < per_edge; ++k)
        pts.emplace_back(w.xmax - w.width() * k / per_edge, w.ymax);
    for (int k = 0; k < per_edge; ++k)
        pts.emplace_back(w.xmin, w.ymax - w.height() * k / per_edge);
    return pts;
}

int window_count(const FieldExpr& f, Window w, double low_f_floor) {
    return winding_count(f, rectangle_loop(w, 32), low_f_floor);
}

// Newton on F/F' has simple zeros everywhere, including at multiple zeros.
Complex polish_newton(const FieldExpr& f, const FieldExpr& f1, const FieldExpr& f2,
                      Complex z0, double scale) {
    Complex z = z0;
    auto g_abs = [&](Complex z) {
        Complex fv = f.eval(z), dv = f1.eval(z);
        if (dv == Complex{0, 0}) return std::abs(fv);  // exactly at a multiple zero
        return std::abs(fv / dv);
    };
    double g = g_abs(z);
    for (int it = 0; it < 80; ++it) {
        Complex fv = f.eval(z), d1 = f1.eval(z), d2 = f2.eval(z);
        Complex den = d1 * d1 - fv * d2;
        if (den == Complex{0, 0}) break;
        Complex step = fv * d1 / den;
        double damp = 1.0;
        Complex zn = z - step;
        double gn = g_abs(zn);
        int halvings = 0;
        while (gn > g && halvings < 60) {
            damp *= 0.5;
            zn = z - damp * step;
            gn = g_abs(zn);
            ++halvings;
        }
        if (halvings == 60) break;
        z = zn;
        g = gn;
        if (std::abs(step) * damp <= 1e-16 * (1.0 + std::abs(z))) break;
    }
    if (std::abs(f.eval(z)) > 1e-10 * (1.0 + scale))
        throw NonConvergence("Newton polish stalled");
    return z;
}

// Aberth-Ehrlich simultaneous iteration on the monic polynomial.
std::vector<Complex> aberth_roots(std::vector<Complex> coeff) {
    while (coeff.size() > 1 && std::abs(coeff.back()) == 0.0) coeff.pop_back();
    int n = static_cast<int>(coeff.size()) - 1;
    if (n < 1) return {};
    for (auto& c : coeff) c /= coeff[n];

    auto eval = [&](Complex z, Complex& p, Complex& dp) {
        p = coeff[n];
        dp = {0, 0};
        for (int k = n - 1; k >= 0; --k) {
            dp = dp * z + p;
            p = p * z + coeff[k];
        }
    };

    double radius = 0;
    for (int k = 0; k < n; ++k) radius = std::max(radius, std::pow(std::abs(coeff[k]), 1.0 / (n - k)));
    radius = 1.0 + 2.0 * radius;

    std::vector<Complex> roots(n);
    for (int k = 0; k < n; ++k) {
        double th = kTwoPi * k / n + 0.4;
        roots[k] = radius * Complex{std::cos(th), std::sin(th)} * 0.5;
    }

    for (int it = 0; it < 400; ++it) {
        double worst = 0;
        for (int k = 0; k < n; ++k) {
            Complex p, dp;
            eval(roots[k], p, dp);
            Complex newton = dp == Complex{0, 0} ? Complex{0, 0} : p / dp;
            Complex sum{0, 0};
            for (int j = 0; j < n; ++j)
                if (j != k) sum += Complex{1, 0} / (roots[k] - roots[j]);
            Complex den = Complex{1, 0} - newton * sum;
            Complex step = den == Complex{0, 0} ? newton : newton / den;
            roots[k] -= step;
            worst = std::max(worst, std::abs(step));
        }
        if (worst < 1e-14 * (1.0 + radius)) break;
    }
    return roots;
}

struct PolishContext {
    FieldExpr f1, f2;
};

std::vector<Complex> cluster_and_polish(const FieldExpr& f, const PolishContext& ctx,
                                        std::vector<Complex> raw, double scale) {
    std::sort(raw.begin(), raw.end(), complex_less);
    std::vector<Complex> out;
    double cluster_tol = 1e-4 * (1.0 + scale);
    std::size_t i = 0;
    while (i < raw.size()) {
        Complex sum = raw[i];
        std::size_t j = i + 1;
        while (j < raw.size() && std::abs(raw[j] - raw[i]) < cluster_tol) sum += raw[j++];
        Complex mean = sum / static_cast<double>(j - i);
        out.push_back(polish_newton(f, ctx.f1, ctx.f2, mean, scale));
        i = j;
    }
    // polishing may re-merge distinct starts
    std::sort(out.begin(), out.end(), complex_less);
    std::vector<Complex> dedup;
    for (Complex z : out) {
        if (dedup.empty() || std::abs(z - dedup.back()) > 1e-9 * (1.0 + scale)) dedup.push_back(z);
    }
    return dedup;
}

void subdivide(const FieldExpr& f, const PolishContext& ctx, Window w, double floor_v,
               double scale, int depth, std::vector<Complex>& out) {
    int count;
    Window box = w;
    for (int attempt = 0;; ++attempt) {
        try {
            count = window_count(f, box, floor_v);
            break;
        } catch (const PoleProximity&) {
            if (attempt >= 4) throw NonConvergence("zero pinned to subdivision boundary");
            box = box.dilated(0.013 + 0.007 * attempt);
        }
    }
    if (count == 0) return;
    if (box.diameter() < 1e-4 * (1.0 + scale) || depth > 44) {
        out.push_back(polish_newton(f, ctx.f1, ctx.f2, box.center(), scale));
        return;
    }
    double xm = box.xmin + 0.5 * box.width();
    double ym = box.ymin + 0.5 * box.height();
    subdivide(f, ctx, {box.xmin, box.ymin, xm, ym}, floor_v, scale, depth + 1, out);
    subdivide(f, ctx, {xm, box.ymin, box.xmax, ym}, floor_v, scale, depth + 1, out);
    subdivide(f, ctx, {box.xmin, ym, xm, box.ymax}, floor_v, scale, depth + 1, out);
    subdivide(f, ctx, {xm, ym, box.xmax, box.ymax}, floor_v, scale, depth + 1, out);
}

}  // namespace

const char* to_string(EqClass c) {
    switch (c) {
        case EqClass::Center: return "Center";
        case EqClass::StableNode: return "StableNode";
        case EqClass::UnstableNode: return "UnstableNode";
        case EqClass::StableFocus: return "StableFocus";
        case EqClass::UnstableFocus: return "UnstableFocus";
        case EqClass::Multiple: return "Multiple";
    }
    return "?";
}

double field_scale(const FieldExpr& f, Window w) {
    double s = 0;
    const int n = 12;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            Complex z{w.xmin + w.width() * i / n, w.ymin + w.height() * j / n};
            double v = std::abs(f.eval(z));
            if (std::isfinite(v)) s = std::max(s, v);
        }
    return s > 0 ? s : 1.0;
}

int argument_principle_count(const FieldExpr& f, Window window) {
    double scale = field_scale(f, window);
    return window_count(f, window, 1e-290 * (1.0 + scale));
}

int winding_count_polyline(const FieldExpr& f, const std::vector<Complex>& loop) {
    if (loop.size() < 3) throw Error("winding count needs a closed loop");
    return winding_count(f, loop, 1e-300);
}

std::vector<Complex> find_zeros(const FieldExpr& f, Window window, const EquilibriaOptions& opt) {
    if (!window.valid()) throw Error("window must have positive area");
    double scale = std::max(opt.field_scale, 1e-300);
    double zero_tol = opt.zero_tol * (1.0 + scale);

    auto coeffs = f.polynomial_coefficients();
    if (coeffs && coeffs->size() <= 1) {
        if (std::abs((*coeffs)[0]) <= zero_tol) throw Error("field is identically zero");
        return {};
    }

    PolishContext ctx{f.derivative(1), f.derivative(2)};

    // Boundary-zero guard: dilate by 1% while a zero sits within zero_tol of
    // the window edge.
    Window w = window;
    auto near_boundary = [&](Complex z) {
        double d = std::min(std::min(z.real() - w.xmin, w.xmax - z.real()),
                            std::min(z.imag() - w.ymin, w.ymax - z.imag()));
        return std::abs(d) < 1e-7 * (1.0 + w.diameter());
    };

    std::vector<Complex> zeros;
    double floor_v = 1e-290 * (1.0 + scale);
    if (coeffs) {
        std::vector<Complex> all = aberth_roots(*coeffs);
        for (int attempt = 0; attempt < 5; ++attempt) {
            bool touched = false;
            for (Complex r : all)
                if (near_boundary(r)) touched = true;
            if (!touched) break;
            w = w.dilated(0.01);
        }
        std::vector<Complex> inside;
        for (Complex r : all)
            if (w.contains(r)) inside.push_back(r);
        zeros = cluster_and_polish(f, ctx, inside, scale);
    } else {
        for (int attempt = 0;; ++attempt) {
            try {
                std::vector<Complex> found;
                subdivide(f, ctx, w, floor_v, scale, 0, found);
                zeros = cluster_and_polish(f, ctx, found, scale);
                break;
            } catch (const NonConvergence&) {
                if (attempt >= 3) throw;
                w = w.dilated(0.01);
            }
        }
    }

    // Validate: polished multiplicities must match the contour count.
    int total = 0;
    EquilibriaOptions zopt = opt;
    for (Complex z : zeros) total += zero_order(f, z, zopt);
    int contour = window_count(f, w, floor_v);
    if (contour != total)
        throw WindingMismatch("argument principle count " + std::to_string(contour) +
                              " != polished multiplicity sum " + std::to_string(total));
    std::sort(zeros.begin(), zeros.end(), complex_less);
    return zeros;
}

int zero_order(const FieldExpr& f, Complex a, const EquilibriaOptions& opt) {
    double scale = std::max(opt.field_scale, 1e-300);
    if (std::abs(f.eval(a)) > opt.zero_tol * (1.0 + scale) * 10)
        throw Error("zero_order called away from a zero of F");
    FieldExpr d = f;
    for (int k = 1; k <= opt.max_order; ++k) {
        d = d.derivative(1);
        if (std::abs(d.eval(a)) > opt.deriv_tol * factorial(k) * scale) return k;
    }
    throw OrderOverflow("no derivative above tolerance up to order " +
                        std::to_string(opt.max_order));
}

std::vector<double> sector_directions(const FieldExpr& f, Complex a, int m,
                                      const EquilibriaOptions& opt) {
    if (m < 2) throw NotMultiple("sector directions require order >= 2");
    (void)opt;
    FieldExpr d = f;
    for (int k = 0; k < m; ++k) d = d.derivative(1);
    double phase = std::arg(d.eval(a));
    std::vector<double> dirs;
    dirs.reserve(2 * m - 2);
    for (int l = 0; l < 2 * (m - 1); ++l) {
        double th = (l * std::numbers::pi - phase) / (m - 1);
        th = std::fmod(th, kTwoPi);
        if (th < 0) th += kTwoPi;
        dirs.push_back(th);
    }
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

Equilibrium classify(const FieldExpr& f, Complex a, const EquilibriaOptions& opt) {
    Equilibrium eq;
    eq.location = a;
    eq.order = zero_order(f, a, opt);
    FieldExpr d = f;
    for (int k = 0; k < eq.order; ++k) d = d.derivative(1);
    eq.leading_coefficient = d.eval(a);
    eq.derivative_at = f.derivative(1).eval(a);

    if (eq.order >= 2) {
        eq.cls = EqClass::Multiple;
        eq.sector_directions = sector_directions(f, a, eq.order, opt);
        return eq;
    }
    Complex lambda = eq.derivative_at;
    double mag = std::abs(lambda);
    double re_ratio = std::abs(lambda.real()) / mag;
    if (re_ratio <= opt.center_tol) {
        eq.cls = EqClass::Center;
        eq.period = std::abs(kTwoPi / lambda.imag());
    } else if (std::abs(lambda.imag()) / mag <= opt.center_tol) {
        eq.cls = lambda.real() < 0 ? EqClass::StableNode : EqClass::UnstableNode;
    } else {
        eq.cls = lambda.real() < 0 ? EqClass::StableFocus : EqClass::UnstableFocus;
    }
    // The Center/Focus split is numerically ill-posed at the boundary; expose
    // the knife edge instead of hiding it.
    if (re_ratio > opt.center_tol && re_ratio < opt.near_degenerate_tol)
        eq.near_degenerate = true;
    return eq;
}

std::vector<Equilibrium> find_equilibria(const FieldExpr& f, Window window,
                                         const EquilibriaOptions& opt_in) {
    EquilibriaOptions opt = opt_in;
    opt.field_scale = field_scale(f, window);
    std::vector<Complex> zeros = find_zeros(f, window, opt);
    std::vector<Equilibrium> eqs;
    eqs.reserve(zeros.size());
    for (Complex z : zeros) {
        Equilibrium e = classify(f, z, opt);
        e.id = static_cast<int>(eqs.size());
        eqs.push_back(std::move(e));
    }
    return eqs;
}

// residue cross-check lives in transit.cpp; declared there
Complex residue_period_quadrature(const FieldExpr& f, Complex a, double radius);

double period(const FieldExpr& f, Complex a, const EquilibriaOptions& opt) {
    Equilibrium eq = classify(f, a, opt);
    if (eq.cls != EqClass::Center) throw NotACenter("equilibrium is not a center");
    double T = *eq.period;
    Complex residue = residue_period_quadrature(f, a, 0.1 / (1.0 + std::abs(eq.derivative_at)));
    if (std::abs(std::abs(residue) - T) > 1e-9 * T)
        throw Error("period cross-check against residue quadrature failed");
    return T;
}

}  // namespace holoflow
