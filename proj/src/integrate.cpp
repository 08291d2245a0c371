#include "holoflow/integrate.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>

#include "holoflow/errors.hpp"

namespace holoflow {

namespace {

// Dormand-Prince 5(4) embedded pair; complex state.
struct Dopri5 {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

struct EqInfo {
    const Equilibrium* eq;
    double r_lin;       // leading-term trust radius for multiple equilibria
    Complex lead_cm;    // F^(m)(a)/m!
    double wind_acc = 0;
};

Complex int_pow(Complex w, int n) {
    Complex acc{1, 0};
    while (n) {
        if (n & 1) acc *= w;
        w *= w;
        n >>= 1;
    }
    return acc;
}

Complex hermite(double t, double t0, double t1, Complex z0, Complex z1, Complex f0, Complex f1) {
    double h = t1 - t0;
    double s = (t - t0) / h;
    double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * z0 + (s3 - 2 * s2 + s) * h * f0 +
           (-2 * s3 + 3 * s2) * z1 + (s3 - s2) * h * f1;
}

struct Stepper {
    const FieldExpr& f;
    double sign;  // +1 forward, -1 backward

    Complex g(Complex z) const { return sign * f.eval(z); }
};

struct HalfResult {
    std::vector<TimePoint> samples;  // elapsed time, increasing from 0
    Fate fate;
    EscapeEpisode episode;
    double elapsed = 0;
};

double factorial(int k) {
    double v = 1;
    for (int j = 2; j <= k; ++j) v *= j;
    return v;
}

// In-disk convergence test near a multiple equilibrium: with the leading term
// c w^m, u = w^(1-m) moves along the straight line u0 + v s; the orbit stays
// in the disk (and converges) exactly when that line keeps |u| large enough.
bool multiple_converges(Complex w, Complex cm, int m, double sign, double r_lin) {
    Complex u0 = Complex{1, 0} / int_pow(w, m - 1);
    Complex v = (1.0 - m) * cm * sign;
    double v2 = std::norm(v);
    if (v2 == 0) return false;
    double t_c = -(u0.real() * v.real() + u0.imag() * v.imag()) / v2;
    double w_max;
    if (t_c <= 0) {
        w_max = std::abs(w);
    } else {
        double d_min = std::abs(u0 + v * t_c);
        if (d_min <= 0) return false;
        w_max = std::pow(d_min, -1.0 / (m - 1));
    }
    return w_max <= 0.8 * r_lin;
}

HalfResult integrate_half(const FieldExpr& f, Complex z0, Direction direction,
                          const IntegrationControls& c, std::span<const Equilibrium> equilibria) {
    Stepper st{f, direction == Direction::Forward ? 1.0 : -1.0};
    HalfResult out;

    std::vector<EqInfo> eqs;
    eqs.reserve(equilibria.size());
    for (const auto& e : equilibria) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& o : equilibria)
            if (o.id != e.id) nearest = std::min(nearest, std::abs(o.location - e.location));
        double r_lin = std::min(std::isfinite(nearest) ? 0.25 * nearest : 1.0, 1.0);
        eqs.push_back({&e, r_lin, e.leading_coefficient / factorial(e.order), 0.0});
    }

    for (const auto& ei : eqs) {
        if (std::abs(z0 - ei.eq->location) <= c.capture_radius * (1 + std::abs(ei.eq->location)) &&
            std::abs(f.eval(z0)) <= c.capture_field)
            throw StartAtEquilibrium("initial point is an equilibrium");
    }

    Complex z = z0;
    double s = 0;
    Complex gz = st.g(z);
    if (!std::isfinite(gz.real()) || !std::isfinite(gz.imag()))
        throw Error("field not finite at initial point");

    double atol = c.rtol;
    double dt = std::clamp(0.01 * (1 + std::abs(z0)) / (1 + std::abs(gz)), 1e-12, 1.0);
    double dt_max = std::max(1.0, c.t_max / 100.0);

    // periodic-return section through z0, normal to the flow
    Complex ghat = gz / std::abs(gz);
    double r_sec = 0.05 * (1 + std::abs(z0));
    for (const auto& ei : eqs)
        r_sec = std::min(r_sec, 0.25 * std::abs(z0 - ei.eq->location));
    bool left_neighborhood = false;
    auto along = [&](Complex p) {
        Complex d = p - z0;
        return d.real() * ghat.real() + d.imag() * ghat.imag();
    };

    // dyadic escape thresholds
    double rho0 = std::max({2.0 * c.window_radius, 2.0 * std::abs(z0), 1.0});
    double next_threshold = rho0;
    double path_len = 0;
    EscapeEpisode current;
    auto archive_episode = [&]() {
        if (current.times.size() > out.episode.times.size()) out.episode = current;
        current = EscapeEpisode{};
        next_threshold = rho0;
    };

    auto record = [&](double tt, Complex zz) {
        if (c.record_samples) out.samples.push_back({tt, zz});
    };
    record(0, z0);

    auto finish_escape = [&](bool overflow, const char* slow_reason) {
        current.overflow = overflow;
        archive_episode();
        auto est = detect_blow_up(out.episode);
        if (est) {
            out.fate.kind = Fate::Kind::BlowUp;
            out.fate.blow_up_time = est->t_star;
            out.fate.error_estimate = est->error;
            out.fate.direction_angle = std::arg(z);
        } else {
            out.fate.kind = Fate::Kind::Undetermined;
            out.fate.reason = slow_reason;
            out.fate.direction_angle = std::arg(z);
        }
        out.elapsed = s;
    };

    std::size_t steps = 0;
    Complex k1 = gz;
    while (true) {
        if (s >= c.t_max || steps >= c.max_steps) {
            out.fate.kind = Fate::Kind::Undetermined;
            out.fate.reason = std::abs(z) > 1.5 * c.window_radius ? "unbounded-slow"
                                                                  : "budget-exhausted";
            archive_episode();
            // a completed large excursion may still certify remaining data
            out.elapsed = s;
            break;
        }

        bool escaping = std::abs(z) >= next_threshold || !current.times.empty();
        if (escaping) {
            double cap = c.blow_up_step_factor * std::abs(z) / std::max(std::abs(k1), 1e-300);
            dt = std::min(dt, cap);
        }
        dt = std::min({dt, dt_max, c.t_max - s + 1e-9});

        // one embedded step
        using D = Dopri5;
        const double step_dt = dt;
        Complex k2, k3, k4, k5, k6, k7, z_new;
        bool finite = true;
        {
            k2 = st.g(z + step_dt * (D::a21 * k1));
            k3 = st.g(z + step_dt * (D::a31 * k1 + D::a32 * k2));
            k4 = st.g(z + step_dt * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3));
            k5 = st.g(z + step_dt * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4));
            k6 = st.g(z + step_dt * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 +
                                     D::a65 * k5));
            z_new = z + step_dt * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 +
                                   D::b6 * k6);
            k7 = st.g(z_new);
            Complex err_c = step_dt * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 +
                                       D::e6 * k6 + D::e7 * k7);
            double sc = atol + c.rtol * std::max(std::abs(z), std::abs(z_new));
            double err = std::abs(err_c) / sc;
            finite = std::isfinite(z_new.real()) && std::isfinite(z_new.imag()) &&
                     std::isfinite(k7.real()) && std::isfinite(k7.imag());
            if (finite && err > 1.0) {
                dt = step_dt * std::max(0.2, 0.9 * std::pow(err, -0.2));
                ++steps;
                continue;
            }
            if (finite)
                dt = step_dt *
                     std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
        }
        ++steps;

        if (!finite) {
            // |F| left double range; morally at infinity
            finish_escape(true, "numerical-overflow");
            break;
        }

        double s_new = s + step_dt;
        double t0 = s, t1 = s_new;
        Complex zp = z, fp = k1, fn = k7;

        // dyadic threshold crossings, located on the dense output
        while (std::abs(z_new) >= next_threshold) {
            double target = next_threshold;
            double lo = t0, hi = t1;
            if (std::abs(zp) < target) {
                for (int it = 0; it < 60; ++it) {
                    double mid = 0.5 * (lo + hi);
                    if (std::abs(hermite(mid, t0, t1, zp, z_new, fp, fn)) < target) lo = mid;
                    else hi = mid;
                }
            } else {
                hi = t0;
            }
            current.radii.push_back(target);
            current.times.push_back(hi);
            next_threshold *= 2;
            if (next_threshold >= c.extrap_radius) current.hit_extrap_radius = true;
        }
        if (!current.times.empty() && std::abs(z_new) < 0.5 * rho0) archive_episode();

        path_len += std::abs(z_new - z);
        z = z_new;
        k1 = k7;
        s = s_new;
        record(s, z);

        if (std::abs(z) >= c.extrap_radius) {
            current.hit_extrap_radius = true;
            finish_escape(false, "unbounded-slow");
            break;
        }

        bool far_out = std::abs(z) >= c.escape_radius;

        // equilibrium capture
        if (!far_out) {
            bool captured = false;
            for (auto& ei : eqs) {
                const Equilibrium& e = *ei.eq;
                Complex w = z - e.location;
                double dist = std::abs(w);
                if (e.order == 1) {
                    double re = e.derivative_at.real();
                    bool contracting = direction == Direction::Forward ? re < 0 : re > 0;
                    if (contracting && dist <= c.capture_radius * (1 + std::abs(e.location)) &&
                        std::abs(k1) <= c.capture_field) {
                        out.fate.kind = Fate::Kind::ConvergesTo;
                        out.fate.equilibrium = e.id;
                        captured = true;
                        break;
                    }
                } else if (dist <= 1e-12 * (1 + std::abs(e.location))) {
                    out.fate.kind = Fate::Kind::ConvergesTo;
                    out.fate.equilibrium = e.id;
                    captured = true;
                    break;
                } else if (dist <= ei.r_lin) {
                    Complex lead = ei.lead_cm * int_pow(w, e.order);
                    Complex fw = st.sign * k1;
                    if (std::abs(fw - lead) <= 0.1 * std::abs(lead) &&
                        multiple_converges(w, ei.lead_cm, e.order, st.sign, ei.r_lin)) {
                        out.fate.kind = Fate::Kind::ConvergesTo;
                        out.fate.equilibrium = e.id;
                        captured = true;
                        break;
                    }
                }
            }
            if (captured) {
                archive_episode();
                out.elapsed = s;
                break;
            }
        }

        // winding bookkeeping and periodic return; the accumulators must see
        // every step including far excursions, or the lap count of large
        // loops comes out short
        if (c.detect_periodic) {
            for (auto& ei : eqs)
                ei.wind_acc += std::arg((z - ei.eq->location) / (zp - ei.eq->location));

            if (!left_neighborhood) {
                if (std::abs(z - z0) > 2 * r_sec) left_neighborhood = true;
            } else {
                // every crossing of the section plane is a return candidate;
                // the post-step sample can jump the section disk, so the
                // distance filter runs on the refined crossing point instead
                double a0 = along(zp), a1v = along(z);
                if (a0 * a1v < 0) {
                    double lo = t0, hi = t1;
                    for (int it = 0; it < 80; ++it) {
                        double mid = 0.5 * (lo + hi);
                        Complex zm = hermite(mid, t0, t1, zp, z, fp, fn);
                        if (along(zm) * a0 > 0) lo = mid;
                        else hi = mid;
                    }
                    Complex z_cross = hermite(0.5 * (lo + hi), t0, t1, zp, z, fp, fn);
                    Complex f_cross = st.g(z_cross);
                    double fdir = f_cross.real() * ghat.real() + f_cross.imag() * ghat.imag();
                    double residual = std::abs(z_cross - z0);
                    // a genuine return can only be measured down to the
                    // accumulated drift plus the dense-output localization
                    // error of the crossing
                    double tol = std::max(c.periodic_tol * (1 + std::abs(z0)),
                                          500 * c.rtol * (path_len + 1));
                    if (fdir > 0 && residual <= tol) {
                        int enclosed = -1;
                        double t_cross = 0.5 * (lo + hi);
                        double period = t_cross;
                        if (!eqs.empty()) {
                            for (auto& ei : eqs) {
                                double turns = std::abs(ei.wind_acc) / kTwoPi;
                                int laps = static_cast<int>(std::lround(turns));
                                if (laps >= 1 && std::abs(turns - laps) < 0.2) {
                                    enclosed = ei.eq->id;
                                    period = t_cross / laps;
                                    break;
                                }
                            }
                            if (enclosed < 0) continue;  // return without winding
                        }
                        out.fate.kind = Fate::Kind::PeriodicAround;
                        out.fate.equilibrium = enclosed;
                        out.fate.period = period;
                        out.fate.error_estimate = residual;
                        archive_episode();
                        out.elapsed = s;
                        break;
                    }
                }
            }
        }
    }

    if (out.fate.kind == Fate::Kind::NotComputed) {
        // loop exits that did not set a fate should not happen
        out.fate.kind = Fate::Kind::Undetermined;
        out.fate.reason = "internal";
    }
    out.elapsed = s;

    // Budget exits can still certify a completed excursion as a blow-up of the
    // shadowed boundary orbit; keep the honest Undetermined here and let the
    // separatrix layer consult the episode.
    return out;
}

}  // namespace

std::optional<BlowUpEstimate> detect_blow_up(const EscapeEpisode& ep) {
    const auto& t = ep.times;
    std::size_t n = t.size();
    if (n >= 2 && ep.overflow) {
        double d_last = t[n - 1] - t[n - 2];
        if (d_last <= 1e-12 * std::max(1.0, std::abs(t[n - 1])))
            return BlowUpEstimate{t[n - 1], 1e-12 * std::max(1.0, std::abs(t[n - 1]))};
    }
    if (n < 4) return std::nullopt;

    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) d[i] = t[i + 1] - t[i];

    double floor_v = 1e-14 * std::max(1.0, std::abs(t.back()));
    std::vector<double> est, spread;
    for (std::size_t j = 1; j < d.size(); ++j) {
        if (d[j - 1] <= 0) break;  // time increments below resolution
        double r = d[j] / d[j - 1];
        if (r >= 0.97) {
            est.clear();
            spread.clear();
            continue;
        }
        double e = t[j + 1] + d[j] * r / (1 - r);
        if (!est.empty()) spread.push_back(std::abs(e - est.back()));
        est.push_back(e);
    }
    double d_last = d.back();
    bool machine_converged = d_last <= 1e-13 * std::max(1.0, std::abs(t.back()));
    if (est.empty()) {
        if (machine_converged) return BlowUpEstimate{t.back(), floor_v};
        return std::nullopt;
    }

    // spreads contract over three consecutive thresholds, or sit at the
    // interpolation noise floor of the crossing times
    bool contracting = false;
    double noise = 1e-6 * std::max(1.0, std::abs(est.back()));
    if (spread.size() >= 3) {
        std::size_t m = spread.size();
        contracting = ((spread[m - 1] <= spread[m - 2] + floor_v) &&
                       (spread[m - 2] <= spread[m - 3] + floor_v)) ||
                      (spread[m - 1] <= noise && spread[m - 2] <= noise &&
                       spread[m - 3] <= noise);
    } else if (spread.size() >= 1 && machine_converged) {
        contracting = true;
    }
    if (!contracting && !machine_converged) return std::nullopt;

    double err = spread.empty() ? floor_v : std::max(spread.back(), floor_v);
    return BlowUpEstimate{est.back(), err};
}

std::string to_string(const Fate& f) {
    char buf[128];
    switch (f.kind) {
        case Fate::Kind::ConvergesTo:
            std::snprintf(buf, sizeof(buf), "ConvergesTo(%d)", f.equilibrium);
            return buf;
        case Fate::Kind::PeriodicAround:
            std::snprintf(buf, sizeof(buf), "PeriodicAround(%d, T=%.12g)", f.equilibrium, f.period);
            return buf;
        case Fate::Kind::BlowUp:
            std::snprintf(buf, sizeof(buf), "BlowUp(t*=%.12g +- %.3g)", f.blow_up_time,
                          f.error_estimate);
            return buf;
        case Fate::Kind::Undetermined: return "Undetermined(" + f.reason + ")";
        case Fate::Kind::NotComputed: return "NotComputed";
    }
    return "?";
}

Complex OrbitTrace::start() const {
    for (const auto& s : samples)
        if (s.t == 0) return s.z;
    return samples.empty() ? Complex{} : samples.front().z;
}

OrbitTrace integrate(const FieldExpr& f, Complex z0, Direction direction,
                     const IntegrationControls& controls, std::span<const Equilibrium> equilibria) {
    HalfResult half = integrate_half(f, z0, direction, controls, equilibria);
    OrbitTrace trace;
    if (direction == Direction::Forward) {
        trace.samples = std::move(half.samples);
        trace.forward_fate = half.fate;
        trace.forward_episode = std::move(half.episode);
        if (half.fate.kind == Fate::Kind::BlowUp) trace.t_plus = half.fate.blow_up_time;
    } else {
        trace.samples.reserve(half.samples.size());
        for (auto it = half.samples.rbegin(); it != half.samples.rend(); ++it)
            trace.samples.push_back({-it->t, it->z});
        Fate fate = half.fate;
        if (fate.kind == Fate::Kind::BlowUp) {
            fate.blow_up_time = -fate.blow_up_time;
            trace.t_minus = fate.blow_up_time;
        }
        trace.backward_fate = fate;
        trace.backward_episode = std::move(half.episode);
    }
    return trace;
}

OrbitTrace trace_orbit(const FieldExpr& f, Complex z0, const IntegrationControls& controls,
                       std::span<const Equilibrium> equilibria) {
    OrbitTrace back = integrate(f, z0, Direction::Backward, controls, equilibria);
    OrbitTrace fwd = integrate(f, z0, Direction::Forward, controls, equilibria);
    OrbitTrace trace;
    trace.samples = std::move(back.samples);
    if (!trace.samples.empty()) trace.samples.pop_back();  // drop duplicate z0
    trace.samples.insert(trace.samples.end(), fwd.samples.begin(), fwd.samples.end());
    trace.forward_fate = fwd.forward_fate;
    trace.backward_fate = back.backward_fate;
    trace.t_plus = fwd.t_plus;
    trace.t_minus = back.t_minus;
    trace.forward_episode = std::move(fwd.forward_episode);
    trace.backward_episode = std::move(back.backward_episode);
    return trace;
}

Complex trace_position(const FieldExpr& f, const OrbitTrace& trace, double t) {
    const auto& s = trace.samples;
    if (s.empty() || t < s.front().t || t > s.back().t)
        throw OutOfSpan("time outside the resolved trace span");
    auto it = std::lower_bound(s.begin(), s.end(), t,
                               [](const TimePoint& p, double v) { return p.t < v; });
    if (it == s.begin()) return it->z;
    if (it->t == t) return it->z;
    const TimePoint& hi = *it;
    const TimePoint& lo = *(it - 1);
    return hermite(t, lo.t, hi.t, lo.z, hi.z, f.eval(lo.z), f.eval(hi.z));
}

std::optional<Crossing> find_crossing(const FieldExpr& f, const OrbitTrace& trace,
                                      Segment segment, double angle_tol) {
    Complex dirv = segment.b - segment.a;
    double len = std::abs(dirv);
    if (len == 0) throw Error("degenerate segment");
    Complex dhat = dirv / len;

    for (int k = 0; k <= 64; ++k) {
        Complex p = segment.a + dirv * (static_cast<double>(k) / 64);
        Complex fp = f.eval(p);
        double m = std::abs(fp);
        if (m < 1e-300) throw NotTransversal("field vanishes on the segment");
        Complex rel = std::conj(dhat) * (fp / m);
        if (std::abs(rel.imag()) < angle_tol)
            throw NotTransversal("segment tangent to the field within angle_tol");
    }

    auto across = [&](Complex z) { return (std::conj(dhat) * (z - segment.a)).imag(); };
    auto within = [&](Complex z) {
        double u = (std::conj(dhat) * (z - segment.a)).real();
        return u >= -1e-9 * (1 + len) && u <= len + 1e-9 * (1 + len);
    };

    const auto& s = trace.samples;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        if (s[k + 1].t <= 0) continue;
        double ta = std::max(s[k].t, 0.0);
        Complex za = ta == s[k].t ? s[k].z : trace_position(f, trace, 0.0);
        Complex zb = s[k + 1].z;
        double s0 = across(za), s1 = across(zb);
        if (s0 == 0 && ta == 0) continue;  // starting on the line is not a crossing
        if (s0 * s1 > 0) continue;
        Complex fa = f.eval(za), fb = f.eval(zb);
        double lo = ta, hi = s[k + 1].t;
        Complex zc = zb;
        for (int it = 0; it < 120; ++it) {
            double mid = 0.5 * (lo + hi);
            zc = hermite(mid, ta, s[k + 1].t, za, zb, fa, fb);
            double sm = across(zc);
            if (std::abs(sm) <= 1e-12) { lo = hi = mid; break; }
            if (sm * s0 > 0) lo = mid;
            else hi = mid;
        }
        double tc = 0.5 * (lo + hi);
        zc = hermite(tc, ta, s[k + 1].t, za, zb, fa, fb);
        if (within(zc)) return Crossing{tc, zc};
    }
    return std::nullopt;
}

double pair_step(const FieldExpr& f, Direction direction, PairState& state, double& dt,
                 double rtol) {
    Stepper st{f, direction == Direction::Forward ? 1.0 : -1.0};
    using D = Dopri5;
    double atol = rtol;
    for (int attempt = 0; attempt < 60; ++attempt) {
        double h = dt;
        Complex za = state.a, zb = state.b;
        Complex a1 = st.g(za), b1 = st.g(zb);
        Complex a2 = st.g(za + h * (D::a21 * a1));
        Complex b2 = st.g(zb + h * (D::a21 * b1));
        Complex a3 = st.g(za + h * (D::a31 * a1 + D::a32 * a2));
        Complex b3 = st.g(zb + h * (D::a31 * b1 + D::a32 * b2));
        Complex a4 = st.g(za + h * (D::a41 * a1 + D::a42 * a2 + D::a43 * a3));
        Complex b4 = st.g(zb + h * (D::a41 * b1 + D::a42 * b2 + D::a43 * b3));
        Complex a5 = st.g(za + h * (D::a51 * a1 + D::a52 * a2 + D::a53 * a3 + D::a54 * a4));
        Complex b5 = st.g(zb + h * (D::a51 * b1 + D::a52 * b2 + D::a53 * b3 + D::a54 * b4));
        Complex a6 =
            st.g(za + h * (D::a61 * a1 + D::a62 * a2 + D::a63 * a3 + D::a64 * a4 + D::a65 * a5));
        Complex b6 =
            st.g(zb + h * (D::a61 * b1 + D::a62 * b2 + D::a63 * b3 + D::a64 * b4 + D::a65 * b5));
        Complex na = za + h * (D::b1 * a1 + D::b3 * a3 + D::b4 * a4 + D::b5 * a5 + D::b6 * a6);
        Complex nb = zb + h * (D::b1 * b1 + D::b3 * b3 + D::b4 * b4 + D::b5 * b5 + D::b6 * b6);
        Complex a7 = st.g(na), b7 = st.g(nb);
        if (!std::isfinite(na.real()) || !std::isfinite(na.imag()) ||
            !std::isfinite(nb.real()) || !std::isfinite(nb.imag()) ||
            !std::isfinite(a7.real()) || !std::isfinite(b7.real()) ||
            !std::isfinite(a7.imag()) || !std::isfinite(b7.imag()))
            return 0;
        Complex ea = h * (D::e1 * a1 + D::e3 * a3 + D::e4 * a4 + D::e5 * a5 + D::e6 * a6 +
                          D::e7 * a7);
        Complex eb = h * (D::e1 * b1 + D::e3 * b3 + D::e4 * b4 + D::e5 * b5 + D::e6 * b6 +
                          D::e7 * b7);
        double sca = atol + rtol * std::max(std::abs(za), std::abs(na));
        double scb = atol + rtol * std::max(std::abs(zb), std::abs(nb));
        double err = std::max(std::abs(ea) / sca, std::abs(eb) / scb);
        if (err > 1.0) {
            dt = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }
        state.a = na;
        state.b = nb;
        dt = h * std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
        return h;
    }
    return 0;
}

std::string orbit_csv(const OrbitTrace& trace) {
    std::string out = "t,re,im\n";
    char buf[128];
    for (const auto& p : trace.samples) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.t, p.z.real(), p.z.imag());
        out += buf;
    }
    return out;
}

}  // namespace holoflow
