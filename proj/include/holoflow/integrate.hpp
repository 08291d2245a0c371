#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "holoflow/equilibria.hpp"
#include "holoflow/field.hpp"
#include "holoflow/types.hpp"

namespace holoflow {

enum class Direction { Forward, Backward };

struct Fate {
    enum class Kind { ConvergesTo, PeriodicAround, BlowUp, Undetermined, NotComputed };
    Kind kind = Kind::NotComputed;
    int equilibrium = -1;        // ConvergesTo / PeriodicAround
    double period = 0;           // PeriodicAround
    double blow_up_time = 0;     // BlowUp: signed absolute flow time t*
    double error_estimate = 0;   // extrapolation spread / return residual
    double direction_angle = 0;  // BlowUp escape direction
    std::string reason;          // Undetermined

    bool is(Kind k) const { return kind == k; }
    bool converges_to(int id) const { return kind == Kind::ConvergesTo && equilibrium == id; }
};

std::string to_string(const Fate& f);

/// Dyadic |z| threshold crossings recorded while an orbit escapes; the raw
/// material for finite-time blow-up certification.
struct EscapeEpisode {
    std::vector<double> radii;   // geometric, factor 2
    std::vector<double> times;   // elapsed time within the half-trace, positive
    bool hit_extrap_radius = false;
    bool overflow = false;       // |F| or |z| left double range
};

struct BlowUpEstimate {
    double t_star = 0;  // elapsed time at blow-up, same clock as the episode
    double error = 0;   // extrapolation spread
};

/// Richardson extrapolation over the dyadic crossings. Absent when the
/// spreads fail to contract over three consecutive thresholds (slow escape).
std::optional<BlowUpEstimate> detect_blow_up(const EscapeEpisode& episode);

struct IntegrationControls {
    double rtol = 1e-10;
    double t_max = 1e6;
    std::size_t max_steps = 4000000;
    double escape_radius = 1e3;      // callers scale by window diameter
    double extrap_radius = 1e8;
    double capture_radius = 1e-8;    // simple equilibria
    double capture_field = 1e-8;
    double periodic_tol = 1e-8;
    double window_radius = 10.0;     // for the unbounded-slow diagnosis
    bool detect_periodic = true;
    bool record_samples = true;
    double blow_up_step_factor = 0.1;  // dt <= c*|z|/|F| while escaping
};

struct TimePoint {
    double t;
    Complex z;
};

/// One- or two-sided orbit through z0. Sample times are strictly increasing
/// signed flow times (backward halves carry negative t). t_plus is finite
/// exactly when forward_fate is BlowUp, symmetrically for t_minus.
struct OrbitTrace {
    std::vector<TimePoint> samples;
    Fate forward_fate;
    Fate backward_fate;
    double t_plus = std::numeric_limits<double>::infinity();
    double t_minus = -std::numeric_limits<double>::infinity();
    EscapeEpisode forward_episode;   // largest excursion seen on each side
    EscapeEpisode backward_episode;

    double resolved_t_min() const { return samples.empty() ? 0 : samples.front().t; }
    double resolved_t_max() const { return samples.empty() ? 0 : samples.back().t; }
    Complex start() const;
};

/// Integrate one direction with the adaptive embedded pair; terminates on a
/// Fate condition or budget exhaustion. Throws StartAtEquilibrium when z0 is
/// within the capture tolerance of an equilibrium.
OrbitTrace integrate(const FieldExpr& f, Complex z0, Direction direction,
                     const IntegrationControls& controls = {},
                     std::span<const Equilibrium> equilibria = {});

/// Both directions merged into one trace with t=0 at z0.
OrbitTrace trace_orbit(const FieldExpr& f, Complex z0,
                       const IntegrationControls& controls = {},
                       std::span<const Equilibrium> equilibria = {});

/// Interpolated state at time t (cubic Hermite between accepted steps).
Complex trace_position(const FieldExpr& f, const OrbitTrace& trace, double t);

struct Crossing {
    double t;
    Complex z;
};

/// Lockstep state for straddle tracing: two points integrated with a shared
/// step size so they bracket a boundary orbit between them.
struct PairState {
    Complex a, b;
};

/// One accepted adaptive step of dx/dt = +-F applied to both points of the
/// pair; dt carries the controller state across calls. Returns the accepted
/// step size, or 0 when an evaluation left the double range.
double pair_step(const FieldExpr& f, Direction direction, PairState& state, double& dt,
                 double rtol);

struct Segment {
    Complex a, b;
};

/// First transversal crossing of the segment after t=0, refined on the
/// signed distance to the segment line to 1e-12. Throws NotTransversal when
/// the field is tangent to the segment at sampled points.
std::optional<Crossing> find_crossing(const FieldExpr& f, const OrbitTrace& trace,
                                      Segment segment, double angle_tol = 1e-3);

/// CSV dump: header t,re,im, one row per accepted step, 17 significant digits.
std::string orbit_csv(const OrbitTrace& trace);

}  // namespace holoflow
