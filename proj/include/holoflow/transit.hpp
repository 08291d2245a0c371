#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "holoflow/field.hpp"
#include "holoflow/integrate.hpp"
#include "holoflow/types.hpp"

namespace holoflow {

enum class TransitMethod { Clock, Contour };

struct TransitResult {
    Complex value{};               // imaginary part is a residual diagnostic
    TransitMethod method = TransitMethod::Contour;
    double error_estimate = 0;
    std::string path_descriptor;
};

struct ContourOptions {
    double abs_tol = 1e-12;        // panels split until the two-level
    double rel_tol = 1e-10;        // difference is below max(abs, rel*|value|)
    double pole_guard = 0;         // 0 disables the geometric guard
    std::span<const Complex> zeros{};  // known zeros of F for the guard
};

/// Integral of 1/F along the straight-segment path through the given points,
/// by adaptive composite Gauss-Kronrod quadrature. Throws PoleProximity when
/// a known zero sits within pole_guard of the path.
TransitResult contour_integral_reciprocal(const FieldExpr& f, std::span<const Complex> path,
                                          const ContourOptions& opt = {});

/// value = t2 - t1 exactly; throws OutOfSpan outside the resolved trace span.
TransitResult transit_time_clock(const OrbitTrace& trace, double t1, double t2);

/// |contour integral along the trace polyline on [t1, t2] - (t2 - t1)|.
/// The polyline is the accepted steps densified by one Hermite midpoint per
/// step.
double clock_contour_check(const FieldExpr& f, const OrbitTrace& trace, double t1, double t2,
                           const ContourOptions& opt = {});

/// Trace polyline restricted to [t1, t2] with one midpoint per step.
std::vector<Complex> densified_polyline(const FieldExpr& f, const OrbitTrace& trace,
                                        double t1, double t2);

/// Integral of 1/F over the positively oriented circle |z-a| = radius by
/// trapezoid doubling (spectrally accurate for periodic integrands). Throws
/// PoleProximity when the disk holds more zeros than the one at a.
Complex residue_period(const FieldExpr& f, Complex a, double radius);

enum class EscapeCoord { RealPart, AbsValue };

struct ProbePoint {
    double threshold;
    double cumulative_time;     // clock time from the anchor crossing
    std::optional<double> comparator;
};

/// Cumulative clock times at escape-coordinate checkpoints along a trace
/// whose relevant fate is Undetermined (slow escape). The anchor is the
/// first crossing of `anchor` in the escape direction; checkpoints must be
/// monotone beyond it. Throws NotEscaping otherwise.
std::vector<ProbePoint> divergence_probe(const FieldExpr& f, const OrbitTrace& trace,
                                         Direction side, EscapeCoord coord, double anchor,
                                         std::span<const double> checkpoints,
                                         const std::function<double(double)>* comparator = nullptr);

/// Adaptive quadrature of a real integrand (used for registered comparators).
double quad_real(const std::function<double(double)>& fn, double a, double b,
                 double tol = 1e-10);

}  // namespace holoflow
