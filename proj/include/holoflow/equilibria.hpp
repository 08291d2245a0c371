#pragma once

#include <optional>
#include <span>
#include <vector>

#include "holoflow/field.hpp"
#include "holoflow/types.hpp"

namespace holoflow {

enum class EqClass { Center, StableNode, UnstableNode, StableFocus, UnstableFocus, Multiple };

const char* to_string(EqClass c);

struct Equilibrium {
    int id = -1;                       // index after lexicographic sort
    Complex location{};
    int order = 1;                     // multiplicity m of the zero
    EqClass cls = EqClass::Multiple;
    std::optional<double> period;      // centers only, |2pi / Im F'(a)|
    std::optional<std::vector<double>> sector_directions;  // multiple only, 2m-2 angles
    Complex derivative_at{};           // F'(a)
    Complex leading_coefficient{};     // F^(m)(a)
    bool near_degenerate = false;      // 1e-10 < |Re l|/|l| < 1e-6

    bool stable() const { return cls == EqClass::StableNode || cls == EqClass::StableFocus; }
    bool unstable() const { return cls == EqClass::UnstableNode || cls == EqClass::UnstableFocus; }
};

struct EquilibriaOptions {
    double zero_tol = 1e-10;       // scaled by (1 + window field scale)
    double deriv_tol = 1e-8;       // scaled by k! and field scale
    double center_tol = 1e-10;     // |Re l| <= center_tol*|l| classifies Center
    double near_degenerate_tol = 1e-6;
    int max_order = 12;
    double field_scale = 1.0;      // typical |F| magnitude over the window
};

/// All zeros of F strictly inside the window, polished to residual <= 1e-12
/// and validated against the argument-principle count over the boundary.
/// Throws WindingMismatch when the counts disagree, NonConvergence when
/// polishing stalls.
std::vector<Complex> find_zeros(const FieldExpr& f, Window window,
                                const EquilibriaOptions& opt = {});

/// Number of zeros (with multiplicity) inside the window by the argument
/// principle: adaptive log-derivative sum over the boundary, rounded.
int argument_principle_count(const FieldExpr& f, Window window);

/// Same count over an arbitrary closed polyline (last point joins the first).
int winding_count_polyline(const FieldExpr& f, const std::vector<Complex>& loop);

/// Smallest k >= 1 with |F^(k)(a)| above the derivative tolerance; throws
/// OrderOverflow past opt.max_order.
int zero_order(const FieldExpr& f, Complex a, const EquilibriaOptions& opt = {});

/// Classify a polished zero: order >= 2 gives Multiple with sector
/// directions, order 1 is decided by lambda = F'(a).
Equilibrium classify(const FieldExpr& f, Complex a, const EquilibriaOptions& opt = {});

/// T(a) = |2pi / Im F'(a)| for a center, cross-checked against the residue
/// quadrature of 1/F to 1e-9 relative. Throws NotACenter otherwise.
double period(const FieldExpr& f, Complex a, const EquilibriaOptions& opt = {});

/// The 2m-2 definite directions {(l*pi - arg F^(m)(a))/(m-1) mod 2pi},
/// sorted ascending. Throws NotMultiple when m == 1.
std::vector<double> sector_directions(const FieldExpr& f, Complex a, int m,
                                      const EquilibriaOptions& opt = {});

/// find_zeros + classify with ids assigned in lexicographic order.
std::vector<Equilibrium> find_equilibria(const FieldExpr& f, Window window,
                                         const EquilibriaOptions& opt = {});

/// Typical |F| over the window, sampled on a coarse grid; used to scale
/// tolerances.
double field_scale(const FieldExpr& f, Window window);

}  // namespace holoflow
