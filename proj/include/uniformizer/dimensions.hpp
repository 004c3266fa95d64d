#pragma once

// Dimension bookkeeping for spaces of weight-s cusp forms on surfaces of
// finite type (g, n), and the arithmetic audit of boundary strata reached
// by pinching curves.
//
//   dim = (2s-1)(g-1) + n [s],   [s] = greatest integer strictly below s,
//
// so [s] = s - 1 for integral s.  Pinching k curves drops the dimension by
// exactly k: a nonseparating pinch (g,n) -> (g-1, n+2) and a separating
// pinch (g,n) -> (g1,n1) + (g2,n2) with g1+g2 = g, n1+n2 = n+2 each lose 1,
// as does the hyperbolic area ledger 2 pi (2g-2+n) stay exactly balanced.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "common.hpp"

namespace uniformizer {

struct SurfaceType {
    int genus = 0;
    int punctures = 0;
};

inline bool is_stable(SurfaceType t) {
    return t.genus >= 0 && t.punctures >= 0 && 2 * t.genus - 2 + t.punctures > 0;
}

// Greatest integer strictly smaller than s.
inline long floor_strict(double s) {
    double fl = std::floor(s);
    if (s == fl) return static_cast<long>(fl) - 1;
    return static_cast<long>(fl);
}

// (2s-1)(g-1) + n [s]; requires a stable type and s > 1.  The value must be
// a nonnegative integer, anything else is rejected rather than rounded.
inline long dim_cusp_forms(SurfaceType t, double s) {
    if (!is_stable(t))
        throw std::domain_error("dim_cusp_forms: surface type is not stable");
    if (!(s > 1.0))
        throw std::domain_error("dim_cusp_forms: weight must exceed 1");
    double v = (2.0 * s - 1.0) * (t.genus - 1) +
               static_cast<double>(t.punctures) * static_cast<double>(floor_strict(s));
    double r = std::round(v);
    if (std::abs(v - r) > 1e-9)
        throw std::domain_error("dim_cusp_forms: formula value is not an integer for this weight");
    if (r < 0.0)
        throw std::domain_error("dim_cusp_forms: formula value is negative");
    return static_cast<long>(r);
}

// h^0 of a line bundle of degree deg on a closed genus-g surface, in the
// topological range deg >= 2g-1 where h^0 = deg + 1 - g exactly.
inline long riemann_roch_h0(long deg, int g) {
    if (g < 0) throw std::invalid_argument("riemann_roch_h0: negative genus");
    if (deg < 2L * g - 1)
        throw std::domain_error("riemann_roch_h0: degree below the topological range 2g-1");
    return deg + 1 - g;
}

// The canonical bundle (degree 2g-2) sits below the topological range; its
// section count h^0(K) = g is handled as the classical special case.
inline long canonical_sections(int g) {
    if (g < 0) throw std::invalid_argument("canonical_sections: negative genus");
    return g;
}

// Area of the curvature -1 hyperbolic metric: 2 pi (2g - 2 + n).
inline double hyperbolic_area(SurfaceType t) {
    if (!is_stable(t))
        throw std::domain_error("hyperbolic_area: surface type is not stable");
    return 2.0 * pi * (2 * t.genus - 2 + t.punctures);
}

// ---------------------------------------------------------------------------
// pinch plans

struct PinchMove {
    bool separating = false;
    int part = 0; // index of the part being pinched
    SurfaceType child1{}, child2{}; // used by separating moves
};

using PinchPlan = std::vector<PinchMove>;

// Apply a plan to the starting type, validating every move.  Each move must
// name an existing part and leave every resulting part stable, which is
// what rejects over-pinching.
inline std::vector<SurfaceType> apply_pinch_plan(SurfaceType t, const PinchPlan& plan) {
    if (!is_stable(t))
        throw std::domain_error("pinch plan: starting type is not stable");
    std::vector<SurfaceType> parts{t};
    for (const PinchMove& mv : plan) {
        if (mv.part < 0 || mv.part >= static_cast<int>(parts.size()))
            throw std::invalid_argument("pinch plan: move names a nonexistent part");
        SurfaceType p = parts[mv.part];
        if (!mv.separating) {
            if (p.genus < 1)
                throw std::domain_error("pinch plan: nonseparating pinch needs genus >= 1");
            parts[mv.part] = SurfaceType{p.genus - 1, p.punctures + 2};
            if (!is_stable(parts[mv.part]))
                throw std::domain_error("pinch plan: move produces an unstable part");
        } else {
            if (mv.child1.genus + mv.child2.genus != p.genus ||
                mv.child1.punctures + mv.child2.punctures != p.punctures + 2 ||
                mv.child1.genus < 0 || mv.child2.genus < 0 ||
                mv.child1.punctures < 0 || mv.child2.punctures < 0)
                throw std::invalid_argument("pinch plan: separating children do not add up");
            if (!is_stable(mv.child1) || !is_stable(mv.child2))
                throw std::domain_error("pinch plan: move produces an unstable part");
            parts[mv.part] = mv.child1;
            parts.push_back(mv.child2);
        }
    }
    return parts;
}

// Dimension on the boundary stratum reached by pinching |plan| curves:
// dim - (number of moves), cross-checked bottom-up against the sum of the
// part dimensions.  Integer weight s >= 2 keeps every part's formula
// integral.
inline long boundary_dimension(SurfaceType t, int s, const PinchPlan& plan) {
    if (s < 2) throw std::domain_error("boundary_dimension: integer weight s >= 2 required");
    std::vector<SurfaceType> parts = apply_pinch_plan(t, plan);
    long top_down = dim_cusp_forms(t, static_cast<double>(s)) - static_cast<long>(plan.size());
    long bottom_up = 0;
    for (SurfaceType p : parts) bottom_up += dim_cusp_forms(p, static_cast<double>(s));
    if (top_down != bottom_up)
        throw std::logic_error("boundary_dimension: top-down and bottom-up counts disagree");
    return top_down;
}

// Total area of the plan's parts equals the starting area exactly.
inline bool area_conservation_check(SurfaceType t, const PinchPlan& plan) {
    std::vector<SurfaceType> parts = apply_pinch_plan(t, plan);
    double total = 0.0;
    for (SurfaceType p : parts) total += hyperbolic_area(p);
    return std::abs(total - hyperbolic_area(t)) <= 1e-9 * hyperbolic_area(t);
}

} // namespace uniformizer
