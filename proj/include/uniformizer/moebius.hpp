#pragma once

// Moebius transformations as SL(2,C) matrices acting on the Riemann sphere,
// specialised helpers for the unit-disc model of the hyperbolic plane.
//
// Conventions used throughout the library:
//   * matrices are kept normalised to det = 1 (tolerance 1e-12); the stored
//     entries together with lift_sign fix a choice of SL(2) representative
//     for the underlying PSL(2) map;
//   * Poincare density lambda(z) = 1 / (1 - |z|^2), so the metric
//     lambda(z)|dz| has curvature -4 and the distance below is
//     arctanh of the pseudo-hyperbolic distance;
//   * geodesic length of a loxodromic with real trace is
//     2 arccosh(|tr|/2)  (curvature -1 normalisation of the same geodesic).

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "common.hpp"

namespace uniformizer {

inline constexpr double det_tolerance = 1e-12;
inline constexpr double parabolic_tolerance = 1e-9;

// Point of the Riemann sphere: either a finite complex value or infinity.
struct PointExt {
    cplx value{0.0, 0.0};
    bool infinite = false;

    PointExt() = default;
    PointExt(cplx v) : value(v), infinite(false) {}
    static PointExt infinity() {
        PointExt p;
        p.infinite = true;
        p.value = cplx(0.0, 0.0);
        return p;
    }
};

struct MoebiusMap {
    cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};
    int lift_sign = +1; // which of the two SL(2) lifts this represents

    cplx det() const { return a * d - b * c; }
    cplx trace() const { return a + d; }

    static MoebiusMap identity() { return MoebiusMap{}; }

    MoebiusMap inverse() const {
        // for det = 1 the inverse is the adjugate; lift_sign is unchanged
        return MoebiusMap{d, -b, -c, a, lift_sign};
    }

    MoebiusMap negated() const {
        return MoebiusMap{-a, -b, -c, -d, -lift_sign};
    }

    // evaluation; the finite-input overload is the fast path and assumes the
    // pole -d/c is avoided (true on the disc for disc-preserving maps)
    cplx operator()(cplx z) const { return (a * z + b) / (c * z + d); }

    PointExt operator()(const PointExt& p) const {
        if (p.infinite) {
            if (std::abs(c) == 0.0) return PointExt::infinity();
            return PointExt(a / c);
        }
        cplx num = a * p.value + b;
        cplx den = c * p.value + d;
        if (std::abs(den) == 0.0) return PointExt::infinity();
        return PointExt(num / den);
    }
};

// Build a map from raw entries, rescaling so det = 1.  The square root
// branch with positive real part is used, so matrices that are already
// nearly unimodular keep their sign.
inline MoebiusMap make_moebius(cplx a, cplx b, cplx c, cplx d, int lift_sign = +1) {
    cplx det = a * d - b * c;
    if (std::abs(det) < 1e-100)
        throw std::invalid_argument("make_moebius: matrix is singular");
    cplx r = std::sqrt(det); // principal branch, Re r >= 0
    return MoebiusMap{a / r, b / r, c / r, d / r, lift_sign};
}

// Matrix product (composition of maps: (compose(f,g))(z) = f(g(z))).
// The product is renormalised so rounding drift in det cannot accumulate
// over long words; lift signs multiply.
inline MoebiusMap compose(const MoebiusMap& f, const MoebiusMap& g) {
    MoebiusMap h{f.a * g.a + f.b * g.c, f.a * g.b + f.b * g.d,
                 f.c * g.a + f.d * g.c, f.c * g.b + f.d * g.d,
                 f.lift_sign * g.lift_sign};
    cplx det = h.det();
    // Evaluating ad - bc at entry magnitude M carries O(M^2) ulps of
    // rounding, so below that floor the computed det says nothing about the
    // entries and dividing by its sqrt would only inject the noise into
    // them.  Renormalise only for drift the evaluation can actually see.
    double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                   std::max(1.0, std::abs(h.a) * std::abs(h.d) + std::abs(h.b) * std::abs(h.c));
    if (std::abs(det - 1.0) > floor) {
        // the principal sqrt stays near 1 and cannot flip the representative
        cplx r = std::sqrt(det);
        h.a /= r; h.b /= r; h.c /= r; h.d /= r;
    }
    return h;
}

inline PointExt apply(const MoebiusMap& m, const PointExt& p) { return m(p); }

// Finite-input fast path; callers are responsible for staying away from the
// pole -d/c (for disc-preserving maps the pole lies outside the closed disc).
inline cplx apply(const MoebiusMap& m, cplx z) { return m(z); }

enum class MapClass { identity, elliptic, parabolic, loxodromic };

inline bool is_identity(const MoebiusMap& m, double tol = parabolic_tolerance) {
    // identity in PSL(2): m = +I or -I
    double dplus = std::abs(m.a - 1.0) + std::abs(m.d - 1.0) + std::abs(m.b) + std::abs(m.c);
    double dminus = std::abs(m.a + 1.0) + std::abs(m.d + 1.0) + std::abs(m.b) + std::abs(m.c);
    return std::min(dplus, dminus) <= tol;
}

// Classification by the square of the trace (well defined in PSL(2)):
//   tr^2 in [0,4)  real       -> elliptic
//   tr^2 = 4 (within tol)     -> parabolic (or identity)
//   otherwise                 -> loxodromic
inline MapClass classify(const MoebiusMap& m, double tol = parabolic_tolerance) {
    if (is_identity(m, tol)) return MapClass::identity;
    cplx tr2 = m.trace() * m.trace();
    if (std::abs(tr2 - 4.0) <= tol) return MapClass::parabolic;
    if (std::abs(tr2.imag()) <= tol && tr2.real() >= 0.0 && tr2.real() < 4.0)
        return MapClass::elliptic;
    return MapClass::loxodromic;
}

// g'(z) = (cz + d)^{-2} for det = 1.
inline cplx derivative(const MoebiusMap& m, cplx z) {
    cplx den = m.c * z + m.d;
    if (std::abs(den) < 1e-14)
        throw std::domain_error("derivative: evaluation at the pole of the map");
    cplx inv = 1.0 / den;
    return inv * inv;
}

// lambda(z) = 1/(1-|z|^2); only defined inside the open unit disc.
inline double poincare_density(cplx z) {
    double r2 = abs2(z);
    if (r2 >= 1.0)
        throw std::domain_error("poincare_density: point not in the open unit disc");
    return 1.0 / (1.0 - r2);
}

// |(z-w)/(1-conj(z)w)|, the Moebius-invariant pseudo-distance.
inline double pseudo_distance(cplx z, cplx w) {
    return std::abs((z - w) / (1.0 - std::conj(z) * w));
}

// Distance of the metric lambda|dz|: arctanh of the pseudo-distance.
inline double hyperbolic_distance(cplx z, cplx w) {
    if (abs2(z) >= 1.0 || abs2(w) >= 1.0)
        throw std::domain_error("hyperbolic_distance: arguments must lie in the open unit disc");
    return std::atanh(pseudo_distance(z, w));
}

using Sampler = std::function<cplx(cplx)>;

// (f . phi)(z) * phi'(z)^s.  For non-integer s the power of phi' needs a
// branch of log phi'; the overload without a branch argument therefore
// accepts integer exponents only.  Factor-of-automorphy code supplies
// branch data continued along group words (see factors.hpp).
inline cplx pullback(const Sampler& f, const MoebiusMap& phi, double s, cplx z) {
    if (std::abs(s - std::round(s)) > 1e-12)
        throw std::domain_error("pullback: non-integer exponent requires branch data");
    long n = static_cast<long>(std::llround(s));
    cplx der = derivative(phi, z);
    cplx p{1.0, 0.0};
    cplx base = n >= 0 ? der : 1.0 / der;
    for (long k = 0; k < std::labs(n); ++k) p *= base;
    return f(phi(z)) * p;
}

inline cplx pullback(const Sampler& f, const MoebiusMap& phi, double s, cplx z,
                     cplx log_phi_prime) {
    return f(phi(z)) * std::exp(s * log_phi_prime);
}

} // namespace uniformizer
