#pragma once

// Quadrature domains over the unit disc.
//
// The workhorse is a polar tensor grid whose rings are equally spaced in
// hyperbolic radius t = arctanh r.  Weights are exact Euclidean cell areas,
// so integrating 1 over the covered disc is exact; the Poincare density at
// a node is cached as cosh^2(t), which stays finite and accurate where the
// naive 1/(1-|z|^2) would lose all precision.
//
// Every grid carries an embedded coarse companion (half the cells in each
// direction, same radial extent).  Integrators evaluate on both and report
// |fine - coarse| as the error estimate.  Refining a grid doubles the cell
// counts at fixed pitch, which *extends* the radial reach: convergent
// integrals are insensitive to the extension while divergent ones keep
// growing, which is exactly the divergence detector used downstream.
//
// A Monte-Carlo fallback grid (seeded, uniform in area) is provided for
// cross-checks; it is the only place randomness enters the library.

#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"
#include "moebius.hpp"

namespace uniformizer {

struct QuadratureDomain {
    std::vector<cplx> nodes;
    std::vector<double> weights; // Euclidean cell areas
    std::vector<double> lambda;  // Poincare density at each node
    std::string tail_note;       // what was left out (radial tail, cusp cutoff)
    double excluded_mass_bound = 0.0; // crude bound on omitted lambda^2-mass
    std::shared_ptr<QuadratureDomain> coarse; // companion for error estimates

    double total_weight() const {
        return block_sum<double>(weights.size(), [&](std::size_t i) { return weights[i]; });
    }
};

inline constexpr double default_radial_pitch = 0.05;

namespace detail {

// sech^2 t, computed without forming tanh t (which rounds to 1 for large t).
inline double sech2(double t) {
    double c = std::cosh(t);
    return 1.0 / (c * c);
}

inline QuadratureDomain disc_grid_raw(int radial_cells, int angular_cells, double pitch) {
    if (radial_cells < 1 || angular_cells < 4)
        throw std::invalid_argument("disc_grid: need at least 1 radial and 4 angular cells");
    if (!(pitch > 0.0) || pitch * radial_cells > 18.0)
        throw std::invalid_argument("disc_grid: radial extent out of range (pitch * cells must be in (0, 18])");

    QuadratureDomain q;
    q.nodes.reserve(static_cast<std::size_t>(radial_cells) * angular_cells);
    q.weights.reserve(q.nodes.capacity());
    q.lambda.reserve(q.nodes.capacity());

    for (int i = 0; i < radial_cells; ++i) {
        double t0 = i * pitch, t1 = (i + 1) * pitch, tm = (i + 0.5) * pitch;
        // r1^2 - r0^2 = sech^2 t0 - sech^2 t1, exact and stable
        double ring_area = pi * (sech2(t0) - sech2(t1));
        double cell = ring_area / angular_cells;
        double r = std::tanh(tm);
        double cm = std::cosh(tm);
        double lam = cm * cm;
        for (int j = 0; j < angular_cells; ++j) {
            double th = 2.0 * pi * (j + 0.5) / angular_cells;
            q.nodes.emplace_back(r * std::cos(th), r * std::sin(th));
            q.weights.push_back(cell);
            q.lambda.push_back(lam);
        }
    }
    double tmax = radial_cells * pitch;
    q.tail_note = "annulus arctanh|z| > " + std::to_string(tmax) + " omitted";
    q.excluded_mass_bound = pi * sech2(tmax); // Euclidean area of the tail
    return q;
}

} // namespace detail

// Full-disc grid.  radial_cells * pitch is the hyperbolic radius covered.
inline QuadratureDomain disc_grid(int radial_cells, int angular_cells,
                                  double pitch = default_radial_pitch,
                                  bool with_coarse = true) {
    QuadratureDomain q = detail::disc_grid_raw(radial_cells, angular_cells, pitch);
    if (with_coarse && radial_cells >= 2 && angular_cells >= 8) {
        q.coarse = std::make_shared<QuadratureDomain>(
            detail::disc_grid_raw(radial_cells / 2, angular_cells / 2, 2.0 * pitch));
    }
    return q;
}

// One refinement step: double the cell counts at fixed pitch (extends the
// radial reach).  Used by divergence detection.
inline QuadratureDomain refine_extent(int radial_cells, int angular_cells,
                                      double pitch = default_radial_pitch) {
    return disc_grid(2 * radial_cells, 2 * angular_cells, pitch);
}

// Seeded Monte-Carlo fallback: `samples` points uniform in area on the disc
// of hyperbolic radius tmax, weight pi r^2 / n each.  The coarse companion
// is the first half of the sample, so the error estimate reflects the
// sampling noise.
inline QuadratureDomain monte_carlo_grid(int samples, unsigned long seed, double tmax = 12.0) {
    if (samples < 16) throw std::invalid_argument("monte_carlo_grid: too few samples");
    double rmax = std::tanh(tmax);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    QuadratureDomain q;
    q.nodes.resize(samples);
    q.weights.assign(samples, pi * rmax * rmax / samples);
    q.lambda.resize(samples);
    for (int i = 0; i < samples; ++i) {
        double r = rmax * std::sqrt(uni(rng));
        double th = 2.0 * pi * uni(rng);
        q.nodes[i] = cplx(r * std::cos(th), r * std::sin(th));
        q.lambda[i] = 1.0 / (1.0 - r * r);
    }
    q.tail_note = "monte-carlo sample, disc of radius tanh(" + std::to_string(tmax) + ")";
    auto half = std::make_shared<QuadratureDomain>();
    int h = samples / 2;
    half->nodes.assign(q.nodes.begin(), q.nodes.begin() + h);
    half->lambda.assign(q.lambda.begin(), q.lambda.begin() + h);
    half->weights.assign(h, pi * rmax * rmax / h);
    q.coarse = half;
    return q;
}

struct Integral {
    cplx value{};
    double error = 0.0;
};

struct RealIntegral {
    double value = 0.0;
    double error = 0.0;
};

// Integrate F(node, lambda(node)) over the domain.  F is evaluated on the
// fine grid and, when available, on the coarse companion for the estimate.
template <class F>
Integral integrate(const QuadratureDomain& q, F&& f) {
    Integral out;
    out.value = block_sum<cplx>(q.nodes.size(), [&](std::size_t i) {
        return q.weights[i] * f(q.nodes[i], q.lambda[i]);
    });
    if (q.coarse) {
        const QuadratureDomain& c = *q.coarse;
        cplx cv = block_sum<cplx>(c.nodes.size(), [&](std::size_t i) {
            return c.weights[i] * f(c.nodes[i], c.lambda[i]);
        });
        out.error = std::abs(out.value - cv);
    }
    return out;
}

template <class F>
RealIntegral integrate_real(const QuadratureDomain& q, F&& f) {
    RealIntegral out;
    out.value = block_sum<double>(q.nodes.size(), [&](std::size_t i) {
        return q.weights[i] * f(q.nodes[i], q.lambda[i]);
    });
    if (q.coarse) {
        const QuadratureDomain& c = *q.coarse;
        double cv = block_sum<double>(c.nodes.size(), [&](std::size_t i) {
            return c.weights[i] * f(c.nodes[i], c.lambda[i]);
        });
        out.error = std::abs(out.value - cv);
    }
    return out;
}

} // namespace uniformizer
