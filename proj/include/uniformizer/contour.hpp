#pragma once

// Numerical derivatives of holomorphic samplers by Cauchy contour
// quadrature, the Schwarzian derivative built on top of them, and the
// weighted sup-norm  ||f||_{B_2} = sup (1-|z|^2)^2 |f(z)|  estimated on
// point grids.
//
// The trapezoid rule on a circle is spectrally accurate for holomorphic
// integrands; the error estimate comes from doubling the node count.

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "common.hpp"
#include "moebius.hpp"

namespace uniformizer {

struct DerivativeSet {
    std::vector<cplx> value; // value[k] = f^{(k)}(z), k = 0..max_order
    double error = 0.0;      // node-doubling estimate, worst coefficient
};

// f^{(k)}(z) = k!/(N r^k) sum_j f(z + r e^{i t_j}) e^{-i k t_j}  with
// t_j = 2 pi j / N.  Samples must be finite; a sampler throwing or
// returning NaN/inf signals that the contour escaped its domain.
inline DerivativeSet cauchy_derivatives(const Sampler& f, cplx z, double r,
                                        int max_order, int nodes = 64) {
    if (!(r > 0.0)) throw std::invalid_argument("cauchy_derivatives: radius must be positive");
    if (nodes < 16) nodes = 16;

    auto ring = [&](int n, std::vector<cplx>& out) {
        out.assign(n, cplx{});
        for (int j = 0; j < n; ++j) {
            double t = 2.0 * pi * j / n;
            cplx zj = z + r * cplx(std::cos(t), std::sin(t));
            cplx fj = f(zj);
            if (!is_finite(fj))
                throw std::domain_error("cauchy_derivatives: sampler not finite on the contour");
            out[j] = fj;
        }
    };

    auto coeffs = [&](const std::vector<cplx>& samples, int max_k) {
        const int n = static_cast<int>(samples.size());
        std::vector<cplx> ck(max_k + 1, cplx{});
        for (int k = 0; k <= max_k; ++k) {
            cplx acc{};
            for (int j = 0; j < n; ++j) {
                double t = -2.0 * pi * j * k / n;
                acc += samples[j] * cplx(std::cos(t), std::sin(t));
            }
            ck[k] = acc / static_cast<double>(n);
        }
        return ck; // ck[k] = f^{(k)}(z) r^k / k!
    };

    std::vector<cplx> s1, s2;
    ring(nodes, s1);
    ring(2 * nodes, s2);
    auto c1 = coeffs(s1, max_order);
    auto c2 = coeffs(s2, max_order);

    DerivativeSet out;
    out.value.resize(max_order + 1);
    double fact = 1.0, rk = 1.0;
    for (int k = 0; k <= max_order; ++k) {
        if (k > 0) { fact *= k; rk *= r; }
        out.value[k] = c2[k] * fact / rk;
        out.error = std::max(out.error, std::abs(c2[k] - c1[k]) * fact / rk);
    }
    return out;
}

struct SchwarzianValue {
    cplx value{};
    double error = 0.0;
};

// S_f = f'''/f' - (3/2) (f''/f')^2, from contour derivatives of order <= 3.
inline SchwarzianValue schwarzian(const Sampler& f, cplx z, double r, int nodes = 64) {
    DerivativeSet d = cauchy_derivatives(f, z, r, 3, nodes);
    cplx f1 = d.value[1], f2 = d.value[2], f3 = d.value[3];
    double scale = std::abs(f1);
    if (scale < 1e-12 * (1.0 + std::abs(f2) * r))
        throw std::domain_error("schwarzian: derivative vanishes at the evaluation point");
    cplx q = f2 / f1;
    SchwarzianValue s;
    s.value = f3 / f1 - 1.5 * q * q;
    // first-order error propagation through the quotients
    s.error = d.error / scale * (1.0 + 3.0 * std::abs(q)) * 4.0;
    return s;
}

// sup over the grid of (1-|z|^2)^2 |f(z)|.
inline double b2_norm_estimate(const Sampler& f, std::span<const cplx> grid) {
    double best = 0.0;
    for (cplx z : grid) {
        double r2 = abs2(z);
        if (r2 >= 1.0)
            throw std::domain_error("b2_norm_estimate: grid point outside the unit disc");
        double w = sqr(1.0 - r2);
        best = std::max(best, w * std::abs(f(z)));
    }
    return best;
}

// Points along equally spaced rays, r = 0, rmax/n, ..., rmax on each ray.
// Dense along radii, which is where extremal weighted sup-norms of
// classical univalent maps are attained.
inline std::vector<cplx> make_radial_grid(int rays, int per_ray, double rmax) {
    if (rays < 1 || per_ray < 2 || !(rmax > 0.0 && rmax < 1.0))
        throw std::invalid_argument("make_radial_grid: bad grid parameters");
    std::vector<cplx> grid;
    grid.reserve(static_cast<std::size_t>(rays) * per_ray);
    for (int a = 0; a < rays; ++a) {
        double t = 2.0 * pi * a / rays;
        cplx dir(std::cos(t), std::sin(t));
        for (int i = 0; i < per_ray; ++i) {
            double r = rmax * i / (per_ray - 1);
            grid.push_back(r * dir);
        }
    }
    return grid;
}

// b2 norm of the Schwarzian of f over a grid; the contour for each point
// stays inside the disc with radius shrink * (1 - |z|).
inline double b2_norm_of_schwarzian(const Sampler& f, std::span<const cplx> grid,
                                    double shrink = 0.4, int nodes = 64) {
    double best = 0.0;
    for (cplx z : grid) {
        double r = shrink * (1.0 - std::abs(z));
        SchwarzianValue s = schwarzian(f, z, r, nodes);
        double w = sqr(1.0 - abs2(z));
        best = std::max(best, w * std::abs(s.value));
    }
    return best;
}

} // namespace uniformizer
