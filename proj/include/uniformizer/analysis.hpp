#pragma once

// Weighted Bergman analysis on the unit disc and its automorphic
// counterparts for a Fuchsian group.
//
// Conventions (lambda(z) = 1/(1-|z|^2) throughout):
//   * weighted kernel   K_s(z,w) = (2s-1) pi^{s-1} ( pi (1 - z conj w)^2 )^{-s}
//                               = ((2s-1)/pi) (1 - z conj w)^{-2s},
//     reproducing on s-weighted holomorphic functions; K_2(0,0) = 3/pi;
//   * kernel mass       int_D lambda^{2-s} |K_s(., w)| = c_s lambda(w)^s
//     with c_s = (2s-1)/(s-1);
//   * Poincare mass     int_D lambda^{2-s} = pi/(s-1), finite iff s > 1;
//   * series            Theta[h](z) = sum_g h(gz) rho_g(z)^{-1}, summed in
//     shells of constant word length, with the last shell's magnitude sum
//     reported as the truncation tail;
//   * norms             ||f||_{L^p_s} = ( int lambda^{2-ps} |f|^p )^{1/p},
//                       ||f||_{L^inf_s} = sup lambda^{-s} |f|;
//   * pairing           <f,g> = int f conj(g) lambda^{2-2s};
//   * projection        (beta f)(z) = int lambda^{2-2s}(w) K_s(z,w) f(w) dA(w);
//   * kernel average    alpha_s(z,w) = sum_g rho_g(z)^{-1} K_s(gz, w), whose
//     diagonal controls the embedding constant sup lambda^{-2s} alpha_s(z,z).

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "common.hpp"
#include "factors.hpp"
#include "fuchsian.hpp"
#include "moebius.hpp"
#include "quadrature.hpp"

namespace uniformizer {

namespace detail {

inline cplx power_int(cplx base, long n) {
    cplx b = n >= 0 ? base : 1.0 / base;
    long k = n >= 0 ? n : -n;
    cplx acc{1.0, 0.0};
    while (k > 0) {
        if (k & 1) acc *= b;
        b *= b;
        k >>= 1;
    }
    return acc;
}

inline cplx horner(std::span<const cplx> coeffs, cplx z) {
    cplx v{0.0, 0.0};
    for (std::size_t i = coeffs.size(); i-- > 0;) v = v * z + coeffs[i];
    return v;
}

// kernel evaluation without the open-disc guard.  Group translates of an
// interior point can round onto the unit circle for nearly parabolic
// elements; the kernel value stays finite there as long as the other
// argument is interior (|1 - z conj(w)| >= 1 - |z||w| > 0), so summation
// over translates must not reject them.
inline cplx kernel_term(cplx z, cplx w, double s) {
    cplx base = 1.0 - z * std::conj(w); // Re(base) > 0: principal power is safe
    return ((2.0 * s - 1.0) / pi) * std::exp(-2.0 * s * std::log(base));
}

} // namespace detail

inline double c_s(double s) {
    if (std::abs(s - 1.0) < 1e-12)
        throw std::domain_error("c_s: pole at s = 1");
    if (!(s > 1.0))
        throw std::domain_error("c_s: defined for s > 1");
    return (2.0 * s - 1.0) / (s - 1.0);
}

inline cplx bergman_kernel(cplx z, cplx w, double s) {
    if (abs2(z) >= 1.0 || abs2(w) >= 1.0)
        throw std::domain_error("bergman_kernel: arguments must lie in the open unit disc");
    if (!(s > 1.0))
        throw std::domain_error("bergman_kernel: weight must exceed 1");
    return detail::kernel_term(z, w, s);
}

// ---------------------------------------------------------------------------
// seed polynomials, form specifications

struct FormSpec {
    std::vector<cplx> seed; // polynomial coefficients, ascending degree
    std::shared_ptr<const EnumeratedGroup> enumeration;
    std::shared_ptr<const AutomorphyFactor> factor;
    double s = 2.0;
};

inline void validate_form(const FormSpec& f) {
    if (!f.enumeration || !f.factor)
        throw std::invalid_argument("form: enumeration and factor are required");
    if (!(f.s >= 2.0))
        throw std::invalid_argument("form: weight must be at least 2");
    auto sp = f.factor->s_parameter();
    if (!sp)
        throw std::invalid_argument("form: factor is not an s-factor");
    if (std::abs(*sp - f.s) > 1e-12)
        throw std::invalid_argument("form: factor weight does not match the form weight");
    const auto& eg = f.enumeration->group.generators;
    const auto& fg = f.factor->group->generators;
    if (eg.size() != fg.size())
        throw std::invalid_argument("form: factor and enumeration use different groups");
    for (std::size_t i = 0; i < eg.size(); ++i)
        if (std::abs(eg[i].a - fg[i].a) + std::abs(eg[i].b - fg[i].b) +
            std::abs(eg[i].c - fg[i].c) + std::abs(eg[i].d - fg[i].d) > 1e-12)
            throw std::invalid_argument("form: factor and enumeration use different groups");
}

struct ThetaValue {
    cplx value{};
    double tail_estimate = 0.0;      // magnitude sum of the last shell
    bool converged = true;           // false if shell sums stopped decaying
    std::vector<double> shell_sums;  // magnitude sums per word length
};

namespace detail {

struct ShellAccum {
    cplx sum{};
    double abs_sum = 0.0;
    ShellAccum& operator+=(const ShellAccum& o) {
        sum += o.sum;
        abs_sum += o.abs_sum;
        return *this;
    }
};

// One shell of Theta[h](z): elements [lo, hi) of the enumeration.
// Fast path for canonical integer weights: rho_g(z)^{-1} = (c z + d)^{-2s}.
inline ShellAccum theta_shell(const FormSpec& f, cplx z, std::size_t lo, std::size_t hi,
                              bool fast, long two_s) {
    const auto& els = f.enumeration->elements;
    const auto& words = f.enumeration->words;
    std::span<const cplx> seed(f.seed);
    return block_sum<ShellAccum>(hi - lo, [&, lo](std::size_t k) {
        const std::size_t i = lo + k;
        const MoebiusMap& m = els[i];
        ShellAccum acc;
        cplx den = m.c * z + m.d;
        cplx inv = 1.0 / den;
        cplx gz = (m.a * z + m.b) * inv;
        cplx rho_inv;
        if (fast) {
            rho_inv = power_int(inv, two_s);
        } else {
            rho_inv = 1.0 / f.factor->evaluate_on_map(m, words[i], z);
        }
        cplx term = horner(seed, gz) * rho_inv;
        acc.sum = term;
        acc.abs_sum = std::abs(term);
        return acc;
    });
}

inline bool fast_theta_path(const FormSpec& f) {
    return f.factor->form == AutomorphyFactor::Form::canonical && f.factor->integer_weight();
}

} // namespace detail

// Theta[h](z) = sum over the enumeration of h(gz) rho_g(z)^{-1}, with shell
// bookkeeping.  The tail estimate is the magnitude sum of the deepest shell;
// convergence is flagged false when the last shells stop decaying.
inline ThetaValue theta_series(const FormSpec& f, cplx z) {
    validate_form(f);
    if (abs2(z) >= 1.0)
        throw std::domain_error("theta_series: point not in the open unit disc");
    const auto& off = f.enumeration->shell_offsets;
    const bool fast = detail::fast_theta_path(f);
    const long two_s = static_cast<long>(std::llround(2.0 * f.s));

    ThetaValue out;
    for (std::size_t sh = 0; sh + 1 < off.size(); ++sh) {
        detail::ShellAccum acc = detail::theta_shell(f, z, off[sh], off[sh + 1], fast, two_s);
        out.value += acc.sum;
        out.shell_sums.push_back(acc.abs_sum);
    }
    const std::size_t n = out.shell_sums.size();
    out.tail_estimate = n > 0 ? out.shell_sums.back() : 0.0;
    if (n >= 3) {
        out.converged = out.shell_sums[n - 1] < out.shell_sums[n - 2] &&
                        out.shell_sums[n - 2] < out.shell_sums[n - 3];
    }
    return out;
}

// Theta on every node of a grid (and its coarse companion), parallel over
// nodes; shells are folded per node, only value and tail are kept.
struct ThetaField {
    std::vector<cplx> fine, coarse;
    std::vector<double> fine_tail; // per-node truncation tail on the fine grid
    double max_tail = 0.0;
    bool converged = true;
};

inline ThetaField theta_on_domain(const FormSpec& f, const QuadratureDomain& q) {
    validate_form(f);
    const auto& off = f.enumeration->shell_offsets;
    const bool fast = detail::fast_theta_path(f);
    const long two_s = static_cast<long>(std::llround(2.0 * f.s));
    const std::size_t nshells = off.size() - 1;

    ThetaField out;
    auto eval_nodes = [&](const std::vector<cplx>& nodes, std::vector<cplx>& vals,
                          std::vector<double>* keep_tails) {
        vals.resize(nodes.size());
        std::vector<double> tails(nodes.size(), 0.0);
        std::vector<std::uint8_t> conv(nodes.size(), 1);
        block_map(vals, [&](std::size_t n) {
            cplx z = nodes[n];
            cplx total{};
            double last = 0.0, prev = 0.0, prev2 = 0.0;
            const auto& els = f.enumeration->elements;
            const auto& words = f.enumeration->words;
            std::span<const cplx> seed(f.seed);
            for (std::size_t sh = 0; sh < nshells; ++sh) {
                cplx ssum{};
                double sabs = 0.0;
                for (std::size_t i = off[sh]; i < off[sh + 1]; ++i) {
                    const MoebiusMap& m = els[i];
                    cplx den = m.c * z + m.d;
                    cplx inv = 1.0 / den;
                    cplx gz = (m.a * z + m.b) * inv;
                    cplx rho_inv = fast ? detail::power_int(inv, two_s)
                                        : 1.0 / f.factor->evaluate_on_map(m, words[i], z);
                    cplx term = detail::horner(seed, gz) * rho_inv;
                    ssum += term;
                    sabs += std::abs(term);
                }
                total += ssum;
                prev2 = prev; prev = last; last = sabs;
            }
            tails[n] = last;
            if (nshells >= 3 && !(last < prev && prev < prev2)) conv[n] = 0;
            return total;
        });
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            out.max_tail = std::max(out.max_tail, tails[n]);
            if (!conv[n]) out.converged = false;
        }
        if (keep_tails) *keep_tails = std::move(tails);
    };
    eval_nodes(q.nodes, out.fine, &out.fine_tail);
    if (q.coarse) eval_nodes(q.coarse->nodes, out.coarse, nullptr);
    return out;
}

// ---------------------------------------------------------------------------
// masses and norms

struct KernelMass {
    double value = 0.0;
    double reference = 0.0; // c_s lambda(w)^s
    double error = 0.0;
};

inline KernelMass kernel_mass(cplx w, double s, const QuadratureDomain& q) {
    if (abs2(w) >= 1.0)
        throw std::domain_error("kernel_mass: w must lie in the open unit disc");
    KernelMass out;
    RealIntegral r = integrate_real(q, [&](cplx z, double lam) {
        return std::pow(lam, 2.0 - s) * std::abs(bergman_kernel(z, w, s));
    });
    out.value = r.value;
    out.error = r.error;
    out.reference = c_s(s) * std::pow(poincare_density(w), s);
    return out;
}

inline RealIntegral poincare_mass(double s, const QuadratureDomain& q) {
    return integrate_real(q, [&](cplx, double lam) { return std::pow(lam, 2.0 - s); });
}

struct DivergenceProbe {
    double base = 0.0;
    double refined = 0.0;
    bool divergent = false;
};

// The grid refinement extends the radial reach at fixed pitch, so a
// convergent mass is stable under it while a divergent one keeps growing.
inline DivergenceProbe poincare_mass_divergence(double s, int radial_cells, int angular_cells,
                                                double pitch = default_radial_pitch) {
    DivergenceProbe probe;
    probe.base = poincare_mass(s, disc_grid(radial_cells, angular_cells, pitch)).value;
    probe.refined = poincare_mass(s, refine_extent(radial_cells, angular_cells, pitch)).value;
    probe.divergent = probe.refined >= 1.8 * probe.base;
    return probe;
}

// ||f||_{L^p_s} for p in {1, 2} or the weighted sup for p = inf (pass p <= 0
// for inf).  Values must be supplied on the grid and its coarse companion.
inline RealIntegral lp_norm(std::span<const cplx> fine, std::span<const cplx> coarse,
                            int p, double s, const QuadratureDomain& q) {
    if (fine.size() != q.nodes.size())
        throw std::invalid_argument("lp_norm: values do not match the grid");
    auto accum = [&](const QuadratureDomain& dom, std::span<const cplx> vals) {
        if (p <= 0) { // weighted sup norm
            double best = 0.0;
            for (std::size_t i = 0; i < dom.nodes.size(); ++i)
                best = std::max(best, std::abs(vals[i]) / std::pow(dom.lambda[i], s));
            return best;
        }
        double sum = block_sum<double>(dom.nodes.size(), [&](std::size_t i) {
            double a = std::abs(vals[i]);
            return dom.weights[i] * std::pow(dom.lambda[i], 2.0 - p * s) *
                   (p == 1 ? a : a * a);
        });
        return p == 1 ? sum : std::sqrt(sum);
    };
    RealIntegral out;
    out.value = accum(q, fine);
    if (q.coarse && coarse.size() == q.coarse->nodes.size())
        out.error = std::abs(out.value - accum(*q.coarse, coarse));
    return out;
}

inline RealIntegral lp_norm(const Sampler& f, int p, double s, const QuadratureDomain& q) {
    std::vector<cplx> fine(q.nodes.size()), coarse;
    block_map(fine, [&](std::size_t i) { return f(q.nodes[i]); });
    if (q.coarse) {
        coarse.resize(q.coarse->nodes.size());
        block_map(coarse, [&](std::size_t i) { return f(q.coarse->nodes[i]); });
    }
    return lp_norm(fine, coarse, p, s, q);
}

// ---------------------------------------------------------------------------
// pairing and projection

// <f,g> = int f conj(g) lambda^{2-2s} over the domain.
inline Integral wp_pairing(std::span<const cplx> f_fine, std::span<const cplx> f_coarse,
                           std::span<const cplx> g_fine, std::span<const cplx> g_coarse,
                           double s, const QuadratureDomain& q) {
    auto accum = [&](const QuadratureDomain& dom, std::span<const cplx> fv,
                     std::span<const cplx> gv) {
        return block_sum<cplx>(dom.nodes.size(), [&](std::size_t i) {
            return dom.weights[i] * std::pow(dom.lambda[i], 2.0 - 2.0 * s) * fv[i] *
                   std::conj(gv[i]);
        });
    };
    Integral out;
    out.value = accum(q, f_fine, g_fine);
    if (q.coarse && f_coarse.size() == q.coarse->nodes.size())
        out.error = std::abs(out.value - accum(*q.coarse, f_coarse, g_coarse));
    return out;
}

inline Integral wp_pairing(const Sampler& f, const Sampler& g, double s,
                           const QuadratureDomain& q) {
    return integrate(q, [&](cplx z, double lam) {
        return std::pow(lam, 2.0 - 2.0 * s) * f(z) * std::conj(g(z));
    });
}

// (beta f)(z): Bergman projection of a sampler against the weighted kernel.
inline Integral bergman_projection(const Sampler& f, double s, cplx z,
                                   const QuadratureDomain& q) {
    if (abs2(z) >= 1.0)
        throw std::domain_error("bergman_projection: point not in the open unit disc");
    return integrate(q, [&](cplx w, double lam) {
        return std::pow(lam, 2.0 - 2.0 * s) * bergman_kernel(z, w, s) * f(w);
    });
}

// ---------------------------------------------------------------------------
// kernel average over the group and the embedding constant

// alpha_s(z, w) = sum_g rho_g(z)^{-1} K_s(gz, w) for the canonical weight-s
// factor of the enumerated group.
inline ThetaValue alpha_s(const EnumeratedGroup& e, double s, cplx z, cplx w) {
    if (abs2(z) >= 1.0 || abs2(w) >= 1.0)
        throw std::domain_error("alpha_s: arguments must lie in the open unit disc");
    if (!(s > 1.0))
        throw std::domain_error("alpha_s: weight must exceed 1");
    const bool fast = std::abs(2.0 * s - std::round(2.0 * s)) < 1e-12;
    const long two_s = static_cast<long>(std::llround(2.0 * s));
    const auto& off = e.shell_offsets;

    // canonical factor for the slow path
    AutomorphyFactor rho;
    std::shared_ptr<GroupPresentation> gp;
    if (!fast) {
        gp = std::make_shared<GroupPresentation>(e.group);
        rho = canonical_factor(gp, s);
    }

    ThetaValue out;
    for (std::size_t sh = 0; sh + 1 < off.size(); ++sh) {
        detail::ShellAccum acc =
            block_sum<detail::ShellAccum>(off[sh + 1] - off[sh], [&, lo = off[sh]](std::size_t k) {
                const std::size_t i = lo + k;
                const MoebiusMap& m = e.elements[i];
                cplx den = m.c * z + m.d;
                cplx inv = 1.0 / den;
                cplx gz = (m.a * z + m.b) * inv;
                cplx rho_inv = fast ? detail::power_int(inv, two_s)
                                    : 1.0 / rho.evaluate_on_map(m, e.words[i], z);
                detail::ShellAccum a;
                a.sum = rho_inv * detail::kernel_term(gz, w, s);
                a.abs_sum = std::abs(a.sum);
                return a;
            });
        out.value += acc.sum;
        out.shell_sums.push_back(acc.abs_sum);
    }
    const std::size_t n = out.shell_sums.size();
    out.tail_estimate = n > 0 ? out.shell_sums.back() : 0.0;
    if (n >= 3)
        out.converged = out.shell_sums[n - 1] < out.shell_sums[n - 2] &&
                        out.shell_sums[n - 2] < out.shell_sums[n - 3];
    return out;
}

struct EmbeddingConstant {
    double value = 0.0;   // max over the grid of lambda^{-2s} Re alpha_s(z,z)
    double max_tail = 0.0;
    bool converged = true;
    cplx argmax{};
};

inline EmbeddingConstant embedding_constant(const EnumeratedGroup& e, double s,
                                            std::span<const cplx> grid) {
    if (grid.empty())
        throw std::invalid_argument("embedding_constant: empty grid");
    EmbeddingConstant out;
    for (cplx z : grid) {
        ThetaValue a = alpha_s(e, s, z, z);
        double v = a.value.real() / std::pow(poincare_density(z), 2.0 * s);
        if (v > out.value) {
            out.value = v;
            out.argmax = z;
        }
        out.max_tail = std::max(out.max_tail, a.tail_estimate);
        if (!a.converged) out.converged = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// integral operator against the reflected kernel

// (L psi)(z) = int_D lambda^{2-2s}(w) conj(psi(w)) (w - z)^{-2s} dA(w),
// defined for integer s >= 2 and |z| > 1; anti-linear in psi.
inline Integral l_operator(const Sampler& psi, int s, cplx z, const QuadratureDomain& q) {
    if (s < 2)
        throw std::domain_error("l_operator: integer weight s >= 2 required");
    if (abs2(z) <= 1.0)
        throw std::domain_error("l_operator: evaluation point must lie outside the closed disc");
    return integrate(q, [&](cplx w, double lam) {
        cplx ker = detail::power_int(1.0 / (w - z), 2L * s);
        return std::pow(lam, 2.0 - 2.0 * s) * std::conj(psi(w)) * ker;
    });
}

// ---------------------------------------------------------------------------
// two independent routes to the pairing of automorphic series

struct PairingRoutes {
    Integral domain_route; // <Theta[h1], Theta[h2]> over the fundamental domain
    Integral disc_route;   // int_D Theta[h1] conj(h2) lambda^{2-2s} (unfolded form)
    double domain_tail = 0.0;
    double disc_tail = 0.0;
    double excluded_term = 0.0; // cusp-cutoff contribution bound (domain route)
};

// The unfolding identity <Theta[h1], Theta[h2]>_F = int_D Theta[h1] conj(h2)
// lambda^{2-2s} turns a fundamental-domain pairing into a plain disc
// integral; computing both ways cross-checks the whole chain (enumeration,
// domain, series, quadrature).
inline PairingRoutes pairing_two_routes(const FormSpec& f1, const FormSpec& f2,
                                        const QuadratureDomain& domain_grid,
                                        const QuadratureDomain& disc) {
    validate_form(f1);
    validate_form(f2);
    const double s = f1.s;
    if (std::abs(f2.s - s) > 1e-12)
        throw std::invalid_argument("pairing_two_routes: weights differ");

    PairingRoutes out;

    ThetaField t1 = theta_on_domain(f1, domain_grid);
    ThetaField t2 = theta_on_domain(f2, domain_grid);
    out.domain_route = wp_pairing(t1.fine, t1.coarse, t2.fine, t2.coarse, s, domain_grid);

    // truncation tails propagated through the pairing integrand, pointwise:
    // a single global tail bound is dominated by nodes near the limit set
    // where the weight factor would have damped the contribution anyway
    out.domain_tail = block_sum<double>(domain_grid.nodes.size(), [&](std::size_t i) {
        double w = domain_grid.weights[i] * std::pow(domain_grid.lambda[i], 2.0 - 2.0 * s);
        return w * (t1.fine_tail[i] * std::abs(t2.fine[i]) + t2.fine_tail[i] * std::abs(t1.fine[i]) +
                    t1.fine_tail[i] * t2.fine_tail[i]);
    });

    // cusp cutoff: integrand per unit lambda^2-mass, times the omitted mass
    double peak = 0.0;
    for (std::size_t i = 0; i < domain_grid.nodes.size(); ++i) {
        double dens = std::abs(t1.fine[i]) * std::abs(t2.fine[i]) *
                      std::pow(domain_grid.lambda[i], -2.0 * s);
        peak = std::max(peak, dens);
    }
    out.excluded_term = peak * domain_grid.excluded_mass_bound;

    ThetaField d1 = theta_on_domain(f1, disc);
    std::span<const cplx> seed2(f2.seed);
    auto h2_fine = std::vector<cplx>(disc.nodes.size());
    block_map(h2_fine, [&](std::size_t i) { return detail::horner(seed2, disc.nodes[i]); });
    std::vector<cplx> h2_coarse;
    if (disc.coarse) {
        h2_coarse.resize(disc.coarse->nodes.size());
        block_map(h2_coarse, [&](std::size_t i) { return detail::horner(seed2, disc.coarse->nodes[i]); });
    }
    out.disc_route = wp_pairing(d1.fine, d1.coarse, h2_fine, h2_coarse, s, disc);
    out.disc_tail = block_sum<double>(disc.nodes.size(), [&](std::size_t i) {
        double w = disc.weights[i] * std::pow(disc.lambda[i], 2.0 - 2.0 * s);
        return w * d1.fine_tail[i] * std::abs(h2_fine[i]);
    });
    return out;
}

} // namespace uniformizer
