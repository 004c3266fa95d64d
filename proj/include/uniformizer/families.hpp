#pragma once

// Families of automorphic forms along deformation paths, in particular the
// one-parameter pinching family of once-punctured tori.  Every fibre gets
// the same polynomial seeds; the sections are the weight-s series of those
// seeds, so they vary with the fibre group while the seed data stays fixed.
//
// Degeneration bookkeeping:
//   * core geodesic length of a plumbing annulus with parameter t:
//         l(t) = 2 pi^2 / |log|t||,     |t|(l) = exp(-2 pi^2 / l);
//   * Gram matrices of sections are computed as fundamental-domain pairings
//     (exactly positive semi-definite by construction, so numerical rank is
//     meaningful) and cross-checked against the unfolded disc-route
//     integrals int_D Psi_i conj(h_j) lambda^{2-2s};
//   * the asymptotic sweep tabulates trace, length, plumbing parameter,
//     embedding constant M and the pairing bound
//         |G_12| <= M ||h_1||_{A^1_s} ||h_2||_{A^1_s}
//     with both sides computed independently.

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include <eigen3/Eigen/Dense>

#include "analysis.hpp"
#include "common.hpp"
#include "contour.hpp"
#include "dimensions.hpp"
#include "factors.hpp"
#include "fuchsian.hpp"
#include "quadrature.hpp"

namespace uniformizer {

struct FamilyPath {
    double u_min = 1e-3;
    double u_max = 1.0;
    std::function<GroupPresentation(double)> group_at;
    double s = 2.0;
    std::vector<std::vector<cplx>> seeds;
    int word_length = 6;
    std::size_t element_cap = 4'000'000;
};

inline FamilyPath make_pinch_family(double s, std::vector<std::vector<cplx>> seeds,
                                    int word_length = 6, double u_min = 1e-3,
                                    double u_max = 1.0) {
    if (!(u_min > 0.0 && u_min <= u_max))
        throw std::invalid_argument("pinch family: need 0 < u_min <= u_max");
    if (seeds.empty())
        throw std::invalid_argument("pinch family: at least one seed required");
    FamilyPath p;
    p.u_min = u_min;
    p.u_max = u_max;
    p.group_at = [](double u) { return pinch_path(u); };
    p.s = s;
    p.seeds = std::move(seeds);
    p.word_length = word_length;
    return p;
}

// One fibre of the family: group, enumeration and canonical factor.
struct Fibre {
    double u = 0.0;
    std::shared_ptr<GroupPresentation> group;
    std::shared_ptr<EnumeratedGroup> enumeration;
    std::shared_ptr<AutomorphyFactor> factor;
};

inline Fibre build_fibre(const FamilyPath& p, double u) {
    if (!(u >= p.u_min && u <= p.u_max))
        throw std::domain_error("build_fibre: parameter outside the family range");
    Fibre f;
    f.u = u;
    f.group = std::make_shared<GroupPresentation>(p.group_at(u));
    f.enumeration = std::make_shared<EnumeratedGroup>(
        enumerate_elements(*f.group, p.word_length, p.element_cap));
    f.factor = std::make_shared<AutomorphyFactor>(canonical_factor(f.group, p.s));
    return f;
}

inline FormSpec section_form(const FamilyPath& p, const Fibre& f, std::size_t seed_index) {
    if (seed_index >= p.seeds.size())
        throw std::invalid_argument("section_form: seed index out of range");
    FormSpec spec;
    spec.seed = p.seeds[seed_index];
    spec.enumeration = f.enumeration;
    spec.factor = f.factor;
    spec.s = p.s;
    return spec;
}

// Psi_i(z, u) = Theta over the fibre group of the fixed seed h_i.
inline ThetaValue extended_section(const FamilyPath& p, double u, std::size_t seed_index, cplx z) {
    Fibre f = build_fibre(p, u);
    return theta_series(section_form(p, f, seed_index), z);
}

// ---------------------------------------------------------------------------
// Gram matrices

struct GramReport {
    double u = 0.0;
    int n = 0;
    std::vector<cplx> gram;        // n x n fundamental-domain pairings, Hermitian PSD
    std::vector<double> eigenvalues; // ascending
    int rank = 0;
    double rank_tolerance = 1e-8;  // relative eigenvalue cutoff
    double error_estimate = 0.0;   // worst entrywise fine/coarse discrepancy
    double tail_estimate = 0.0;    // worst series truncation contribution
    bool converged = true;
    std::vector<cplx> disc_route;  // unfolded cross-check integrals
    double route_disagreement = 0.0;
};

struct GramOptions {
    int radial_nodes = 96;
    int angular_nodes = 192;
    double cusp_cutoff = 0.005;
    int disc_radial = 120;
    int disc_angular = 128;
    double rank_tolerance = 1e-8;
};

inline GramReport gram_matrix(const FamilyPath& p, const Fibre& f, const GramOptions& opt = {}) {
    const int n = static_cast<int>(p.seeds.size());
    const double s = p.s;

    QuadratureDomain dom = fundamental_domain_grid(*f.enumeration, opt.radial_nodes,
                                                   opt.angular_nodes, opt.cusp_cutoff);
    QuadratureDomain disc = disc_grid(opt.disc_radial, opt.disc_angular);

    std::vector<ThetaField> fields(n);
    for (int i = 0; i < n; ++i) fields[i] = theta_on_domain(section_form(p, f, i), dom);

    GramReport rep;
    rep.u = f.u;
    rep.n = n;
    rep.rank_tolerance = opt.rank_tolerance;
    rep.gram.assign(n * n, cplx{});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            Integral gij = wp_pairing(fields[i].fine, fields[i].coarse, fields[j].fine,
                                      fields[j].coarse, s, dom);
            rep.gram[i * n + j] = gij.value;
            rep.gram[j * n + i] = std::conj(gij.value);
            rep.error_estimate = std::max(rep.error_estimate, gij.error);
            double tail = block_sum<double>(dom.nodes.size(), [&](std::size_t k) {
                double w = dom.weights[k] * std::pow(dom.lambda[k], 2.0 - 2.0 * s);
                return w * (fields[i].max_tail * std::abs(fields[j].fine[k]) +
                            fields[j].max_tail * std::abs(fields[i].fine[k]) +
                            fields[i].max_tail * fields[j].max_tail);
            });
            rep.tail_estimate = std::max(rep.tail_estimate, tail);
        }
        if (!fields[i].converged) rep.converged = false;
    }

    // eigenvalues of the (Hermitised) pairing matrix
    Eigen::MatrixXcd G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            G(i, j) = 0.5 * (rep.gram[i * n + j] + std::conj(rep.gram[j * n + i]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    rep.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
    double top = rep.eigenvalues.empty() ? 0.0 : rep.eigenvalues.back();
    rep.rank = 0;
    for (double ev : rep.eigenvalues)
        if (ev > opt.rank_tolerance * std::max(top, 0.0)) ++rep.rank;

    // unfolded disc-route cross-check
    rep.disc_route.assign(n * n, cplx{});
    std::vector<ThetaField> disc_fields(n);
    for (int i = 0; i < n; ++i) disc_fields[i] = theta_on_domain(section_form(p, f, i), disc);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            std::span<const cplx> seed(p.seeds[j]);
            std::vector<cplx> hj(disc.nodes.size()), hjc;
            block_map(hj, [&](std::size_t k) { return detail::horner(seed, disc.nodes[k]); });
            if (disc.coarse) {
                hjc.resize(disc.coarse->nodes.size());
                block_map(hjc, [&](std::size_t k) { return detail::horner(seed, disc.coarse->nodes[k]); });
            }
            Integral dij = wp_pairing(disc_fields[i].fine, disc_fields[i].coarse, hj, hjc, s, disc);
            rep.disc_route[i * n + j] = dij.value;
            rep.route_disagreement = std::max(
                rep.route_disagreement, std::abs(dij.value - rep.gram[i * n + j]));
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Wronskians and rank scans

// det of the N x N matrix (d^k Psi_i / dz^k)(z0), k = 0..N-1, derivatives by
// contour quadrature with radius shrink*(1-|z0|).
struct WronskianValue {
    cplx value{};
    double error = 0.0;
};

inline WronskianValue wronskian(const FamilyPath& p, const Fibre& f, cplx z0, int count,
                                double shrink = 0.5, int nodes = 64) {
    if (count < 1 || count > static_cast<int>(p.seeds.size()))
        throw std::invalid_argument("wronskian: section count out of range");
    if (abs2(z0) >= 1.0)
        throw std::domain_error("wronskian: base point not in the open unit disc");
    const double r = shrink * (1.0 - std::abs(z0));

    Eigen::MatrixXcd W(count, count);
    double err = 0.0;
    for (int i = 0; i < count; ++i) {
        FormSpec spec = section_form(p, f, i);
        Sampler psi = [&spec](cplx z) { return theta_series(spec, z).value; };
        DerivativeSet d = cauchy_derivatives(psi, z0, r, count - 1, nodes);
        for (int k = 0; k < count; ++k) W(k, i) = d.value[k];
        err = std::max(err, d.error);
    }
    WronskianValue out;
    out.value = W.determinant();
    out.error = err;
    return out;
}

struct RankSample {
    double u = 0.0;
    int rank = 0;
    long fibre_dimension = 0;
    bool drop = false; // rank below min(#seeds, fibre dimension)
};

inline std::vector<RankSample> rank_drop_scan(const FamilyPath& p, int samples,
                                              const GramOptions& opt = {}) {
    if (samples < 1) throw std::invalid_argument("rank_drop_scan: need at least one sample");
    std::vector<RankSample> out;
    for (int i = 0; i < samples; ++i) {
        double frac = samples == 1 ? 0.0 : static_cast<double>(i) / (samples - 1);
        double u = p.u_max * std::pow(p.u_min / p.u_max, frac);
        Fibre f = build_fibre(p, u);
        GramReport rep = gram_matrix(p, f, opt);
        RankSample smp;
        smp.u = u;
        smp.rank = rep.rank;
        smp.fibre_dimension =
            dim_cusp_forms(SurfaceType{f.group->genus, f.group->punctures}, p.s);
        smp.drop = smp.rank < std::min<long>(static_cast<long>(p.seeds.size()),
                                             smp.fibre_dimension);
        out.push_back(smp);
    }
    return out;
}

// ---------------------------------------------------------------------------
// plumbing coordinates

// Core geodesic length of the plumbing annulus {zw = t}: 2 pi^2 / |log|t||.
inline double plumbing_length(cplx t) {
    double r = std::abs(t);
    if (!(r > 0.0 && r < 1.0))
        throw std::domain_error("plumbing_length: need 0 < |t| < 1");
    return 2.0 * pi * pi / std::abs(std::log(r));
}

// Inverse map: |t| = exp(-2 pi^2 / l).
inline double plumbing_parameter(double length) {
    if (!(length > 0.0))
        throw std::domain_error("plumbing_parameter: length must be positive");
    return std::exp(-2.0 * pi * pi / length);
}

// ---------------------------------------------------------------------------
// asymptotic sweep along the pinching path

struct SweepRow {
    double u = 0.0;
    double trace_sq = 0.0;     // tr^2 of the pinching generator
    double length = 0.0;       // geodesic length of the pinching generator
    double plumbing_t = 0.0;   // |t| with core length = length
    double embedding_m = 0.0;  // grid max of lambda^{-2s} alpha_s(z,z)
    cplx g11{}, g12{}, g22{};  // leading Gram entries
    double seed_norm_1 = 0.0;  // ||h_1||_{A^1_s(D)}
    double seed_norm_2 = 0.0;
    double bound_lhs = 0.0;    // |G_12|
    double bound_rhs = 0.0;    // M ||h_1|| ||h_2||
    double bound_margin = 0.0; // slack granted by the reported error estimates
    bool bound_ok = false;
    bool converged = true;
};

struct SweepOptions {
    GramOptions gram{};
    int probe_cap = 400;      // nodes used for the embedding-constant max
    int disc_radial = 120;    // grid for the seed norms
    int disc_angular = 128;
};

inline std::vector<SweepRow> asymptotic_sweep(const FamilyPath& p, int samples,
                                              const SweepOptions& opt = {}) {
    if (samples < 2) throw std::invalid_argument("asymptotic_sweep: need at least two samples");
    if (p.seeds.size() < 2)
        throw std::invalid_argument("asymptotic_sweep: two seeds required for the pairing bound");

    QuadratureDomain disc = disc_grid(opt.disc_radial, opt.disc_angular);
    std::span<const cplx> s1(p.seeds[0]), s2(p.seeds[1]);
    RealIntegral n1 = lp_norm([&](cplx z) { return detail::horner(s1, z); }, 1, p.s, disc);
    RealIntegral n2 = lp_norm([&](cplx z) { return detail::horner(s2, z); }, 1, p.s, disc);

    std::vector<SweepRow> rows;
    for (int i = 0; i < samples; ++i) {
        double frac = static_cast<double>(i) / (samples - 1);
        double u = p.u_max * std::pow(p.u_min / p.u_max, frac);
        Fibre f = build_fibre(p, u);

        SweepRow row;
        row.u = u;
        const MoebiusMap& gen_a = f.group->generators[0];
        row.trace_sq = (gen_a.trace() * gen_a.trace()).real();
        row.length = geodesic_length(gen_a);
        row.plumbing_t = plumbing_parameter(row.length);

        GramReport rep = gram_matrix(p, f, opt.gram);
        row.g11 = rep.gram[0];
        row.g12 = rep.gram[1];
        row.g22 = rep.gram[rep.n + 1];
        row.converged = rep.converged;

        QuadratureDomain dom = fundamental_domain_grid(*f.enumeration, opt.gram.radial_nodes,
                                                       opt.gram.angular_nodes,
                                                       opt.gram.cusp_cutoff);
        std::vector<cplx> probe;
        std::size_t stride = std::max<std::size_t>(1, dom.nodes.size() / opt.probe_cap);
        for (std::size_t k = 0; k < dom.nodes.size(); k += stride) probe.push_back(dom.nodes[k]);
        EmbeddingConstant m = embedding_constant(*f.enumeration, p.s, probe);
        row.embedding_m = m.value;
        if (!m.converged) row.converged = false;

        row.seed_norm_1 = n1.value;
        row.seed_norm_2 = n2.value;
        row.bound_lhs = std::abs(row.g12);
        row.bound_rhs = row.embedding_m * n1.value * n2.value;
        row.bound_margin = 0.10 * row.bound_rhs +
                           10.0 * (rep.error_estimate + rep.tail_estimate) +
                           row.embedding_m * (n1.error * n2.value + n2.error * n1.value);
        row.bound_ok = row.bound_lhs <= row.bound_rhs + row.bound_margin;
        rows.push_back(row);
    }
    return rows;
}

} // namespace uniformizer
