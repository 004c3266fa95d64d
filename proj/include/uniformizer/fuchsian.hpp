#pragma once

// Finitely generated Fuchsian groups acting on the unit disc: word
// enumeration by length, Dirichlet-domain membership, quadrature grids on a
// fundamental domain, orbits, limit-set samples, geodesic lengths, and the
// trace-parameterised once-punctured-torus family used as the standard
// test fixture (traces x, y and z = tr(AB) on the Markov variety
// x^2 + y^2 + z^2 = xyz; the commutator is then parabolic, tr = -2).

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "common.hpp"
#include "moebius.hpp"
#include "quadrature.hpp"

namespace uniformizer {

enum class GroupKind {
    free_rank,     // free on the listed generators (no relation)
    surface_genus, // closed-surface relation prod [a_i, b_i] = +-1
};

struct GroupPresentation {
    std::vector<MoebiusMap> generators;
    GroupKind kind = GroupKind::free_rank;
    int genus = 0;
    int punctures = 0;
    cplx basepoint{0.0, 0.0}; // Dirichlet center; must not be fixed by a generator
};

// A word in the generators: letter +k means generator k-1, letter -k its
// inverse.  The empty word is the identity.
using Word = std::vector<std::int8_t>;

inline MoebiusMap letter_map(const GroupPresentation& g, int letter) {
    int idx = std::abs(letter) - 1;
    if (letter == 0 || idx >= static_cast<int>(g.generators.size()))
        throw std::invalid_argument("letter_map: letter outside the generator range");
    return letter > 0 ? g.generators[idx] : g.generators[idx].inverse();
}

inline MoebiusMap word_to_map(const GroupPresentation& g, const Word& w) {
    MoebiusMap m = MoebiusMap::identity();
    for (int letter : w) m = compose(m, letter_map(g, letter));
    return m;
}

// "abAB" -> a b a^{-1} b^{-1} (lower case = generator, upper = inverse).
inline Word parse_word(const std::string& text) {
    Word w;
    for (char ch : text) {
        if (ch == ' ') continue;
        if (ch >= 'a' && ch <= 'z') w.push_back(static_cast<std::int8_t>(ch - 'a' + 1));
        else if (ch >= 'A' && ch <= 'Z') w.push_back(static_cast<std::int8_t>(-(ch - 'A' + 1)));
        else throw std::invalid_argument("parse_word: invalid character in word");
    }
    return w;
}

// Free reduction (cancel adjacent x x^{-1}); words in a free group are
// canonically represented by their reduced form.
inline Word reduce_word(const Word& w) {
    Word out;
    for (int letter : w) {
        if (!out.empty() && out.back() == -letter) out.pop_back();
        else out.push_back(static_cast<std::int8_t>(letter));
    }
    return out;
}

// ---------------------------------------------------------------------------
// presentation validation

inline void validate_presentation(const GroupPresentation& g) {
    for (const MoebiusMap& m : g.generators) {
        // the tolerance scales with the products in ad - bc: for entries of
        // magnitude M the mere evaluation of the determinant carries O(M^2)
        // ulps of rounding, while a genuinely unnormalised matrix is O(1) off
        double det_scale = std::max(1.0, std::abs(m.a) * std::abs(m.d) +
                                             std::abs(m.b) * std::abs(m.c));
        if (std::abs(m.det() - 1.0) > det_tolerance * det_scale)
            throw std::invalid_argument("presentation: generator determinant is not 1");
        if (std::abs(m(g.basepoint)) >= 1.0)
            throw std::invalid_argument("presentation: generator does not map the basepoint inside the disc");
        if (std::abs(m(g.basepoint) - g.basepoint) <= 1e-12)
            throw std::invalid_argument("presentation: generator fixes the basepoint");
        for (double th : {0.3, 2.1, 4.4}) {
            cplx bd(std::cos(th), std::sin(th));
            if (std::abs(std::abs(m(bd)) - 1.0) > 1e-10)
                throw std::invalid_argument("presentation: generator does not preserve the unit circle");
        }
    }
    if (g.kind == GroupKind::surface_genus) {
        if (static_cast<int>(g.generators.size()) != 2 * g.genus)
            throw std::invalid_argument("presentation: surface kind needs 2*genus generators");
    }
}

// Product of commutators prod [a_i, b_i] with generator order
// a_1, b_1, a_2, b_2, ...
inline MoebiusMap surface_relation_product(const GroupPresentation& g) {
    MoebiusMap r = MoebiusMap::identity();
    for (int i = 0; i + 1 < static_cast<int>(g.generators.size()); i += 2) {
        const MoebiusMap& a = g.generators[i];
        const MoebiusMap& b = g.generators[i + 1];
        r = compose(r, compose(compose(a, b), compose(a.inverse(), b.inverse())));
    }
    return r;
}

// Which SL(2) lift the relation product lands on: +1 for +I, -1 for -I.
// Free presentations carry no relation and report +1.
inline int sl2_lift_sign(const GroupPresentation& g) {
    if (g.kind != GroupKind::surface_genus) return 1;
    MoebiusMap r = surface_relation_product(g);
    double dplus = std::abs(r.a - 1.0) + std::abs(r.d - 1.0) + std::abs(r.b) + std::abs(r.c);
    double dminus = std::abs(r.a + 1.0) + std::abs(r.d + 1.0) + std::abs(r.b) + std::abs(r.c);
    if (std::min(dplus, dminus) > 1e-9)
        throw std::domain_error("sl2_lift_sign: surface relation is not satisfied by the generators");
    return dplus <= dminus ? 1 : -1;
}

// ---------------------------------------------------------------------------
// enumeration

struct EnumeratedGroup {
    GroupPresentation group;
    std::vector<Word> words;          // reduced words, sorted by length
    std::vector<MoebiusMap> elements; // elements[i] = word_to_map(words[i])
    std::vector<std::size_t> shell_offsets; // shell k = [offsets[k], offsets[k+1])
    int max_word_length = 0;

    // orbit of the basepoint sorted by hyperbolic distance (identity omitted),
    // used to prune Dirichlet membership tests
    std::vector<cplx> sorted_orbit;
    std::vector<double> sorted_orbit_dist;

    std::size_t size() const { return elements.size(); }
};

namespace detail {

// key for surface-group dedup: entries of the sign-normalised lift rounded
// to a fixed quantum
struct MatKey {
    std::int64_t v[8];
    bool operator==(const MatKey& o) const {
        for (int i = 0; i < 8; ++i)
            if (v[i] != o.v[i]) return false;
        return true;
    }
};

struct MatKeyHash {
    std::size_t operator()(const MatKey& k) const {
        std::size_t h = 1469598103934665603ull;
        for (int i = 0; i < 8; ++i) {
            h ^= static_cast<std::size_t>(k.v[i]);
            h *= 1099511628211ull;
        }
        return h;
    }
};

inline MoebiusMap sign_normalise(const MoebiusMap& m) {
    const cplx* e[4] = {&m.a, &m.b, &m.c, &m.d};
    for (const cplx* p : e) {
        if (std::abs(*p) > 1e-6) {
            double re = p->real(), im = p->imag();
            if (re < 0.0 || (re == 0.0 && im < 0.0)) return m.negated();
            return m;
        }
    }
    return m;
}

inline MatKey quantise(const MoebiusMap& m, double quantum) {
    MatKey k{};
    const cplx e[4] = {m.a, m.b, m.c, m.d};
    for (int i = 0; i < 4; ++i) {
        k.v[2 * i] = static_cast<std::int64_t>(std::llround(e[i].real() / quantum));
        k.v[2 * i + 1] = static_cast<std::int64_t>(std::llround(e[i].imag() / quantum));
    }
    return k;
}

} // namespace detail

// Enumerate all reduced words up to the given length.  For free
// presentations reduced words are already pairwise distinct; surface
// presentations are deduplicated by matrix proximity (tolerance 1e-8 on the
// sign-normalised lift).  Throws std::length_error if the enumeration would
// exceed element_cap.
inline EnumeratedGroup enumerate_elements(const GroupPresentation& g, int max_word_length,
                                          std::size_t element_cap = 4'000'000) {
    if (max_word_length < 0)
        throw std::invalid_argument("enumerate_elements: negative word length");
    const int k = static_cast<int>(g.generators.size());

    if (g.kind == GroupKind::free_rank && k > 0) {
        // 1 + sum_{j<=L} 2k (2k-1)^{j-1} elements
        double predicted = 1.0, shell = 2.0 * k;
        for (int j = 1; j <= max_word_length; ++j) {
            predicted += shell;
            shell *= (2.0 * k - 1.0);
            if (predicted > static_cast<double>(element_cap))
                throw std::length_error("enumerate_elements: element cap exceeded");
        }
    }

    EnumeratedGroup e;
    e.group = g;
    e.max_word_length = max_word_length;
    e.words.push_back({});
    e.elements.push_back(MoebiusMap::identity());
    e.shell_offsets = {0, 1};

    std::unordered_map<detail::MatKey, std::vector<std::size_t>, detail::MatKeyHash> seen;
    const double quantum = 1e-6, dedup_tol = 1e-8;
    const bool dedup = g.kind == GroupKind::surface_genus;
    auto remember = [&](const MoebiusMap& m, std::size_t idx) {
        seen[detail::quantise(detail::sign_normalise(m), quantum)].push_back(idx);
    };
    auto known = [&](const MoebiusMap& m) {
        MoebiusMap n = detail::sign_normalise(m);
        // neighbouring keys cover quantisation boundaries
        for (int da = -1; da <= 1; ++da) {
            detail::MatKey key = detail::quantise(n, quantum);
            key.v[0] += da;
            auto it = seen.find(key);
            if (it == seen.end()) continue;
            for (std::size_t idx : it->second) {
                MoebiusMap o = detail::sign_normalise(e.elements[idx]);
                double dist = std::abs(n.a - o.a) + std::abs(n.b - o.b) +
                              std::abs(n.c - o.c) + std::abs(n.d - o.d);
                if (dist < dedup_tol) return true;
            }
        }
        return false;
    };
    if (dedup) remember(e.elements[0], 0);

    std::size_t level_begin = 0, level_end = 1;
    for (int len = 1; len <= max_word_length; ++len) {
        for (std::size_t i = level_begin; i < level_end; ++i) {
            const Word w = e.words[i]; // copy: e.words reallocates below
            const MoebiusMap base = e.elements[i];
            int last = w.empty() ? 0 : w.back();
            for (int gi = 1; gi <= k; ++gi) {
                for (int letter : {gi, -gi}) {
                    if (letter == -last) continue; // not reduced
                    MoebiusMap m = compose(base, letter_map(g, letter));
                    if (dedup && known(m)) continue;
                    if (e.elements.size() >= element_cap)
                        throw std::length_error("enumerate_elements: element cap exceeded");
                    Word nw = w;
                    nw.push_back(static_cast<std::int8_t>(letter));
                    e.words.push_back(std::move(nw));
                    e.elements.push_back(m);
                    if (dedup) remember(m, e.elements.size() - 1);
                }
            }
        }
        level_begin = level_end;
        level_end = e.elements.size();
        e.shell_offsets.push_back(level_end);
    }

    // orbit of the basepoint, sorted by distance, for membership pruning
    std::vector<std::pair<double, cplx>> orb;
    orb.reserve(e.elements.size());
    for (std::size_t i = 1; i < e.elements.size(); ++i) {
        cplx q = e.elements[i](g.basepoint);
        // nearly parabolic elements can push the basepoint so far that the
        // image rounds onto the unit circle; such a translate sorts last and
        // can never win a membership contest, which +inf encodes exactly
        double dist = abs2(q) >= 1.0 ? std::numeric_limits<double>::infinity()
                                     : hyperbolic_distance(g.basepoint, q);
        orb.emplace_back(dist, q);
    }
    std::sort(orb.begin(), orb.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    e.sorted_orbit.reserve(orb.size());
    e.sorted_orbit_dist.reserve(orb.size());
    for (const auto& [dist, q] : orb) {
        e.sorted_orbit.push_back(q);
        e.sorted_orbit_dist.push_back(dist);
    }
    return e;
}

// ---------------------------------------------------------------------------
// Dirichlet domain

// z belongs to the Dirichlet domain centred at the basepoint iff
// d(z, w0) <= d(z, g w0) + tol for every enumerated g.  Orbit points with
// d(w0, q) > 2 d(z, w0) cannot win and are skipped (triangle inequality).
inline bool dirichlet_membership(const EnumeratedGroup& e, cplx z, double tol = 1e-12) {
    if (abs2(z) >= 1.0)
        throw std::domain_error("dirichlet_membership: point not in the open unit disc");
    const cplx w0 = e.group.basepoint;
    const double d0 = hyperbolic_distance(z, w0);
    const double reach = 2.0 * d0 + 1e-9;
    for (std::size_t i = 0; i < e.sorted_orbit.size(); ++i) {
        if (e.sorted_orbit_dist[i] > reach) break;
        if (hyperbolic_distance(z, e.sorted_orbit[i]) < d0 - tol) return false;
    }
    return true;
}

// Polar grid restricted to the Dirichlet domain.  Rings are uniform in
// hyperbolic radius up to the density cutoff lambda <= 1/cusp_cutoff; the
// omitted lambda^2-mass is estimated from a probe band just beyond the
// cutoff and recorded in excluded_mass_bound.
inline QuadratureDomain fundamental_domain_grid(const EnumeratedGroup& e, int radial_nodes,
                                                int angular_nodes, double cusp_cutoff = 0.005) {
    if (radial_nodes < 16 || angular_nodes < 16)
        throw std::invalid_argument("fundamental_domain_grid: needs at least 16 nodes per direction");
    if (!(cusp_cutoff > 0.0 && cusp_cutoff < 1.0))
        throw std::invalid_argument("fundamental_domain_grid: cusp cutoff must be in (0,1)");

    const double lam_max = 1.0 / cusp_cutoff;
    const double t_cut = std::acosh(std::sqrt(lam_max)); // lambda = cosh^2 t

    auto build = [&](int rn, int an, bool coarse_pass) {
        QuadratureDomain q;
        const double pitch = t_cut / rn;
        for (int i = 0; i < rn; ++i) {
            double t0 = i * pitch, t1 = (i + 1) * pitch, tm = (i + 0.5) * pitch;
            double ring_area = pi * (detail::sech2(t0) - detail::sech2(t1));
            double cell = ring_area / an;
            double r = std::tanh(tm);
            double cm = std::cosh(tm);
            double lam = cm * cm;
            for (int j = 0; j < an; ++j) {
                double th = 2.0 * pi * (j + 0.5) / an;
                cplx z(r * std::cos(th), r * std::sin(th));
                if (!dirichlet_membership(e, z)) continue;
                q.nodes.push_back(z);
                q.weights.push_back(cell);
                q.lambda.push_back(lam);
            }
        }
        if (!coarse_pass && q.nodes.empty())
            throw std::domain_error("fundamental_domain_grid: no grid node lies in the domain");
        return q;
    };

    QuadratureDomain q = build(radial_nodes, angular_nodes, false);
    q.coarse = std::make_shared<QuadratureDomain>(
        build(std::max(2, radial_nodes / 2), std::max(8, angular_nodes / 2), true));

    // Bound on the omitted lambda^2-mass, from two sources.
    //
    // (1) Probe band just beyond the cutoff: lambda^2-mass of the domain
    // between lambda_max and e^3 lambda_max, doubled to cover the geometric
    // decay of anything the band itself sees.
    double band = 0.0;
    {
        const double t_deep = t_cut + 1.5;
        const double pitch = t_cut / radial_nodes;
        const int bn = static_cast<int>(std::ceil((t_deep - t_cut) / pitch));
        for (int i = 0; i < bn; ++i) {
            double t0 = t_cut + i * pitch, t1 = t_cut + (i + 1) * pitch, tm = 0.5 * (t0 + t1);
            double cell = pi * (detail::sech2(t0) - detail::sech2(t1)) / angular_nodes;
            double r = std::tanh(tm);
            double cm = std::cosh(tm);
            double lam2 = cm * cm * cm * cm;
            band += block_sum<double>(static_cast<std::size_t>(angular_nodes), [&](std::size_t j) {
                double th = 2.0 * pi * (j + 0.5) / angular_nodes;
                cplx z(r * std::cos(th), r * std::sin(th));
                return dirichlet_membership(e, z) ? cell * lam2 : 0.0;
            });
        }
    }

    // (2) Analytic cusp wedges, which angular sampling cannot resolve (their
    // width shrinks like e^{-4t}).  A parabolic fixed point v on the circle
    // marks an ideal vertex; the half-plane chart h = i(v+z)/(v-z) sends v to
    // infinity and turns the parabolic into h -> h + beta.  In that chart
    // lambda = |h+i|^2 / (4 Im h), so the wedge beyond the lambda cut lies in
    // a strip period above Im h = 4 lambda_max - 2, of lambda^2-mass at most
    // |beta| / (16 lambda_max - 8).  Summing over distinct fixed points of
    // the enumerated parabolics (primitive width = smallest |beta| seen)
    // over-counts vertices of the same cusp, which only loosens the bound.
    double cusp_bound = 0.0;
    {
        std::vector<cplx> dirs;
        std::vector<double> widths;
        for (const MoebiusMap& m : e.elements) {
            if (classify(m) != MapClass::parabolic) continue;
            if (std::abs(m.c) < 1e-12) continue;
            cplx v = (m.a - m.d) / (2.0 * m.c);
            double rv = std::abs(v);
            if (rv < 0.5) continue;
            v /= rv;
            // T = M m M^{-1} with M = [[i, iv], [-1, v]]; the adjugate works
            // as the inverse here because conjugation scales all entries by
            // det M, which drops out of the ratio T_b / T_d.
            const cplx iu(0.0, 1.0);
            cplx Ib = -iu * v, Id = iu;
            cplx Pb = m.a * Ib + m.b * Id, Pd = m.c * Ib + m.d * Id;
            cplx Tb = iu * Pb + iu * v * Pd;
            cplx Td = -Pb + v * Pd;
            if (std::abs(Td) < 1e-12) continue;
            double beta = std::abs(Tb / Td);
            bool merged = false;
            for (std::size_t k = 0; k < dirs.size(); ++k) {
                if (std::abs(dirs[k] - v) < 1e-6) {
                    widths[k] = std::min(widths[k], beta);
                    merged = true;
                    break;
                }
            }
            if (!merged) {
                dirs.push_back(v);
                widths.push_back(beta);
            }
        }
        // Enumerated parabolics also mark vertices of domain translates,
        // whose wedges carry none of the omitted mass.  Keep a vertex only
        // if the domain is actually present in its strip at the cut depth,
        // sampled across one period at Im h in {4, 8} lambda_max.  The
        // radius from the basepoint toward a genuine vertex maps to the
        // line Re h = 0 and stays in the domain closure, so a symmetric
        // sample that includes 0 cannot miss a genuine vertex.
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            const cplx v = dirs[k];
            const double beta = widths[k];
            bool present = false;
            for (double depth : {4.0 * lam_max, 8.0 * lam_max}) {
                for (int j = -32; j <= 32 && !present; ++j) {
                    cplx h(beta * j / 64.0, depth);
                    cplx z = v * (h - cplx(0.0, 1.0)) / (h + cplx(0.0, 1.0));
                    if (abs2(z) < 1.0 && dirichlet_membership(e, z)) present = true;
                }
                if (present) break;
            }
            if (present) cusp_bound += beta / (16.0 * lam_max - 8.0);
        }
    }
    q.excluded_mass_bound = 2.0 * band + cusp_bound;
    q.tail_note = "cusp region lambda > " + std::to_string(lam_max) +
                  " omitted; excluded-mass bound covers cusps whose parabolics"
                  " appear within the enumerated word length";
    return q;
}

// ---------------------------------------------------------------------------
// orbits, limit sets, geodesics

inline std::vector<cplx> orbit(const EnumeratedGroup& e, cplx z0) {
    if (abs2(z0) >= 1.0)
        throw std::domain_error("orbit: seed not in the open unit disc");
    std::vector<cplx> out(e.elements.size());
    block_map(out, [&](std::size_t i) { return e.elements[i](z0); });
    return out;
}

// Attracting fixed points of the loxodromic elements, radially projected to
// the unit circle.  For a loxodromic with real trace both fixed points lie
// on the circle already; the projection removes rounding drift.
inline std::vector<cplx> limit_set_sample(const EnumeratedGroup& e) {
    std::vector<cplx> pts;
    pts.reserve(e.elements.size());
    for (const MoebiusMap& m : e.elements) {
        if (classify(m) != MapClass::loxodromic) continue;
        if (std::abs(m.c) < 1e-12) continue; // fixed point at 0/infinity, not on the circle
        cplx disc = std::sqrt(m.trace() * m.trace() - 4.0);
        for (cplx root : {disc, -disc}) {
            cplx fp = (m.a - m.d + root) / (2.0 * m.c);
            // attracting fixed point: |g'(fp)| < 1, i.e. |c fp + d| > 1
            if (std::abs(m.c * fp + m.d) > 1.0) {
                double r = std::abs(fp);
                if (r > 0.0) pts.push_back(fp / r);
                break;
            }
        }
    }
    return pts;
}

// Length of the closed geodesic of a loxodromic element with real trace,
// in the curvature -1 normalisation: l = 2 arccosh(|tr|/2).
inline double geodesic_length(const MoebiusMap& m) {
    if (classify(m) != MapClass::loxodromic)
        throw std::domain_error("geodesic_length: element is not loxodromic");
    cplx tr = m.trace();
    if (std::abs(tr.imag()) > 1e-9)
        throw std::domain_error("geodesic_length: trace is not real (no invariant disc geodesic)");
    return 2.0 * std::acosh(std::abs(tr.real()) / 2.0);
}

inline cplx trace_squared(const GroupPresentation& g, const Word& w) {
    cplx t = word_to_map(g, w).trace();
    return t * t;
}

inline cplx trace_squared(const GroupPresentation& g, const std::string& word_text) {
    return trace_squared(g, parse_word(word_text));
}

// ---------------------------------------------------------------------------
// once-punctured torus fixture

// Generators with tr A = x, tr B = y and tr AB = z, where z is the smaller
// root of z^2 - xyz + (x^2 + y^2) = 0.  On the Markov variety
// x^2 + y^2 + z^2 = xyz the commutator has trace -2 (Fricke identity), so
// the quotient is a complete once-punctured torus.  Construction: in the
// upper half-plane take A diagonal and B with unit lower-left entry, then
// conjugate by the Cayley map to the disc.
inline GroupPresentation punctured_torus_group(double x, double y) {
    if (!(x > 2.0) || !(y > 2.0))
        throw std::domain_error("punctured_torus_group: traces must exceed 2");
    const double disc = x * x * y * y - 4.0 * (x * x + y * y);
    if (disc < 0.0)
        throw std::domain_error("punctured_torus_group: no real solution of the trace relation");
    const double z = 0.5 * (x * y - std::sqrt(disc));

    const double lam = 0.5 * (x + std::sqrt(x * x - 4.0));
    const double b1 = (z - y / lam) / (lam - 1.0 / lam);
    const double b4 = y - b1;

    MoebiusMap a_h = make_moebius(lam, 0.0, 0.0, 1.0 / lam);
    MoebiusMap b_h = make_moebius(b1, b1 * b4 - 1.0, 1.0, b4);

    const cplx i(0.0, 1.0);
    MoebiusMap cayley = make_moebius(1.0, -i, 1.0, i); // upper half-plane -> disc
    MoebiusMap cayley_inv = cayley.inverse();

    GroupPresentation g;
    g.kind = GroupKind::free_rank;
    g.genus = 1;
    g.punctures = 1;
    g.generators = {compose(cayley, compose(a_h, cayley_inv)),
                    compose(cayley, compose(b_h, cayley_inv))};
    validate_presentation(g);
    return g;
}

// One-parameter pinching family: x = 2 + u and y = z = x / sqrt(u) stay on
// the Markov variety while the A-geodesic length 2 arccosh((2+u)/2) shrinks
// to zero with u.
inline GroupPresentation pinch_path(double u) {
    if (!(u > 0.0))
        throw std::domain_error("pinch_path: parameter must be positive");
    const double x = 2.0 + u;
    return punctured_torus_group(x, x / std::sqrt(u));
}

inline GroupPresentation trivial_group() {
    GroupPresentation g;
    g.kind = GroupKind::free_rank;
    g.genus = 0;
    g.punctures = 0;
    return g;
}

} // namespace uniformizer
