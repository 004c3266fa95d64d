#pragma once

// Factors of automorphy on the unit disc for a finitely generated group:
// maps g -> rho_g(z) obeying the cocycle rule
//
//     rho_{g1 g2}(z) = rho_{g1}(g2 z) * rho_{g2}(z).
//
// Three constructible forms:
//   * canonical power: rho_g(z) = (c z + d)^{2s} = g'(z)^{-s} on the stored
//     SL(2) lift.  For 2s integral this is branch-free; otherwise the
//     logarithm log (cz+d)^2 is fixed per generator by the principal branch
//     anchored at the basepoint and extended along words by the additive
//     cocycle, so the multiplicative rule holds exactly by construction.
//   * flat: a homomorphism into C^*, constant in z, one value per generator;
//     unitary flat factors (all |value| = 1) are the 0-factors.
//   * pointwise products of the above; s-exponents add.
//
// The header also carries the period-data solver: given a period matrix tau
// (symmetric, Im tau > 0) and row vectors sigma, sigma', find a complex
// g x g matrix C with
//
//     Im( sum_i C^{ki} sigma_i + sigma_k )                  = 0   (k = 1..g)
//     Im( sum_{j,i} C^{ji} sigma_i tau_{jk} + sigma'_k )    = 0   (k = 1..g)
//
// assembled as one real least-squares system in the 2 g^2 real unknowns and
// solved in the minimum-norm sense.  With Im tau positive definite and
// sigma != 0 the system is consistent and the residual is at rounding level;
// inconsistent corner cases are returned flagged, never silently patched.

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include <eigen3/Eigen/Dense>

#include "common.hpp"
#include "fuchsian.hpp"
#include "moebius.hpp"

namespace uniformizer {

class AutomorphyFactor {
public:
    enum class Form { canonical, flat, product };

    Form form = Form::canonical;
    double s_exponent = 0.0; // canonical exponent; for products, the sum
    std::shared_ptr<const GroupPresentation> group;
    std::vector<cplx> flat_values;
    std::vector<AutomorphyFactor> parts;

    bool integer_weight() const {
        double two_s = 2.0 * s_exponent;
        return std::abs(two_s - std::round(two_s)) < 1e-12;
    }

    // s with |rho_g(z)| = |g'(z)|^{-s} when that holds identically:
    // canonical factors report their exponent, flat factors 0 when unitary,
    // products the sum when every part qualifies.
    std::optional<double> s_parameter() const {
        switch (form) {
            case Form::canonical:
                return s_exponent;
            case Form::flat:
                for (cplx v : flat_values)
                    if (std::abs(std::abs(v) - 1.0) > 1e-12) return std::nullopt;
                return 0.0;
            case Form::product: {
                double total = 0.0;
                for (const AutomorphyFactor& p : parts) {
                    auto sp = p.s_parameter();
                    if (!sp) return std::nullopt;
                    total += *sp;
                }
                return total;
            }
        }
        return std::nullopt;
    }

    // Branch of log (c_w z + d_w)^2 continued along the word: additive
    // cocycle sum of per-letter branches, each of which is globally
    // single-valued on the disc because |c/d| < 1 for disc automorphisms.
    cplx log_j_squared(const Word& w, cplx z) const {
        if (!group) throw std::logic_error("factor has no group attached");
        cplx acc{0.0, 0.0};
        cplx t = z;
        for (std::size_t idx = w.size(); idx-- > 0;) {
            int letter = w[idx];
            const MoebiusMap& m = letter_map_checked(letter);
            if (letter > 0) {
                acc += branch_log_j2(m, t);
                t = m(t);
            } else {
                cplx t_next = m.inverse()(t);
                acc -= branch_log_j2(m, t_next);
                t = t_next;
            }
        }
        return acc;
    }

    cplx evaluate(const Word& w, cplx z) const {
        switch (form) {
            case Form::canonical: {
                if (integer_weight()) {
                    MoebiusMap m = word_to_map(*group, w);
                    return integer_power_j(m, z);
                }
                return std::exp(s_exponent * log_j_squared(w, z));
            }
            case Form::flat: {
                cplx v{1.0, 0.0};
                for (int letter : w) {
                    int idx = std::abs(letter) - 1;
                    if (letter == 0 || idx >= static_cast<int>(flat_values.size()))
                        throw std::invalid_argument("flat factor: letter outside the generator range");
                    v = letter > 0 ? v * flat_values[idx] : v / flat_values[idx];
                }
                return v;
            }
            case Form::product: {
                cplx v{1.0, 0.0};
                for (const AutomorphyFactor& p : parts) v *= p.evaluate(w, z);
                return v;
            }
        }
        throw std::logic_error("factor: unknown form");
    }

    // Fast path used by series summation: rho evaluated directly from the
    // element's matrix.  Only valid for branch-free factors (canonical with
    // 2s integral, possibly multiplied by flat parts, for which the word is
    // still needed).
    cplx evaluate_on_map(const MoebiusMap& m, const Word& w, cplx z) const {
        switch (form) {
            case Form::canonical:
                if (integer_weight()) return integer_power_j(m, z);
                return std::exp(s_exponent * log_j_squared(w, z));
            case Form::flat:
                return evaluate(w, z);
            case Form::product: {
                cplx v{1.0, 0.0};
                for (const AutomorphyFactor& p : parts) v *= p.evaluate_on_map(m, w, z);
                return v;
            }
        }
        throw std::logic_error("factor: unknown form");
    }

private:
    const MoebiusMap& letter_map_checked(int letter) const {
        int idx = std::abs(letter) - 1;
        if (letter == 0 || idx >= static_cast<int>(group->generators.size()))
            throw std::invalid_argument("factor: letter outside the generator range");
        return group->generators[idx];
    }

    // log (cz+d)^2 = Log d^2 + 2 Log(1 + (c/d) z): principal at z = 0 and
    // single-valued on the disc since |c/d| < 1 keeps 1 + (c/d) z in the
    // right half-plane.
    static cplx branch_log_j2(const MoebiusMap& m, cplx z) {
        return std::log(m.d * m.d) + 2.0 * std::log(1.0 + (m.c / m.d) * z);
    }

    cplx integer_power_j(const MoebiusMap& m, cplx z) const {
        long n = static_cast<long>(std::llround(2.0 * s_exponent));
        cplx j = m.c * z + m.d;
        cplx base = n >= 0 ? j : 1.0 / j;
        long k = std::labs(n);
        cplx acc{1.0, 0.0};
        while (k > 0) { // power by squaring
            if (k & 1) acc *= base;
            base *= base;
            k >>= 1;
        }
        return acc;
    }
};

inline AutomorphyFactor canonical_factor(std::shared_ptr<const GroupPresentation> g, double s) {
    if (!g) throw std::invalid_argument("canonical_factor: null group");
    AutomorphyFactor f;
    f.form = AutomorphyFactor::Form::canonical;
    f.s_exponent = s;
    f.group = std::move(g);

    // A surface relation forces exp(s * log j^2) around the relation word to
    // be 1; if the continued branch disagrees the factor does not descend.
    if (f.group->kind == GroupKind::surface_genus && !f.integer_weight()) {
        Word rel;
        for (int i = 0; i + 1 < static_cast<int>(f.group->generators.size()); i += 2) {
            int a = i + 1, b = i + 2;
            for (int letter : {a, b, -a, -b}) rel.push_back(static_cast<std::int8_t>(letter));
        }
        cplx residue = std::exp(s * f.log_j_squared(rel, f.group->basepoint));
        if (std::abs(residue - 1.0) > 1e-6)
            throw std::domain_error("canonical_factor: branch conflict around the surface relation");
    }
    return f;
}

inline AutomorphyFactor flat_factor(std::shared_ptr<const GroupPresentation> g,
                                    std::vector<cplx> values) {
    if (!g) throw std::invalid_argument("flat_factor: null group");
    if (values.size() != g->generators.size())
        throw std::invalid_argument("flat_factor: need one value per generator");
    for (cplx v : values)
        if (std::abs(v) < 1e-300)
            throw std::invalid_argument("flat_factor: values must be nonzero");
    AutomorphyFactor f;
    f.form = AutomorphyFactor::Form::flat;
    f.group = std::move(g);
    f.flat_values = std::move(values);
    return f;
}

inline AutomorphyFactor factor_product(const AutomorphyFactor& f1, const AutomorphyFactor& f2) {
    if (!f1.group || !f2.group || f1.group->generators.size() != f2.group->generators.size())
        throw std::invalid_argument("factor_product: factors live on different groups");
    for (std::size_t i = 0; i < f1.group->generators.size(); ++i) {
        const MoebiusMap &a = f1.group->generators[i], &b = f2.group->generators[i];
        if (std::abs(a.a - b.a) + std::abs(a.b - b.b) + std::abs(a.c - b.c) + std::abs(a.d - b.d) > 1e-12)
            throw std::invalid_argument("factor_product: factors live on different groups");
    }
    AutomorphyFactor f;
    f.form = AutomorphyFactor::Form::product;
    f.group = f1.group;
    f.s_exponent = f1.s_exponent + f2.s_exponent;
    f.parts = {f1, f2};
    return f;
}

// |rho_{g1 g2}(z) - rho_{g1}(g2 z) rho_{g2}(z)| / max(1, |rho_{g1 g2}(z)|).
inline double cocycle_residual(const AutomorphyFactor& rho, const Word& w1, const Word& w2, cplx z) {
    Word concat = w1;
    concat.insert(concat.end(), w2.begin(), w2.end());
    concat = reduce_word(concat);
    cplx lhs = rho.evaluate(concat, z);
    cplx z2 = word_to_map(*rho.group, w2)(z);
    cplx rhs = rho.evaluate(w1, z2) * rho.evaluate(w2, z);
    return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

// max over samples of | |rho_w(z)| - |w'(z)|^{-s} |.
struct FactorSample {
    Word word;
    cplx z;
};

inline double s_factor_check(const AutomorphyFactor& rho, double s,
                             const std::vector<FactorSample>& samples) {
    double worst = 0.0;
    for (const FactorSample& smp : samples) {
        MoebiusMap m = word_to_map(*rho.group, smp.word);
        double lhs = std::abs(rho.evaluate(smp.word, smp.z));
        double rhs = std::pow(std::abs(derivative(m, smp.z)), -s);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// period data and the unitary flat equivalence solver

struct PeriodData {
    int g = 0;
    std::vector<cplx> tau;         // g x g, row major
    std::vector<cplx> sigma;       // a-periods of the flat logarithm
    std::vector<cplx> sigma_prime; // b-periods
};

inline void validate_period_data(const PeriodData& p) {
    const int g = p.g;
    if (g < 1 || static_cast<int>(p.tau.size()) != g * g ||
        static_cast<int>(p.sigma.size()) != g || static_cast<int>(p.sigma_prime.size()) != g)
        throw std::invalid_argument("period data: inconsistent dimensions");
    Eigen::MatrixXd im(g, g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            if (std::abs(p.tau[i * g + j] - p.tau[j * g + i]) > 1e-10)
                throw std::invalid_argument("period data: tau is not symmetric");
            im(i, j) = p.tau[i * g + j].imag();
        }
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (im + im.transpose()));
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("period data: Im tau is not positive definite");
}

struct FlatSolveResult {
    std::vector<cplx> C; // g x g, row major
    double residual = 0.0;
    bool rank_deficient = false; // set when the assembled system is inconsistent
};

inline FlatSolveResult unitary_flat_solve(const PeriodData& p) {
    validate_period_data(p);
    const int g = p.g;
    const int unknowns = 2 * g * g;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * g, unknowns);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * g);

    // Im(C^{ji} mu) contributes Im(mu) to Re C^{ji} and Re(mu) to Im C^{ji}
    auto stamp = [&](int row, int j, int i, cplx mu) {
        A(row, 2 * (j * g + i)) += mu.imag();
        A(row, 2 * (j * g + i) + 1) += mu.real();
    };

    for (int k = 0; k < g; ++k) {
        for (int i = 0; i < g; ++i) stamp(k, k, i, p.sigma[i]);
        rhs(k) = -p.sigma[k].imag();
    }
    for (int k = 0; k < g; ++k) {
        for (int j = 0; j < g; ++j)
            for (int i = 0; i < g; ++i) stamp(g + k, j, i, p.sigma[i] * p.tau[j * g + k]);
        rhs(g + k) = -p.sigma_prime[k].imag();
    }

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    Eigen::VectorXd x = cod.solve(rhs); // minimum-norm least squares

    FlatSolveResult out;
    out.C.resize(g * g);
    for (int j = 0; j < g; ++j)
        for (int i = 0; i < g; ++i)
            out.C[j * g + i] = cplx(x(2 * (j * g + i)), x(2 * (j * g + i) + 1));
    out.residual = (A * x - rhs).cwiseAbs().maxCoeff();
    out.rank_deficient = out.residual > 1e-10;
    return out;
}

// Scale function of the unitary flat equivalence:
// h(z) = exp( 2 pi i  sum_j ( sum_i C^{ji} sigma_i ) w_j(z) ),
// where w_j are the abelian integrals evaluated by the caller.
inline cplx induced_scale(const PeriodData& p, const std::vector<cplx>& C,
                          const std::vector<cplx>& w_values) {
    if (static_cast<int>(w_values.size()) != p.g)
        throw std::invalid_argument("induced_scale: need one integral value per handle");
    cplx expo{0.0, 0.0};
    for (int j = 0; j < p.g; ++j) {
        cplx row{0.0, 0.0};
        for (int i = 0; i < p.g; ++i) row += C[j * p.g + i] * p.sigma[i];
        expo += row * w_values[j];
    }
    return std::exp(cplx(0.0, 2.0 * pi) * expo);
}

} // namespace uniformizer
