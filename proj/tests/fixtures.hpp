#pragma once

#include <uniformizer/uniformizer.hpp>

#include <random>

namespace testutil {

using namespace uniformizer;

// Random element of the disc-automorphism group: [[a, b], [conj b, conj a]]
// with |a|^2 - |b|^2 = 1.
inline MoebiusMap random_disc_automorphism(std::mt19937& rng, double max_boost = 1.0) {
    std::uniform_real_distribution<double> ang(0.0, 2.0 * pi);
    std::uniform_real_distribution<double> boost(0.0, max_boost);
    double t = boost(rng), alpha = ang(rng), beta = ang(rng);
    cplx a = std::cosh(t) * std::exp(cplx(0.0, alpha));
    cplx b = std::sinh(t) * std::exp(cplx(0.0, beta));
    return make_moebius(a, b, std::conj(b), std::conj(a));
}

inline cplx random_disc_point(std::mt19937& rng, double rmax = 0.7) {
    std::uniform_real_distribution<double> rad(0.0, rmax);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * pi);
    double r = rad(rng), t = ang(rng);
    return cplx(r * std::cos(t), r * std::sin(t));
}

// Random reduced word of length at most max_len in a rank-2 group.
inline Word random_word(std::mt19937& rng, int max_len, int rank = 2) {
    std::uniform_int_distribution<int> len(0, max_len);
    std::uniform_int_distribution<int> pick(0, 2 * rank - 1);
    Word w;
    int n = len(rng);
    while (static_cast<int>(w.size()) < n) {
        int raw = pick(rng);
        int letter = raw < rank ? raw + 1 : -(raw - rank + 1);
        if (!w.empty() && w.back() == -letter) continue; // keep it reduced
        w.push_back(static_cast<std::int8_t>(letter));
    }
    return w;
}

inline const GroupPresentation& torus_fixture() {
    static const GroupPresentation g = punctured_torus_group(3.0, 3.0);
    return g;
}

} // namespace testutil
