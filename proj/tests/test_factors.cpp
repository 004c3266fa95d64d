#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

#include <memory>
#include <random>

using namespace uniformizer;
using testutil::torus_fixture;

namespace {

std::shared_ptr<const GroupPresentation> shared_fixture() {
    return std::make_shared<GroupPresentation>(torus_fixture());
}

} // namespace

TEST_CASE("canonical factor with zero weight is trivial", "[factors]") {
    AutomorphyFactor f = canonical_factor(shared_fixture(), 0.0);
    CHECK(std::abs(f.evaluate(parse_word("abAB"), cplx(0.2, 0.1)) - 1.0) < 1e-14);
}

TEST_CASE("canonical factor matches (cz+d)^{2s} on one letter", "[factors]") {
    auto g = std::make_shared<GroupPresentation>();
    g->kind = GroupKind::free_rank;
    g->generators = {make_moebius(2.0, 0.0, 0.0, 0.5)};
    AutomorphyFactor f = canonical_factor(g, 2.0);
    // rho_a(0) = d^{2s} = 0.5^4
    CHECK(std::abs(f.evaluate(Word{1}, 0.0) - 0.0625) < 1e-15);
}

TEST_CASE("flat factor multiplies generator values along the word", "[factors]") {
    AutomorphyFactor f = flat_factor(shared_fixture(), {cplx(2.0, 0.0), cplx(3.0, 0.0)});
    CHECK(std::abs(f.evaluate(parse_word("aB"), cplx(0.3, 0.0)) - 2.0 / 3.0) < 1e-14);
    CHECK_THROWS_AS(flat_factor(shared_fixture(), {cplx(1.0, 0.0)}), std::invalid_argument);
    CHECK_THROWS_AS(flat_factor(shared_fixture(), {cplx(0.0, 0.0), cplx(1.0, 0.0)}),
                    std::invalid_argument);
}

TEST_CASE("cocycle residuals stay at rounding level", "[factors]") {
    auto gp = shared_fixture();
    std::vector<AutomorphyFactor> factors;
    factors.push_back(canonical_factor(gp, 2.0));
    factors.push_back(canonical_factor(gp, 2.5));
    factors.push_back(flat_factor(gp, {std::exp(cplx(0.0, 0.8)), std::exp(cplx(0.0, -1.3))}));
    factors.push_back(factor_product(factors[0], factors[2]));

    std::mt19937 rng(31);
    for (const AutomorphyFactor& rho : factors) {
        double worst = 0.0;
        for (int i = 0; i < 250; ++i) {
            Word w1 = testutil::random_word(rng, 3);
            Word w2 = testutil::random_word(rng, 3);
            cplx z = testutil::random_disc_point(rng, 0.6);
            worst = std::max(worst, cocycle_residual(rho, w1, w2, z));
        }
        REQUIRE(worst <= 1e-9);
    }
}

TEST_CASE("s-factor magnitude identity", "[factors]") {
    auto gp = shared_fixture();
    std::mt19937 rng(32);
    std::vector<FactorSample> samples;
    for (int i = 0; i < 200; ++i)
        samples.push_back({testutil::random_word(rng, 3), testutil::random_disc_point(rng, 0.6)});

    CHECK(s_factor_check(canonical_factor(gp, 2.0), 2.0, samples) <= 1e-9);
    CHECK(s_factor_check(canonical_factor(gp, 2.5), 2.5, samples) <= 1e-9);
    AutomorphyFactor unitary =
        flat_factor(gp, {std::exp(cplx(0.0, 0.8)), std::exp(cplx(0.0, -1.3))});
    REQUIRE(unitary.s_parameter().has_value());
    CHECK(*unitary.s_parameter() == 0.0);
    CHECK(s_factor_check(unitary, 0.0, samples) <= 1e-12);
    // non-unitary flat values do not define an s-factor
    AutomorphyFactor skew = flat_factor(gp, {cplx(2.0, 0.0), cplx(1.0, 0.0)});
    CHECK_FALSE(skew.s_parameter().has_value());
}

TEST_CASE("factor products", "[factors]") {
    auto gp = shared_fixture();
    AutomorphyFactor c = canonical_factor(gp, 2.0);
    AutomorphyFactor u = flat_factor(gp, {std::exp(cplx(0.0, 0.5)), std::exp(cplx(0.0, 0.25))});
    AutomorphyFactor prod = factor_product(c, u);
    CHECK(prod.s_exponent == 2.0);
    Word w = parse_word("ab");
    cplx z(0.1, 0.2);
    CHECK(std::abs(prod.evaluate(w, z) - c.evaluate(w, z) * u.evaluate(w, z)) < 1e-13);
    auto other = std::make_shared<GroupPresentation>(punctured_torus_group(3.0, 4.0));
    CHECK_THROWS_AS(factor_product(c, canonical_factor(other, 1.0)), std::invalid_argument);
}

TEST_CASE("period data validation", "[factors]") {
    PeriodData good{1, {cplx(0.0, 1.0)}, {cplx(0.0, 0.25)}, {cplx(0.0, 0.0)}};
    CHECK_NOTHROW(validate_period_data(good));

    PeriodData asym{2,
                    {cplx(0.0, 1.0), cplx(0.5, 0.0), cplx(0.1, 0.0), cplx(0.0, 1.0)},
                    {cplx(0.0, 0.0), cplx(0.0, 0.0)},
                    {cplx(0.0, 0.0), cplx(0.0, 0.0)}};
    CHECK_THROWS_AS(validate_period_data(asym), std::invalid_argument);

    PeriodData neg{1, {cplx(0.0, -1.0)}, {cplx(0.0, 0.25)}, {cplx(0.0, 0.0)}};
    CHECK_THROWS_AS(validate_period_data(neg), std::invalid_argument);
}

TEST_CASE("unitary flat solver fixture has the unique solution C = -1", "[factors]") {
    PeriodData p{1, {cplx(0.0, 1.0)}, {cplx(0.0, 0.25)}, {cplx(0.0, 0.0)}};
    FlatSolveResult r = unitary_flat_solve(p);
    REQUIRE(r.C.size() == 1);
    CHECK(std::abs(r.C[0] - cplx(-1.0, 0.0)) < 1e-10);
    CHECK(r.residual <= 1e-10);
    CHECK_FALSE(r.rank_deficient);
}

TEST_CASE("random period data is solvable with tiny residual", "[factors]") {
    std::mt19937 rng(33);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        int g = 1 + trial % 3;
        PeriodData p;
        p.g = g;
        // Im tau = A A^T + I is positive definite; Re tau symmetric
        std::vector<double> re(g * g), im(g * g), A(g * g);
        for (double& v : A) v = nd(rng);
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j) {
                double dot = 0.0;
                for (int k = 0; k < g; ++k) dot += A[i * g + k] * A[j * g + k];
                im[i * g + j] = dot + (i == j ? 1.0 : 0.0);
            }
        for (int i = 0; i < g; ++i)
            for (int j = i; j < g; ++j) re[i * g + j] = re[j * g + i] = nd(rng);
        p.tau.resize(g * g);
        for (int k = 0; k < g * g; ++k) p.tau[k] = cplx(re[k], im[k]);
        for (int k = 0; k < g; ++k) {
            p.sigma.push_back(cplx(nd(rng), nd(rng)));
            p.sigma_prime.push_back(cplx(nd(rng), nd(rng)));
        }
        FlatSolveResult r = unitary_flat_solve(p);
        REQUIRE(r.residual <= 1e-10);
    }
}

TEST_CASE("induced scale follows the exponential formula", "[factors]") {
    PeriodData p{1, {cplx(0.0, 1.0)}, {cplx(0.0, 0.25)}, {cplx(0.0, 0.0)}};
    std::vector<cplx> C{cplx(-1.0, 0.0)};
    // exp(2 pi i * (-1) * (i/4) * 1) = exp(pi/2)
    cplx h = induced_scale(p, C, {cplx(1.0, 0.0)});
    CHECK(std::abs(h - std::exp(pi / 2.0)) < 1e-12);
    CHECK_THROWS_AS(induced_scale(p, C, {}), std::invalid_argument);
}
