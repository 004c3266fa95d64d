#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

#include <random>

using namespace uniformizer;
using testutil::torus_fixture;

TEST_CASE("word parsing and reduction", "[fuchsian]") {
    Word w = parse_word("abAB");
    REQUIRE(w == Word({1, 2, -1, -2}));
    CHECK(reduce_word(parse_word("aA")).empty());
    CHECK(reduce_word(parse_word("abBA")).empty());
    CHECK(reduce_word(parse_word("abBc")) == Word({1, 3}));
    CHECK_THROWS_AS(parse_word("a1b"), std::invalid_argument);
}

TEST_CASE("trace coordinates of the standard fixture", "[fuchsian]") {
    const GroupPresentation& g = torus_fixture();
    CHECK(std::abs(trace_squared(g, "a") - 9.0) < 1e-9);
    CHECK(std::abs(trace_squared(g, "b") - 9.0) < 1e-9);
    CHECK(std::abs(trace_squared(g, "ab") - 9.0) < 1e-9);
    // the commutator is parabolic: tr^2 = 4 (trace -2 in SL2)
    CHECK(std::abs(trace_squared(g, "abAB") - 4.0) < 1e-9);
    CHECK(classify(word_to_map(g, parse_word("abAB"))) == MapClass::parabolic);
}

TEST_CASE("presentation validation", "[fuchsian]") {
    CHECK_THROWS_AS(punctured_torus_group(2.0, 3.0), std::domain_error);
    GroupPresentation g = torus_fixture();
    CHECK_NOTHROW(validate_presentation(g));
    g.generators[0].a += 1e-6; // determinant drifts off 1
    CHECK_THROWS(validate_presentation(g));
}

TEST_CASE("free-group enumeration counts", "[fuchsian]") {
    const GroupPresentation& g = torus_fixture();
    CHECK(enumerate_elements(g, 0).size() == 1);
    CHECK(enumerate_elements(g, 1).size() == 5);
    CHECK(enumerate_elements(g, 2).size() == 17);
    // 1 + 2 (3^10 - 1) reduced words of length <= 10 in a free rank-2 group
    EnumeratedGroup e = enumerate_elements(g, 10);
    CHECK(e.size() == 118097);
    REQUIRE(e.shell_offsets.size() == 12);
    CHECK(e.shell_offsets[1] - e.shell_offsets[0] == 1);
    CHECK(e.shell_offsets[2] - e.shell_offsets[1] == 4);
    CHECK(e.words.front().empty());
    CHECK_THROWS_AS(enumerate_elements(g, 10, 100), std::length_error);
}

TEST_CASE("dirichlet membership separates the orbit", "[fuchsian]") {
    EnumeratedGroup e = enumerate_elements(torus_fixture(), 6);
    CHECK(dirichlet_membership(e, 0.0));
    cplx moved = e.group.generators[0](cplx(0.0, 0.0));
    CHECK_FALSE(dirichlet_membership(e, moved));
}

TEST_CASE("translates tile the disc", "[fuchsian]") {
    EnumeratedGroup e = enumerate_elements(torus_fixture(), 8);
    std::mt19937 rng(21);
    int exact = 0, total = 0;
    for (int i = 0; i < 300; ++i) {
        cplx z = testutil::random_disc_point(rng, 0.7);
        int hits = 0;
        for (const MoebiusMap& m : e.elements)
            if (dirichlet_membership(e, m(z))) ++hits;
        REQUIRE(hits >= 1);  // some translate lands in the closed domain
        REQUIRE(hits <= 2);  // at most a boundary tie
        if (hits == 1) ++exact;
        ++total;
    }
    CHECK(exact >= total * 9 / 10);
}

TEST_CASE("fundamental domain quadrature masses", "[fuchsian]") {
    // trivial group: the domain is the whole disc, Euclidean area pi
    EnumeratedGroup triv = enumerate_elements(trivial_group(), 0);
    QuadratureDomain dt = fundamental_domain_grid(triv, 64, 128, 0.005);
    CHECK(std::abs(dt.total_weight() - pi) < 1e-2 * pi);

    // (3,3) torus: lambda^2-mass = (curvature -1 area)/4 = pi/2
    EnumeratedGroup e = enumerate_elements(torus_fixture(), 8);
    QuadratureDomain q = fundamental_domain_grid(e, 64, 128, 0.005);
    RealIntegral mass = integrate_real(q, [](cplx, double lam) { return lam * lam; });
    double ref = pi / 2.0;
    CHECK(std::abs(mass.value - ref) < 0.02 * ref + mass.error + q.excluded_mass_bound);
    CHECK(q.excluded_mass_bound > 0.0);      // the cusp is accounted for
    CHECK(q.excluded_mass_bound < 0.05 * ref); // ... and not absurdly
    REQUIRE(q.coarse != nullptr);

    // refining shrinks the self-reported quadrature error and stays within
    // budget; the distance to the reference itself converges to the mass
    // behind the cusp cutoff, not to zero, so it is not compared directly
    QuadratureDomain q2 = fundamental_domain_grid(e, 128, 256, 0.005);
    RealIntegral mass2 = integrate_real(q2, [](cplx, double lam) { return lam * lam; });
    CHECK(mass2.error < mass.error);
    CHECK(std::abs(mass2.value - ref) < 0.02 * ref + mass2.error + q2.excluded_mass_bound);
}

TEST_CASE("orbit and limit set samples", "[fuchsian]") {
    EnumeratedGroup e5 = enumerate_elements(torus_fixture(), 5);
    std::vector<cplx> orb = orbit(e5, 0.0);
    CHECK(orb.size() == 485);        // free group: orbit matches element count
    std::vector<cplx> ls5 = limit_set_sample(e5);
    for (cplx z : ls5) REQUIRE(std::abs(std::abs(z) - 1.0) < 1e-9);
    EnumeratedGroup e6 = enumerate_elements(torus_fixture(), 6);
    CHECK(limit_set_sample(e6).size() > ls5.size());
}

TEST_CASE("geodesic length: value and conjugation invariance", "[fuchsian]") {
    const GroupPresentation& g = torus_fixture();
    MoebiusMap a = g.generators[0];
    CHECK(std::abs(geodesic_length(a) - 1.92484730023841379) < 1e-12);
    std::mt19937 rng(23);
    for (int i = 0; i < 30; ++i) {
        Word w = testutil::random_word(rng, 4);
        MoebiusMap c = word_to_map(g, w);
        MoebiusMap conj = compose(compose(c, a), c.inverse());
        REQUIRE(std::abs(geodesic_length(conj) - geodesic_length(a)) < 1e-9);
    }
}

TEST_CASE("pinch path traces", "[fuchsian]") {
    GroupPresentation g1 = pinch_path(1.0);
    CHECK(std::abs(trace_squared(g1, "a") - 9.0) < 1e-9);
    GroupPresentation gq = pinch_path(0.25);
    CHECK(std::abs(trace_squared(gq, "a") - 2.25 * 2.25) < 1e-9);
    CHECK_THROWS_AS(pinch_path(0.0), std::domain_error);
}

TEST_CASE("surface relation product of the fixture is parabolic", "[fuchsian]") {
    MoebiusMap rel = surface_relation_product(torus_fixture());
    CHECK(std::abs(rel.trace() + 2.0) < 1e-9); // the -I lift of the cusp class
}
