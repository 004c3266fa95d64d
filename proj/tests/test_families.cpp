#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace uniformizer;

namespace {

GramOptions small_gram() {
    GramOptions opt;
    opt.radial_nodes = 32;
    opt.angular_nodes = 64;
    opt.cusp_cutoff = 0.05;
    opt.disc_radial = 48;
    opt.disc_angular = 64;
    return opt;
}

} // namespace

TEST_CASE("pinch family validation", "[families]") {
    CHECK_THROWS_AS(make_pinch_family(2.0, {{cplx(1.0, 0.0)}}, 6, 0.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_pinch_family(2.0, {}, 6, 0.5, 1.0), std::invalid_argument);
    FamilyPath p = make_pinch_family(2.0, {{cplx(1.0, 0.0)}}, 4, 0.5, 1.0);
    CHECK_THROWS_AS(build_fibre(p, 0.25), std::domain_error);
    Fibre f = build_fibre(p, 1.0);
    CHECK(std::abs(trace_squared(*f.group, "a") - 9.0) < 1e-9);
}

TEST_CASE("extended section equals the fibre series", "[families]") {
    FamilyPath p = make_pinch_family(2.0, {{cplx(1.0, 0.0)}}, 5, 0.5, 1.0);
    Fibre f = build_fibre(p, 1.0);
    cplx z(0.25, 0.1);
    ThetaValue direct = theta_series(section_form(p, f, 0), z);
    ThetaValue ext = extended_section(p, 1.0, 0, z);
    CHECK(std::abs(direct.value - ext.value) < 1e-12);
    CHECK_THROWS_AS(section_form(p, f, 3), std::invalid_argument);
}

TEST_CASE("plumbing coordinate conversions", "[families]") {
    CHECK(std::abs(plumbing_length(std::exp(-2.0 * pi * pi)) - 1.0) < 1e-12);
    CHECK(std::abs(plumbing_parameter(1.0) - 2.6752879910742397e-9) < 1e-22);
    CHECK(std::abs(plumbing_length(cplx(std::exp(-1.0), 0.0)) - 2.0 * pi * pi) < 1e-12);
    for (double t : {1e-9, 1e-4, 0.1, 0.9}) {
        double roundtrip = plumbing_parameter(plumbing_length(cplx(t, 0.0)));
        REQUIRE(std::abs(roundtrip - t) <= 1e-12 * t);
    }
    CHECK_THROWS_AS(plumbing_length(cplx(0.0, 0.0)), std::domain_error);
    CHECK_THROWS_AS(plumbing_length(cplx(1.5, 0.0)), std::domain_error);
    CHECK_THROWS_AS(plumbing_parameter(0.0), std::domain_error);
}

TEST_CASE("gram matrix structure on a small fibre", "[families]") {
    FamilyPath p = make_pinch_family(
        2.0, {{cplx(1.0, 0.0)}, {cplx(0.0, 0.0), cplx(1.0, 0.0)}}, 6, 0.5, 1.0);
    Fibre f = build_fibre(p, 1.0);
    GramReport rep = gram_matrix(p, f, small_gram());
    REQUIRE(rep.n == 2);
    REQUIRE(rep.gram.size() == 4);
    // hermitian, psd, diagonal real positive
    CHECK(std::abs(rep.gram[1] - std::conj(rep.gram[2])) < 1e-10);
    CHECK(rep.gram[0].real() > 0.0);
    CHECK(std::abs(rep.gram[0].imag()) < 1e-12);
    REQUIRE(rep.eigenvalues.size() == 2);
    CHECK(rep.eigenvalues.front() >= -1e-10);
    CHECK(rep.rank >= 1);
    CHECK(rep.rank <= 2);
    CHECK(rep.route_disagreement < 1.0);
}

TEST_CASE("wronskian degenerates for repeated seeds", "[families]") {
    FamilyPath p = make_pinch_family(2.0, {{cplx(1.0, 0.0)}, {cplx(1.0, 0.0)}}, 5, 0.5, 1.0);
    Fibre f = build_fibre(p, 1.0);
    WronskianValue w = wronskian(p, f, cplx(0.1, 0.05), 2);
    CHECK(std::abs(w.value) <= 10.0 * w.error + 1e-12);
    // single section: the wronskian is the section value itself
    WronskianValue w1 = wronskian(p, f, cplx(0.1, 0.05), 1);
    ThetaValue direct = theta_series(section_form(p, f, 0), cplx(0.1, 0.05));
    CHECK(std::abs(w1.value - direct.value) <= 10.0 * (w1.error + 1e-12));
    CHECK_THROWS_AS(wronskian(p, f, cplx(0.1, 0.0), 3), std::invalid_argument);
    CHECK_THROWS_AS(wronskian(p, f, cplx(1.2, 0.0), 1), std::domain_error);
}

TEST_CASE("rank scan on a constant path reports no drop", "[families]") {
    FamilyPath p;
    p.u_min = 1.0;
    p.u_max = 1.0;
    p.group_at = [](double) { return testutil::torus_fixture(); };
    p.s = 2.0;
    p.seeds = {{cplx(1.0, 0.0)}};
    p.word_length = 6;
    std::vector<RankSample> scan = rank_drop_scan(p, 3, small_gram());
    REQUIRE(scan.size() == 3);
    for (const RankSample& smp : scan) {
        CHECK(smp.u == 1.0);
        CHECK(smp.fibre_dimension == 1);
        CHECK(smp.rank == 1);
        CHECK_FALSE(smp.drop);
    }
}

TEST_CASE("asymptotic sweep rows are internally consistent", "[families]") {
    FamilyPath p = make_pinch_family(
        2.0, {{cplx(1.0, 0.0)}, {cplx(0.0, 0.0), cplx(1.0, 0.0)}}, 5, 0.4, 1.0);
    SweepOptions opt;
    opt.gram = small_gram();
    opt.disc_radial = 48;
    opt.disc_angular = 64;
    opt.probe_cap = 100;
    std::vector<SweepRow> rows = asymptotic_sweep(p, 4, opt);
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SweepRow& r = rows[i];
        double expect_len = 2.0 * std::acosh((2.0 + r.u) / 2.0);
        REQUIRE(std::abs(r.length - expect_len) < 1e-12);
        REQUIRE(std::abs(r.trace_sq - (2.0 + r.u) * (2.0 + r.u)) < 1e-9);
        REQUIRE(std::abs(plumbing_length(cplx(r.plumbing_t, 0.0)) - r.length) < 1e-12);
        REQUIRE(r.embedding_m >= 3.0 / pi - 1e-9);
        REQUIRE(r.bound_ok);
        if (i > 0) REQUIRE(r.trace_sq < rows[i - 1].trace_sq);
    }
    CHECK_THROWS_AS(asymptotic_sweep(p, 1, opt), std::invalid_argument);
}
