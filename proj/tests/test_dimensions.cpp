#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

#include <random>

using namespace uniformizer;

TEST_CASE("strict floor", "[dimensions]") {
    CHECK(floor_strict(2.0) == 1);
    CHECK(floor_strict(2.5) == 2);
    CHECK(floor_strict(3.0) == 2);
    CHECK(floor_strict(-0.5) == -1);
    CHECK(floor_strict(1.0) == 0);
}

TEST_CASE("cusp form dimensions", "[dimensions]") {
    CHECK(dim_cusp_forms({1, 1}, 2.0) == 1);
    CHECK(dim_cusp_forms({1, 1}, 3.0) == 2);
    CHECK(dim_cusp_forms({2, 0}, 2.0) == 3);
    CHECK(dim_cusp_forms({0, 3}, 2.0) == 0);
    CHECK(dim_cusp_forms({2, 0}, 2.5) == 4);
    CHECK(dim_cusp_forms({1, 1}, 2.25) == 2);
    // non-integer formula value is rejected, not rounded
    CHECK_THROWS_AS(dim_cusp_forms({2, 0}, 2.25), std::domain_error);
    CHECK_THROWS_AS(dim_cusp_forms({0, 2}, 2.0), std::domain_error); // unstable
    CHECK_THROWS_AS(dim_cusp_forms({1, 1}, 1.0), std::domain_error);
}

TEST_CASE("riemann-roch range", "[dimensions]") {
    CHECK(riemann_roch_h0(3, 1) == 3);
    CHECK(riemann_roch_h0(3, 2) == 2);  // deg = 2g-1 edge of the range
    CHECK(riemann_roch_h0(0, 0) == 1);
    CHECK_THROWS_AS(riemann_roch_h0(2, 2), std::domain_error); // canonical degree
    CHECK(canonical_sections(2) == 2);
    CHECK(canonical_sections(0) == 0);
}

TEST_CASE("hyperbolic areas", "[dimensions]") {
    CHECK(std::abs(hyperbolic_area({1, 1}) - 2.0 * pi) < 1e-15);
    CHECK(std::abs(hyperbolic_area({2, 0}) - 4.0 * pi) < 1e-15);
    CHECK_THROWS_AS(hyperbolic_area({0, 2}), std::domain_error);
}

TEST_CASE("pinch plans rewrite the type list", "[dimensions]") {
    PinchMove nonsep;
    nonsep.separating = false;
    nonsep.part = 0;
    auto parts = apply_pinch_plan({2, 0}, {nonsep});
    REQUIRE(parts.size() == 1);
    CHECK(parts[0].genus == 1);
    CHECK(parts[0].punctures == 2);

    PinchMove sep;
    sep.separating = true;
    sep.part = 0;
    sep.child1 = {1, 1};
    sep.child2 = {1, 1};
    parts = apply_pinch_plan({2, 0}, {sep});
    REQUIRE(parts.size() == 2);
    CHECK(parts[1].genus == 1);

    PinchMove bad_part = nonsep;
    bad_part.part = 3;
    CHECK_THROWS_AS(apply_pinch_plan({2, 0}, {bad_part}), std::invalid_argument);

    PinchMove wrong_sum = sep;
    wrong_sum.child1 = {1, 0};
    wrong_sum.child2 = {1, 0}; // punctures do not add up to n + 2
    CHECK_THROWS_AS(apply_pinch_plan({2, 0}, {wrong_sum}), std::invalid_argument);

    PinchMove unstable = sep;
    unstable.child1 = {0, 1};
    unstable.child2 = {2, 1};
    CHECK_THROWS_AS(apply_pinch_plan({2, 0}, {unstable}), std::domain_error);

    // over-pinching a torus with one puncture: genus 0 part would need 3 punctures
    PinchMove drain;
    drain.separating = false;
    drain.part = 0;
    CHECK_NOTHROW(apply_pinch_plan({1, 1}, {drain}));
    CHECK_THROWS_AS(apply_pinch_plan({0, 3}, {drain}), std::domain_error);
}

TEST_CASE("boundary dimension bookkeeping", "[dimensions]") {
    PinchMove nonsep;
    nonsep.separating = false;
    nonsep.part = 0;
    CHECK(boundary_dimension({2, 0}, 2, {nonsep}) == 2);
    CHECK(area_conservation_check({2, 0}, {nonsep}));
    CHECK_THROWS_AS(boundary_dimension({2, 0}, 1, {nonsep}), std::domain_error);
}

namespace {

// Random valid plan: repeatedly pick a part and a legal move for it.
PinchPlan random_plan(std::mt19937& rng, SurfaceType start, int moves) {
    std::vector<SurfaceType> parts{start};
    PinchPlan plan;
    std::uniform_int_distribution<int> coin(0, 1);
    for (int m = 0; m < moves; ++m) {
        std::uniform_int_distribution<int> pickp(0, static_cast<int>(parts.size()) - 1);
        int pi_ = pickp(rng);
        SurfaceType p = parts[pi_];
        PinchMove mv;
        mv.part = pi_;
        bool want_sep = coin(rng) == 1;
        if (!want_sep && p.genus >= 1 && is_stable({p.genus - 1, p.punctures + 2})) {
            mv.separating = false;
            parts[pi_] = {p.genus - 1, p.punctures + 2};
            plan.push_back(mv);
            continue;
        }
        // try a separating split
        bool found = false;
        for (int g1 = 0; g1 <= p.genus && !found; ++g1)
            for (int n1 = 0; n1 <= p.punctures + 2 && !found; ++n1) {
                SurfaceType c1{g1, n1}, c2{p.genus - g1, p.punctures + 2 - n1};
                if (is_stable(c1) && is_stable(c2)) {
                    mv.separating = true;
                    mv.child1 = c1;
                    mv.child2 = c2;
                    parts[pi_] = c1;
                    parts.push_back(c2);
                    plan.push_back(mv);
                    found = true;
                }
            }
        if (!found && p.genus >= 1 && is_stable({p.genus - 1, p.punctures + 2})) {
            mv.separating = false;
            parts[pi_] = {p.genus - 1, p.punctures + 2};
            plan.push_back(mv);
        }
    }
    return plan;
}

} // namespace

TEST_CASE("random plans keep both counts and the area consistent", "[dimensions]") {
    std::mt19937 rng(41);
    std::uniform_int_distribution<int> genus(2, 5), punct(0, 3), moves(0, 4), weight(2, 5);
    for (int i = 0; i < 200; ++i) {
        SurfaceType t{genus(rng), punct(rng)};
        PinchPlan plan = random_plan(rng, t, moves(rng));
        int s = weight(rng);
        // boundary_dimension itself cross-checks top-down vs bottom-up
        REQUIRE_NOTHROW(boundary_dimension(t, s, plan));
        REQUIRE(area_conservation_check(t, plan));
    }
}
