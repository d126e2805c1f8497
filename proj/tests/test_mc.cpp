#include "ridesim/mc.hpp"

#include "ridesim/matching.hpp"
#include "ridesim/rng.hpp"
#include "doctest.h"

#include <cmath>
#include <stdexcept>

using namespace ridesim;
namespace mc = ridesim::mc;

namespace {

// |estimate - truth| within `sigmas` standard errors plus a small absolute
// slack for the tiny bias of discretized events
void check_close(const mc::Estimate& e, double truth, double sigmas = 4.0) {
    INFO("mean=", e.mean, " truth=", truth, " se=", e.std_error);
    CHECK(std::abs(e.mean - truth) <= sigmas * e.std_error + 1e-12);
}

}  // namespace

TEST_CASE("zero-detour absorption share of an in-zone trip is 2/9") {
    mc::McOptions opts;
    opts.samples = 400000;
    mc::Estimate e = mc::intra_match_share(opts);
    check_close(e, 2.0 / 9.0);
    CHECK(e.mean == doctest::Approx(kIntraLocalShare).epsilon(0.005));

    // pinning the first destination to the far corner leaves the whole
    // quadrant past the origin feasible, an area averaging 1/4
    check_close(mc::intra_match_share_far_corner(opts), 0.25);
}

TEST_CASE("the absorption predicate is symmetric in the two stops") {
    Rng rng(7);
    for (int t = 0; t < 20000; ++t) {
        double ox = rng.uniform(), oy = rng.uniform();
        double ax = rng.uniform(), ay = rng.uniform();
        double bx = rng.uniform(), by = rng.uniform();
        REQUIRE(mc::zero_detour_absorb(ox, oy, ax, ay, bx, by) ==
                mc::zero_detour_absorb(ox, oy, bx, by, ax, ay));
    }
    // interior stop on the way to the corner: absorbed
    CHECK(mc::zero_detour_absorb(0, 0, 1, 1, 0.3, 0.7));
    // stop behind the origin: not absorbed
    CHECK(!mc::zero_detour_absorb(0.5, 0.5, 1, 1, 0.2, 0.8));
}

TEST_CASE("departing-side shares are 1/2 cardinal and 1/4 diagonal") {
    mc::McOptions opts;
    opts.samples = 300000;
    for (Dir d : kCardinalDirs) {
        mc::Estimate e = mc::outbound_match_share(d, opts);
        check_close(e, 0.5);
        CHECK(e.mean == doctest::Approx(kInterLocalShareCardinal).epsilon(0.005));
    }
    for (Dir d : kDiagonalDirs) {
        mc::Estimate e = mc::outbound_match_share(d, opts);
        check_close(e, 0.25);
        CHECK(e.mean == doctest::Approx(kInterLocalShareDiagonal).epsilon(0.005));
    }
}

TEST_CASE("fixed caller origins give the degenerate shares") {
    mc::McOptions opts;
    opts.samples = 100000;
    // caller at the southwest corner going northeast sees the whole zone
    check_close(mc::outbound_match_share_from(Dir::NE, 0.0, 0.0, opts), 1.0);
    // at the center the northeast quadrant is exactly a quarter
    check_close(mc::outbound_match_share_from(Dir::NE, 0.5, 0.5, opts), 0.25);
    // and a cardinal direction from the center is exactly a half
    check_close(mc::outbound_match_share_from(Dir::S, 0.5, 0.5, opts), 0.5);
    CHECK_THROWS_AS(mc::outbound_match_share_from(Dir::N, 1.5, 0.0, opts),
                    std::invalid_argument);
}

TEST_CASE("expected delivery distances match the model constants") {
    mc::McOptions opts;
    opts.samples = 400000;
    check_close(mc::border_to_closer_of_two(opts), 5.0 / 8.0);
    check_close(mc::interior_to_interior(opts), 2.0 / 3.0);
    check_close(mc::border_to_interior(opts), 5.0 / 6.0);
    check_close(mc::interior_to_border(opts), 0.5);

    mc::Estimate through = mc::through_zone(opts);
    CHECK(through.mean == 1.0);
    CHECK(through.std_error == 0.0);

    mc::PairLegs legs = mc::no_detour_delivery_legs(opts);
    check_close(legs.first, 0.5);
    check_close(legs.second, 0.5);
}

TEST_CASE("nearest-vehicle distance follows sqrt(pi/(8 N))") {
    mc::McOptions opts;
    opts.samples = 200000;
    for (double density : {1.0, 4.0, 16.0}) {
        mc::Estimate e = mc::nearest_pickup_distance(density, opts);
        check_close(e, std::sqrt(M_PI / (8.0 * density)));
        // the model's rounded constant stays within one percent
        CHECK(e.mean == doctest::Approx(0.63 / std::sqrt(density)).epsilon(0.01));
    }
    CHECK_THROWS_AS(mc::nearest_pickup_distance(0.0, opts), std::invalid_argument);
}

TEST_CASE("antithetic pairing keeps the mean and helps the share estimators") {
    mc::McOptions plain;
    plain.samples = 200000;
    mc::McOptions anti = plain;
    anti.antithetic = true;

    mc::Estimate p = mc::intra_match_share(plain);
    mc::Estimate a = mc::intra_match_share(anti);
    check_close(a, 2.0 / 9.0);
    CHECK(std::abs(a.mean - p.mean) <= 4 * (p.std_error + a.std_error));

    // a mirrored candidate mostly hits when the original misses, so the
    // paired estimate is tighter than the plain one on equal sample counts
    mc::Estimate half_plain = mc::outbound_match_share(Dir::N, plain);
    mc::Estimate half = mc::outbound_match_share(Dir::N, anti);
    check_close(half, 0.5);
    CHECK(half.std_error < half_plain.std_error);

    mc::Estimate dist = mc::border_to_interior(anti);
    check_close(dist, 5.0 / 6.0);
}

TEST_CASE("estimators reject degenerate sample counts") {
    mc::McOptions opts;
    opts.samples = 1;
    CHECK_THROWS_AS(mc::interior_to_interior(opts), std::invalid_argument);
}
