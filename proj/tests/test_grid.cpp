#include "ridesim/grid.hpp"

#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/path_oracle.hpp"

#include <algorithm>
#include <set>

using namespace ridesim;
using ridesim::testing::irregular16;
using ridesim::testing::oracle_shareable;

namespace {
std::vector<ZoneId> sorted(std::vector<ZoneId> v) {
    std::sort(v.begin(), v.end());
    return v;
}
}  // namespace

TEST_CASE("compass helpers") {
    CHECK(opposite(Dir::E) == Dir::W);
    CHECK(opposite(Dir::NE) == Dir::SW);
    CHECK(is_cardinal(Dir::S));
    CHECK(!is_cardinal(Dir::SE));
    // flanking pairs, full table
    auto f = [](Dir d) { return flanking(d); };
    CHECK(f(Dir::E) == std::array<Dir, 2>{Dir::SE, Dir::NE});
    CHECK(f(Dir::NE) == std::array<Dir, 2>{Dir::E, Dir::N});
    CHECK(f(Dir::N) == std::array<Dir, 2>{Dir::NE, Dir::NW});
    CHECK(f(Dir::NW) == std::array<Dir, 2>{Dir::N, Dir::W});
    CHECK(f(Dir::W) == std::array<Dir, 2>{Dir::NW, Dir::SW});
    CHECK(f(Dir::SW) == std::array<Dir, 2>{Dir::W, Dir::S});
    CHECK(f(Dir::S) == std::array<Dir, 2>{Dir::SW, Dir::SE});
    CHECK(f(Dir::SE) == std::array<Dir, 2>{Dir::S, Dir::E});
}

TEST_CASE("2x2 rectangle ids run in reading order") {
    ZoneGrid g(2, 2);
    REQUIRE(g.zone_count() == 4);
    CHECK(g.col_of(1) == 0);
    CHECK(g.row_of(1) == 1);  // zone 1 = northwest
    CHECK(g.col_of(4) == 1);
    CHECK(g.row_of(4) == 0);  // zone 4 = southeast
    CHECK(g.direction_of(1, 4) == Dir::SE);
    CHECK(g.direction_of(2, 3) == Dir::SW);
    CHECK(g.direction_of(1, 2) == Dir::E);
    CHECK(g.l1_steps(1, 4) == 2);
    CHECK(g.l1_steps(1, 2) == 1);
    CHECK(sorted(g.feasible_next_zones(1, 4)) == std::vector<ZoneId>{2, 3});
    CHECK(g.feasible_next_zones(1, 2) == std::vector<ZoneId>{2});
    CHECK(sorted(g.shareable_dests(1, 2)) == std::vector<ZoneId>{2, 4});
    CHECK(g.farther_shareable_dests(1, 4) == std::vector<ZoneId>{4});
    // distinct equidistant destinations never share
    CHECK(!g.shareable(1, 2, 3));
}

TEST_CASE("irregular 16-zone fixture") {
    ZoneGrid g = irregular16();
    REQUIRE(g.zone_count() == 16);

    SUBCASE("coordinates") {
        CHECK(g.col_of(1) == 0);
        CHECK(g.row_of(1) == 0);
        CHECK(g.col_of(10) == 3);
        CHECK(g.row_of(10) == 2);
        CHECK(g.col_of(15) == 1);
        CHECK(g.row_of(15) == 4);
    }
    SUBCASE("adjacency of zone 6") {
        CHECK(g.adjacent(6, Dir::E) == kNoZone);
        CHECK(g.adjacent(6, Dir::N) == 9);
        CHECK(g.adjacent(6, Dir::W) == 5);
        CHECK(g.adjacent(6, Dir::S) == 3);
        CHECK(g.adjacent(6, Dir::NE) == 10);
        CHECK(g.adjacent(6, Dir::NW) == 8);
    }
    SUBCASE("destination groups of zone 8") {
        CHECK(sorted(g.dest_group(8, Dir::E)) == std::vector<ZoneId>{9, 10});
        CHECK(sorted(g.dest_group(8, Dir::NE)) == std::vector<ZoneId>{13, 14, 16});
        CHECK(sorted(g.dest_group(8, Dir::N)) == std::vector<ZoneId>{12, 15});
        CHECK(sorted(g.dest_group(8, Dir::S)) == std::vector<ZoneId>{2, 5});
    }
    SUBCASE("shared-ride companion sets around zone 5") {
        CHECK(g.l1_steps(5, 13) == 3);
        CHECK(sorted(g.shareable_dests(5, 13)) ==
              std::vector<ZoneId>{6, 8, 9, 12, 13, 14, 16});
        CHECK(sorted(g.farther_shareable_dests(5, 13)) == std::vector<ZoneId>{13, 14, 16});
        CHECK(sorted(g.farther_shareable_dests(5, 12)) ==
              std::vector<ZoneId>{11, 12, 13, 14, 15, 16});
    }
    SUBCASE("intra-zone shareable quadrant of zone 5") {
        // union of the NE group and its flanking E/N groups
        auto got = g.intra_shareable_dests(5, Dir::NE);
        CHECK(got == sorted(got));
        std::set<ZoneId> want;
        for (Dir d : {Dir::E, Dir::NE, Dir::N})
            for (ZoneId z : g.dest_group(5, d)) want.insert(z);
        CHECK(std::set<ZoneId>(got.begin(), got.end()) == want);
        CHECK(want.count(6) == 1);
        CHECK(want.count(13) == 1);
        CHECK(want.count(4) == 0);
    }
    SUBCASE("every ordered pair can route") {
        for (ZoneId i : g.zones())
            for (ZoneId j : g.zones())
                if (i != j) {
                    auto v = g.feasible_next_zones(i, j);
                    CHECK(!v.empty());
                    for (ZoneId n : v) CHECK(g.l1_steps(n, j) == g.l1_steps(i, j) - 1);
                }
    }
}

TEST_CASE("destination groups partition the other zones") {
    for (const ZoneGrid& g : {ZoneGrid(2, 2), ZoneGrid(3, 3), irregular16()}) {
        for (ZoneId i : g.zones()) {
            std::set<ZoneId> all;
            size_t total = 0;
            for (Dir d : kAllDirs) {
                auto grp = g.dest_group(i, d);
                total += grp.size();
                all.insert(grp.begin(), grp.end());
            }
            CHECK(total == static_cast<size_t>(g.zone_count() - 1));
            CHECK(all.size() == total);
            CHECK(all.count(i) == 0);
        }
    }
}

TEST_CASE("adjacency is an involution") {
    ZoneGrid g = irregular16();
    for (ZoneId i : g.zones())
        for (Dir d : kAllDirs) {
            ZoneId j = g.adjacent(i, d);
            if (j != kNoZone) CHECK(g.adjacent(j, opposite(d)) == i);
        }
}

TEST_CASE("shareable predicate matches the path-walk oracle") {
    std::vector<ZoneGrid> grids;
    for (int r = 1; r <= 4; ++r)
        for (int c = 1; c <= 4; ++c)
            if (r * c > 1) grids.emplace_back(r, c);
    grids.push_back(irregular16());
    for (const ZoneGrid& g : grids)
        for (ZoneId i : g.zones())
            for (ZoneId j : g.zones())
                for (ZoneId k : g.zones()) {
                    if (j == i || k == i) continue;
                    CHECK(g.shareable(i, j, k) == oracle_shareable(g, i, j, k));
                }
}

TEST_CASE("shareable predicate is symmetric and reflexive in the companions") {
    ZoneGrid g = irregular16();
    for (ZoneId i : g.zones())
        for (ZoneId j : g.zones()) {
            if (i == j) continue;
            CHECK(g.shareable(i, j, j));
            for (ZoneId k : g.zones())
                if (k != i) CHECK(g.shareable(i, j, k) == g.shareable(i, k, j));
        }
}

TEST_CASE("invalid regions are rejected") {
    using Table = std::vector<std::vector<ZoneId>>;
    // disconnected
    CHECK_THROWS(ZoneGrid(Table{{1, 0}, {0, 2}}));
    // interior hole
    CHECK_THROWS(ZoneGrid(Table{{1, 2, 3}, {4, 0, 5}, {6, 7, 8}}));
    // U-shape whose corner pair has no feasible next zone
    CHECK_THROWS(ZoneGrid(Table{{0, 0, 6}, {4, 0, 5}, {1, 2, 3}}));
    // bad ids
    CHECK_THROWS(ZoneGrid(Table{{1, 1}}));
    CHECK_THROWS(ZoneGrid(Table{{1, 3}}));
    CHECK_THROWS(ZoneGrid(Table{{0, 0}}));
    // fine: L-shape, no holes
    CHECK_NOTHROW(ZoneGrid(Table{{1, 0}, {2, 3}}));
}
