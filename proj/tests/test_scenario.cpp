#include "ridesim/scenario.hpp"
#include "ridesim/rng.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <sstream>
#include <stdexcept>

using namespace ridesim;

namespace {

const char* kFourZoneJson = R"({
  "grid": {"rows": 2, "cols": 2},
  "phi_km": 5.0,
  "speed_kmh": 25.0,
  "value_of_time": 20.0,
  "demand": [
    [200, 200, 1400, 200],
    [200, 200, 1400, 200],
    [200, 200, 1400, 200],
    [200, 200, 1400, 200]
  ]
})";

}  // namespace

TEST_CASE("scenario JSON parses with defaulted vehicle cost") {
    Scenario sc = parse_scenario(kFourZoneJson);
    CHECK(sc.zone_count() == 4);
    CHECK(sc.phi == 5.0);
    CHECK(sc.speed == 25.0);
    CHECK(sc.value_of_time == 20.0);
    CHECK(sc.vehicle_cost == doctest::Approx(52.0));  // 40 + 0.48 * 25
    CHECK(sc.total_demand() == doctest::Approx(8000.0));
    CHECK(sc.lambda(2, 3) == 1400.0);
    CHECK(sc.zone_distance(1, 4) == doctest::Approx(10.0));

    Scenario fixture = testing::hotspot_scenario(1);
    for (ZoneId i = 1; i <= 4; ++i)
        for (ZoneId j = 1; j <= 4; ++j) CHECK(sc.lambda(i, j) == fixture.lambda(i, j));
}

TEST_CASE("demand_scale multiplies the matrix and must be at least one") {
    std::string text(kFourZoneJson);
    text.insert(text.rfind('}'), ", \"demand_scale\": 2.5");
    Scenario sc = parse_scenario(text);
    CHECK(sc.total_demand() == doctest::Approx(20000.0));
    CHECK(sc.lambda(1, 3) == doctest::Approx(3500.0));

    std::string bad(kFourZoneJson);
    bad.insert(bad.rfind('}'), ", \"demand_scale\": 0.5");
    CHECK_THROWS_WITH_AS(parse_scenario(bad), doctest::Contains("demand_scale"),
                         std::invalid_argument);
}

TEST_CASE("explicit zone ids and mask grids are accepted") {
    SUBCASE("zone_ids") {
        Scenario sc = parse_scenario(R"({
          "grid": {"zone_ids": [[0, 3], [1, 2]]},
          "phi_km": 1, "speed_kmh": 10, "value_of_time": 0,
          "demand": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
        })");
        CHECK(sc.zone_count() == 3);
        CHECK(sc.grid.direction_of(2, 3) == Dir::N);
        CHECK(sc.grid.direction_of(1, 2) == Dir::E);
    }
    SUBCASE("mask numbers occupied cells in reading order") {
        Scenario sc = parse_scenario(R"({
          "grid": {"mask": [[1, 1], [1, 0]]},
          "phi_km": 1, "speed_kmh": 10, "value_of_time": 0,
          "demand": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
        })");
        CHECK(sc.zone_count() == 3);
        // northern row holds 1 and 2; 3 sits south of 1
        CHECK(sc.grid.direction_of(3, 1) == Dir::N);
        CHECK(sc.grid.direction_of(3, 2) == Dir::NE);
    }
}

TEST_CASE("scenario validation names the offending field") {
    CHECK_THROWS_WITH_AS(parse_scenario("{not json"), doctest::Contains("invalid JSON"),
                         std::invalid_argument);
    std::string no_phi = R"({"grid": {"rows": 1, "cols": 1}, "speed_kmh": 10,
                             "value_of_time": 0, "demand": [[5]]})";
    CHECK_THROWS_AS(parse_scenario(no_phi), std::invalid_argument);

    auto with = [&](const std::string& phi, const std::string& demand) {
        return "{\"grid\": {\"rows\": 1, \"cols\": 2}, \"phi_km\": " + phi +
               ", \"speed_kmh\": 10, \"value_of_time\": 1, \"demand\": " + demand + "}";
    };
    CHECK_THROWS_WITH_AS(parse_scenario(with("0", "[[1,1],[1,1]]")),
                         doctest::Contains("phi_km"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_scenario(with("1", "[[1,1]]")),
                         doctest::Contains("one row per zone"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_scenario(with("1", "[[1],[1]]")),
                         doctest::Contains("K entries"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_scenario(with("1", "[[1,-2],[1,1]]")),
                         doctest::Contains("finite and >= 0"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_scenario(with("1", "[[0,0],[0,0]]")),
                         doctest::Contains("positive rate"), std::invalid_argument);
}

TEST_CASE("homogeneous scenario spreads the total evenly") {
    Scenario sc = testing::uniform_scenario();
    for (ZoneId i = 1; i <= 4; ++i)
        for (ZoneId j = 1; j <= 4; ++j) CHECK(sc.lambda(i, j) == doctest::Approx(500.0));
    CHECK(sc.total_demand() == doctest::Approx(8000.0));
}

TEST_CASE("trips CSV accepts any column order in both endpoint variants") {
    SUBCASE("zone ids") {
        std::istringstream in(
            "dropoff_zone,timestamp,pickup_zone\n"
            "3,2019-06-01T07:30:00,1\n"
            "1,2019-06-01 18:05,4\n");
        long long bad = -1;
        auto recs = parse_trips_csv(in, &bad);
        REQUIRE(recs.size() == 2);
        CHECK(bad == 0);
        CHECK(recs[0].pickup_zone == 1);
        CHECK(recs[0].dropoff_zone == 3);
        CHECK(recs[0].seconds_of_day == doctest::Approx(7 * 3600 + 30 * 60));
        CHECK(recs[1].seconds_of_day == doctest::Approx(18 * 3600 + 5 * 60));
        CHECK_FALSE(recs[0].by_coordinates);
    }
    SUBCASE("coordinates") {
        std::istringstream in(
            "pickup_x,pickup_y,dropoff_x,dropoff_y,timestamp\n"
            "1.5,2.5,8.0,9.0,00:15:30\n");
        long long bad = -1;
        auto recs = parse_trips_csv(in, &bad);
        REQUIRE(recs.size() == 1);
        CHECK(bad == 0);
        CHECK(recs[0].by_coordinates);
        CHECK(recs[0].px == 1.5);
        CHECK(recs[0].dy == 9.0);
        CHECK(recs[0].seconds_of_day == doctest::Approx(15 * 60 + 30));
    }
    SUBCASE("bad rows are counted, not fatal") {
        std::istringstream in(
            "pickup_zone,dropoff_zone,timestamp\n"
            "1,2,07:00:00\n"
            "1.5,2,07:00:00\n"       // fractional zone id
            "1,2,25:00:00\n"         // impossible hour
            "x,2,07:00:00\n"         // junk number
            "2,1,08:30:00\n");
        long long bad = -1;
        auto recs = parse_trips_csv(in, &bad);
        CHECK(recs.size() == 2);
        CHECK(bad == 3);
    }
    SUBCASE("missing required headers") {
        std::istringstream in("pickup_zone,dropoff_zone\n1,2\n");
        CHECK_THROWS_WITH_AS(parse_trips_csv(in, nullptr), doctest::Contains("timestamp"),
                             std::invalid_argument);
    }
}

TEST_CASE("ingest keeps the half-open window and divides by observed hours") {
    ZoneGrid g(2, 2);
    auto rec = [](ZoneId p, ZoneId d, double hr) {
        TripRecord r;
        r.pickup_zone = p;
        r.dropoff_zone = d;
        r.seconds_of_day = hr * 3600.0;
        return r;
    };
    std::vector<TripRecord> recs = {
        rec(1, 2, 6.999), rec(1, 2, 7.0), rec(1, 2, 8.9999), rec(1, 2, 9.0),
        rec(3, 3, 8.0),   rec(9, 1, 8.0),  // zone off the grid
    };
    IngestResult res = ingest_trips(recs, g, 5.0, 7.0, 9.0, 2);
    CHECK(res.used == 3);
    CHECK(res.dropped_outside_window == 2);
    CHECK(res.dropped_outside_grid == 1);
    CHECK(res.demand[1] == doctest::Approx(2.0 / (2.0 * 2.0)));  // pair (1,2)
    CHECK(res.demand[10] == doctest::Approx(1.0 / (2.0 * 2.0)));  // pair (3,3)
    CHECK(res.total_rate == doctest::Approx(3.0 / 4.0));
}

TEST_CASE("ingest maps coordinates through the grid, edges to the lower left") {
    ZoneGrid g(2, 2);
    auto rec = [](double px, double py, double dx, double dy) {
        TripRecord r;
        r.by_coordinates = true;
        r.px = px;
        r.py = py;
        r.dx = dx;
        r.dy = dy;
        r.seconds_of_day = 8 * 3600.0;
        return r;
    };
    std::vector<TripRecord> recs = {
        rec(2.0, 2.0, 7.0, 7.0),    // zone 3 (SW) -> zone 2 (NE)
        rec(5.0, 2.0, 5.0, 5.0),    // both on shared edges -> lower-left zones
        rec(10.5, 2.0, 1.0, 1.0),   // pickup outside
    };
    IngestResult res = ingest_trips(recs, g, 5.0, 0.0, 24.0, 1);
    CHECK(res.used == 2);
    CHECK(res.dropped_outside_grid == 1);
    // zone ids: 1 NW, 2 NE, 3 SW, 4 SE
    CHECK(res.demand[static_cast<size_t>(3 - 1) * 4 + (2 - 1)] == doctest::Approx(1.0 / 24.0));
    CHECK(res.demand[static_cast<size_t>(3 - 1) * 4 + (3 - 1)] == doctest::Approx(1.0 / 24.0));
}

TEST_CASE("ingest rejects impossible parameters and empty windows") {
    ZoneGrid g(1, 1);
    TripRecord r;
    r.pickup_zone = r.dropoff_zone = 1;
    r.seconds_of_day = 10 * 3600.0;
    CHECK_THROWS_WITH_AS(ingest_trips({r}, g, 1.0, 8, 9, 0), doctest::Contains("days"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(ingest_trips({r}, g, 1.0, 9, 9, 1), doctest::Contains("window"),
                         std::invalid_argument);
    CHECK_THROWS_AS(ingest_trips({r}, g, 1.0, 11, 12, 1), std::runtime_error);
}

TEST_CASE("ingest rate oracle: random records recount exactly") {
    ZoneGrid g(2, 3);
    Rng rng(4242);
    const int k = g.zone_count();
    std::vector<TripRecord> recs;
    std::vector<long long> truth(static_cast<size_t>(k) * k, 0);
    long long in_window = 0;
    for (int t = 0; t < 5000; ++t) {
        TripRecord r;
        r.pickup_zone = static_cast<ZoneId>(1 + rng.below(static_cast<uint64_t>(k)));
        r.dropoff_zone = static_cast<ZoneId>(1 + rng.below(static_cast<uint64_t>(k)));
        r.seconds_of_day = rng.uniform(0.0, 24.0) * 3600.0;
        recs.push_back(r);
        double hr = r.seconds_of_day / 3600.0;
        if (hr >= 6.0 && hr < 10.0) {
            ++truth[static_cast<size_t>(r.pickup_zone - 1) * k + (r.dropoff_zone - 1)];
            ++in_window;
        }
    }
    IngestResult res = ingest_trips(recs, g, 1.0, 6.0, 10.0, 7);
    CHECK(res.used == in_window);
    for (size_t t = 0; t < truth.size(); ++t)
        CHECK(res.demand[t] == doctest::Approx(truth[t] / (4.0 * 7.0)).epsilon(1e-12));
}
