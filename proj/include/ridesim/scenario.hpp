#pragma once

#include "ridesim/grid.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ridesim {

// Default vehicle operating cost in $/veh-hr as an affine function of speed.
inline double default_vehicle_cost(double speed_kmh) { return 40.0 + 0.48 * speed_kmh; }

// Physical/economic parameters plus the hourly OD demand matrix.
// Plain aggregate so tests can build edge cases directly; validate() is what
// load_scenario enforces.
struct Scenario {
    ZoneGrid grid;
    double phi = 1.0;            // zone side length, km
    double speed = 1.0;          // vehicle speed v, km/hr
    double value_of_time = 0.0;  // beta, $/pax-hr
    double vehicle_cost = 0.0;   // gamma, $/veh-hr
    std::vector<double> demand;  // row-major K x K, row = origin zone

    int zone_count() const { return grid.zone_count(); }
    double lambda(ZoneId i, ZoneId j) const {
        return demand[static_cast<size_t>(i - 1) * zone_count() + (j - 1)];
    }
    double& lambda(ZoneId i, ZoneId j) {
        return demand[static_cast<size_t>(i - 1) * zone_count() + (j - 1)];
    }
    double total_demand() const;
    double zone_distance(ZoneId i, ZoneId j) const { return phi * grid.l1_steps(i, j); }

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

// Parses and validates a scenario file (JSON; see README for the schema).
// demand_scale is applied to the demand matrix here.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

// Uniform-demand construction: every OD pair gets total_rate / K^2.
Scenario homogeneous_scenario(ZoneGrid grid, double total_rate, double phi, double speed,
                              double value_of_time, double vehicle_cost);

// One raw trip. Either zone ids or planar coordinates identify the endpoints
// (coordinates in km, same frame as ZoneGrid::zone_of_point).
struct TripRecord {
    ZoneId pickup_zone = kNoZone;
    ZoneId dropoff_zone = kNoZone;
    double px = 0, py = 0, dx = 0, dy = 0;
    bool by_coordinates = false;
    double seconds_of_day = 0;  // from the ISO-8601 timestamp
};

struct IngestResult {
    std::vector<double> demand;  // row-major K x K, trips/hr
    long long used = 0;
    long long dropped_outside_window = 0;
    long long dropped_outside_grid = 0;
    long long unparseable = 0;
    double total_rate = 0;
};

// Reads the trips CSV (header decides the zone/coordinate variant; columns
// may appear in any order). Unparseable rows are counted, not fatal.
std::vector<TripRecord> parse_trips_csv(std::istream& in, long long* unparseable);

// Aggregates records into hourly zone-to-zone rates over a daily time window
// observed for `days` days: rate = count / (window_hours * days).
IngestResult ingest_trips(const std::vector<TripRecord>& records, const ZoneGrid& grid,
                          double phi, double window_start_hr, double window_end_hr,
                          int days);

}  // namespace ridesim
