#pragma once

#include "ridesim/grid.hpp"
#include "ridesim/network.hpp"
#include "ridesim/scenario.hpp"

#include <vector>

namespace ridesim::testing {

// Irregular 16-zone fixture used across the test suite. Rows are written
// north to south; zone 1 sits at the southwest corner.
inline ZoneGrid irregular16() {
    return ZoneGrid(std::vector<std::vector<ZoneId>>{
        {0, 15, 16, 0},
        {11, 12, 13, 14},
        {7, 8, 9, 10},
        {4, 5, 6, 0},
        {1, 2, 3, 0},
    });
}

// Four-zone reference scenarios: every origin sends the same destination
// mix, concentrated on zone 3 with decreasing intensity across variants.
// 8000 trips/hr total; 5 km zones, 25 km/h, $20/pax-hr, default $/veh-hr.
inline Scenario hotspot_scenario(int variant) {
    Scenario sc{ZoneGrid(2, 2), 5.0, 25.0, 20.0, default_vehicle_cost(25.0),
                std::vector<double>(16, 0.0)};
    std::vector<double> row;
    switch (variant) {
        case 1: row = {200, 200, 1400, 200}; break;
        case 2: row = {200, 600, 1000, 200}; break;
        default: row = {200, 800, 800, 200}; break;
    }
    for (ZoneId i = 1; i <= 4; ++i)
        for (ZoneId j = 1; j <= 4; ++j) sc.lambda(i, j) = row[static_cast<size_t>(j - 1)];
    return sc;
}

// Uniform-demand counterpart at the same total rate.
inline Scenario uniform_scenario() {
    return homogeneous_scenario(ZoneGrid(2, 2), 8000.0, 5.0, 25.0, 20.0,
                                default_vehicle_cost(25.0));
}

// Hand-tuned reference designs for the hotspot scenarios (idle counts and
// the non-forced routing splits; everything else stays uniform).
inline DesignVars reference_design(const ZoneGrid& g, int variant) {
    DesignVars dv = uniform_design(g);
    auto split_ids = [&](ZoneId i, ZoneId j, ZoneId a, double da, ZoneId b, double db) {
        set_delta(g, dv, i, j, a, da);
        set_delta(g, dv, i, j, b, db);
    };
    switch (variant) {
        case 1:
            dv.n_idle = {6, 9, 32, 6};
            split_ids(1, 4, 2, 1.00, 3, 0.00);
            split_ids(2, 3, 1, 0.54, 4, 0.46);
            split_ids(3, 2, 1, 0.50, 4, 0.50);
            split_ids(4, 1, 2, 1.00, 3, 0.00);
            break;
        case 2:
            dv.n_idle = {4, 51, 51, 4};
            split_ids(1, 4, 2, 1.00, 3, 0.00);
            split_ids(2, 3, 1, 0.50, 4, 0.50);
            split_ids(3, 2, 1, 0.50, 4, 0.50);
            split_ids(4, 1, 2, 1.00, 3, 0.00);
            break;
        default:
            dv.n_idle = {3, 59, 59, 3};
            split_ids(1, 4, 2, 0.50, 3, 0.50);
            split_ids(2, 3, 1, 0.50, 4, 0.50);
            split_ids(3, 2, 1, 0.50, 4, 0.50);
            split_ids(4, 1, 2, 0.50, 3, 0.50);
            break;
    }
    return dv;
}

}  // namespace ridesim::testing
