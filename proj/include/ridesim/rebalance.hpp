#pragma once

#include "ridesim/scenario.hpp"

#include <vector>

namespace ridesim {

// Empty-vehicle repositioning plan: hourly flows between zone pairs plus the
// vehicle time those flows keep on the road.
struct RebalancePlan {
    std::vector<double> flows;      // K x K row-major, vehicles/hr, diagonal 0
    std::vector<double> n_transit;  // K x K, vehicles en route per pair
    double vehicle_hours = 0;       // total repositioning vehicles (sum of n_transit)

    double flow(ZoneId i, ZoneId j, int k) const {
        return flows[static_cast<size_t>(i - 1) * k + (j - 1)];
    }
};

// One-way repositioning time in hours. Pairs aligned on a row or column pay
// an extra lateral third of a zone on average; staircase pairs already cover
// both axes in the rectilinear distance.
double rebalance_travel_hours(const Scenario& sc, ZoneId i, ZoneId j);

// Minimum-cost transportation of idle-vehicle surplus (rho > 0) to deficit
// (rho < 0), weighted by travel time. rho must net out to ~0; a small drift
// is removed, a large one throws std::runtime_error mentioning "balance".
// Surplus never relays through another zone: direct shipment is optimal
// because the travel times satisfy the triangle inequality.
RebalancePlan solve_rebalance(const Scenario& sc, const std::vector<double>& rho);

}  // namespace ridesim
