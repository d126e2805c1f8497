#pragma once

#include "ridesim/network.hpp"
#include "ridesim/rebalance.hpp"

#include <vector>

namespace ridesim {

// Fleet and cost summary of a design at steady state. All fleet figures are
// time-average vehicle counts; cost rates are $/hr.
struct PerformanceReport {
    std::vector<double> zone_fleet;     // vehicles engaged per zone (idle included)
    double service_fleet = 0;           // sum of zone_fleet
    double rebalance_fleet = 0;         // vehicles repositioning empty
    double fleet = 0;                   // total vehicles the design requires
    double passengers_in_service = 0;   // riders aboard plus assigned callers
    double demand = 0;                  // trips/hr served
    double agency_cost_rate = 0;        // vehicle_cost * fleet
    double rider_cost_rate = 0;         // value_of_time * passengers_in_service
    double system_cost_rate = 0;        // agency + rider
    double cost_per_trip = 0;           // system_cost_rate / demand
    double door_to_door_hours = 0;      // mean assignment-to-dropoff time
};

PerformanceReport performance_report(const Scenario& scenario, const DesignVars& design,
                                     const FlowSolution& flows, const RebalancePlan& plan);

// One-call pipeline: validate the design, solve the steady state, plan the
// rebalancing flows, and summarize. status != Ok leaves plan/perf empty.
struct EvaluateResult {
    SolveStatus status = SolveStatus::NoConvergence;
    FlowSolution flows;
    RebalancePlan plan;
    PerformanceReport perf;
    Unservable unservable;
    int newton_iterations = 0;
};

EvaluateResult evaluate_design(const Scenario& scenario, DesignVars design,
                               const SolveOptions& opts = {});

}  // namespace ridesim
