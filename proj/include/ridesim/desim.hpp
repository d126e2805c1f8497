#pragma once

#include "ridesim/network.hpp"
#include "ridesim/scenario.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ridesim {

// Discrete-event run settings. The simulator reproduces the operating policy
// the analytic model averages over: Poisson caller arrivals per OD pair,
// instant nearest-suitable assignment under the four matching cases, x-then-y
// motion at constant speed, border crossings sampled from the routing splits,
// two-passenger capacity served closer-destination-first, and Poisson
// rebalancing dispatches between random points of the paired zones.
struct SimConfig {
    DesignVars design;
    // Hourly dispatch rates, K x K row-major, origin zone by row (the flow
    // matrix of a rebalancing plan). Empty means no rebalancing.
    std::vector<double> rebalance_flows;
    // Vehicles initially idle per zone; must sum to fleet. Empty distributes
    // the fleet by each zone's outbound engagement (origin demand weighted by
    // trip duration) plus its standing idle target, so no zone exhausts its
    // pool during the ramp-up.
    std::vector<int> initial_vehicles;
    int fleet = 1;
    double horizon_hours = 200.0;
    // Negative requests the default: ten mean trip times, capped at a fifth
    // of the horizon.
    double warmup_hours = -1.0;
    std::uint64_t seed = 1;
    // Queue length considered pathological; 0 picks max(25, 1% of hourly
    // demand). Ending above it sets the starvation flag.
    double queue_alarm = 0.0;
    // When nonempty, every event is appended as CSV:
    // time,event,vehicle,state_before,state_after,zone
    std::string event_log_path;
};

// Post-warmup time and passenger averages of one run. Counters labelled
// "_measured" restrict to the measurement window; the conservation counters
// (generated/served/queued/in-service) span the whole run.
struct SimMetrics {
    double measured_hours = 0;
    double warmup_hours = 0;

    long long generated = 0;
    long long served = 0;
    long long queued_at_end = 0;
    long long in_service_at_end = 0;

    long long served_measured = 0;
    long long boarded_measured = 0;
    long long assignments_measured = 0;
    double served_per_hour = 0;
    double mean_door_to_door_hours = 0;  // request to drop-off
    double mean_wait_hours = 0;          // request to pickup
    double mean_pickup_km = 0;           // assigned vehicle position to caller

    std::vector<double> od_mean_door_to_door;  // K x K row-major, 0 if unobserved
    std::vector<long long> od_completed;       // completions behind each mean

    // time-averaged vehicle counts by family
    double avg_idle = 0;
    double avg_to_pickup = 0;
    double avg_seeker_local = 0;
    double avg_seeker_remote = 0;
    double avg_pair = 0;
    double avg_rebalancing = 0;
    double avg_busy = 0;  // everything but idle

    double avg_passengers_in_service = 0;  // assigned or on board
    double avg_queue = 0;
    long long max_queue = 0;
    std::vector<double> avg_zone_idle;   // K, standing idle vehicles per zone
    std::vector<double> avg_zone_queue;  // K, waiting callers per zone

    // matches by source vehicle class, measurement window only
    long long matches_from_idle = 0;
    long long matches_case1 = 0;  // in-zone seeker, in-zone caller
    long long matches_case2 = 0;  // outbound seeker, outbound caller
    long long matches_case3 = 0;  // outbound seeker, in-zone caller
    long long matches_case4 = 0;  // in-zone seeker, outbound caller
    double share_from_idle = 0;
    double share_from_seeker_local = 0;
    double share_from_seeker_remote = 0;

    long long rebalance_dispatches = 0;
    long long rebalance_skipped = 0;  // no idle vehicle in the origin zone

    long long zero_detour_violations = 0;  // in-zone pairings that added distance
    bool starvation = false;
};

// Largest-remainder split of `fleet` across weights (uniform when all weights
// vanish). Sums exactly to fleet.
std::vector<int> proportional_placement(const std::vector<double>& weights, int fleet);

SimMetrics run_discrete_event(const Scenario& scenario, const SimConfig& config);

// Weighted merge of independent replications: time averages by measured
// hours, passenger means by their completion counts, counters summed.
SimMetrics merge_metrics(const std::vector<SimMetrics>& runs);

// Runs `replications` copies with derived seeds on a small thread pool and
// merges them. Only the first replication writes the event log.
SimMetrics run_replications(const Scenario& scenario, const SimConfig& config, int replications);

}  // namespace ridesim
