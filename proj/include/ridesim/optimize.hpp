#pragma once

#include "ridesim/metrics.hpp"

#include <cstdint>
#include <vector>

namespace ridesim {

// Search settings for the design optimizer. Starts run sequentially with
// per-start RNG streams and warm-start caches, so results depend only on
// (scenario, options), never on timing.
struct OptimOptions {
    int starts = 8;
    std::uint64_t seed = 1;
    int max_iterations = 250;  // descent steps per start
    int patience = 15;         // consecutive non-improving steps before a start stops
    double tol = 1e-7;         // relative improvement that counts as progress
    SolveOptions solve;
};

struct StartSummary {
    int start = 0;
    double best_cost = 0;  // $/trip reached by this start
    int iterations = 0;
    long long evaluations = 0;
};

struct OptimResult {
    DesignVars design;
    double cost_per_trip = 0;
    bool feasible = false;
    PerformanceReport perf;  // of the best design, re-evaluated cold
    FlowSolution flows;
    RebalancePlan plan;
    std::vector<double> trace;  // best cost after each improving step, in order
    std::vector<StartSummary> starts;
    long long evaluations = 0;
};

// Per-zone ceilings for the idle-count search box: ten times a demand-based
// staffing guess, so the box always contains the useful designs.
std::vector<double> idle_upper_bounds(const Scenario& scenario);

// Minimizes cost per trip over idle deployments and the free routing splits
// (pairs with two feasible next zones) using multistart projected descent
// with central-difference gradients. Designs whose steady state cannot be
// solved are priced at a prohibitive penalty instead of failing the search.
OptimResult optimize_design(const Scenario& scenario, const OptimOptions& opts = {});

}  // namespace ridesim
