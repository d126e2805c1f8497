#include "ridesim/metrics.hpp"

namespace ridesim {

namespace {

size_t pidx(ZoneId i, ZoneId j, int k) {
    return static_cast<size_t>(i - 1) * k + (j - 1);
}
size_t tidx(ZoneId i, ZoneId j, ZoneId kk, int k) {
    return (static_cast<size_t>(i - 1) * k + (j - 1)) * k + (kk - 1);
}

}  // namespace

PerformanceReport performance_report(const Scenario& sc, const DesignVars& design,
                                     const FlowSolution& fs, const RebalancePlan& plan) {
    const int k = sc.zone_count();
    PerformanceReport perf;
    perf.zone_fleet.assign(static_cast<size_t>(k), 0.0);

    for (ZoneId i = 1; i <= k; ++i) {
        double m = design.n_idle[i - 1] + fs.n_assigned[i - 1] + fs.n_seeker_local[i - 1] +
                   fs.n_assigned_local[i - 1] + fs.n_full_local[i - 1];
        double pax = fs.n_assigned[i - 1] + fs.n_seeker_local[i - 1] +
                     2 * (fs.n_assigned_local[i - 1] + fs.n_full_local[i - 1]);
        for (ZoneId j = 1; j <= k; ++j) {
            if (j == i) continue;
            double one = fs.n_seeker_remote[pidx(i, j, k)];
            double two = fs.n_assigned_remote[pidx(i, j, k)] + fs.n_half[pidx(i, j, k)];
            m += one + two;
            pax += one + 2 * two;
            for (ZoneId kk : sc.grid.farther_shareable_dests(i, j)) {
                double full = fs.n_full[tidx(i, j, kk, k)];
                m += full;
                pax += 2 * full;
            }
        }
        perf.zone_fleet[i - 1] = m;
        perf.service_fleet += m;
        perf.passengers_in_service += pax;
    }

    perf.rebalance_fleet = plan.vehicle_hours;
    perf.fleet = perf.service_fleet + perf.rebalance_fleet;
    perf.demand = sc.total_demand();
    perf.agency_cost_rate = sc.vehicle_cost * perf.fleet;
    perf.rider_cost_rate = sc.value_of_time * perf.passengers_in_service;
    perf.system_cost_rate = perf.agency_cost_rate + perf.rider_cost_rate;
    perf.cost_per_trip = perf.system_cost_rate / perf.demand;
    perf.door_to_door_hours = perf.passengers_in_service / perf.demand;
    return perf;
}

EvaluateResult evaluate_design(const Scenario& sc, DesignVars design, const SolveOptions& opts) {
    validate_design(sc.grid, design);
    EvaluateResult out;
    SolveResult solved = solve_steady_state(sc, design, opts);
    out.status = solved.status;
    out.unservable = solved.unservable;
    out.newton_iterations = solved.newton_iterations;
    if (solved.status != SolveStatus::Ok) return out;
    out.flows = std::move(solved.solution);
    out.plan = solve_rebalance(sc, out.flows.rho);
    out.perf = performance_report(sc, design, out.flows, out.plan);
    return out;
}

}  // namespace ridesim
