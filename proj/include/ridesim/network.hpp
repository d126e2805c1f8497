#pragma once

#include "ridesim/matching.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace ridesim {

// Planner decision variables: idle vehicle deployment and the routing split
// of cross-zone vehicles. delta is stored per ordered (origin, destination)
// pair, slot s aligned with grid.feasible_next_zones(i, j)[s]; pairs with a
// single feasible neighbor carry a forced 1.
struct DesignVars {
    std::vector<double> n_idle;                // K
    std::vector<std::array<double, 2>> delta;  // K*K pair-indexed

    double delta_at(ZoneId i, ZoneId j, int slot, int k) const {
        return delta[static_cast<size_t>(i - 1) * k + (j - 1)][slot];
    }
};

// Design with every split set to 1/|feasible neighbors| and idle counts 0.
DesignVars uniform_design(const ZoneGrid& grid);

// Routing fraction toward a specific neighbor (0 if via is not feasible).
double delta_toward(const ZoneGrid& grid, const DesignVars& dv, ZoneId i, ZoneId j, ZoneId via);
void set_delta(const ZoneGrid& grid, DesignVars& dv, ZoneId i, ZoneId j, ZoneId via,
               double value);

// Checks shape, bounds, and row sums; throws std::invalid_argument naming
// the offending pair. Renormalizes row sums lying within tol of 1.
void validate_design(const ZoneGrid& grid, DesignVars& dv, double tol = 1e-6);

// Steady-state flow solution. Vectors are per-zone (K), per ordered pair
// (K*K row-major, diagonal meaningful only where stated), or dense K^3 for
// the two-onboard remote family indexed (zone, closer, farther).
struct FlowSolution {
    // unknowns: seeker counts
    std::vector<double> n_seeker_local;   // per zone
    std::vector<double> n_seeker_remote;  // per pair

    SuitableCounts counts;
    PickupRates pickups;

    // assignment rates of idle / local-seeker / remote-seeker vehicles
    std::vector<double> a_idle, a_seeker_local;  // per zone
    std::vector<double> a_seeker_remote;         // per pair

    // border-crossing and completion rates
    std::vector<double> g_seeker, c_seeker;      // per pair: exits/entries of one-
                                                 // passenger vehicles bound for j;
                                                 // diagonal of c = entries into the
                                                 // destination zone itself
    std::vector<double> d_seeker_local;          // per zone: local deliveries -> idle
    std::vector<double> c_full_local, d_full_local;  // per zone: two onboard, both local
    std::vector<double> c_half, d_half;          // per pair: closer onboard local,
                                                 // farther bound for j
    std::vector<double> g_full, c_full;          // K^3: both destinations remote

    std::vector<double> rho;  // per zone: net idle-vehicle surplus rate

    // steady-state counts for the remaining families
    std::vector<double> n_assigned;         // per zone: en route to a local pickup
    std::vector<double> n_assigned_local;   // per zone: pickup leg w/ local seeker
    std::vector<double> n_assigned_remote;  // per pair: pickup leg w/ seeker to j
    std::vector<double> n_full_local;       // per zone
    std::vector<double> n_half;             // per pair
    std::vector<double> n_full;             // K^3

    double residual_norm = 0;
    bool multi_solution_warning = false;
};

enum class SolveStatus { Ok, Unservable, NoConvergence, NegativeSolution };
const char* to_string(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::NoConvergence;
    FlowSolution solution;   // valid when status == Ok
    Unservable unservable;   // valid when status == Unservable
    int newton_iterations = 0;
    int guesses_tried = 0;
};

// Warm-start store: converged seeker-count vectors from earlier solves,
// consulted as extra initial guesses. Advisory only — hits or misses never
// change a converged result, only how fast it is found.
class GuessCache {
  public:
    void remember(const std::vector<double>& design_key, const std::vector<double>& x);
    // nearest stored entries by design distance, best first
    std::vector<const std::vector<double>*> lookup(const std::vector<double>& design_key,
                                                   int max_entries) const;

  private:
    std::vector<std::pair<std::vector<double>, std::vector<double>>> entries_;
};

// Per-vehicle re-assignment intensities (assignment rate per vehicle of the
// state), computed in closed form so they stay finite as counts vanish.
// Filled per zone (local seekers) and per pair (remote seekers).
void per_vehicle_intensities(const Scenario& scenario, const SuitableCounts& counts,
                             std::vector<double>& theta_local, std::vector<double>& theta_remote);

// Residual of the reduced steady-state system at seeker counts x
// (layout: K local entries then K*(K-1) remote entries, row-major skipping
// the diagonal). Returns false on an unservable class. F has length K^2.
bool steady_state_residual(const Scenario& scenario, const DesignVars& design,
                           const std::vector<double>& x, std::vector<double>& F,
                           FlowSolution* detail, Unservable* err);

struct SolveOptions {
    double tol_scale = 1e-10;  // residual tolerance = tol_scale * (1 + max lambda)
    int max_iterations = 60;   // damped Newton steps per initial guess
    int guess_budget = 5;
    const GuessCache* cache = nullptr;
};

// Damped quasi-Newton solve of the reduced system, retrying over a few
// initial guesses; on success all rates, counts, and rho are populated.
SolveResult solve_steady_state(const Scenario& scenario, const DesignVars& design,
                               const SolveOptions& opts = {},
                               const std::vector<double>* initial_guess = nullptr);

// Fills the pipeline-count fields (n_assigned*, n_full*, n_half) from the
// rate fields via Little's law. Rebalancing counts live with the flow plan.
void little_law_counts(const Scenario& scenario, const DesignVars& design, FlowSolution& fs);

// x layout helpers shared by solver, optimizer, and tests.
int x_size(int k);
int x_index_local(ZoneId i);
int x_index_remote(ZoneId i, ZoneId j, int k);

}  // namespace ridesim
