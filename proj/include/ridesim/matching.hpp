#pragma once

#include "ridesim/grid.hpp"
#include "ridesim/scenario.hpp"

#include <array>
#include <optional>
#include <vector>

namespace ridesim {

// Expected share of a zone's area from which a local seeker's destination
// keeps an intra-zonal caller detour-free (one diagonal quadrant).
constexpr double kIntraLocalShare = 2.0 / 9.0;
// Same for an inter-zonal caller: half-plane toward a cardinal destination,
// quadrant toward a diagonal one.
constexpr double kInterLocalShareCardinal = 1.0 / 2.0;
constexpr double kInterLocalShareDiagonal = 1.0 / 4.0;

// Counts of vehicles suitable to serve a caller, by caller class.
//   intra[i-1][q]  — callers inside zone i heading into diagonal quadrant q
//                    (indexed per kDiagonalDirs);
//   inter[(i,j)]   — callers from zone i to zone j != i (row-major K x K).
// A vehicle is suitable if it is idle, or if its seeker's destination lets it
// absorb the caller without a zone-level detour; the fractional coefficients
// are the expected feasible-area shares of in-zone seeker destinations.
struct SuitableCounts {
    std::vector<std::array<double, 4>> intra;
    std::vector<double> inter;

    double intra_at(ZoneId i, Dir diag) const { return intra[i - 1][diag_index(diag)]; }
    double inter_at(ZoneId i, ZoneId j, int k) const {
        return inter[static_cast<size_t>(i - 1) * k + (j - 1)];
    }
};

// n_idle and n_seeker_local are per-zone (K); n_seeker_remote is row-major
// K x K with the diagonal ignored.
void suitable_counts(const ZoneGrid& grid, const std::vector<double>& n_idle,
                     const std::vector<double>& n_seeker_local,
                     const std::vector<double>& n_seeker_remote, SuitableCounts& out);
SuitableCounts suitable_counts(const ZoneGrid& grid, const std::vector<double>& n_idle,
                               const std::vector<double>& n_seeker_local,
                               const std::vector<double>& n_seeker_remote);

// Demand class that cannot be served because no suitable vehicle exists
// (N = 0 with lambda > 0). dest == origin marks an intra-zonal class.
struct Unservable {
    ZoneId origin = kNoZone;
    ZoneId dest = kNoZone;
};

// Rates at which vehicles of each class pick up callers, in veh/hr.
// "seeker_to j" means a vehicle whose current seeker is destined to zone j.
// Layout: per-zone vectors of length K, pair matrices K x K row-major, and
// the three-index family stored as [(i,k) pair][j] in a K x K x K block.
struct PickupRates {
    std::vector<double> intra_from_idle;           // p: idle in i takes caller i->i
    std::vector<double> intra_from_seeker_local;   // seeker dest in i takes i->i
    std::vector<double> intra_from_seeker_to;      // (i,j): seeker dest j takes i->i
    std::vector<double> inter_from_idle;           // (i,j): idle takes caller i->j
    std::vector<double> inter_from_seeker_local;   // (i,j): local seeker takes i->j
    std::vector<double> inter_from_seeker_to;      // ((i,k),j): seeker dest k takes i->j

    double intra_seeker_to(ZoneId i, ZoneId j, int k) const {
        return intra_from_seeker_to[static_cast<size_t>(i - 1) * k + (j - 1)];
    }
    double inter_idle(ZoneId i, ZoneId j, int k) const {
        return inter_from_idle[static_cast<size_t>(i - 1) * k + (j - 1)];
    }
    double inter_seeker_local(ZoneId i, ZoneId j, int k) const {
        return inter_from_seeker_local[static_cast<size_t>(i - 1) * k + (j - 1)];
    }
    double inter_seeker_to(ZoneId i, ZoneId k2, ZoneId j, int k) const {
        return inter_from_seeker_to[(static_cast<size_t>(i - 1) * k + (k2 - 1)) * k + (j - 1)];
    }
};

// Splits every demand class across the suitable vehicle classes in
// proportion to their suitable counts. Returns false and fills *err when a
// class with positive demand has no suitable vehicles.
bool pickup_rates(const Scenario& scenario, const SuitableCounts& counts,
                  const std::vector<double>& n_idle, const std::vector<double>& n_seeker_local,
                  const std::vector<double>& n_seeker_remote, PickupRates& out,
                  Unservable* err);
std::optional<PickupRates> pickup_rates(const Scenario& scenario, const SuitableCounts& counts,
                                        const std::vector<double>& n_idle,
                                        const std::vector<double>& n_seeker_local,
                                        const std::vector<double>& n_seeker_remote,
                                        Unservable* err = nullptr);

}  // namespace ridesim
