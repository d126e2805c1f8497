#include "ridesim/matching.hpp"

namespace ridesim {

namespace {
inline size_t pij(ZoneId i, ZoneId j, int k) {
    return static_cast<size_t>(i - 1) * k + (j - 1);
}
}  // namespace

void suitable_counts(const ZoneGrid& grid, const std::vector<double>& n_idle,
                     const std::vector<double>& n_seeker_local,
                     const std::vector<double>& n_seeker_remote, SuitableCounts& out) {
    int k = grid.zone_count();
    out.intra.assign(k, {});
    out.inter.assign(static_cast<size_t>(k) * k, 0.0);
    for (ZoneId i = 1; i <= k; ++i) {
        for (Dir r : kDiagonalDirs) {
            double n = n_idle[i - 1] + kIntraLocalShare * n_seeker_local[i - 1];
            for (ZoneId j : grid.intra_shareable_dests(i, r)) n += n_seeker_remote[pij(i, j, k)];
            out.intra[i - 1][diag_index(r)] = n;
        }
        for (ZoneId j = 1; j <= k; ++j) {
            if (j == i) continue;
            double share = is_cardinal(grid.direction_of(i, j)) ? kInterLocalShareCardinal
                                                                : kInterLocalShareDiagonal;
            double n = n_idle[i - 1] + share * n_seeker_local[i - 1];
            for (ZoneId c : grid.shareable_dests(i, j)) n += n_seeker_remote[pij(i, c, k)];
            out.inter[pij(i, j, k)] = n;
        }
    }
}

SuitableCounts suitable_counts(const ZoneGrid& grid, const std::vector<double>& n_idle,
                               const std::vector<double>& n_seeker_local,
                               const std::vector<double>& n_seeker_remote) {
    SuitableCounts out;
    suitable_counts(grid, n_idle, n_seeker_local, n_seeker_remote, out);
    return out;
}

bool pickup_rates(const Scenario& scenario, const SuitableCounts& counts,
                  const std::vector<double>& n_idle, const std::vector<double>& n_seeker_local,
                  const std::vector<double>& n_seeker_remote, PickupRates& out,
                  Unservable* err) {
    const ZoneGrid& grid = scenario.grid;
    int k = grid.zone_count();
    out.intra_from_idle.assign(k, 0.0);
    out.intra_from_seeker_local.assign(k, 0.0);
    out.intra_from_seeker_to.assign(static_cast<size_t>(k) * k, 0.0);
    out.inter_from_idle.assign(static_cast<size_t>(k) * k, 0.0);
    out.inter_from_seeker_local.assign(static_cast<size_t>(k) * k, 0.0);
    out.inter_from_seeker_to.assign(static_cast<size_t>(k) * k * k, 0.0);

    for (ZoneId i = 1; i <= k; ++i) {
        // intra-zonal callers arrive uniformly over the four diagonal
        // quadrants; each quadrant's demand splits over its suitable classes
        double lam_ii = scenario.lambda(i, i);
        if (lam_ii > 0) {
            double quarter = lam_ii / 4.0;
            for (Dir r : kDiagonalDirs) {
                double n_r = counts.intra_at(i, r);
                if (!(n_r > 0)) {
                    if (err) *err = {i, i};
                    return false;
                }
                double per_veh = quarter / n_r;
                out.intra_from_idle[i - 1] += per_veh * n_idle[i - 1];
                out.intra_from_seeker_local[i - 1] +=
                    per_veh * kIntraLocalShare * n_seeker_local[i - 1];
                for (ZoneId j : grid.intra_shareable_dests(i, r))
                    out.intra_from_seeker_to[pij(i, j, k)] +=
                        per_veh * n_seeker_remote[pij(i, j, k)];
            }
        }
        for (ZoneId j = 1; j <= k; ++j) {
            if (j == i) continue;
            double lam_ij = scenario.lambda(i, j);
            if (!(lam_ij > 0)) continue;
            double n_ij = counts.inter_at(i, j, k);
            if (!(n_ij > 0)) {
                if (err) *err = {i, j};
                return false;
            }
            double per_veh = lam_ij / n_ij;
            double share = is_cardinal(grid.direction_of(i, j)) ? kInterLocalShareCardinal
                                                                : kInterLocalShareDiagonal;
            out.inter_from_idle[pij(i, j, k)] = per_veh * n_idle[i - 1];
            out.inter_from_seeker_local[pij(i, j, k)] = per_veh * share * n_seeker_local[i - 1];
            for (ZoneId c : grid.shareable_dests(i, j))
                out.inter_from_seeker_to[(static_cast<size_t>(i - 1) * k + (c - 1)) * k +
                                         (j - 1)] = per_veh * n_seeker_remote[pij(i, c, k)];
        }
    }
    return true;
}

std::optional<PickupRates> pickup_rates(const Scenario& scenario, const SuitableCounts& counts,
                                        const std::vector<double>& n_idle,
                                        const std::vector<double>& n_seeker_local,
                                        const std::vector<double>& n_seeker_remote,
                                        Unservable* err) {
    PickupRates out;
    if (!pickup_rates(scenario, counts, n_idle, n_seeker_local, n_seeker_remote, out, err))
        return std::nullopt;
    return out;
}

}  // namespace ridesim
