#include "ridesim/network.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ridesim {

namespace {

// Expected remaining travel distances by entry channel, in zone side lengths.
constexpr double kBorderToLocalDrop = 5.0 / 6.0;   // crossed in, one in-zone drop-off
constexpr double kFreshIntraTrip = 2.0 / 3.0;      // in-zone pickup to in-zone drop-off
constexpr double kNestedSecondLeg = 0.5;           // between two nested drop-offs
constexpr double kBorderToCloserOfTwo = 5.0 / 8.0; // crossed in, two in-zone drop-offs
constexpr double kThroughZone = 1.0;               // border to opposite border
constexpr double kInteriorToBorder = 0.5;          // in-zone event to exit border
constexpr double kMeanPickupFactor = 0.63;         // x mean spacing of suitable vehicles

size_t pidx(ZoneId i, ZoneId j, int k) {
    return static_cast<size_t>(i - 1) * k + (j - 1);
}
size_t tidx(ZoneId i, ZoneId j, ZoneId kk, int k) {
    return (static_cast<size_t>(i - 1) * k + (j - 1)) * k + (kk - 1);
}

// Static routing structure of a grid: evaluation orders for the two flow
// cascades. Vehicles always advance strictly closer to their next drop-off,
// so processing states farthest-first makes each cascade a single pass.
struct Plan {
    std::vector<std::vector<ZoneId>> seeker_order;  // per dest j: zones i != j, farthest first
    struct Family {
        ZoneId closer, farther;
        std::vector<ZoneId> members;  // farthest first
    };
    std::vector<Family> families;

    explicit Plan(const ZoneGrid& g) {
        const int k = g.zone_count();
        seeker_order.resize(k);
        auto by_dist_desc = [&](ZoneId j) {
            return [&, j](ZoneId a, ZoneId b) {
                int la = g.l1_steps(a, j), lb = g.l1_steps(b, j);
                return la != lb ? la > lb : a < b;
            };
        };
        for (ZoneId j = 1; j <= k; ++j) {
            auto& order = seeker_order[j - 1];
            for (ZoneId i = 1; i <= k; ++i)
                if (i != j) order.push_back(i);
            std::sort(order.begin(), order.end(), by_dist_desc(j));
        }
        for (ZoneId j = 1; j <= k; ++j) {
            for (ZoneId kk = 1; kk <= k; ++kk) {
                Family fam{j, kk, {}};
                for (ZoneId i = 1; i <= k; ++i) {
                    if (i == j || i == kk) continue;
                    const auto& far = g.farther_shareable_dests(i, j);
                    if (std::find(far.begin(), far.end(), kk) != far.end())
                        fam.members.push_back(i);
                }
                if (fam.members.empty()) continue;
                std::sort(fam.members.begin(), fam.members.end(), by_dist_desc(j));
                families.push_back(std::move(fam));
            }
        }
    }
};

struct Workspace {
    std::vector<double> theta_local, theta_remote;
    std::vector<double> nl, nr;
};

// Evaluates all flows and the steady-state residual at seeker counts x.
// Returns false (filling *err) when some demand class has no suitable
// vehicles. F, when non-null, receives the K + K*(K-1) residual entries.
bool eval_flows(const Scenario& sc, const Plan& plan, const DesignVars& dv,
                const std::vector<double>& x, FlowSolution& fs, std::vector<double>* F,
                Workspace& w, Unservable* err) {
    const ZoneGrid& g = sc.grid;
    const int k = sc.zone_count();
    const double phi = sc.phi, v = sc.speed;

    w.nl.assign(static_cast<size_t>(k), 0.0);
    w.nr.assign(static_cast<size_t>(k) * k, 0.0);
    for (ZoneId i = 1; i <= k; ++i) {
        w.nl[i - 1] = x[x_index_local(i)];
        for (ZoneId j = 1; j <= k; ++j)
            if (j != i) w.nr[pidx(i, j, k)] = x[x_index_remote(i, j, k)];
    }
    fs.n_seeker_local = w.nl;
    fs.n_seeker_remote = w.nr;

    suitable_counts(g, dv.n_idle, w.nl, w.nr, fs.counts);
    if (!pickup_rates(sc, fs.counts, dv.n_idle, w.nl, w.nr, fs.pickups, err)) return false;
    per_vehicle_intensities(sc, fs.counts, w.theta_local, w.theta_remote);

    const PickupRates& p = fs.pickups;
    fs.a_idle.assign(static_cast<size_t>(k), 0.0);
    fs.a_seeker_local.assign(static_cast<size_t>(k), 0.0);
    fs.a_seeker_remote.assign(static_cast<size_t>(k) * k, 0.0);
    for (ZoneId i = 1; i <= k; ++i) {
        double ai = p.intra_from_idle[i - 1];
        double al = p.intra_from_seeker_local[i - 1];
        for (ZoneId j = 1; j <= k; ++j) {
            if (j == i) continue;
            ai += p.inter_idle(i, j, k);
            al += p.inter_seeker_local(i, j, k);
            double ar = p.intra_seeker_to(i, j, k);
            for (ZoneId kk = 1; kk <= k; ++kk)
                if (kk != i) ar += p.inter_seeker_to(i, j, kk, k);
            fs.a_seeker_remote[pidx(i, j, k)] = ar;
        }
        fs.a_idle[i - 1] = ai;
        fs.a_seeker_local[i - 1] = al;
    }

    // Two-passenger cascade: fully loaded vehicles absorb no new callers, so
    // outflow equals inflow and the flow marches zone by zone to the closer
    // drop-off, splitting at each border per the routing design.
    fs.g_full.assign(static_cast<size_t>(k) * k * k, 0.0);
    fs.c_full.assign(static_cast<size_t>(k) * k * k, 0.0);
    fs.c_full_local.assign(static_cast<size_t>(k), 0.0);
    fs.c_half.assign(static_cast<size_t>(k) * k, 0.0);
    for (const auto& fam : plan.families) {
        const ZoneId j = fam.closer, kk = fam.farther;
        for (ZoneId i : fam.members) {
            double flow = fs.c_full[tidx(i, j, kk, k)] + p.inter_seeker_to(i, j, kk, k);
            if (kk != j) flow += p.inter_seeker_to(i, kk, j, k);
            fs.g_full[tidx(i, j, kk, k)] = flow;
            const auto& via = g.feasible_next_zones(i, j);
            for (size_t s = 0; s < via.size(); ++s) {
                double part = flow * dv.delta[pidx(i, j, k)][s];
                if (via[s] == j) {
                    if (kk == j)
                        fs.c_full_local[j - 1] += part;
                    else
                        fs.c_half[pidx(j, kk, k)] += part;
                } else {
                    fs.c_full[tidx(via[s], j, kk, k)] += part;
                }
            }
        }
    }

    fs.d_full_local.assign(static_cast<size_t>(k), 0.0);
    fs.d_half.assign(static_cast<size_t>(k) * k, 0.0);
    for (ZoneId i = 1; i <= k; ++i) {
        fs.d_full_local[i - 1] = p.intra_from_seeker_local[i - 1] + fs.c_full_local[i - 1];
        for (ZoneId j = 1; j <= k; ++j) {
            if (j == i) continue;
            fs.d_half[pidx(i, j, k)] = fs.c_half[pidx(i, j, k)] +
                                       p.inter_seeker_local(i, j, k) + p.intra_seeker_to(i, j, k);
        }
    }

    // One-passenger cascade: en-route vehicles can be diverted to absorb a
    // second caller, so only the undiverted share survives each zone.
    fs.g_seeker.assign(static_cast<size_t>(k) * k, 0.0);
    fs.c_seeker.assign(static_cast<size_t>(k) * k, 0.0);
    for (ZoneId j = 1; j <= k; ++j) {
        for (ZoneId i : plan.seeker_order[j - 1]) {
            double th = w.theta_remote[pidx(i, j, k)];
            double flow = fs.c_seeker[pidx(i, j, k)] * std::exp(-th * kThroughZone * phi / v) +
                          (p.inter_idle(i, j, k) + fs.d_half[pidx(i, j, k)]) *
                              std::exp(-th * kInteriorToBorder * phi / v);
            fs.g_seeker[pidx(i, j, k)] = flow;
            const auto& via = g.feasible_next_zones(i, j);
            for (size_t s = 0; s < via.size(); ++s)
                fs.c_seeker[pidx(via[s], j, k)] += flow * dv.delta[pidx(i, j, k)][s];
        }
    }

    fs.d_seeker_local.assign(static_cast<size_t>(k), 0.0);
    fs.rho.assign(static_cast<size_t>(k), 0.0);
    for (ZoneId i = 1; i <= k; ++i) {
        double th = w.theta_local[i - 1];
        fs.d_seeker_local[i - 1] =
            fs.c_seeker[pidx(i, i, k)] * std::exp(-th * kBorderToLocalDrop * phi / v) +
            (p.intra_from_idle[i - 1] + fs.c_full_local[i - 1]) *
                std::exp(-th * kFreshIntraTrip * phi / v) +
            p.intra_from_seeker_local[i - 1] * std::exp(-th * kNestedSecondLeg * phi / v);
        fs.rho[i - 1] = fs.d_seeker_local[i - 1] - fs.a_idle[i - 1];
    }

    if (F) {
        F->assign(static_cast<size_t>(x_size(k)), 0.0);
        for (ZoneId i = 1; i <= k; ++i) {
            (*F)[x_index_local(i)] = fs.a_seeker_local[i - 1] + fs.d_seeker_local[i - 1] -
                                     fs.c_seeker[pidx(i, i, k)] - fs.d_full_local[i - 1] -
                                     p.intra_from_idle[i - 1];
            for (ZoneId j = 1; j <= k; ++j) {
                if (j == i) continue;
                (*F)[x_index_remote(i, j, k)] =
                    fs.g_seeker[pidx(i, j, k)] + fs.a_seeker_remote[pidx(i, j, k)] -
                    p.inter_idle(i, j, k) - fs.c_seeker[pidx(i, j, k)] - fs.d_half[pidx(i, j, k)];
            }
        }
    }
    return true;
}

double inf_norm(const std::vector<double>& v) {
    double m = 0;
    for (double e : v) m = std::max(m, std::abs(e));
    return m;
}

}  // namespace

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Ok: return "ok";
        case SolveStatus::Unservable: return "unservable";
        case SolveStatus::NoConvergence: return "no_convergence";
        case SolveStatus::NegativeSolution: return "negative_solution";
    }
    return "?";
}

int x_size(int k) { return k * k; }
int x_index_local(ZoneId i) { return i - 1; }
int x_index_remote(ZoneId i, ZoneId j, int k) {
    return k + (i - 1) * (k - 1) + (j < i ? j - 1 : j - 2);
}

DesignVars uniform_design(const ZoneGrid& grid) {
    const int k = grid.zone_count();
    DesignVars dv;
    dv.n_idle.assign(static_cast<size_t>(k), 0.0);
    dv.delta.assign(static_cast<size_t>(k) * k, {0.0, 0.0});
    for (ZoneId i = 1; i <= k; ++i) {
        for (ZoneId j = 1; j <= k; ++j) {
            if (j == i) continue;
            const auto& via = grid.feasible_next_zones(i, j);
            for (size_t s = 0; s < via.size(); ++s)
                dv.delta[pidx(i, j, k)][s] = 1.0 / static_cast<double>(via.size());
        }
    }
    return dv;
}

double delta_toward(const ZoneGrid& grid, const DesignVars& dv, ZoneId i, ZoneId j, ZoneId via) {
    const auto& list = grid.feasible_next_zones(i, j);
    for (size_t s = 0; s < list.size(); ++s)
        if (list[s] == via) return dv.delta[pidx(i, j, grid.zone_count())][s];
    return 0.0;
}

void set_delta(const ZoneGrid& grid, DesignVars& dv, ZoneId i, ZoneId j, ZoneId via,
               double value) {
    const auto& list = grid.feasible_next_zones(i, j);
    for (size_t s = 0; s < list.size(); ++s) {
        if (list[s] == via) {
            dv.delta[pidx(i, j, grid.zone_count())][s] = value;
            return;
        }
    }
    throw std::invalid_argument("design: zone " + std::to_string(via) +
                                " is not a feasible next zone for pair " + std::to_string(i) +
                                "->" + std::to_string(j));
}

void validate_design(const ZoneGrid& grid, DesignVars& dv, double tol) {
    const int k = grid.zone_count();
    if (static_cast<int>(dv.n_idle.size()) != k)
        throw std::invalid_argument("design: idle vector has " +
                                    std::to_string(dv.n_idle.size()) + " entries, expected " +
                                    std::to_string(k));
    if (dv.delta.size() != static_cast<size_t>(k) * k)
        throw std::invalid_argument("design: routing table has wrong size");
    for (ZoneId i = 1; i <= k; ++i) {
        double n = dv.n_idle[i - 1];
        if (!std::isfinite(n) || n < 0)
            throw std::invalid_argument("design: idle count for zone " + std::to_string(i) +
                                        " must be finite and nonnegative");
    }
    for (ZoneId i = 1; i <= k; ++i) {
        for (ZoneId j = 1; j <= k; ++j) {
            auto& slots = dv.delta[pidx(i, j, k)];
            if (j == i) {
                slots = {0.0, 0.0};
                continue;
            }
            const auto& via = grid.feasible_next_zones(i, j);
            double sum = 0;
            for (size_t s = 0; s < via.size(); ++s) {
                double d = slots[s];
                if (!std::isfinite(d) || d < -tol || d > 1 + tol)
                    throw std::invalid_argument("design: routing split for pair " +
                                                std::to_string(i) + "->" + std::to_string(j) +
                                                " has a value outside [0, 1]");
                sum += d;
            }
            if (std::abs(sum - 1.0) > tol)
                throw std::invalid_argument("design: routing split for pair " +
                                            std::to_string(i) + "->" + std::to_string(j) +
                                            " sums to " + std::to_string(sum) + ", expected 1");
            for (size_t s = 0; s < 2; ++s) {
                if (s >= via.size())
                    slots[s] = 0.0;
                else
                    slots[s] = std::clamp(slots[s], 0.0, 1.0) / sum;
            }
        }
    }
}

void per_vehicle_intensities(const Scenario& sc, const SuitableCounts& counts,
                             std::vector<double>& theta_local,
                             std::vector<double>& theta_remote) {
    const ZoneGrid& g = sc.grid;
    const int k = sc.zone_count();
    theta_local.assign(static_cast<size_t>(k), 0.0);
    theta_remote.assign(static_cast<size_t>(k) * k, 0.0);
    for (ZoneId i = 1; i <= k; ++i) {
        const double lam_ii = sc.lambda(i, i);
        double tl = 0;
        if (lam_ii > 0) {
            for (Dir q : kDiagonalDirs)
                tl += (lam_ii / 4) * kIntraLocalShare / counts.intra_at(i, q);
        }
        for (ZoneId j = 1; j <= k; ++j) {
            if (j == i) continue;
            const double lam = sc.lambda(i, j);
            if (lam > 0) {
                double share = is_cardinal(g.direction_of(i, j)) ? kInterLocalShareCardinal
                                                                 : kInterLocalShareDiagonal;
                tl += lam * share / counts.inter_at(i, j, k);
            }
        }
        theta_local[i - 1] = tl;
        for (ZoneId j = 1; j <= k; ++j) {
            if (j == i) continue;
            double tr = 0;
            if (lam_ii > 0) {
                Dir d = g.direction_of(i, j);
                if (is_cardinal(d)) {
                    for (Dir q : flanking(d)) tr += (lam_ii / 4) / counts.intra_at(i, q);
                } else {
                    tr += (lam_ii / 4) / counts.intra_at(i, d);
                }
            }
            for (ZoneId kk : g.shareable_dests(i, j)) {
                const double lam = sc.lambda(i, kk);
                if (lam > 0) tr += lam / counts.inter_at(i, kk, k);
            }
            theta_remote[pidx(i, j, k)] = tr;
        }
    }
}

bool steady_state_residual(const Scenario& sc, const DesignVars& design,
                           const std::vector<double>& x, std::vector<double>& F,
                           FlowSolution* detail, Unservable* err) {
    if (static_cast<int>(x.size()) != x_size(sc.zone_count()))
        throw std::invalid_argument("seeker-count vector has wrong length");
    Plan plan(sc.grid);
    Workspace w;
    FlowSolution local;
    FlowSolution& fs = detail ? *detail : local;
    return eval_flows(sc, plan, design, x, fs, &F, w, err);
}

void little_law_counts(const Scenario& sc, const DesignVars& design, FlowSolution& fs) {
    const ZoneGrid& g = sc.grid;
    const int k = sc.zone_count();
    const double phi = sc.phi, v = sc.speed;
    const double pick = kMeanPickupFactor * phi / v;
    const SuitableCounts& N = fs.counts;
    const PickupRates& p = fs.pickups;

    auto inv32 = [](double n) { return 1.0 / (n * std::sqrt(n)); };

    fs.n_assigned.assign(static_cast<size_t>(k), 0.0);
    fs.n_assigned_local.assign(static_cast<size_t>(k), 0.0);
    fs.n_assigned_remote.assign(static_cast<size_t>(k) * k, 0.0);
    fs.n_full_local.assign(static_cast<size_t>(k), 0.0);
    fs.n_half.assign(static_cast<size_t>(k) * k, 0.0);
    fs.n_full.assign(static_cast<size_t>(k) * k * k, 0.0);

    for (ZoneId i = 1; i <= k; ++i) {
        const double lam_ii = sc.lambda(i, i);
        double idle_sum = 0, local_sum = 0;
        if (lam_ii > 0) {
            for (Dir q : kDiagonalDirs) {
                double w32 = inv32(N.intra_at(i, q));
                idle_sum += (lam_ii / 4) * w32;
                local_sum += (lam_ii / 4) * kIntraLocalShare * w32;
            }
        }
        for (ZoneId j = 1; j <= k; ++j) {
            if (j == i) continue;
            const double lam = sc.lambda(i, j);
            if (lam <= 0) continue;
            double w32 = inv32(N.inter_at(i, j, k));
            double share = is_cardinal(g.direction_of(i, j)) ? kInterLocalShareCardinal
                                                             : kInterLocalShareDiagonal;
            idle_sum += lam * w32;
            local_sum += lam * share * w32;
        }
        fs.n_assigned[i - 1] = pick * design.n_idle[i - 1] * idle_sum;
        fs.n_assigned_local[i - 1] = pick * fs.n_seeker_local[i - 1] * local_sum;

        fs.n_full_local[i - 1] =
            (phi / v) * (fs.c_full_local[i - 1] * kBorderToCloserOfTwo +
                         p.intra_from_seeker_local[i - 1] * kNestedSecondLeg);

        for (ZoneId j = 1; j <= k; ++j) {
            if (j == i) continue;
            double remote_sum = 0;
            if (lam_ii > 0) {
                Dir d = g.direction_of(i, j);
                if (is_cardinal(d)) {
                    for (Dir q : flanking(d)) remote_sum += (lam_ii / 4) * inv32(N.intra_at(i, q));
                } else {
                    remote_sum += (lam_ii / 4) * inv32(N.intra_at(i, d));
                }
            }
            for (ZoneId kk : g.shareable_dests(i, j)) {
                const double lam = sc.lambda(i, kk);
                if (lam > 0) remote_sum += lam * inv32(N.inter_at(i, kk, k));
            }
            fs.n_assigned_remote[pidx(i, j, k)] =
                pick * fs.n_seeker_remote[pidx(i, j, k)] * remote_sum;

            fs.n_half[pidx(i, j, k)] =
                (phi / v) *
                (fs.c_half[pidx(i, j, k)] * kBorderToLocalDrop +
                 (p.inter_seeker_local(i, j, k) + p.intra_seeker_to(i, j, k)) * kFreshIntraTrip);

            for (ZoneId kk : g.farther_shareable_dests(i, j)) {
                double boarded = p.inter_seeker_to(i, j, kk, k);
                if (kk != j) boarded += p.inter_seeker_to(i, kk, j, k);
                fs.n_full[tidx(i, j, kk, k)] =
                    (phi / v) * (fs.c_full[tidx(i, j, kk, k)] * kThroughZone +
                                 boarded * kInteriorToBorder);
            }
        }
    }
}

void GuessCache::remember(const std::vector<double>& design_key, const std::vector<double>& x) {
    constexpr size_t kMaxEntries = 64;
    entries_.emplace_back(design_key, x);
    if (entries_.size() > kMaxEntries) entries_.erase(entries_.begin());
}

std::vector<const std::vector<double>*> GuessCache::lookup(const std::vector<double>& design_key,
                                                           int max_entries) const {
    std::vector<std::pair<double, const std::vector<double>*>> scored;
    for (const auto& [key, x] : entries_) {
        if (key.size() != design_key.size()) continue;
        double d2 = 0;
        for (size_t t = 0; t < key.size(); ++t) {
            double d = key[t] - design_key[t];
            d2 += d * d;
        }
        scored.emplace_back(d2, &x);
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<const std::vector<double>*> out;
    for (const auto& [d2, px] : scored) {
        if (static_cast<int>(out.size()) >= max_entries) break;
        out.push_back(px);
    }
    return out;
}

SolveResult solve_steady_state(const Scenario& sc, const DesignVars& design,
                               const SolveOptions& opts, const std::vector<double>* initial) {
    const int k = sc.zone_count();
    const int n = x_size(k);
    Plan plan(sc.grid);
    Workspace w;

    double max_lambda = 0;
    for (double lam : sc.demand) max_lambda = std::max(max_lambda, lam);
    const double tol = opts.tol_scale * (1.0 + max_lambda);

    // Initial guesses: caller-provided, warm-start cache, then a demand-
    // proportional heuristic and scalings of it.
    std::vector<std::vector<double>> guesses;
    if (initial) guesses.push_back(*initial);
    if (opts.cache) {
        std::vector<double> key = design.n_idle;
        for (const auto& d : design.delta) key.insert(key.end(), d.begin(), d.end());
        for (const auto* px : opts.cache->lookup(key, 2)) guesses.push_back(*px);
    }
    std::vector<double> heur(static_cast<size_t>(n), 0.0);
    for (ZoneId i = 1; i <= k; ++i) {
        heur[x_index_local(i)] = 0.5 * sc.lambda(i, i) * sc.phi / (8 * sc.speed);
        for (ZoneId j = 1; j <= k; ++j)
            if (j != i) heur[x_index_remote(i, j, k)] = 0.5 * sc.lambda(i, j) * sc.phi / sc.speed;
    }
    guesses.push_back(heur);
    for (double scale : {0.25, 3.0}) {
        std::vector<double> gsc = heur;
        for (double& e : gsc) e *= scale;
        guesses.push_back(gsc);
    }
    {
        double u = 0.1 * sc.total_demand() / (k * k) * sc.phi / sc.speed + 1e-3;
        guesses.emplace_back(static_cast<size_t>(n), u);
    }
    if (static_cast<int>(guesses.size()) > opts.guess_budget)
        guesses.resize(static_cast<size_t>(opts.guess_budget));

    SolveResult res;
    FlowSolution fs;
    std::vector<double> F(static_cast<size_t>(n)), Ftrial(static_cast<size_t>(n));
    Eigen::MatrixXd J(n, n);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    bool saw_unservable = false;
    std::optional<std::vector<double>> first_converged;

    for (auto& x : guesses) {
        ++res.guesses_tried;
        for (double& e : x) e = std::max(0.0, e);

        Unservable uerr;
        if (!eval_flows(sc, plan, design, x, fs, &F, w, &uerr)) {
            saw_unservable = true;
            res.unservable = uerr;
            continue;
        }
        double fnorm = inf_norm(F);
        if (!std::isfinite(fnorm)) continue;

        int since_refresh = 1000;  // force a Jacobian on the first step
        bool converged = false;
        std::vector<double> xt(x.size());
        for (int it = 0; it < opts.max_iterations; ++it) {
            ++res.newton_iterations;
            if (fnorm <= tol) {
                converged = true;
                break;
            }
            if (since_refresh >= 5) {
                // Forward-difference Jacobian, reused chord-style below.
                double xmax = inf_norm(x);
                bool ok = true;
                for (int c = 0; c < n && ok; ++c) {
                    double h = 1e-6 * std::abs(x[c]) + 1e-8 * (1 + xmax);
                    xt = x;
                    xt[c] += h;
                    if (!eval_flows(sc, plan, design, xt, fs, &Ftrial, w, nullptr)) {
                        ok = false;
                        break;
                    }
                    for (int r = 0; r < n; ++r) J(r, c) = (Ftrial[r] - F[r]) / h;
                }
                if (!ok) break;
                lu.compute(J);
                since_refresh = 0;
            }
            Eigen::VectorXd rhs(n);
            for (int r = 0; r < n; ++r) rhs[r] = -F[r];
            Eigen::VectorXd dx = lu.solve(rhs);
            if (!dx.allFinite()) {
                if (since_refresh > 0) {
                    since_refresh = 1000;
                    continue;
                }
                break;
            }
            double alpha = 1.0;
            bool accepted = false;
            for (int half = 0; half <= 20; ++half, alpha *= 0.5) {
                for (int c = 0; c < n; ++c) xt[c] = std::max(0.0, x[c] + alpha * dx[c]);
                if (!eval_flows(sc, plan, design, xt, fs, &Ftrial, w, nullptr)) continue;
                double tnorm = inf_norm(Ftrial);
                if (std::isfinite(tnorm) && tnorm <= (1 - 1e-4 * alpha) * fnorm) {
                    x = xt;
                    F = Ftrial;
                    fnorm = tnorm;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                if (since_refresh > 0) {
                    since_refresh = 1000;  // stale chord: rebuild and retry
                    continue;
                }
                break;
            }
            ++since_refresh;
            if (alpha < 0.25) since_refresh = 1000;
        }
        if (fnorm <= tol) converged = true;
        if (!converged) continue;

        Unservable ferr;
        if (!eval_flows(sc, plan, design, x, fs, &F, w, &ferr)) continue;
        little_law_counts(sc, design, fs);
        fs.residual_norm = inf_norm(F);
        fs.multi_solution_warning = false;
        if (first_converged) {
            double diff = 0, scale = 1;
            for (int c = 0; c < n; ++c) {
                diff = std::max(diff, std::abs(x[c] - (*first_converged)[c]));
                scale = std::max(scale, std::abs((*first_converged)[c]));
            }
            if (diff > 1e-6 * scale) fs.multi_solution_warning = true;
        } else {
            first_converged = x;
        }

        double neg = 0;
        for (const auto* vec :
             {&fs.n_seeker_local, &fs.n_seeker_remote, &fs.g_seeker, &fs.c_seeker,
              &fs.d_seeker_local, &fs.c_full_local, &fs.d_full_local, &fs.c_half, &fs.d_half,
              &fs.g_full, &fs.c_full, &fs.n_assigned, &fs.n_assigned_local, &fs.n_assigned_remote,
              &fs.n_full_local, &fs.n_half, &fs.n_full})
            for (double e : *vec) neg = std::min(neg, e);
        if (neg < -1e-9) {
            res.status = SolveStatus::NegativeSolution;
            continue;
        }

        res.status = SolveStatus::Ok;
        res.solution = fs;
        return res;
    }

    if (res.status != SolveStatus::NegativeSolution)
        res.status = saw_unservable ? SolveStatus::Unservable : SolveStatus::NoConvergence;
    return res;
}

}  // namespace ridesim
