#include "ridesim/rebalance.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ridesim {

namespace {

constexpr double kLateralShare = 1.0 / 3.0;  // expected off-axis offset, zone sides

struct Arc {
    int to;
    int rev;       // index of the reverse arc in adj[to]
    double cap;
    double cost;
};

// Successive shortest augmenting paths with Bellman-Ford; the graph is tiny
// (source, surpluses, deficits, sink) and each augmentation saturates a
// source or sink arc, so at most K+1 rounds run.
class MinCostFlow {
  public:
    explicit MinCostFlow(int n) : adj_(static_cast<size_t>(n)) {}

    void add(int from, int to, double cap, double cost) {
        adj_[static_cast<size_t>(from)].push_back(
            {to, static_cast<int>(adj_[static_cast<size_t>(to)].size()), cap, cost});
        adj_[static_cast<size_t>(to)].push_back(
            {from, static_cast<int>(adj_[static_cast<size_t>(from)].size()) - 1, 0.0, -cost});
    }

    // pushes as much flow as possible from s to t at minimum cost
    void run(int s, int t, double eps) {
        const int n = static_cast<int>(adj_.size());
        while (true) {
            std::vector<double> dist(static_cast<size_t>(n),
                                     std::numeric_limits<double>::infinity());
            std::vector<int> pv(static_cast<size_t>(n), -1), pe(static_cast<size_t>(n), -1);
            dist[static_cast<size_t>(s)] = 0;
            for (int round = 0; round < n; ++round) {
                bool changed = false;
                for (int u = 0; u < n; ++u) {
                    if (!std::isfinite(dist[static_cast<size_t>(u)])) continue;
                    const auto& arcs = adj_[static_cast<size_t>(u)];
                    for (size_t e = 0; e < arcs.size(); ++e) {
                        const Arc& a = arcs[e];
                        if (a.cap <= eps) continue;
                        double nd = dist[static_cast<size_t>(u)] + a.cost;
                        if (nd < dist[static_cast<size_t>(a.to)] - 1e-15) {
                            dist[static_cast<size_t>(a.to)] = nd;
                            pv[static_cast<size_t>(a.to)] = u;
                            pe[static_cast<size_t>(a.to)] = static_cast<int>(e);
                            changed = true;
                        }
                    }
                }
                if (!changed) break;
            }
            if (!std::isfinite(dist[static_cast<size_t>(t)])) break;
            double push = std::numeric_limits<double>::infinity();
            for (int v = t; v != s; v = pv[static_cast<size_t>(v)])
                push = std::min(push, adj_[static_cast<size_t>(pv[static_cast<size_t>(v)])]
                                          [static_cast<size_t>(pe[static_cast<size_t>(v)])].cap);
            if (!(push > eps)) break;
            for (int v = t; v != s; v = pv[static_cast<size_t>(v)]) {
                Arc& a = adj_[static_cast<size_t>(pv[static_cast<size_t>(v)])]
                             [static_cast<size_t>(pe[static_cast<size_t>(v)])];
                a.cap -= push;
                adj_[static_cast<size_t>(a.to)][static_cast<size_t>(a.rev)].cap += push;
            }
        }
    }

    double shipped(int from, size_t arc_index) const {
        const Arc& a = adj_[static_cast<size_t>(from)][arc_index];
        return adj_[static_cast<size_t>(a.to)][static_cast<size_t>(a.rev)].cap;
    }

  private:
    std::vector<std::vector<Arc>> adj_;
};

}  // namespace

double rebalance_travel_hours(const Scenario& sc, ZoneId i, ZoneId j) {
    double dist = sc.zone_distance(i, j);
    if (is_cardinal(sc.grid.direction_of(i, j))) dist += kLateralShare * sc.phi;
    return dist / sc.speed;
}

RebalancePlan solve_rebalance(const Scenario& sc, const std::vector<double>& rho) {
    const int k = sc.zone_count();
    if (static_cast<int>(rho.size()) != k)
        throw std::invalid_argument("rebalance: rho must have one entry per zone");

    RebalancePlan plan;
    plan.flows.assign(static_cast<size_t>(k) * k, 0.0);
    plan.n_transit.assign(static_cast<size_t>(k) * k, 0.0);

    double scale = 0, drift = 0;
    for (double r : rho) {
        scale += std::abs(r);
        drift += r;
    }
    if (scale == 0) return plan;
    if (std::abs(drift) > 1e-6 * (1 + scale))
        throw std::runtime_error(
            "rebalance: surplus and deficit do not balance (net " + std::to_string(drift) +
            " veh/hr); the flow solution has not converged");

    std::vector<double> r(rho);
    for (double& e : r) e -= drift / k;

    std::vector<ZoneId> surplus, deficit;
    for (ZoneId i = 1; i <= k; ++i) {
        if (r[i - 1] > 0) surplus.push_back(i);
        if (r[i - 1] < 0) deficit.push_back(i);
    }
    if (surplus.empty() || deficit.empty()) return plan;

    const int ns = static_cast<int>(surplus.size()), nd = static_cast<int>(deficit.size());
    const int src = 0, snk = ns + nd + 1;
    MinCostFlow mcf(ns + nd + 2);
    for (int a = 0; a < ns; ++a) mcf.add(src, 1 + a, r[surplus[static_cast<size_t>(a)] - 1], 0);
    for (int b = 0; b < nd; ++b)
        mcf.add(1 + ns + b, snk, -r[deficit[static_cast<size_t>(b)] - 1], 0);
    // pair arcs land in each surplus node's list right after the reverse of
    // its source arc, in deficit order; shipped() below relies on that
    for (int a = 0; a < ns; ++a)
        for (int b = 0; b < nd; ++b)
            mcf.add(1 + a, 1 + ns + b, std::numeric_limits<double>::infinity(),
                    rebalance_travel_hours(sc, surplus[static_cast<size_t>(a)],
                                           deficit[static_cast<size_t>(b)]));

    mcf.run(src, snk, 1e-14 * (1 + scale));

    for (int a = 0; a < ns; ++a) {
        for (int b = 0; b < nd; ++b) {
            // surplus node 1+a: arc 0 is the reverse of source->surplus,
            // pair arcs follow in deficit order
            double f = mcf.shipped(1 + a, static_cast<size_t>(1 + b));
            if (f <= 1e-12 * (1 + scale)) continue;
            ZoneId i = surplus[static_cast<size_t>(a)], j = deficit[static_cast<size_t>(b)];
            plan.flows[static_cast<size_t>(i - 1) * k + (j - 1)] = f;
            plan.n_transit[static_cast<size_t>(i - 1) * k + (j - 1)] =
                f * rebalance_travel_hours(sc, i, j);
        }
    }
    for (double n : plan.n_transit) plan.vehicle_hours += n;
    return plan;
}

}  // namespace ridesim
