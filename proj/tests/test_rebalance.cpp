#include "ridesim/rebalance.hpp"
#include "ridesim/rng.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>
#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

using namespace ridesim;

namespace {

Scenario plain_scenario(ZoneGrid g) {
    int k = g.zone_count();
    Scenario sc{std::move(g), 5.0, 25.0, 20.0, 52.0,
                std::vector<double>(static_cast<size_t>(k) * k, 1.0)};
    return sc;
}

double plan_cost(const Scenario& sc, const RebalancePlan& plan) {
    double c = 0;
    const int k = sc.zone_count();
    for (ZoneId i = 1; i <= k; ++i)
        for (ZoneId j = 1; j <= k; ++j)
            if (j != i) c += plan.flow(i, j, k) * rebalance_travel_hours(sc, i, j);
    return c;
}

// Exact reference: enumerate every basis (spanning subset of S+D-1 shipping
// arcs) of the transportation polytope and keep the cheapest feasible one.
double oracle_min_cost(const Scenario& sc, const std::vector<ZoneId>& sz,
                       const std::vector<double>& sv, const std::vector<ZoneId>& dz,
                       const std::vector<double>& dv) {
    const int S = static_cast<int>(sz.size()), D = static_cast<int>(dz.size());
    const int arcs = S * D, basis = S + D - 1;
    std::vector<int> pick(static_cast<size_t>(basis));
    std::iota(pick.begin(), pick.end(), 0);
    double best = std::numeric_limits<double>::infinity();

    auto evaluate = [&]() {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(basis, basis);
        Eigen::VectorXd rhs(basis);
        for (int r = 0; r < S; ++r) rhs[r] = sv[static_cast<size_t>(r)];
        for (int r = 0; r < D - 1; ++r) rhs[S + r] = dv[static_cast<size_t>(r)];
        for (int c = 0; c < basis; ++c) {
            int a = pick[static_cast<size_t>(c)] / D, b = pick[static_cast<size_t>(c)] % D;
            A(a, c) = 1;
            if (b < D - 1) A(S + b, c) = 1;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (!lu.isInvertible()) return;
        Eigen::VectorXd x = lu.solve(rhs);
        double cost = 0;
        for (int c = 0; c < basis; ++c) {
            if (x[c] < -1e-9) return;
            int a = pick[static_cast<size_t>(c)] / D, b = pick[static_cast<size_t>(c)] % D;
            cost += std::max(0.0, x[c]) *
                    rebalance_travel_hours(sc, sz[static_cast<size_t>(a)],
                                           dz[static_cast<size_t>(b)]);
        }
        best = std::min(best, cost);
    };

    // lexicographic combinations of `basis` arcs out of `arcs`
    while (true) {
        evaluate();
        int t = basis - 1;
        while (t >= 0 && pick[static_cast<size_t>(t)] == arcs - basis + t) --t;
        if (t < 0) break;
        ++pick[static_cast<size_t>(t)];
        for (int u = t + 1; u < basis; ++u)
            pick[static_cast<size_t>(u)] = pick[static_cast<size_t>(u - 1)] + 1;
    }
    return best;
}

}  // namespace

TEST_CASE("no surplus means an empty plan") {
    Scenario sc = plain_scenario(ZoneGrid(2, 2));
    RebalancePlan plan = solve_rebalance(sc, {0, 0, 0, 0});
    CHECK(plan.vehicle_hours == 0.0);
    for (double f : plan.flows) CHECK(f == 0.0);
}

TEST_CASE("two-zone shipment pays the lateral allowance on aligned pairs") {
    Scenario sc = plain_scenario(ZoneGrid(1, 2));
    RebalancePlan plan = solve_rebalance(sc, {5.0, -5.0});
    CHECK(plan.flow(1, 2, 2) == doctest::Approx(5.0));
    CHECK(plan.flow(2, 1, 2) == 0.0);
    const double hours = (5.0 + 5.0 / 3.0) / 25.0;
    CHECK(rebalance_travel_hours(sc, 1, 2) == doctest::Approx(hours));
    CHECK(plan.vehicle_hours == doctest::Approx(5.0 * hours));
}

TEST_CASE("staircase pairs ship direct, not around the corner") {
    Scenario sc = plain_scenario(ZoneGrid(2, 2));
    RebalancePlan plan = solve_rebalance(sc, {6.0, 0.0, 0.0, -6.0});
    CHECK(plan.flow(1, 4, 4) == doctest::Approx(6.0));
    CHECK(plan.vehicle_hours == doctest::Approx(6.0 * (10.0 / 25.0)));
}

TEST_CASE("small drift is removed, large imbalance is an error") {
    Scenario sc = plain_scenario(ZoneGrid(1, 2));
    RebalancePlan plan = solve_rebalance(sc, {5.0 + 1e-9, -5.0});
    CHECK(plan.flow(1, 2, 2) == doctest::Approx(5.0).epsilon(1e-6));
    CHECK_THROWS_WITH_AS(solve_rebalance(sc, {5.0, -1.0}), doctest::Contains("balance"),
                         std::runtime_error);
    CHECK_THROWS_AS(solve_rebalance(sc, {5.0}), std::invalid_argument);
}

TEST_CASE("travel times obey the triangle inequality") {
    for (const ZoneGrid& g : {ZoneGrid(2, 2), ZoneGrid(3, 3), testing::irregular16()}) {
        Scenario sc = plain_scenario(g);
        const int k = sc.zone_count();
        for (ZoneId i = 1; i <= k; ++i)
            for (ZoneId j = 1; j <= k; ++j)
                for (ZoneId m = 1; m <= k; ++m) {
                    if (i == j || j == m || i == m) continue;
                    CHECK(rebalance_travel_hours(sc, i, m) <=
                          rebalance_travel_hours(sc, i, j) + rebalance_travel_hours(sc, j, m) +
                              1e-12);
                }
    }
}

TEST_CASE("random instances match the basis-enumeration optimum") {
    Rng rng(777);
    const std::vector<ZoneGrid> grids = {ZoneGrid(2, 2), ZoneGrid(1, 4), ZoneGrid(2, 3)};
    int solved = 0;
    while (solved < 200) {
        const ZoneGrid& g = grids[static_cast<size_t>(rng.below(grids.size()))];
        Scenario sc = plain_scenario(g);
        const int k = sc.zone_count();
        std::vector<ZoneId> sz, dz;
        std::vector<double> sv, dv;
        std::vector<double> rho(static_cast<size_t>(k), 0.0);
        for (ZoneId i = 1; i <= k; ++i) {
            double u = rng.uniform();
            if (u < 0.35)
                sz.push_back(i), sv.push_back(rng.uniform(0.1, 10.0));
            else if (u < 0.7)
                dz.push_back(i), dv.push_back(rng.uniform(0.1, 10.0));
        }
        if (sz.empty() || dz.empty()) continue;
        if (static_cast<int>(sz.size() * dz.size()) > 12) continue;  // keep the oracle cheap
        double total_s = std::accumulate(sv.begin(), sv.end(), 0.0);
        double total_d = std::accumulate(dv.begin(), dv.end(), 0.0);
        for (double& d : dv) d *= total_s / total_d;
        for (size_t t = 0; t < sz.size(); ++t) rho[sz[t] - 1] = sv[t];
        for (size_t t = 0; t < dz.size(); ++t) rho[dz[t] - 1] = -dv[t];

        RebalancePlan plan = solve_rebalance(sc, rho);
        ++solved;

        // marginals restore the surplus/deficit pattern
        for (ZoneId i = 1; i <= k; ++i) {
            double net = 0;
            for (ZoneId j = 1; j <= k; ++j)
                if (j != i) net += plan.flow(i, j, k) - plan.flow(j, i, k);
            CHECK(net == doctest::Approx(rho[static_cast<size_t>(i - 1)])
                             .epsilon(1e-9)
                             .scale(1 + total_s));
            // shipping in both directions at once would be wasteful
            for (ZoneId j = 1; j <= k; ++j)
                if (j != i) CHECK(plan.flow(i, j, k) * plan.flow(j, i, k) == 0.0);
        }

        double best = oracle_min_cost(sc, sz, sv, dz, dv);
        CHECK(plan_cost(sc, plan) == doctest::Approx(best).epsilon(1e-9).scale(1 + best));
        CHECK(plan.vehicle_hours == doctest::Approx(plan_cost(sc, plan)).epsilon(1e-12));
    }
}
