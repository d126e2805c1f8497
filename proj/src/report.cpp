#include "ridesim/report.hpp"

#include "ridesim/states.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ridesim {

namespace {

std::string pair_key(ZoneId i, ZoneId j) {
    return std::to_string(i) + "->" + std::to_string(j);
}

std::string split_key(ZoneId i, ZoneId j, ZoneId via) {
    return pair_key(i, j) + ":" + std::to_string(via);
}

Json zone_map(const std::vector<double>& v) {
    Json out = Json::object();
    for (size_t i = 0; i < v.size(); ++i)
        out[std::to_string(i + 1)] = quantize(v[i]);
    return out;
}

// Off-diagonal entries of a K x K row-major matrix, keyed "i->j".
Json pair_map(const std::vector<double>& v, int k, bool skip_zero = false) {
    Json out = Json::object();
    for (ZoneId i = 1; i <= k; ++i)
        for (ZoneId j = 1; j <= k; ++j) {
            if (i == j) continue;
            double x = v[static_cast<size_t>(i - 1) * k + (j - 1)];
            if (skip_zero && x == 0.0) continue;
            out[pair_key(i, j)] = quantize(x);
        }
    return out;
}

VehicleState st(ZoneId zone, ZoneId s1, ZoneId s2, ZoneId s3) {
    VehicleState s;
    s.zone = zone;
    s.s1 = s1;
    s.s2 = s2;
    s.s3 = s3;
    return s;
}

}  // namespace

double quantize(double v) {
    if (!std::isfinite(v)) return v;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

Json scenario_to_json(const Scenario& sc) {
    Json j;
    Json grid;
    grid["rows"] = sc.grid.rows();
    grid["cols"] = sc.grid.cols();
    bool full = sc.grid.zone_count() == sc.grid.rows() * sc.grid.cols();
    bool reading_order = true;
    if (full) {
        // reading order: id 1 northwest, increasing eastward then southward
        for (ZoneId z = 1; z <= sc.grid.zone_count() && reading_order; ++z) {
            int table_row = (z - 1) / sc.grid.cols();
            int col = (z - 1) % sc.grid.cols();
            reading_order = sc.grid.zone_at(col, sc.grid.rows() - 1 - table_row) == z;
        }
    }
    if (!full || !reading_order) {
        Json table = Json::array();
        for (int r = sc.grid.rows() - 1; r >= 0; --r) {
            Json row = Json::array();
            for (int c = 0; c < sc.grid.cols(); ++c) row.push_back(sc.grid.zone_at(c, r));
            table.push_back(row);
        }
        grid["zone_ids"] = table;
    }
    j["grid"] = grid;
    j["phi_km"] = quantize(sc.phi);
    j["speed_kmh"] = quantize(sc.speed);
    j["value_of_time"] = quantize(sc.value_of_time);
    j["vehicle_cost"] = quantize(sc.vehicle_cost);
    Json demand = Json::array();
    int k = sc.zone_count();
    for (ZoneId i = 1; i <= k; ++i) {
        Json row = Json::array();
        for (ZoneId j2 = 1; j2 <= k; ++j2) row.push_back(quantize(sc.lambda(i, j2)));
        demand.push_back(row);
    }
    j["demand"] = demand;
    Json digest;
    digest["zones"] = k;
    digest["total_demand_per_hr"] = quantize(sc.total_demand());
    j["digest"] = digest;
    return j;
}

Json design_to_json(const ZoneGrid& grid, const DesignVars& dv) {
    Json j;
    Json idle = Json::array();
    for (double v : dv.n_idle) idle.push_back(quantize(v));
    j["n_idle"] = idle;
    Json splits = Json::object();
    int k = grid.zone_count();
    for (ZoneId i = 1; i <= k; ++i)
        for (ZoneId jd = 1; jd <= k; ++jd) {
            if (i == jd) continue;
            const auto& next = grid.feasible_next_zones(i, jd);
            for (size_t s = 0; s < next.size(); ++s)
                splits[split_key(i, jd, next[s])] =
                    quantize(dv.delta_at(i, jd, static_cast<int>(s), k));
        }
    j["delta"] = splits;
    return j;
}

DesignVars design_from_json(const ZoneGrid& grid, const Json& j) {
    if (!j.contains("n_idle"))
        throw std::invalid_argument("design file: missing n_idle");
    DesignVars dv = uniform_design(grid);
    const Json& idle = j.at("n_idle");
    if (!idle.is_array() || static_cast<int>(idle.size()) != grid.zone_count())
        throw std::invalid_argument("design file: n_idle must list one count per zone");
    for (size_t i = 0; i < idle.size(); ++i) dv.n_idle[i] = idle[i].get<double>();
    if (j.contains("delta")) {
        for (const auto& [key, value] : j.at("delta").items()) {
            ZoneId i = 0, jd = 0, via = 0;
            char a = 0, b = 0, c = 0;
            std::istringstream in(key);
            in >> i >> a >> b >> jd >> c >> via;
            if (!in || a != '-' || b != '>' || c != ':')
                throw std::invalid_argument("design file: bad delta key \"" + key +
                                            "\" (want \"i->j:via\")");
            set_delta(grid, dv, i, jd, via, value.get<double>());
        }
    }
    validate_design(grid, dv);
    return dv;
}

DesignVars load_design(const ZoneGrid& grid, const std::string& path) {
    return design_from_json(grid, load_json(path));
}

Json flows_to_json(const ZoneGrid& grid, const DesignVars& dv, const FlowSolution& fs) {
    int k = grid.zone_count();
    Json j;
    j["residual_norm"] = quantize(fs.residual_norm);
    j["multi_solution_warning"] = fs.multi_solution_warning;

    Json counts = Json::object();
    for (ZoneId i = 1; i <= k; ++i) {
        counts[st(i, 0, 0, 0).name()] = quantize(dv.n_idle[i - 1]);
        counts[st(i, i, 0, 0).name()] = quantize(fs.n_assigned[i - 1]);
        counts[st(i, 0, i, 0).name()] = quantize(fs.n_seeker_local[i - 1]);
        counts[st(i, i, i, 0).name()] = quantize(fs.n_assigned_local[i - 1]);
        counts[st(i, 0, i, i).name()] = quantize(fs.n_full_local[i - 1]);
        for (ZoneId jd = 1; jd <= k; ++jd) {
            if (jd == i) continue;
            size_t p = static_cast<size_t>(i - 1) * k + (jd - 1);
            counts[st(i, 0, jd, 0).name()] = quantize(fs.n_seeker_remote[p]);
            counts[st(i, i, jd, 0).name()] = quantize(fs.n_assigned_remote[p]);
            counts[st(i, 0, i, jd).name()] = quantize(fs.n_half[p]);
            for (ZoneId far : grid.farther_shareable_dests(i, jd))
                counts[st(i, 0, jd, far).name()] =
                    quantize(fs.n_full[(static_cast<size_t>(i - 1) * k + (jd - 1)) * k +
                                       (far - 1)]);
        }
    }
    j["counts"] = counts;

    Json match;
    match["from_idle"] = zone_map(fs.a_idle);
    match["from_seeker_local"] = zone_map(fs.a_seeker_local);
    match["from_seeker_remote"] = pair_map(fs.a_seeker_remote, k);
    j["match_rates"] = match;

    Json crossing;
    crossing["seeker_exits"] = pair_map(fs.g_seeker, k);
    Json centries = Json::object();
    for (ZoneId i = 1; i <= k; ++i)
        for (ZoneId jd = 1; jd <= k; ++jd) {
            double x = fs.c_seeker[static_cast<size_t>(i - 1) * k + (jd - 1)];
            centries[pair_key(i, jd)] = quantize(x);
        }
    crossing["seeker_entries"] = centries;
    Json gfull = Json::object(), cfull = Json::object();
    for (ZoneId i = 1; i <= k; ++i)
        for (ZoneId jd = 1; jd <= k; ++jd) {
            if (jd == i) continue;
            for (ZoneId far : grid.farther_shareable_dests(i, jd)) {
                size_t t = (static_cast<size_t>(i - 1) * k + (jd - 1)) * k + (far - 1);
                std::string name = st(i, 0, jd, far).name();
                gfull[name] = quantize(fs.g_full[t]);
                cfull[name] = quantize(fs.c_full[t]);
            }
        }
    crossing["full_exits"] = gfull;
    crossing["full_entries"] = cfull;
    j["crossing_rates"] = crossing;

    Json done;
    done["seeker_local_delivery"] = zone_map(fs.d_seeker_local);
    done["full_local_formed"] = zone_map(fs.c_full_local);
    done["full_local_delivery"] = zone_map(fs.d_full_local);
    done["half_formed"] = pair_map(fs.c_half, k);
    done["half_first_drop"] = pair_map(fs.d_half, k);
    j["completion_rates"] = done;

    j["idle_surplus_rate"] = zone_map(fs.rho);
    return j;
}

Json plan_to_json(const RebalancePlan& plan, int k) {
    Json j;
    j["flows_per_hr"] = pair_map(plan.flows, k, /*skip_zero=*/true);
    j["in_transit"] = pair_map(plan.n_transit, k, /*skip_zero=*/true);
    j["vehicle_hours"] = quantize(plan.vehicle_hours);
    return j;
}

Json performance_to_json(const PerformanceReport& perf) {
    Json j;
    j["zone_fleet"] = zone_map(perf.zone_fleet);
    j["service_fleet"] = quantize(perf.service_fleet);
    j["rebalance_fleet"] = quantize(perf.rebalance_fleet);
    j["fleet"] = quantize(perf.fleet);
    j["passengers_in_service"] = quantize(perf.passengers_in_service);
    j["demand_per_hr"] = quantize(perf.demand);
    j["agency_cost_per_hr"] = quantize(perf.agency_cost_rate);
    j["rider_cost_per_hr"] = quantize(perf.rider_cost_rate);
    j["system_cost_per_hr"] = quantize(perf.system_cost_rate);
    j["cost_per_trip"] = quantize(perf.cost_per_trip);
    j["door_to_door_hours"] = quantize(perf.door_to_door_hours);
    return j;
}

Json sim_metrics_to_json(const SimMetrics& m) {
    Json j;
    j["measured_hours"] = quantize(m.measured_hours);
    j["warmup_hours"] = quantize(m.warmup_hours);
    j["generated"] = m.generated;
    j["served"] = m.served;
    j["queued_at_end"] = m.queued_at_end;
    j["in_service_at_end"] = m.in_service_at_end;
    j["served_per_hour"] = quantize(m.served_per_hour);
    j["mean_door_to_door_hours"] = quantize(m.mean_door_to_door_hours);
    j["mean_wait_hours"] = quantize(m.mean_wait_hours);
    j["mean_pickup_km"] = quantize(m.mean_pickup_km);
    Json occ;
    occ["idle"] = quantize(m.avg_idle);
    occ["to_pickup"] = quantize(m.avg_to_pickup);
    occ["seeker_local"] = quantize(m.avg_seeker_local);
    occ["seeker_remote"] = quantize(m.avg_seeker_remote);
    occ["pair"] = quantize(m.avg_pair);
    occ["rebalancing"] = quantize(m.avg_rebalancing);
    occ["busy"] = quantize(m.avg_busy);
    j["avg_vehicles"] = occ;
    j["avg_passengers_in_service"] = quantize(m.avg_passengers_in_service);
    j["avg_queue"] = quantize(m.avg_queue);
    j["max_queue"] = m.max_queue;
    j["avg_zone_idle"] = zone_map(m.avg_zone_idle);
    j["avg_zone_queue"] = zone_map(m.avg_zone_queue);
    Json shares;
    shares["from_idle"] = quantize(m.share_from_idle);
    shares["from_seeker_local"] = quantize(m.share_from_seeker_local);
    shares["from_seeker_remote"] = quantize(m.share_from_seeker_remote);
    j["match_shares"] = shares;
    Json cases;
    cases["local_pair_local"] = m.matches_case1;
    cases["remote_pair_remote"] = m.matches_case2;
    cases["local_pair_remote"] = m.matches_case3;
    cases["remote_pair_local"] = m.matches_case4;
    cases["from_idle"] = m.matches_from_idle;
    j["match_counts"] = cases;
    j["rebalance_dispatches"] = m.rebalance_dispatches;
    j["rebalance_deferred"] = m.rebalance_skipped;
    j["zero_detour_violations"] = m.zero_detour_violations;
    j["starvation"] = m.starvation;
    Json od = Json::object();
    int k = static_cast<int>(m.avg_zone_idle.size());
    if (k > 0 && m.od_completed.size() == static_cast<size_t>(k) * k) {
        for (ZoneId i = 1; i <= k; ++i)
            for (ZoneId jd = 1; jd <= k; ++jd) {
                size_t p = static_cast<size_t>(i - 1) * k + (jd - 1);
                if (m.od_completed[p] == 0) continue;
                Json cell;
                cell["trips"] = m.od_completed[p];
                cell["mean_door_to_door_hours"] = quantize(m.od_mean_door_to_door[p]);
                od[pair_key(i, jd)] = cell;
            }
    }
    j["by_od"] = od;
    return j;
}

namespace {

Json report_head(const Scenario& sc) {
    Json j;
    Json tool;
    tool["name"] = "ridesim";
    tool["version"] = "1.0.0";
    tool["report_format"] = 1;
    j["tool"] = tool;
    j["scenario"] = scenario_to_json(sc);
    return j;
}

}  // namespace

Json evaluate_report(const Scenario& sc, const DesignVars& dv, const EvaluateResult& ev) {
    Json j = report_head(sc);
    j["design"] = design_to_json(sc.grid, dv);
    j["status"] = to_string(ev.status);
    j["newton_iterations"] = ev.newton_iterations;
    if (ev.status == SolveStatus::Ok) {
        j["flows"] = flows_to_json(sc.grid, dv, ev.flows);
        j["rebalance"] = plan_to_json(ev.plan, sc.zone_count());
        j["performance"] = performance_to_json(ev.perf);
    } else if (ev.status == SolveStatus::Unservable) {
        Json u;
        u["origin"] = ev.unservable.origin;
        u["dest"] = ev.unservable.dest;
        j["unservable"] = u;
    }
    return j;
}

Json optimize_report(const Scenario& sc, const OptimResult& res) {
    Json j = report_head(sc);
    j["design"] = design_to_json(sc.grid, res.design);
    j["status"] = res.feasible ? "ok" : "infeasible";
    j["cost_per_trip"] = quantize(res.cost_per_trip);
    if (res.feasible) {
        j["flows"] = flows_to_json(sc.grid, res.design, res.flows);
        j["rebalance"] = plan_to_json(res.plan, sc.zone_count());
        j["performance"] = performance_to_json(res.perf);
    }
    Json trace = Json::array();
    for (double v : res.trace) trace.push_back(quantize(v));
    j["trace"] = trace;
    Json starts = Json::array();
    for (const StartSummary& s : res.starts) {
        Json e;
        e["start"] = s.start;
        e["best_cost"] = quantize(s.best_cost);
        e["iterations"] = s.iterations;
        e["evaluations"] = s.evaluations;
        starts.push_back(e);
    }
    j["starts"] = starts;
    j["evaluations"] = res.evaluations;
    return j;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

Json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return j;
}

}  // namespace ridesim
