#include "cli_app.hpp"

#include "ridesim/desim.hpp"
#include "ridesim/mc.hpp"
#include "ridesim/metrics.hpp"
#include "ridesim/optimize.hpp"
#include "ridesim/report.hpp"
#include "ridesim/scenario.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace ridesim::cli {

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kModel = 2;

int verbosity() {
    const char* env = std::getenv("RIDESHARE_LOG");
    if (!env || !*env) return 0;
    return std::atoi(env);
}

void vlog(int level, const std::string& msg) {
    if (verbosity() >= level) std::fprintf(stderr, "[ridesim] %s\n", msg.c_str());
}

void emit_csv(const std::string& path, const std::vector<std::pair<std::string, double>>& rows) {
    std::ostringstream out;
    out << "metric,value\n";
    for (const auto& [name, value] : rows) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.12g", quantize(value));
        out << name << ',' << buf << '\n';
    }
    write_text_file(path, out.str());
}

std::vector<std::pair<std::string, double>> performance_rows(const PerformanceReport& perf) {
    std::vector<std::pair<std::string, double>> rows;
    for (size_t i = 0; i < perf.zone_fleet.size(); ++i)
        rows.emplace_back("zone_fleet_" + std::to_string(i + 1), perf.zone_fleet[i]);
    rows.emplace_back("service_fleet", perf.service_fleet);
    rows.emplace_back("rebalance_fleet", perf.rebalance_fleet);
    rows.emplace_back("fleet", perf.fleet);
    rows.emplace_back("passengers_in_service", perf.passengers_in_service);
    rows.emplace_back("demand_per_hr", perf.demand);
    rows.emplace_back("agency_cost_per_hr", perf.agency_cost_rate);
    rows.emplace_back("rider_cost_per_hr", perf.rider_cost_rate);
    rows.emplace_back("system_cost_per_hr", perf.system_cost_rate);
    rows.emplace_back("cost_per_trip", perf.cost_per_trip);
    rows.emplace_back("door_to_door_hours", perf.door_to_door_hours);
    return rows;
}

struct EvaluateArgs {
    std::string scenario, design, out, csv;
};

int cmd_evaluate(const EvaluateArgs& a) {
    Scenario sc = load_scenario(a.scenario);
    vlog(1, "scenario " + a.scenario + ": " + std::to_string(sc.zone_count()) + " zones");
    DesignVars dv = load_design(sc.grid, a.design);
    EvaluateResult ev = evaluate_design(sc, dv);
    write_text_file(a.out, dump_json(evaluate_report(sc, dv, ev)));
    if (ev.status != SolveStatus::Ok) {
        std::fprintf(stderr, "[ridesim] evaluation failed: %s", to_string(ev.status));
        if (ev.status == SolveStatus::Unservable)
            std::fprintf(stderr, " (no suitable vehicle class for %d->%d)",
                         ev.unservable.origin, ev.unservable.dest);
        std::fprintf(stderr, "\n");
        return kModel;
    }
    if (!a.csv.empty()) emit_csv(a.csv, performance_rows(ev.perf));
    std::printf("fleet %.2f (service %.2f + rebalance %.2f), cost/trip %.4f, report %s\n",
                ev.perf.fleet, ev.perf.service_fleet, ev.perf.rebalance_fleet,
                ev.perf.cost_per_trip, a.out.c_str());
    return kOk;
}

struct OptimizeArgs {
    std::string scenario, out, csv;
    std::uint64_t seed = 1;
    int starts = 8;
    int max_iters = 250;
};

int cmd_optimize(const OptimizeArgs& a) {
    Scenario sc = load_scenario(a.scenario);
    OptimOptions opts;
    opts.seed = a.seed;
    opts.starts = a.starts;
    opts.max_iterations = a.max_iters;
    vlog(1, "optimizing " + a.scenario + " with " + std::to_string(opts.starts) + " starts");
    OptimResult res = optimize_design(sc, opts);
    write_text_file(a.out, dump_json(optimize_report(sc, res)));
    if (!res.feasible) {
        std::fprintf(stderr, "[ridesim] optimization found no feasible design\n");
        return kModel;
    }
    if (!a.csv.empty()) {
        auto rows = performance_rows(res.perf);
        rows.emplace_back("evaluations", static_cast<double>(res.evaluations));
        emit_csv(a.csv, rows);
    }
    std::printf("best cost/trip %.4f after %lld evaluations, report %s\n", res.cost_per_trip,
                res.evaluations, a.out.c_str());
    return kOk;
}

struct SimulateArgs {
    std::string scenario, design, out, csv, event_log;
    int fleet = 0;  // 0: smallest whole fleet covering the analytic requirement
    double hours = 200, warmup = -1;
    std::uint64_t seed = 1;
    int replications = 1;
    double queue_alarm = 0;
};

int cmd_simulate(const SimulateArgs& a) {
    Scenario sc = load_scenario(a.scenario);
    DesignVars dv = load_design(sc.grid, a.design);
    EvaluateResult ev = evaluate_design(sc, dv);
    if (ev.status != SolveStatus::Ok) {
        std::fprintf(stderr,
                     "[ridesim] cannot derive the repositioning plan: steady state %s\n",
                     to_string(ev.status));
        return kModel;
    }
    SimConfig cfg;
    cfg.design = dv;
    cfg.rebalance_flows = ev.plan.flows;
    cfg.fleet = a.fleet > 0 ? a.fleet : static_cast<int>(std::ceil(ev.perf.fleet));
    cfg.horizon_hours = a.hours;
    cfg.warmup_hours = a.warmup;
    cfg.seed = a.seed;
    cfg.queue_alarm = a.queue_alarm;
    cfg.event_log_path = a.event_log;
    vlog(1, "simulating fleet " + std::to_string(cfg.fleet) + " for " +
                std::to_string(cfg.horizon_hours) + " h x " +
                std::to_string(a.replications) + " replication(s)");
    SimMetrics m = a.replications > 1 ? run_replications(sc, cfg, a.replications)
                                      : run_discrete_event(sc, cfg);
    Json report = evaluate_report(sc, dv, ev);
    Json sim_cfg;
    sim_cfg["fleet"] = cfg.fleet;
    sim_cfg["horizon_hours"] = quantize(cfg.horizon_hours);
    sim_cfg["warmup_hours"] = quantize(m.warmup_hours);
    sim_cfg["seed"] = cfg.seed;
    sim_cfg["replications"] = a.replications;
    report["sim_config"] = sim_cfg;
    report["simulation"] = sim_metrics_to_json(m);
    write_text_file(a.out, dump_json(report));
    if (!a.csv.empty()) {
        std::vector<std::pair<std::string, double>> rows;
        rows.emplace_back("served_per_hour", m.served_per_hour);
        rows.emplace_back("mean_door_to_door_hours", m.mean_door_to_door_hours);
        rows.emplace_back("mean_wait_hours", m.mean_wait_hours);
        rows.emplace_back("mean_pickup_km", m.mean_pickup_km);
        rows.emplace_back("avg_busy_vehicles", m.avg_busy);
        rows.emplace_back("avg_idle_vehicles", m.avg_idle);
        rows.emplace_back("avg_passengers_in_service", m.avg_passengers_in_service);
        rows.emplace_back("share_from_idle", m.share_from_idle);
        rows.emplace_back("share_from_seeker_local", m.share_from_seeker_local);
        rows.emplace_back("share_from_seeker_remote", m.share_from_seeker_remote);
        rows.emplace_back("starvation", m.starvation ? 1.0 : 0.0);
        emit_csv(a.csv, rows);
    }
    std::printf("served %.1f/hr over %.1f h (door-to-door %.4f h, busy %.1f veh)%s, report %s\n",
                m.served_per_hour, m.measured_hours, m.mean_door_to_door_hours, m.avg_busy,
                m.starvation ? " [starvation]" : "", a.out.c_str());
    return kOk;
}

struct OracleArgs {
    long samples = 1000000;
    std::uint64_t seed = 7;
    double tolerance = 0.01;
    bool antithetic = false;
};

int cmd_oracle(const OracleArgs& a) {
    mc::McOptions opt;
    opt.samples = a.samples;
    opt.seed = a.seed;
    opt.antithetic = a.antithetic;
    struct Row {
        std::string name;
        mc::Estimate est;
        double expected;
    };
    std::vector<Row> rows;
    rows.push_back({"local_pair_share", mc::intra_match_share(opt), 2.0 / 9.0});
    rows.push_back({"local_pair_share_far_corner", mc::intra_match_share_far_corner(opt),
                    0.25});
    rows.push_back({"departing_side_share_cardinal", mc::outbound_match_share(Dir::E, opt),
                    0.5});
    rows.push_back({"departing_side_share_diagonal", mc::outbound_match_share(Dir::NE, opt),
                    0.25});
    rows.push_back({"border_to_closer_of_two", mc::border_to_closer_of_two(opt), 5.0 / 8.0});
    rows.push_back({"interior_to_interior", mc::interior_to_interior(opt), 2.0 / 3.0});
    rows.push_back({"border_to_interior", mc::border_to_interior(opt), 5.0 / 6.0});
    mc::PairLegs legs = mc::no_detour_delivery_legs(opt);
    rows.push_back({"paired_delivery_first_leg", legs.first, 0.5});
    rows.push_back({"paired_delivery_second_leg", legs.second, 0.5});
    rows.push_back({"interior_to_border", mc::interior_to_border(opt), 0.5});
    rows.push_back({"through_zone", mc::through_zone(opt), 1.0});
    for (double n : {1.0, 4.0, 16.0}) {
        char name[48];
        std::snprintf(name, sizeof name, "nearest_pickup_n%.0f", n);
        rows.push_back({name, mc::nearest_pickup_distance(n, opt), 0.63 / std::sqrt(n)});
    }
    bool all_pass = true;
    std::printf("%-32s %12s %12s %12s %9s  %s\n", "quantity", "measured", "std_error",
                "expected", "rel_err", "verdict");
    for (const Row& r : rows) {
        double rel = std::fabs(r.est.mean - r.expected) / r.expected;
        bool pass = rel <= a.tolerance;
        all_pass = all_pass && pass;
        std::printf("%-32s %12.6f %12.2e %12.6f %8.3f%%  %s\n", r.name.c_str(), r.est.mean,
                    r.est.std_error, r.expected, rel * 100, pass ? "PASS" : "FAIL");
    }
    std::printf("%s at %.2g%% tolerance, %ld samples\n", all_pass ? "all PASS" : "FAILURES",
                a.tolerance * 100, a.samples);
    return all_pass ? kOk : kModel;
}

struct IngestArgs {
    std::string trips, out;
    int rows = 0, cols = 0;
    double phi = 0;
    std::string window = "0-24";
    int days = 1;
    double speed = 25, value_of_time = 20, vehicle_cost = -1;
};

int cmd_ingest(const IngestArgs& a) {
    double w0 = 0, w1 = 0;
    char dash = 0;
    std::istringstream win(a.window);
    win >> w0 >> dash >> w1;
    if (!win || dash != '-' || w1 <= w0)
        throw std::invalid_argument("window must be \"start-end\" in hours, e.g. 7-9");
    std::ifstream in(a.trips);
    if (!in) throw std::runtime_error("cannot open: " + a.trips);
    long long unparseable = 0;
    std::vector<TripRecord> records = parse_trips_csv(in, &unparseable);
    ZoneGrid grid(a.rows, a.cols);
    IngestResult res;
    try {
        res = ingest_trips(records, grid, a.phi, w0, w1, a.days);
    } catch (const std::runtime_error& e) {
        // every record fell outside the window or the grid
        std::fprintf(stderr, "[ridesim] %s\n", e.what());
        return kModel;
    }
    res.unparseable += unparseable;
    std::printf("records used %lld, outside window %lld, outside grid %lld, unparseable %lld\n",
                res.used, res.dropped_outside_window, res.dropped_outside_grid,
                res.unparseable);
    Scenario sc{grid, a.phi, a.speed, a.value_of_time,
                a.vehicle_cost >= 0 ? a.vehicle_cost : default_vehicle_cost(a.speed),
                res.demand};
    sc.validate();
    Json j = scenario_to_json(sc);
    write_text_file(a.out, dump_json(j));
    std::printf("total demand %.4f trips/hr, scenario %s\n", res.total_rate, a.out.c_str());
    return kOk;
}

struct RebalanceArgs {
    std::string scenario, rho, out;
};

int cmd_rebalance(const RebalanceArgs& a) {
    Scenario sc = load_scenario(a.scenario);
    Json rho_json = load_json(a.rho);
    if (!rho_json.is_array() || static_cast<int>(rho_json.size()) != sc.zone_count())
        throw std::invalid_argument("rho file must be a JSON array with one entry per zone");
    std::vector<double> rho;
    for (const auto& v : rho_json) rho.push_back(v.get<double>());
    RebalancePlan plan = solve_rebalance(sc, rho);
    Json j;
    Json tool;
    tool["name"] = "ridesim";
    tool["version"] = "1.0.0";
    tool["report_format"] = 1;
    j["tool"] = tool;
    Json rj = Json::array();
    for (double v : rho) rj.push_back(quantize(v));
    j["rho"] = rj;
    j["rebalance"] = plan_to_json(plan, sc.zone_count());
    write_text_file(a.out, dump_json(j));
    double total = 0;
    for (double f : plan.flows) total += f;
    std::printf("total flow %.4f veh/hr, %.4f vehicles in transit, plan %s\n", total,
                plan.vehicle_hours, a.out.c_str());
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Planning engine for zone-based ride-sharing: steady-state evaluation, "
                 "design optimization, repositioning plans, sampling checks, and an "
                 "event-driven simulator",
                 "ridesim"};
    app.require_subcommand(1);

    EvaluateArgs ev;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate a design on a scenario");
    evaluate->add_option("--scenario", ev.scenario, "Scenario file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--design", ev.design, "Design file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--out", ev.out, "Report file to write")->required();
    evaluate->add_option("--emit-csv", ev.csv, "Also write key metrics as CSV");

    OptimizeArgs op;
    CLI::App* optimize = app.add_subcommand("optimize", "Search for a minimum-cost design");
    optimize->add_option("--scenario", op.scenario, "Scenario file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    optimize->add_option("--seed", op.seed, "Random seed");
    optimize->add_option("--multistarts", op.starts, "Independent starts")
        ->check(CLI::PositiveNumber);
    optimize->add_option("--max-iters", op.max_iters, "Descent iterations per start")
        ->check(CLI::PositiveNumber);
    optimize->add_option("--out", op.out, "Report file to write")->required();
    optimize->add_option("--emit-csv", op.csv, "Also write key metrics as CSV");

    SimulateArgs sm;
    CLI::App* simulate = app.add_subcommand("simulate", "Event-driven simulation of a design");
    simulate->add_option("--scenario", sm.scenario, "Scenario file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("--design", sm.design, "Design file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("--fleet", sm.fleet,
                         "Vehicles to deploy (default: analytic requirement rounded up)");
    simulate->add_option("--hours", sm.hours, "Simulated horizon")->check(CLI::PositiveNumber);
    simulate->add_option("--warmup", sm.warmup,
                         "Hours excluded from measurement (default: ten mean trip times)");
    simulate->add_option("--seed", sm.seed, "Random seed");
    simulate->add_option("--replications", sm.replications, "Independent replications")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--queue-alarm", sm.queue_alarm,
                         "Waiting-caller count that raises the starvation flag");
    simulate->add_option("--event-log", sm.event_log, "Write a per-event CSV trace here");
    simulate->add_option("--out", sm.out, "Report file to write")->required();
    simulate->add_option("--emit-csv", sm.csv, "Also write key metrics as CSV");

    OracleArgs oa;
    CLI::App* oracle =
        app.add_subcommand("oracle", "Check sampled geometry constants against the model");
    oracle->add_option("--samples", oa.samples, "Samples per quantity")
        ->check(CLI::PositiveNumber);
    oracle->add_option("--seed", oa.seed, "Random seed");
    oracle->add_option("--tolerance", oa.tolerance, "Relative tolerance for PASS")
        ->check(CLI::PositiveNumber);
    oracle->add_flag("--antithetic", oa.antithetic, "Pair samples with mirrored copies");

    IngestArgs ig;
    CLI::App* ingest = app.add_subcommand("ingest", "Build a scenario from a trips CSV");
    ingest->add_option("--trips", ig.trips, "Trips CSV")->required()->check(CLI::ExistingFile);
    ingest->add_option("--rows", ig.rows, "Grid rows")->required()->check(CLI::PositiveNumber);
    ingest->add_option("--cols", ig.cols, "Grid columns")
        ->required()
        ->check(CLI::PositiveNumber);
    ingest->add_option("--phi", ig.phi, "Zone side length, km")
        ->required()
        ->check(CLI::PositiveNumber);
    ingest->add_option("--window", ig.window, "Daily observation window, hours (\"7-9\")");
    ingest->add_option("--days", ig.days, "Observed days")->check(CLI::PositiveNumber);
    ingest->add_option("--speed", ig.speed, "Vehicle speed, km/hr")
        ->check(CLI::PositiveNumber);
    ingest->add_option("--value-of-time", ig.value_of_time, "Rider value of time, $/hr");
    ingest->add_option("--vehicle-cost", ig.vehicle_cost,
                       "Vehicle cost, $/hr (default 40 + 0.48*speed)");
    ingest->add_option("--out", ig.out, "Scenario file to write")->required();

    RebalanceArgs rb;
    CLI::App* rebalance =
        app.add_subcommand("rebalance", "Plan repositioning flows for given zone surpluses");
    rebalance->add_option("--scenario", rb.scenario, "Scenario file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    rebalance->add_option("--rho", rb.rho, "JSON array of per-zone surplus rates, veh/hr")
        ->required()
        ->check(CLI::ExistingFile);
    rebalance->add_option("--out", rb.out, "Plan file to write")->required();

    std::vector<const char*> argv;
    argv.push_back("ridesim");
    for (const std::string& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (evaluate->parsed()) return cmd_evaluate(ev);
        if (optimize->parsed()) return cmd_optimize(op);
        if (simulate->parsed()) return cmd_simulate(sm);
        if (oracle->parsed()) return cmd_oracle(oa);
        if (ingest->parsed()) return cmd_ingest(ig);
        if (rebalance->parsed()) return cmd_rebalance(rb);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "[ridesim] error: %s\n", e.what());
        return kUsage;
    }
    return kUsage;
}

}  // namespace ridesim::cli
