#pragma once

#include "ridesim/desim.hpp"
#include "ridesim/metrics.hpp"
#include "ridesim/optimize.hpp"

#include "json.hpp"

#include <string>

namespace ridesim {

// Reports keep key insertion order so a given input always produces the
// same bytes.
using Json = nlohmann::ordered_json;

// Rounds to 12 significant digits. Every number written into a report goes
// through this, making rerun outputs byte-identical and keeping the files
// readable without losing anything the model resolves.
double quantize(double v);

// Scenario in the same schema load_scenario reads, plus a small digest.
Json scenario_to_json(const Scenario& sc);

// Design file body: n_idle array plus routing splits keyed "i->j:via".
Json design_to_json(const ZoneGrid& grid, const DesignVars& dv);
DesignVars design_from_json(const ZoneGrid& grid, const Json& j);
DesignVars load_design(const ZoneGrid& grid, const std::string& path);

// Steady-state solution with every rate and count; vehicle-count entries are
// keyed by state name ("zone:s1:s2:s3"), per-zone rates by zone id, pair
// rates by "i->j".
Json flows_to_json(const ZoneGrid& grid, const DesignVars& dv, const FlowSolution& fs);

Json plan_to_json(const RebalancePlan& plan, int k);
Json performance_to_json(const PerformanceReport& perf);
Json sim_metrics_to_json(const SimMetrics& m);

// Full report bodies for the CLI commands.
Json evaluate_report(const Scenario& sc, const DesignVars& dv, const EvaluateResult& ev);
Json optimize_report(const Scenario& sc, const OptimResult& res);

// Stable text form (2-space indent, sorted as inserted, trailing newline).
std::string dump_json(const Json& j);
void write_text_file(const std::string& path, const std::string& text);
Json load_json(const std::string& path);

}  // namespace ridesim
