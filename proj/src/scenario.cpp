#include "ridesim/scenario.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ridesim {

using nlohmann::json;

double Scenario::total_demand() const {
    return std::accumulate(demand.begin(), demand.end(), 0.0);
}

void Scenario::validate() const {
    size_t k = static_cast<size_t>(grid.zone_count());
    if (!(phi > 0)) throw std::invalid_argument("scenario: phi_km must be > 0");
    if (!(speed > 0)) throw std::invalid_argument("scenario: speed_kmh must be > 0");
    if (!(value_of_time >= 0))
        throw std::invalid_argument("scenario: value_of_time must be >= 0");
    if (!(vehicle_cost >= 0)) throw std::invalid_argument("scenario: vehicle_cost must be >= 0");
    if (demand.size() != k * k)
        throw std::invalid_argument("scenario: demand must be a " + std::to_string(k) + "x" +
                                    std::to_string(k) + " matrix");
    for (double v : demand)
        if (!(v >= 0) || !std::isfinite(v))
            throw std::invalid_argument("scenario: demand entries must be finite and >= 0");
    if (!(total_demand() > 0))
        throw std::invalid_argument("scenario: demand must contain at least one positive rate");
}

namespace {

ZoneGrid grid_from_json(const json& g) {
    if (g.contains("zone_ids"))
        return ZoneGrid(g.at("zone_ids").get<std::vector<std::vector<ZoneId>>>());
    if (g.contains("mask")) {
        auto mask = g.at("mask").get<std::vector<std::vector<int>>>();
        // ids in reading order over occupied cells, northern row first
        std::vector<std::vector<ZoneId>> ids(mask.size());
        ZoneId next = 1;
        for (size_t r = 0; r < mask.size(); ++r)
            for (int cell : mask[r]) ids[r].push_back(cell != 0 ? next++ : 0);
        return ZoneGrid(ids);
    }
    return ZoneGrid(g.at("rows").get<int>(), g.at("cols").get<int>());
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
    }
    try {
        Scenario s{grid_from_json(doc.at("grid")),
                   doc.at("phi_km").get<double>(),
                   doc.at("speed_kmh").get<double>(),
                   doc.at("value_of_time").get<double>(),
                   0.0,
                   {}};
        s.vehicle_cost = doc.contains("vehicle_cost") ? doc.at("vehicle_cost").get<double>()
                                                      : default_vehicle_cost(s.speed);
        auto rows = doc.at("demand").get<std::vector<std::vector<double>>>();
        size_t k = static_cast<size_t>(s.grid.zone_count());
        if (rows.size() != k)
            throw std::invalid_argument("scenario: demand must have one row per zone");
        for (const auto& row : rows) {
            if (row.size() != k)
                throw std::invalid_argument("scenario: demand rows must have K entries");
            s.demand.insert(s.demand.end(), row.begin(), row.end());
        }
        double scale = doc.contains("demand_scale") ? doc.at("demand_scale").get<double>() : 1.0;
        if (!(scale >= 1.0))
            throw std::invalid_argument("scenario: demand_scale must be >= 1");
        for (double& v : s.demand) v *= scale;
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scenario: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("scenario: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

Scenario homogeneous_scenario(ZoneGrid grid, double total_rate, double phi, double speed,
                              double value_of_time, double vehicle_cost) {
    if (!(total_rate > 0)) throw std::invalid_argument("homogeneous_scenario: rate must be > 0");
    size_t k = static_cast<size_t>(grid.zone_count());
    Scenario s{std::move(grid), phi,
               speed,           value_of_time,
               vehicle_cost,    std::vector<double>(k * k, total_rate / (double)(k * k))};
    s.validate();
    return s;
}

namespace {

// double parser that rejects trailing junk
bool parse_num(const std::string& text, double& out) {
    try {
        size_t used = 0;
        out = std::stod(text, &used);
        while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
        return used == text.size() && std::isfinite(out);
    } catch (...) {
        return false;
    }
}

// Seconds since midnight from an ISO-8601 timestamp like
// "2019-03-04T07:15:00" (date part and sub-second/zone suffixes tolerated).
bool parse_timestamp(const std::string& text, double& seconds) {
    size_t t = text.find_first_of("T ");
    std::string clock = t == std::string::npos ? text : text.substr(t + 1);
    int h = 0, m = 0;
    double sec = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(clock);
    in >> h >> c1 >> m;
    if (!in || c1 != ':' || h < 0 || h > 23 || m < 0 || m > 59) return false;
    if (in.peek() == ':') {
        in >> c2 >> sec;
        if (!in || sec < 0 || sec >= 60) return false;
    }
    seconds = h * 3600.0 + m * 60.0 + sec;
    return true;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    for (auto& f : out) {
        size_t a = f.find_first_not_of(" \t");
        size_t b = f.find_last_not_of(" \t");
        f = a == std::string::npos ? "" : f.substr(a, b - a + 1);
    }
    return out;
}

}  // namespace

std::vector<TripRecord> parse_trips_csv(std::istream& in, long long* unparseable) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("trips: empty file");
    auto header = split_csv_line(line);
    auto col = [&](const std::string& name) -> int {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };
    int c_pz = col("pickup_zone"), c_dz = col("dropoff_zone");
    int c_px = col("pickup_x"), c_py = col("pickup_y");
    int c_dx = col("dropoff_x"), c_dy = col("dropoff_y");
    int c_ts = col("timestamp");
    bool zones = c_pz >= 0 && c_dz >= 0;
    bool coords = c_px >= 0 && c_py >= 0 && c_dx >= 0 && c_dy >= 0;
    if (c_ts < 0 || (!zones && !coords))
        throw std::invalid_argument(
            "trips: header must contain timestamp plus pickup_zone/dropoff_zone or "
            "pickup_x,pickup_y,dropoff_x,dropoff_y");

    std::vector<TripRecord> out;
    long long bad = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto f = split_csv_line(line);
        auto field = [&](int c) { return c >= 0 && c < (int)f.size() ? f[c] : std::string(); };
        TripRecord r;
        double num = 0;
        bool ok = parse_timestamp(field(c_ts), r.seconds_of_day);
        if (ok && zones) {
            ok = parse_num(field(c_pz), num) && num == std::floor(num);
            r.pickup_zone = static_cast<ZoneId>(num);
            ok = ok && parse_num(field(c_dz), num) && num == std::floor(num);
            r.dropoff_zone = static_cast<ZoneId>(num);
        } else if (ok) {
            r.by_coordinates = true;
            ok = parse_num(field(c_px), r.px) && parse_num(field(c_py), r.py) &&
                 parse_num(field(c_dx), r.dx) && parse_num(field(c_dy), r.dy);
        }
        if (ok)
            out.push_back(r);
        else
            ++bad;
    }
    if (unparseable) *unparseable = bad;
    return out;
}

IngestResult ingest_trips(const std::vector<TripRecord>& records, const ZoneGrid& grid,
                          double phi, double window_start_hr, double window_end_hr, int days) {
    if (days < 1) throw std::invalid_argument("ingest: days must be >= 1");
    if (!(window_end_hr > window_start_hr))
        throw std::invalid_argument("ingest: window must have positive length");
    int k = grid.zone_count();
    IngestResult res;
    res.demand.assign(static_cast<size_t>(k) * k, 0.0);
    double hours = window_end_hr - window_start_hr;
    for (const auto& r : records) {
        double hr = r.seconds_of_day / 3600.0;
        if (hr < window_start_hr || hr >= window_end_hr) {
            ++res.dropped_outside_window;
            continue;
        }
        ZoneId pz = r.pickup_zone, dz = r.dropoff_zone;
        if (r.by_coordinates) {
            pz = grid.zone_of_point(phi, r.px, r.py);
            dz = grid.zone_of_point(phi, r.dx, r.dy);
        }
        if (pz < 1 || pz > k || dz < 1 || dz > k) {
            ++res.dropped_outside_grid;
            continue;
        }
        res.demand[static_cast<size_t>(pz - 1) * k + (dz - 1)] += 1.0;
        ++res.used;
    }
    if (res.used == 0) throw std::runtime_error("ingest: no usable records");
    for (double& v : res.demand) v /= hours * days;
    res.total_rate = std::accumulate(res.demand.begin(), res.demand.end(), 0.0);
    return res;
}

}  // namespace ridesim
