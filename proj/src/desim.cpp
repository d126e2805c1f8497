#include "ridesim/desim.hpp"

#include "ridesim/mc.hpp"
#include "ridesim/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <queue>
#include <stdexcept>
#include <thread>
#include <vector>

namespace ridesim {

namespace {

struct P2 {
    double x = 0, y = 0;
};

double l1(P2 a, P2 b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

// Southwest corner of a zone's cell in km; the cell spans phi in each axis.
P2 cell_origin(const ZoneGrid& g, double phi, ZoneId z) {
    return {g.col_of(z) * phi, g.row_of(z) * phi};
}

enum class Family : int { Idle = 0, ToPickup, SeekerLocal, SeekerRemote, Pair, Rebalance };
constexpr int kFamilies = 6;

const char* family_name(Family f) {
    switch (f) {
        case Family::Idle: return "idle";
        case Family::ToPickup: return "pickup";
        case Family::SeekerLocal: return "seeker_local";
        case Family::SeekerRemote: return "seeker_remote";
        case Family::Pair: return "pair";
        case Family::Rebalance: return "rebalance";
    }
    return "?";
}

struct Pax {
    double request_time = 0;
    P2 o, d;
    ZoneId ozone = 0, dzone = 0;
    int next_free = -1;  // pool free list
};

enum class Task : int { Idle, ToPickup, Deliver, Rebalance };

struct Veh {
    // current leg, x-then-y from `from` starting at time t0
    P2 from, to;
    double t0 = 0;
    int serial = 0;  // stale leg-end events carry an older serial
    ZoneId zone = 0;
    Task task = Task::Idle;
    ZoneId border_next = 0;  // set when the leg ends on a zone border
    int onboard[2] = {-1, -1};  // pax pool ids; [0] is the active drop-off
    int assigned = -1;
    int reg = -1, reg_pos = -1;  // registry membership (zone*3+kind), position
};

P2 position(const Veh& v, double t, double speed) {
    double run = std::max(0.0, t - v.t0) * speed;
    double dx = v.to.x - v.from.x;
    double adx = std::abs(dx);
    if (run <= adx) return {v.from.x + (dx < 0 ? -run : run), v.from.y};
    run -= adx;
    double dy = v.to.y - v.from.y;
    double ady = std::abs(dy);
    if (run > ady) return v.to;
    return {v.to.x, v.from.y + (dy < 0 ? -run : run)};
}

struct Event {
    double t = 0;
    long long seq = 0;
    int kind = 0;  // 0 caller arrival, 1 vehicle leg end, 2 rebalance tick
    int a = 0;     // vehicle id or rebalance pair index
    int serial = 0;
};
struct EventAfter {
    bool operator()(const Event& l, const Event& r) const {
        if (l.t != r.t) return l.t > r.t;
        return l.seq > r.seq;
    }
};

class Sim {
  public:
    Sim(const Scenario& sc, const SimConfig& cfg) : sc_(sc), cfg_(cfg), rng_(cfg.seed) {
        k_ = sc.zone_count();
        validate();
        od_door_sum_.assign(static_cast<size_t>(k_) * k_, 0.0);
        od_done_.assign(static_cast<size_t>(k_) * k_, 0);
        queue_.assign(static_cast<size_t>(k_), {});
        owed_.assign(static_cast<size_t>(k_), {});
        zone_idle_hours_.assign(static_cast<size_t>(k_), 0.0);
        zone_queue_hours_.assign(static_cast<size_t>(k_), 0.0);
        if (!cfg_.event_log_path.empty()) {
            log_.open(cfg_.event_log_path);
            if (!log_) throw std::runtime_error("sim: cannot open event log file");
            log_ << "time,event,vehicle,state_before,state_after,zone\n";
        }
        build_demand_table();
        place_fleet();
        schedule_arrival();
        schedule_rebalance_ticks();
    }

    SimMetrics run() {
        while (!events_.empty() && events_.top().t <= cfg_.horizon_hours) {
            Event ev = events_.top();
            events_.pop();
            advance(ev.t);
            switch (ev.kind) {
                case 0: on_arrival(ev.t); break;
                case 1:
                    if (veh_[ev.a].serial == ev.serial) on_leg_end(ev.t, ev.a);
                    break;
                case 2: on_rebalance_tick(ev.t, ev.a); break;
            }
        }
        advance(cfg_.horizon_hours);
        return finish();
    }

  private:
    // ---- setup ----------------------------------------------------------

    void validate() {
        if (cfg_.fleet < 1) throw std::invalid_argument("sim: fleet must be at least 1");
        if (!(cfg_.horizon_hours > 0))
            throw std::invalid_argument("sim: horizon must be positive");
        warmup_ = cfg_.warmup_hours;
        if (warmup_ < 0) {
            double mean_trip = 0;
            for (ZoneId i = 1; i <= k_; ++i)
                for (ZoneId j = 1; j <= k_; ++j)
                    mean_trip += sc_.lambda(i, j) * (sc_.zone_distance(i, j) + sc_.phi);
            double total = sc_.total_demand();
            mean_trip = total > 0 ? mean_trip / total / sc_.speed : sc_.phi / sc_.speed;
            warmup_ = std::min(10.0 * mean_trip, cfg_.horizon_hours / 5.0);
        }
        if (warmup_ >= cfg_.horizon_hours)
            throw std::invalid_argument("sim: warmup must end before the horizon");
        DesignVars dv = cfg_.design;
        validate_design(sc_.grid, dv);
        design_ = dv;
        if (!cfg_.rebalance_flows.empty() &&
            cfg_.rebalance_flows.size() != static_cast<size_t>(k_) * k_)
            throw std::invalid_argument("sim: rebalance_flows must be K*K");
        queue_alarm_ = cfg_.queue_alarm > 0
                           ? cfg_.queue_alarm
                           : std::max(25.0, 0.01 * sc_.total_demand());
    }

    void build_demand_table() {
        total_rate_ = sc_.total_demand();
        if (total_rate_ <= 0) return;
        cum_.reserve(static_cast<size_t>(k_) * k_);
        double acc = 0;
        for (ZoneId i = 1; i <= k_; ++i)
            for (ZoneId j = 1; j <= k_; ++j) {
                acc += sc_.lambda(i, j);
                cum_.push_back(acc);
            }
    }

    // Default start: each zone's pool must carry its outbound engagement
    // (origin demand times trip duration) through the ramp-up, plus the
    // design's standing idle target; repositioning only corrects the
    // steady-state net, not an initial shortfall.
    std::vector<double> placement_weights() const {
        std::vector<double> w(static_cast<size_t>(k_));
        for (ZoneId i = 1; i <= k_; ++i) {
            double engaged = 0;
            for (ZoneId j = 1; j <= k_; ++j)
                engaged += sc_.lambda(i, j) * (sc_.zone_distance(i, j) + sc_.phi) / sc_.speed;
            w[static_cast<size_t>(i - 1)] = engaged + design_.n_idle[static_cast<size_t>(i - 1)];
        }
        return w;
    }

    void place_fleet() {
        std::vector<int> per_zone = cfg_.initial_vehicles;
        if (per_zone.empty()) {
            per_zone = proportional_placement(placement_weights(), cfg_.fleet);
        } else {
            if (per_zone.size() != static_cast<size_t>(k_))
                throw std::invalid_argument("sim: initial_vehicles needs one entry per zone");
            long long sum = 0;
            for (int c : per_zone) {
                if (c < 0) throw std::invalid_argument("sim: initial_vehicles must be >= 0");
                sum += c;
            }
            if (sum != cfg_.fleet)
                throw std::invalid_argument("sim: initial_vehicles must sum to the fleet size");
        }
        veh_.resize(static_cast<size_t>(cfg_.fleet));
        regs_.assign(static_cast<size_t>(k_) * 3, {});
        int id = 0;
        for (ZoneId z = 1; z <= k_; ++z)
            for (int c = 0; c < per_zone[static_cast<size_t>(z - 1)]; ++c, ++id) {
                Veh& v = veh_[static_cast<size_t>(id)];
                v.from = v.to = point_in_zone(z);
                v.zone = z;
                v.task = Task::Idle;
                enroll(id);
                count_[static_cast<int>(Family::Idle)]++;
            }
    }

    void schedule_arrival() {
        if (total_rate_ <= 0) return;
        push_event(clock_ + rng_.exponential(total_rate_), 0, 0, 0);
    }

    void schedule_rebalance_ticks() {
        for (size_t p = 0; p < cfg_.rebalance_flows.size(); ++p)
            if (cfg_.rebalance_flows[p] > 1e-12)
                push_event(rng_.exponential(cfg_.rebalance_flows[p]), 2, static_cast<int>(p), 0);
    }

    // ---- bookkeeping -----------------------------------------------------

    void push_event(double t, int kind, int a, int serial) {
        events_.push({t, seq_++, kind, a, serial});
    }

    P2 point_in_zone(ZoneId z) {
        P2 c = cell_origin(sc_.grid, sc_.phi, z);
        return {c.x + rng_.uniform() * sc_.phi, c.y + rng_.uniform() * sc_.phi};
    }

    Family family_of(const Veh& v) const {
        switch (v.task) {
            case Task::Idle: return Family::Idle;
            case Task::ToPickup: return Family::ToPickup;
            case Task::Rebalance: return Family::Rebalance;
            case Task::Deliver:
                if (v.onboard[1] >= 0) return Family::Pair;
                return pax_[static_cast<size_t>(v.onboard[0])].dzone == v.zone
                           ? Family::SeekerLocal
                           : Family::SeekerRemote;
        }
        return Family::Idle;
    }

    // registry kind per matchable class; -1 when not matchable
    int reg_kind(const Veh& v) const {
        Family f = family_of(v);
        if (f == Family::Idle) return 0;
        if (f == Family::SeekerLocal) return 1;
        if (f == Family::SeekerRemote) return 2;
        return -1;
    }

    void enroll(int id) {
        Veh& v = veh_[static_cast<size_t>(id)];
        int kind = reg_kind(v);
        if (kind < 0) return;
        auto& r = regs_[static_cast<size_t>(v.zone - 1) * 3 + kind];
        v.reg = (v.zone - 1) * 3 + kind;
        v.reg_pos = static_cast<int>(r.size());
        r.push_back(id);
    }

    void withdraw(int id) {
        Veh& v = veh_[static_cast<size_t>(id)];
        if (v.reg < 0) return;
        auto& r = regs_[static_cast<size_t>(v.reg)];
        int last = r.back();
        r[static_cast<size_t>(v.reg_pos)] = last;
        veh_[static_cast<size_t>(last)].reg_pos = v.reg_pos;
        r.pop_back();
        v.reg = v.reg_pos = -1;
    }

    // integrate occupancies up to t (clipped to the measurement window)
    void advance(double t) {
        double a = std::max(clock_, warmup_);
        double b = std::min(t, cfg_.horizon_hours);
        if (b > a) {
            double dt = b - a;
            for (int f = 0; f < kFamilies; ++f)
                occupancy_[f] += dt * count_[f];
            pax_hours_ += dt * pax_in_service_;
            queue_hours_ += dt * static_cast<double>(queue_len_);
            for (int z = 0; z < k_; ++z) {
                zone_idle_hours_[static_cast<size_t>(z)] +=
                    dt * static_cast<double>(regs_[static_cast<size_t>(z) * 3].size());
                zone_queue_hours_[static_cast<size_t>(z)] +=
                    dt * static_cast<double>(queue_[static_cast<size_t>(z)].size());
            }
        }
        clock_ = t;
    }

    void set_task(int id, Task task, Family before, double t) {
        Veh& v = veh_[static_cast<size_t>(id)];
        v.task = task;
        Family after = family_of(v);
        if (after != before) {
            count_[static_cast<int>(before)]--;
            count_[static_cast<int>(after)]++;
        }
        (void)t;
    }

    void log_event(double t, const char* what, int veh, Family before, Family after, ZoneId z) {
        if (!log_) return;
        log_ << t << ',' << what << ',' << veh << ',' << family_name(before) << ','
             << family_name(after) << ',' << z << '\n';
    }

    int alloc_pax() {
        if (free_pax_ >= 0) {
            int id = free_pax_;
            free_pax_ = pax_[static_cast<size_t>(id)].next_free;
            return id;
        }
        pax_.push_back({});
        return static_cast<int>(pax_.size()) - 1;
    }

    void release_pax(int id) {
        pax_[static_cast<size_t>(id)].next_free = free_pax_;
        free_pax_ = id;
    }

    // ---- movement --------------------------------------------------------

    void start_leg(int id, double t, P2 to, ZoneId border_next) {
        Veh& v = veh_[static_cast<size_t>(id)];
        v.from = position(v, t, sc_.speed);
        v.to = to;
        v.t0 = t;
        v.border_next = border_next;
        v.serial++;
        double dur = l1(v.from, v.to) / sc_.speed;
        push_event(t + dur, 1, id, v.serial);
    }

    // Crossing point on the edge toward the sampled next zone, following the
    // x-then-y path inside the current cell toward final target d.
    P2 crossing_point(const Veh& v, P2 at, P2 d, ZoneId next) const {
        P2 c = cell_origin(sc_.grid, sc_.phi, v.zone);
        double x0 = c.x, x1 = c.x + sc_.phi, y0 = c.y, y1 = c.y + sc_.phi;
        switch (sc_.grid.direction_of(v.zone, next)) {
            case Dir::E: return {x1, at.y};
            case Dir::W: return {x0, at.y};
            case Dir::N: return {std::clamp(d.x, x0, x1), y1};
            case Dir::S: return {std::clamp(d.x, x0, x1), y0};
            default: throw std::logic_error("sim: next zone is not adjacent");
        }
    }

    // Plan the next leg of a delivering vehicle from its current position.
    void plan_delivery(int id, double t) {
        Veh& v = veh_[static_cast<size_t>(id)];
        const Pax& p = pax_[static_cast<size_t>(v.onboard[0])];
        P2 at = position(v, t, sc_.speed);
        if (p.dzone == v.zone) {
            start_leg(id, t, p.d, 0);
            return;
        }
        const auto& via = sc_.grid.feasible_next_zones(v.zone, p.dzone);
        ZoneId next = via[0];
        if (via.size() == 2 &&
            rng_.uniform() >= design_.delta_at(v.zone, p.dzone, 0, k_))
            next = via[1];
        start_leg(id, t, crossing_point(v, at, p.d, next), next);
    }

    // Order the two onboard passengers so [0] is the closer drop-off.
    void order_onboard(int id, P2 from) {
        Veh& v = veh_[static_cast<size_t>(id)];
        if (v.onboard[1] < 0) return;
        const Pax& a = pax_[static_cast<size_t>(v.onboard[0])];
        const Pax& b = pax_[static_cast<size_t>(v.onboard[1])];
        int sa = sc_.grid.l1_steps(v.zone, a.dzone);
        int sb = sc_.grid.l1_steps(v.zone, b.dzone);
        bool swap = sb < sa || (sb == sa && l1(from, b.d) < l1(from, a.d));
        if (swap) std::swap(v.onboard[0], v.onboard[1]);
    }

    // ---- matching --------------------------------------------------------

    static Dir quadrant_of(P2 o, P2 d) {
        if (d.x >= o.x) return d.y >= o.y ? Dir::NE : Dir::SE;
        return d.y >= o.y ? Dir::NW : Dir::SW;
    }

    bool seeker_local_suits(const Veh& v, const Pax& caller) const {
        const Pax& s = pax_[static_cast<size_t>(v.onboard[0])];
        if (caller.dzone == caller.ozone)  // in-zone caller: zero-detour nesting
            return mc::zero_detour_absorb(caller.o.x, caller.o.y, caller.d.x, caller.d.y,
                                          s.d.x, s.d.y);
        // outbound caller: drop-off must lie on the caller's departing side
        auto [dc, dr] = dir_step(sc_.grid.direction_of(caller.ozone, caller.dzone));
        if (dc > 0 && s.d.x <= caller.o.x) return false;
        if (dc < 0 && s.d.x >= caller.o.x) return false;
        if (dr > 0 && s.d.y <= caller.o.y) return false;
        if (dr < 0 && s.d.y >= caller.o.y) return false;
        return true;
    }

    bool seeker_remote_suits(const Veh& v, const Pax& caller) const {
        ZoneId sd = pax_[static_cast<size_t>(v.onboard[0])].dzone;
        if (caller.dzone == caller.ozone) {
            Dir r = quadrant_of(caller.o, caller.d);
            const auto& ok = sc_.grid.intra_shareable_dests(caller.ozone, r);
            return std::find(ok.begin(), ok.end(), sd) != ok.end();
        }
        return sc_.grid.shareable(caller.ozone, caller.dzone, sd);
    }

    // Nearest suitable vehicle for the caller, or -1. Ties go to the lower id.
    int find_vehicle(const Pax& caller, double t) {
        int best = -1;
        double best_d = 0;
        auto consider = [&](int id) {
            double d = l1(position(veh_[static_cast<size_t>(id)], t, sc_.speed), caller.o);
            if (best < 0 || d < best_d - 1e-12 ||
                (std::abs(d - best_d) <= 1e-12 && id < best)) {
                best = id;
                best_d = d;
            }
        };
        size_t base = static_cast<size_t>(caller.ozone - 1) * 3;
        for (int id : regs_[base + 0]) consider(id);
        for (int id : regs_[base + 1])
            if (seeker_local_suits(veh_[static_cast<size_t>(id)], caller)) consider(id);
        for (int id : regs_[base + 2])
            if (seeker_remote_suits(veh_[static_cast<size_t>(id)], caller)) consider(id);
        return best;
    }

    bool try_assign(int pax_id, double t) {
        Pax& caller = pax_[static_cast<size_t>(pax_id)];
        int id = find_vehicle(caller, t);
        if (id < 0) return false;
        Veh& v = veh_[static_cast<size_t>(id)];
        Family before = family_of(v);
        if (t >= warmup_) {
            ++assignments_measured_;
            pickup_km_sum_ += l1(position(v, t, sc_.speed), caller.o);
            switch (before) {
                case Family::Idle: ++matches_idle_; break;
                case Family::SeekerLocal:
                    ++(caller.dzone == caller.ozone ? matches_case1_ : matches_case4_);
                    break;
                case Family::SeekerRemote:
                    ++(caller.dzone == caller.ozone ? matches_case3_ : matches_case2_);
                    break;
                default: break;
            }
        }
        withdraw(id);
        v.assigned = pax_id;
        set_task(id, Task::ToPickup, before, t);
        start_leg(id, t, caller.o, 0);
        ++pax_in_service_;
        log_event(t, "assign", id, before, family_of(v), v.zone);
        return true;
    }

    // Capacity only ever appears in one zone, and matching is zone-local, so
    // only that zone's waiting callers need a retry.
    void serve_queue(double t, ZoneId zone) {
        auto& q = queue_[static_cast<size_t>(zone - 1)];
        for (auto it = q.begin(); it != q.end();)
            if (try_assign(*it, t)) {
                it = q.erase(it);
                --queue_len_;
            } else {
                ++it;
            }
    }

    // ---- event handlers --------------------------------------------------

    void on_arrival(double t) {
        ++generated_;
        int id = alloc_pax();
        Pax& p = pax_[static_cast<size_t>(id)];
        p.request_time = t;
        // OD class by cumulative demand, positions uniform in their zones
        double u = rng_.uniform() * total_rate_;
        size_t cls = static_cast<size_t>(
            std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
        if (cls >= cum_.size()) cls = cum_.size() - 1;
        while (cls > 0 && cum_[cls] == cum_[cls - 1]) --cls;  // skip zero-demand pairs
        p.ozone = static_cast<ZoneId>(cls / k_) + 1;
        p.dzone = static_cast<ZoneId>(cls % k_) + 1;
        p.o = point_in_zone(p.ozone);
        p.d = point_in_zone(p.dzone);
        schedule_arrival();
        if (!try_assign(id, t)) {
            queue_[static_cast<size_t>(p.ozone - 1)].push_back(id);
            ++queue_len_;
            max_queue_ = std::max(max_queue_, queue_len_);
            log_event(t, "queued", -1, Family::Idle, Family::Idle, p.ozone);
        }
    }

    void on_leg_end(double t, int id) {
        Veh& v = veh_[static_cast<size_t>(id)];
        switch (v.task) {
            case Task::ToPickup: on_pickup(t, id); break;
            case Task::Deliver:
                if (v.border_next != 0)
                    on_border(t, id);
                else
                    on_dropoff(t, id);
                break;
            case Task::Rebalance: on_rebalance_arrival(t, id); break;
            case Task::Idle: break;  // unreachable: idle vehicles have no legs
        }
    }

    void on_pickup(double t, int id) {
        Veh& v = veh_[static_cast<size_t>(id)];
        Family before = family_of(v);
        int pax_id = v.assigned;
        v.assigned = -1;
        Pax& p = pax_[static_cast<size_t>(pax_id)];
        if (p.request_time >= warmup_) {
            ++boarded_measured_;
            wait_sum_ += t - p.request_time;
        }
        v.onboard[v.onboard[0] < 0 ? 0 : 1] = pax_id;
        order_onboard(id, p.o);
        if (v.onboard[1] >= 0) {
            const Pax& a = pax_[static_cast<size_t>(v.onboard[0])];
            const Pax& b = pax_[static_cast<size_t>(v.onboard[1])];
            if (a.dzone == v.zone && b.dzone == v.zone) {
                // in-zone pairing must add no distance for the through rider
                double detour = l1(p.o, a.d) + l1(a.d, b.d) - l1(p.o, b.d);
                if (std::abs(detour) > 1e-9 * sc_.phi) ++detour_violations_;
                assert(std::abs(detour) <= 1e-9 * sc_.phi);
            }
        }
        set_task(id, Task::Deliver, before, t);
        plan_delivery(id, t);
        enroll(id);
        log_event(t, "board", id, before, family_of(v), v.zone);
        serve_queue(t, v.zone);  // a single-occupancy vehicle may now be matchable
    }

    void on_border(double t, int id) {
        Veh& v = veh_[static_cast<size_t>(id)];
        Family before = family_of(v);
        withdraw(id);
        v.zone = v.border_next;
        v.border_next = 0;
        Family after = family_of(v);  // remote seeker may become local
        if (after != before) {
            count_[static_cast<int>(before)]--;
            count_[static_cast<int>(after)]++;
        }
        plan_delivery(id, t);
        enroll(id);
        log_event(t, "cross", id, before, after, v.zone);
        serve_queue(t, v.zone);
    }

    void on_dropoff(double t, int id) {
        Veh& v = veh_[static_cast<size_t>(id)];
        Family before = family_of(v);
        withdraw(id);
        int pax_id = v.onboard[0];
        v.onboard[0] = v.onboard[1];
        v.onboard[1] = -1;
        Pax& p = pax_[static_cast<size_t>(pax_id)];
        ++served_;
        --pax_in_service_;
        if (p.request_time >= warmup_) {
            ++served_measured_;
            door_sum_ += t - p.request_time;
            size_t od = static_cast<size_t>(p.ozone - 1) * k_ + (p.dzone - 1);
            od_door_sum_[od] += t - p.request_time;
            od_done_[od]++;
        }
        release_pax(pax_id);
        if (v.onboard[0] >= 0) {
            set_task(id, Task::Deliver, before, t);
            plan_delivery(id, t);
            enroll(id);
            log_event(t, "drop", id, before, family_of(v), v.zone);
            serve_queue(t, v.zone);
        } else {
            set_task(id, Task::Idle, before, t);
            v.from = v.to = position(v, t, sc_.speed);
            v.t0 = t;
            v.serial++;  // cancel any stray leg event
            log_event(t, "drop", id, before, family_of(v), v.zone);
            settle_idle(id, t);
        }
    }

    void dispatch_rebalance(int id, ZoneId to, double t) {
        Veh& v = veh_[static_cast<size_t>(id)];
        Family before = family_of(v);
        withdraw(id);
        set_task(id, Task::Rebalance, before, t);
        v.zone = to;  // en route; zone only matters again on arrival
        start_leg(id, t, point_in_zone(to), 0);
        ++dispatches_;
        log_event(t, "rebalance", id, before, Family::Rebalance, to);
    }

    void on_rebalance_tick(double t, int pair) {
        double rate = cfg_.rebalance_flows[static_cast<size_t>(pair)];
        push_event(t + rng_.exponential(rate), 2, pair, 0);
        ZoneId from = static_cast<ZoneId>(pair / k_) + 1;
        ZoneId to = static_cast<ZoneId>(pair % k_) + 1;
        auto& idle = regs_[static_cast<size_t>(from - 1) * 3];
        if (idle.empty()) {
            // Dispatch as soon as a vehicle goes idle here, so the realized
            // flow keeps the rate the repositioning plan relies on.
            owed_[static_cast<size_t>(from - 1)].push_back(to);
            ++skipped_;
            return;
        }
        dispatch_rebalance(idle[static_cast<size_t>(rng_.below(idle.size()))], to, t);
    }

    // A vehicle just turned idle in its zone: overdue repositioning claims it
    // before the local queue may.
    void settle_idle(int id, double t) {
        Veh& v = veh_[static_cast<size_t>(id)];
        auto& owed = owed_[static_cast<size_t>(v.zone - 1)];
        if (!owed.empty()) {
            ZoneId to = owed.front();
            owed.erase(owed.begin());
            dispatch_rebalance(id, to, t);
            return;
        }
        enroll(id);
        serve_queue(t, v.zone);
    }

    void on_rebalance_arrival(double t, int id) {
        Veh& v = veh_[static_cast<size_t>(id)];
        set_task(id, Task::Idle, Family::Rebalance, t);
        v.from = v.to = position(v, t, sc_.speed);
        v.t0 = t;
        log_event(t, "arrive", id, Family::Rebalance, Family::Idle, v.zone);
        settle_idle(id, t);
    }

    // ---- results ---------------------------------------------------------

    SimMetrics finish() {
        SimMetrics m;
        double hours = cfg_.horizon_hours - warmup_;
        m.measured_hours = hours;
        m.warmup_hours = warmup_;
        m.generated = generated_;
        m.served = served_;
        m.queued_at_end = queue_len_;
        m.in_service_at_end = pax_in_service_;
        m.served_measured = served_measured_;
        m.boarded_measured = boarded_measured_;
        m.assignments_measured = assignments_measured_;
        m.served_per_hour = served_measured_ / hours;
        m.mean_door_to_door_hours = served_measured_ ? door_sum_ / served_measured_ : 0;
        m.mean_wait_hours = boarded_measured_ ? wait_sum_ / boarded_measured_ : 0;
        m.mean_pickup_km = assignments_measured_ ? pickup_km_sum_ / assignments_measured_ : 0;
        m.od_mean_door_to_door.assign(static_cast<size_t>(k_) * k_, 0.0);
        m.od_completed = od_done_;
        for (size_t od = 0; od < od_done_.size(); ++od)
            if (od_done_[od]) m.od_mean_door_to_door[od] = od_door_sum_[od] / od_done_[od];
        m.avg_idle = occupancy_[static_cast<int>(Family::Idle)] / hours;
        m.avg_to_pickup = occupancy_[static_cast<int>(Family::ToPickup)] / hours;
        m.avg_seeker_local = occupancy_[static_cast<int>(Family::SeekerLocal)] / hours;
        m.avg_seeker_remote = occupancy_[static_cast<int>(Family::SeekerRemote)] / hours;
        m.avg_pair = occupancy_[static_cast<int>(Family::Pair)] / hours;
        m.avg_rebalancing = occupancy_[static_cast<int>(Family::Rebalance)] / hours;
        m.avg_busy = m.avg_to_pickup + m.avg_seeker_local + m.avg_seeker_remote + m.avg_pair +
                     m.avg_rebalancing;
        m.avg_passengers_in_service = pax_hours_ / hours;
        m.avg_queue = queue_hours_ / hours;
        m.max_queue = max_queue_;
        m.avg_zone_idle.resize(static_cast<size_t>(k_));
        m.avg_zone_queue.resize(static_cast<size_t>(k_));
        for (int z = 0; z < k_; ++z) {
            m.avg_zone_idle[static_cast<size_t>(z)] = zone_idle_hours_[static_cast<size_t>(z)] / hours;
            m.avg_zone_queue[static_cast<size_t>(z)] = zone_queue_hours_[static_cast<size_t>(z)] / hours;
        }
        m.matches_from_idle = matches_idle_;
        m.matches_case1 = matches_case1_;
        m.matches_case2 = matches_case2_;
        m.matches_case3 = matches_case3_;
        m.matches_case4 = matches_case4_;
        if (assignments_measured_ > 0) {
            double n = static_cast<double>(assignments_measured_);
            m.share_from_idle = matches_idle_ / n;
            m.share_from_seeker_local = (matches_case1_ + matches_case4_) / n;
            m.share_from_seeker_remote = (matches_case2_ + matches_case3_) / n;
        }
        m.rebalance_dispatches = dispatches_;
        m.rebalance_skipped = skipped_;
        m.zero_detour_violations = detour_violations_;
        m.starvation = static_cast<double>(queue_len_) > queue_alarm_;
        return m;
    }

    const Scenario& sc_;
    SimConfig cfg_;
    Rng rng_;
    int k_ = 0;
    DesignVars design_{};
    double warmup_ = 0;
    double queue_alarm_ = 0;
    std::ofstream log_;

    double total_rate_ = 0;
    std::vector<double> cum_;

    std::vector<Veh> veh_;
    std::vector<Pax> pax_;
    int free_pax_ = -1;
    std::vector<std::vector<int>> regs_;      // (zone-1)*3 + {idle, local, remote}
    std::vector<std::vector<int>> queue_;     // per-zone FIFO of waiting pax ids
    long long queue_len_ = 0;                 // total waiting across zones
    std::vector<std::vector<ZoneId>> owed_;   // per-zone overdue repositioning targets

    std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
    long long seq_ = 0;
    double clock_ = 0;

    int count_[kFamilies] = {0, 0, 0, 0, 0, 0};
    double occupancy_[kFamilies] = {0, 0, 0, 0, 0, 0};
    std::vector<double> zone_idle_hours_, zone_queue_hours_;
    long long pax_in_service_ = 0;
    double pax_hours_ = 0, queue_hours_ = 0;
    long long max_queue_ = 0;

    long long generated_ = 0, served_ = 0, served_measured_ = 0;
    long long boarded_measured_ = 0, assignments_measured_ = 0;
    double door_sum_ = 0, wait_sum_ = 0, pickup_km_sum_ = 0;
    std::vector<double> od_door_sum_;
    std::vector<long long> od_done_;
    long long matches_idle_ = 0, matches_case1_ = 0, matches_case2_ = 0, matches_case3_ = 0,
              matches_case4_ = 0;
    long long dispatches_ = 0, skipped_ = 0, detour_violations_ = 0;
};

}  // namespace

std::vector<int> proportional_placement(const std::vector<double>& weights, int fleet) {
    if (weights.empty()) throw std::invalid_argument("placement: no zones");
    double total = 0;
    for (double w : weights) {
        if (w < 0 || !std::isfinite(w))
            throw std::invalid_argument("placement: weights must be finite and >= 0");
        total += w;
    }
    std::vector<int> out(weights.size(), 0);
    std::vector<std::pair<double, size_t>> frac(weights.size());
    int assigned = 0;
    for (size_t z = 0; z < weights.size(); ++z) {
        double share = total > 0 ? weights[z] / total * fleet
                                 : static_cast<double>(fleet) / weights.size();
        out[z] = static_cast<int>(share);
        assigned += out[z];
        frac[z] = {share - out[z], z};
    }
    std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int r = 0; r < fleet - assigned; ++r) out[frac[static_cast<size_t>(r)].second]++;
    return out;
}

SimMetrics run_discrete_event(const Scenario& scenario, const SimConfig& config) {
    Sim sim(scenario, config);
    return sim.run();
}

SimMetrics merge_metrics(const std::vector<SimMetrics>& runs) {
    if (runs.empty()) throw std::invalid_argument("merge: no runs");
    if (runs.size() == 1) return runs.front();
    SimMetrics m;
    m.od_mean_door_to_door.assign(runs.front().od_mean_door_to_door.size(), 0.0);
    m.od_completed.assign(runs.front().od_completed.size(), 0);
    m.avg_zone_idle.assign(runs.front().avg_zone_idle.size(), 0.0);
    m.avg_zone_queue.assign(runs.front().avg_zone_queue.size(), 0.0);
    double hours = 0;
    for (const SimMetrics& r : runs) {
        hours += r.measured_hours;
        m.warmup_hours = r.warmup_hours;
        m.generated += r.generated;
        m.served += r.served;
        m.queued_at_end += r.queued_at_end;
        m.in_service_at_end += r.in_service_at_end;
        m.served_measured += r.served_measured;
        m.boarded_measured += r.boarded_measured;
        m.assignments_measured += r.assignments_measured;
        m.mean_door_to_door_hours += r.mean_door_to_door_hours * r.served_measured;
        m.mean_wait_hours += r.mean_wait_hours * r.boarded_measured;
        m.mean_pickup_km += r.mean_pickup_km * r.assignments_measured;
        for (size_t od = 0; od < m.od_completed.size(); ++od) {
            m.od_mean_door_to_door[od] += r.od_mean_door_to_door[od] * r.od_completed[od];
            m.od_completed[od] += r.od_completed[od];
        }
        m.avg_idle += r.avg_idle * r.measured_hours;
        m.avg_to_pickup += r.avg_to_pickup * r.measured_hours;
        m.avg_seeker_local += r.avg_seeker_local * r.measured_hours;
        m.avg_seeker_remote += r.avg_seeker_remote * r.measured_hours;
        m.avg_pair += r.avg_pair * r.measured_hours;
        m.avg_rebalancing += r.avg_rebalancing * r.measured_hours;
        m.avg_busy += r.avg_busy * r.measured_hours;
        m.avg_passengers_in_service += r.avg_passengers_in_service * r.measured_hours;
        m.avg_queue += r.avg_queue * r.measured_hours;
        for (size_t z = 0; z < m.avg_zone_idle.size(); ++z) {
            m.avg_zone_idle[z] += r.avg_zone_idle[z] * r.measured_hours;
            m.avg_zone_queue[z] += r.avg_zone_queue[z] * r.measured_hours;
        }
        m.max_queue = std::max(m.max_queue, r.max_queue);
        m.matches_from_idle += r.matches_from_idle;
        m.matches_case1 += r.matches_case1;
        m.matches_case2 += r.matches_case2;
        m.matches_case3 += r.matches_case3;
        m.matches_case4 += r.matches_case4;
        m.rebalance_dispatches += r.rebalance_dispatches;
        m.rebalance_skipped += r.rebalance_skipped;
        m.zero_detour_violations += r.zero_detour_violations;
        m.starvation = m.starvation || r.starvation;
    }
    m.measured_hours = hours;
    m.served_per_hour = m.served_measured / hours;
    if (m.served_measured) m.mean_door_to_door_hours /= m.served_measured;
    if (m.boarded_measured) m.mean_wait_hours /= m.boarded_measured;
    if (m.assignments_measured) m.mean_pickup_km /= m.assignments_measured;
    for (size_t od = 0; od < m.od_completed.size(); ++od)
        if (m.od_completed[od]) m.od_mean_door_to_door[od] /= m.od_completed[od];
    for (double* avg : {&m.avg_idle, &m.avg_to_pickup, &m.avg_seeker_local,
                        &m.avg_seeker_remote, &m.avg_pair, &m.avg_rebalancing, &m.avg_busy,
                        &m.avg_passengers_in_service, &m.avg_queue})
        *avg /= hours;
    for (size_t z = 0; z < m.avg_zone_idle.size(); ++z) {
        m.avg_zone_idle[z] /= hours;
        m.avg_zone_queue[z] /= hours;
    }
    if (m.assignments_measured) {
        double n = static_cast<double>(m.assignments_measured);
        m.share_from_idle = m.matches_from_idle / n;
        m.share_from_seeker_local = (m.matches_case1 + m.matches_case4) / n;
        m.share_from_seeker_remote = (m.matches_case2 + m.matches_case3) / n;
    }
    return m;
}

SimMetrics run_replications(const Scenario& scenario, const SimConfig& config,
                            int replications) {
    if (replications < 1) throw std::invalid_argument("sim: replications must be >= 1");
    if (replications == 1) return run_discrete_event(scenario, config);
    std::vector<SimMetrics> out(static_cast<size_t>(replications));
    unsigned workers = std::max(1u, std::min(std::thread::hardware_concurrency(),
                                             static_cast<unsigned>(replications)));
    std::vector<std::thread> pool;
    std::atomic_int next{0};
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int r; (r = next.fetch_add(1)) < replications;) {
                SimConfig rc = config;
                rc.seed = config.seed + 0x9E3779B9ULL * static_cast<unsigned>(r);
                if (r != 0) rc.event_log_path.clear();
                out[static_cast<size_t>(r)] = run_discrete_event(scenario, rc);
            }
        });
    for (auto& th : pool) th.join();
    return merge_metrics(out);
}

}  // namespace ridesim
