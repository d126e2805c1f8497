#include "ridesim/states.hpp"

#include <stdexcept>

namespace ridesim {

StateKind VehicleState::kind() const {
    if (s1 != 0 && s1 != zone) return StateKind::Rebalancing;
    if (s1 == zone) {
        if (s2 == 0) return StateKind::AssignedEmpty;
        return s2 == zone ? StateKind::AssignedSeekerLocal : StateKind::AssignedSeekerRemote;
    }
    if (s2 == 0) return StateKind::Idle;
    if (s3 == 0) return s2 == zone ? StateKind::SeekerLocal : StateKind::SeekerRemote;
    if (s2 == zone) return s3 == zone ? StateKind::FullBothLocal : StateKind::FullLocalRemote;
    return StateKind::FullBothRemote;
}

std::string VehicleState::name() const {
    return std::to_string(zone) + ":" + std::to_string(s1) + ":" + std::to_string(s2) + ":" +
           std::to_string(s3);
}

VehicleState VehicleState::parse(const std::string& text) {
    VehicleState s;
    ZoneId* fields[4] = {&s.zone, &s.s1, &s.s2, &s.s3};
    size_t pos = 0;
    for (int f = 0; f < 4; ++f) {
        size_t next = text.find(':', pos);
        if ((f < 3) != (next != std::string::npos))
            throw std::invalid_argument("state name needs 4 ':'-separated fields: " + text);
        std::string part = text.substr(pos, next == std::string::npos ? next : next - pos);
        *fields[f] = std::stoi(part);
        pos = next + 1;
    }
    return s;
}

StateSpace::StateSpace(const ZoneGrid& grid) {
    auto push = [&](ZoneId z, ZoneId a, ZoneId b, ZoneId c) {
        states_.push_back({z, a, b, c});
    };
    for (ZoneId i : grid.zones()) {
        std::vector<ZoneId> others;
        for (ZoneId j : grid.zones())
            if (j != i) others.push_back(j);

        push(i, 0, 0, 0);
        push(i, i, 0, 0);
        push(i, 0, i, 0);
        for (ZoneId j : others) push(i, 0, j, 0);
        push(i, i, i, 0);
        for (ZoneId j : others) push(i, i, j, 0);
        push(i, 0, i, i);
        for (ZoneId j : others) push(i, 0, i, j);
        for (ZoneId j : others)
            for (ZoneId k : grid.farther_shareable_dests(i, j)) push(i, 0, j, k);
        for (ZoneId j : others) push(i, j, 0, 0);
    }
    index_.reserve(states_.size() * 2);
    for (int idx = 0; idx < size(); ++idx) index_[key(states_[idx])] = idx;
}

uint64_t StateSpace::key(const VehicleState& s) {
    return (static_cast<uint64_t>(static_cast<uint16_t>(s.zone)) << 48) |
           (static_cast<uint64_t>(static_cast<uint16_t>(s.s1)) << 32) |
           (static_cast<uint64_t>(static_cast<uint16_t>(s.s2)) << 16) |
           static_cast<uint64_t>(static_cast<uint16_t>(s.s3));
}

int StateSpace::index(const VehicleState& s) const {
    auto it = index_.find(key(s));
    return it == index_.end() ? -1 : it->second;
}

}  // namespace ridesim
