#pragma once

#include "ridesim/grid.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace ridesim {

// Families of vehicle states. A state is written (zone; s1, s2, s3):
//   s1 — zone of the caller the vehicle is driving to pick up; equal to the
//        current zone for a pickup assignment, a different zone when the
//        vehicle is repositioning there empty, 0 otherwise;
//   s2 — drop-off zone of the onboard passenger that is closer (zone-wise);
//   s3 — drop-off zone of the farther onboard passenger, 0 if fewer than two.
enum class StateKind : int {
    Idle = 0,               // (i;0,0,0)
    AssignedEmpty,          // (i;i,0,0)
    SeekerLocal,            // (i;0,i,0)
    SeekerRemote,           // (i;0,j,0), j != i
    AssignedSeekerLocal,    // (i;i,i,0)
    AssignedSeekerRemote,   // (i;i,j,0), j != i
    FullBothLocal,          // (i;0,i,i)
    FullLocalRemote,        // (i;0,i,j), j != i
    FullBothRemote,         // (i;0,j,k), j != i, k a farther shareable dest
    Rebalancing,            // (i;j,0,0), j != i
};

struct VehicleState {
    ZoneId zone = 0;
    ZoneId s1 = 0;
    ZoneId s2 = 0;
    ZoneId s3 = 0;

    bool operator==(const VehicleState&) const = default;
    StateKind kind() const;
    std::string name() const;                      // "zone:s1:s2:s3"
    static VehicleState parse(const std::string&); // inverse of name()
};

// Enumeration of every reachable state on a grid, in a fixed order:
// zone-major, then StateKind order, then destination ids ascending (pairs
// lexicographic). Index lookups are O(1).
class StateSpace {
  public:
    explicit StateSpace(const ZoneGrid& grid);

    int size() const { return static_cast<int>(states_.size()); }
    const VehicleState& at(int idx) const { return states_[idx]; }
    const std::vector<VehicleState>& states() const { return states_; }

    // Index of a state; -1 if the state is not part of the enumeration.
    int index(const VehicleState& s) const;
    bool valid(const VehicleState& s) const { return index(s) >= 0; }

  private:
    static uint64_t key(const VehicleState& s);
    std::vector<VehicleState> states_;
    std::unordered_map<uint64_t, int> index_;
};

}  // namespace ridesim
