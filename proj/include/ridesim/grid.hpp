#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ridesim {

// Compass directions, counterclockwise from East. Cardinals are even,
// diagonals odd, so opposite(d) == (d+4)%8 and the two flanking directions
// of d are (d+1)%8 and (d+7)%8.
enum class Dir : int { E = 0, NE = 1, N = 2, NW = 3, W = 4, SW = 5, S = 6, SE = 7 };

constexpr std::array<Dir, 8> kAllDirs = {Dir::E,  Dir::NE, Dir::N,  Dir::NW,
                                         Dir::W,  Dir::SW, Dir::S,  Dir::SE};
constexpr std::array<Dir, 4> kCardinalDirs = {Dir::E, Dir::N, Dir::W, Dir::S};
constexpr std::array<Dir, 4> kDiagonalDirs = {Dir::NE, Dir::NW, Dir::SW, Dir::SE};

constexpr bool is_cardinal(Dir d) { return (static_cast<int>(d) & 1) == 0; }
constexpr Dir opposite(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 4) % 8); }

// Position of a diagonal direction within kDiagonalDirs.
constexpr int diag_index(Dir d) { return (static_cast<int>(d) - 1) / 2; }

// The two directions flanking d on the compass rose: cardinals flank a
// diagonal, diagonals flank a cardinal.
constexpr std::array<Dir, 2> flanking(Dir d) {
    int v = static_cast<int>(d);
    return {static_cast<Dir>((v + 7) % 8), static_cast<Dir>((v + 1) % 8)};
}

// Unit step of a direction in (dcol, drow); row grows northward, col eastward.
constexpr std::array<int, 2> dir_step(Dir d) {
    constexpr int dc[8] = {1, 1, 0, -1, -1, -1, 0, 1};
    constexpr int dr[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    return {dc[static_cast<int>(d)], dr[static_cast<int>(d)]};
}

const char* dir_name(Dir d);

using ZoneId = int;              // 1-based; 0 means "no zone"
constexpr ZoneId kNoZone = 0;

// A finite set of unit square zones on an integer lattice. The occupied cells
// must form one 4-connected, hole-free region. Zone ids are a permutation of
// 1..K. All geometry here is in lattice steps; callers scale by the zone side
// length where physical distances are needed.
class ZoneGrid {
  public:
    // Full rows x cols rectangle, ids assigned in reading order:
    // id 1 is the northwest cell, ids increase eastward then southward.
    ZoneGrid(int rows, int cols);

    // Irregular region. id_table is indexed [row][col] with row 0 the
    // NORTHERNMOST row (the order a human writes the map); entries are zone
    // ids or 0 for empty cells. Ids must form a permutation of 1..K.
    explicit ZoneGrid(const std::vector<std::vector<ZoneId>>& id_table);

    int zone_count() const { return static_cast<int>(cells_.size()); }
    int rows() const { return rows_; }
    int cols() const { return cols_; }

    // Internal coordinates: row 0 is the SOUTHERNMOST row, col 0 the
    // westernmost column; row grows northward so compass math is direct.
    int row_of(ZoneId i) const { return cells_[idx(i)][1]; }
    int col_of(ZoneId i) const { return cells_[idx(i)][0]; }
    ZoneId zone_at(int col, int row) const;

    // Adjacent zone one step in direction d, or kNoZone.
    ZoneId adjacent(ZoneId i, Dir d) const { return adj_[idx(i)][static_cast<int>(d)]; }

    // Compass octant of j as seen from i (cardinal if aligned on a row or
    // column, else the diagonal quadrant). Precondition: i != j.
    Dir direction_of(ZoneId i, ZoneId j) const;

    // Destination group: all zones j != i with direction_of(i,j) == d.
    const std::vector<ZoneId>& dest_group(ZoneId i, Dir d) const;

    // Rectilinear zone distance in lattice steps, |drow| + |dcol|.
    int l1_steps(ZoneId i, ZoneId j) const;

    // Zones a vehicle in i bound for j may enter next: the adjacent zone
    // toward j when j is cardinal from i, else the existing members of the
    // two flanking cardinal neighbors. Every member is one step closer to j.
    // Construction guarantees this set is nonempty for every ordered pair.
    const std::vector<ZoneId>& feasible_next_zones(ZoneId i, ZoneId j) const;

    // No-detour companion set for a vehicle at i whose closer drop-off is in
    // j: zones k whose delivery can share the ride without any zone-level
    // detour. Requires the i->j and i->k offsets to lie in a common closed
    // quadrant with the closer offset component-wise dominated by the
    // farther; distinct zones at equal distance never nest. j is always a
    // member and membership is symmetric in (j, k).
    const std::vector<ZoneId>& shareable_dests(ZoneId i, ZoneId j) const;
    bool shareable(ZoneId i, ZoneId j, ZoneId k) const;

    // Members of shareable_dests(i, j) at least as far from i as j: the
    // admissible farther drop-offs once j is fixed as the closer one.
    const std::vector<ZoneId>& farther_shareable_dests(ZoneId i, ZoneId j) const;

    // Shareable destination zones for an intra-zone trip heading into the
    // quadrant of diagonal direction d: the union of the destination groups
    // of d and its two flanking cardinals.
    const std::vector<ZoneId>& intra_shareable_dests(ZoneId i, Dir d) const;

    std::vector<ZoneId> zones() const;

    // Zone containing physical point (x, y), in km with the origin at the
    // southwest corner of cell (col 0, row 0). Points on a shared edge go to
    // the lower-left cell; kNoZone if outside the region.
    ZoneId zone_of_point(double phi, double x, double y) const;

  private:
    void build(std::vector<std::array<int, 3>> cells);  // {col,row,id}
    void validate_region(const std::string& ctx) const;
    size_t idx(ZoneId i) const;
    size_t pidx(ZoneId i, ZoneId j) const { return idx(i) * zone_count() + idx(j); }

    int rows_ = 0, cols_ = 0;
    std::vector<std::array<int, 2>> cells_;            // id-1 -> {col,row}
    std::vector<std::array<ZoneId, 8>> adj_;           // id-1 -> neighbors
    std::vector<ZoneId> at_;                           // row*cols+col -> id
    // precomputed per-zone and per-ordered-pair sets
    std::vector<std::array<std::vector<ZoneId>, 8>> groups_;       // G by dir
    std::vector<std::array<std::vector<ZoneId>, 4>> intra_share_;  // by diagonal
    std::vector<std::vector<ZoneId>> next_;                        // V per pair
    std::vector<std::vector<ZoneId>> share_;                       // per pair
    std::vector<std::vector<ZoneId>> share_far_;                   // per pair
};

}  // namespace ridesim
