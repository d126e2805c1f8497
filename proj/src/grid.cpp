#include "ridesim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <queue>
#include <stdexcept>

namespace ridesim {

const char* dir_name(Dir d) {
    static const char* names[8] = {"E", "NE", "N", "NW", "W", "SW", "S", "SE"};
    return names[static_cast<int>(d)];
}

ZoneGrid::ZoneGrid(int rows, int cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("grid: rows and cols must be >= 1");
    std::vector<std::array<int, 3>> cells;
    ZoneId id = 1;
    for (int r = rows - 1; r >= 0; --r)          // northwest cell gets id 1
        for (int c = 0; c < cols; ++c) cells.push_back({c, r, id++});
    build(std::move(cells));
}

ZoneGrid::ZoneGrid(const std::vector<std::vector<ZoneId>>& id_table) {
    if (id_table.empty()) throw std::invalid_argument("grid: empty id table");
    int nrows = static_cast<int>(id_table.size());
    size_t ncols = id_table.front().size();
    std::vector<std::array<int, 3>> cells;
    for (int tr = 0; tr < nrows; ++tr) {
        if (id_table[tr].size() != ncols)
            throw std::invalid_argument("grid: ragged id table");
        for (size_t c = 0; c < ncols; ++c) {
            ZoneId id = id_table[tr][c];
            if (id < 0) throw std::invalid_argument("grid: negative zone id");
            if (id > 0) cells.push_back({static_cast<int>(c), nrows - 1 - tr, id});
        }
    }
    build(std::move(cells));
}

void ZoneGrid::build(std::vector<std::array<int, 3>> cells) {
    if (cells.empty()) throw std::invalid_argument("grid: no zones");
    int k = static_cast<int>(cells.size());
    for (auto& c : cells)
        if (c[2] < 1 || c[2] > k)
            throw std::invalid_argument("grid: zone ids must be a permutation of 1..K");
    // normalize coordinates so min col/row are 0
    int minc = cells[0][0], minr = cells[0][1], maxc = minc, maxr = minr;
    for (auto& c : cells) {
        minc = std::min(minc, c[0]);
        minr = std::min(minr, c[1]);
        maxc = std::max(maxc, c[0]);
        maxr = std::max(maxr, c[1]);
    }
    cols_ = maxc - minc + 1;
    rows_ = maxr - minr + 1;
    cells_.assign(k, {-1, -1});
    at_.assign(static_cast<size_t>(rows_) * cols_, kNoZone);
    for (auto& c : cells) {
        int col = c[0] - minc, row = c[1] - minr;
        ZoneId id = c[2];
        if (cells_[id - 1][0] != -1)
            throw std::invalid_argument("grid: duplicate zone id " + std::to_string(id));
        auto& slot = at_[static_cast<size_t>(row) * cols_ + col];
        if (slot != kNoZone) throw std::invalid_argument("grid: two zones share a cell");
        slot = id;
        cells_[id - 1] = {col, row};
    }
    adj_.assign(k, {});
    for (ZoneId i = 1; i <= k; ++i)
        for (Dir d : kAllDirs) {
            auto [dc, dr] = dir_step(d);
            adj_[i - 1][static_cast<int>(d)] = zone_at(col_of(i) + dc, row_of(i) + dr);
        }
    // precompute the per-zone and per-pair sets used in solver hot paths
    groups_.assign(k, {});
    for (ZoneId i = 1; i <= k; ++i)
        for (ZoneId j = 1; j <= k; ++j)
            if (i != j) groups_[i - 1][static_cast<int>(direction_of(i, j))].push_back(j);
    intra_share_.assign(k, {});
    for (ZoneId i = 1; i <= k; ++i)
        for (Dir d : kDiagonalDirs) {
            auto& out = intra_share_[i - 1][diag_index(d)];
            out = groups_[i - 1][static_cast<int>(d)];
            for (Dir f : flanking(d)) {
                const auto& g = groups_[i - 1][static_cast<int>(f)];
                out.insert(out.end(), g.begin(), g.end());
            }
            std::sort(out.begin(), out.end());
        }
    next_.assign(static_cast<size_t>(k) * k, {});
    share_.assign(static_cast<size_t>(k) * k, {});
    share_far_.assign(static_cast<size_t>(k) * k, {});
    for (ZoneId i = 1; i <= k; ++i)
        for (ZoneId j = 1; j <= k; ++j) {
            if (i == j) continue;
            size_t p = pidx(i, j);
            Dir d = direction_of(i, j);
            if (is_cardinal(d)) {
                ZoneId n = adjacent(i, d);
                if (n != kNoZone) next_[p].push_back(n);
            } else {
                for (Dir f : flanking(d)) {
                    ZoneId n = adjacent(i, f);
                    if (n != kNoZone) next_[p].push_back(n);
                }
            }
            for (ZoneId c = 1; c <= k; ++c)
                if (shareable(i, j, c)) {
                    share_[p].push_back(c);
                    if (l1_steps(i, c) >= l1_steps(i, j)) share_far_[p].push_back(c);
                }
        }
    validate_region("grid");
}

void ZoneGrid::validate_region(const std::string& ctx) const {
    int k = zone_count();
    // 4-connectivity of the occupied region
    std::vector<char> seen(k, 0);
    std::queue<ZoneId> q;
    q.push(1);
    seen[0] = 1;
    int reached = 0;
    while (!q.empty()) {
        ZoneId i = q.front();
        q.pop();
        ++reached;
        for (Dir d : kCardinalDirs) {
            ZoneId j = adjacent(i, d);
            if (j != kNoZone && !seen[j - 1]) {
                seen[j - 1] = 1;
                q.push(j);
            }
        }
    }
    if (reached != k) throw std::invalid_argument(ctx + ": zones are not 4-connected");
    // hole-freeness: every empty cell of the padded bounding box must reach
    // the outer border
    int pr = rows_ + 2, pc = cols_ + 2;
    std::vector<char> out(static_cast<size_t>(pr) * pc, 0);
    std::queue<std::array<int, 2>> eq;
    eq.push({0, 0});
    out[0] = 1;
    while (!eq.empty()) {
        auto [c, r] = eq.front();
        eq.pop();
        constexpr int dc[4] = {1, -1, 0, 0}, dr[4] = {0, 0, 1, -1};
        for (int t = 0; t < 4; ++t) {
            int nc = c + dc[t], nr = r + dr[t];
            if (nc < 0 || nr < 0 || nc >= pc || nr >= pr) continue;
            if (out[static_cast<size_t>(nr) * pc + nc]) continue;
            if (zone_at(nc - 1, nr - 1) != kNoZone) continue;
            out[static_cast<size_t>(nr) * pc + nc] = 1;
            eq.push({nc, nr});
        }
    }
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c)
            if (zone_at(c, r) == kNoZone && !out[static_cast<size_t>(r + 1) * pc + (c + 1)])
                throw std::invalid_argument(ctx + ": region has an interior hole");
    // every ordered pair must have somewhere to route through
    for (ZoneId i = 1; i <= k; ++i)
        for (ZoneId j = 1; j <= k; ++j)
            if (i != j && feasible_next_zones(i, j).empty())
                throw std::invalid_argument(ctx + ": no feasible route from zone " +
                                            std::to_string(i) + " toward zone " +
                                            std::to_string(j));
}

size_t ZoneGrid::idx(ZoneId i) const {
    if (i < 1 || i > zone_count()) throw std::out_of_range("grid: bad zone id");
    return static_cast<size_t>(i - 1);
}

ZoneId ZoneGrid::zone_at(int col, int row) const {
    if (col < 0 || row < 0 || col >= cols_ || row >= rows_) return kNoZone;
    return at_[static_cast<size_t>(row) * cols_ + col];
}

Dir ZoneGrid::direction_of(ZoneId i, ZoneId j) const {
    int dc = col_of(j) - col_of(i), dr = row_of(j) - row_of(i);
    if (dc == 0 && dr == 0) throw std::invalid_argument("direction_of: i == j");
    if (dr == 0) return dc > 0 ? Dir::E : Dir::W;
    if (dc == 0) return dr > 0 ? Dir::N : Dir::S;
    if (dc > 0) return dr > 0 ? Dir::NE : Dir::SE;
    return dr > 0 ? Dir::NW : Dir::SW;
}

const std::vector<ZoneId>& ZoneGrid::dest_group(ZoneId i, Dir d) const {
    return groups_[idx(i)][static_cast<int>(d)];
}

int ZoneGrid::l1_steps(ZoneId i, ZoneId j) const {
    return std::abs(col_of(i) - col_of(j)) + std::abs(row_of(i) - row_of(j));
}

const std::vector<ZoneId>& ZoneGrid::feasible_next_zones(ZoneId i, ZoneId j) const {
    if (i == j) throw std::invalid_argument("feasible_next_zones: i == j");
    return next_[pidx(i, j)];
}

bool ZoneGrid::shareable(ZoneId i, ZoneId j, ZoneId k) const {
    if (j == i || k == i) return false;
    if (j == k) return true;
    int ux = col_of(j) - col_of(i), uy = row_of(j) - row_of(i);
    int wx = col_of(k) - col_of(i), wy = row_of(k) - row_of(i);
    if (ux * wx < 0 || uy * wy < 0) return false;  // opposite quadrants
    int lj = std::abs(ux) + std::abs(uy), lk = std::abs(wx) + std::abs(wy);
    if (lj == lk) return false;  // distinct equidistant zones never nest
    // closer offset must be dominated componentwise by the farther one
    int cx = ux, cy = uy, fx = wx, fy = wy;
    if (lj > lk) {
        std::swap(cx, fx);
        std::swap(cy, fy);
    }
    return std::abs(cx) <= std::abs(fx) && std::abs(cy) <= std::abs(fy);
}

const std::vector<ZoneId>& ZoneGrid::shareable_dests(ZoneId i, ZoneId j) const {
    if (i == j) throw std::invalid_argument("shareable_dests: i == j");
    return share_[pidx(i, j)];
}

const std::vector<ZoneId>& ZoneGrid::farther_shareable_dests(ZoneId i, ZoneId j) const {
    if (i == j) throw std::invalid_argument("farther_shareable_dests: i == j");
    return share_far_[pidx(i, j)];
}

const std::vector<ZoneId>& ZoneGrid::intra_shareable_dests(ZoneId i, Dir d) const {
    if (is_cardinal(d)) throw std::invalid_argument("intra_shareable_dests: need a diagonal");
    return intra_share_[idx(i)][diag_index(d)];
}

ZoneId ZoneGrid::zone_of_point(double phi, double x, double y) const {
    auto cell = [phi](double u) {
        if (u < 0) return -1;
        if (u == 0) return 0;
        // boundary points belong to the cell on their lower/left side
        return static_cast<int>(std::ceil(u / phi)) - 1;
    };
    return zone_at(cell(x), cell(y));
}

std::vector<ZoneId> ZoneGrid::zones() const {
    std::vector<ZoneId> out(zone_count());
    for (int i = 0; i < zone_count(); ++i) out[i] = i + 1;
    return out;
}

}  // namespace ridesim
