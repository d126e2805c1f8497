#pragma once

#include "ridesim/grid.hpp"

#include <cstdint>

// Sampling estimators for the geometric constants used by the analytic model
// (match-feasibility shares and expected rectilinear travel distances inside
// a square zone). Each estimator simulates the defining random experiment
// directly, so the constants can be validated against an implementation that
// shares no formulas with them. All lengths are fractions of the zone width.
namespace ridesim::mc {

struct McOptions {
    long samples = 200000;
    std::uint64_t seed = 2026;
    // Pair each sample with a mirrored copy (candidate points reflected
    // through the zone center). Helps the share estimators most; never biases
    // the estimate, and the standard error stays honest (it is computed over
    // pair means).
    bool antithetic = false;
};

struct Estimate {
    double mean = 0;
    double std_error = 0;
    long samples = 0;
};

// Zero-added-distance condition for serving a stop at (sx, sy) inside a trip
// from (ox, oy) to (dx, dy): the stop lies inside the trip's bounding
// rectangle (dropped en route) or past the destination in the same travel
// quadrant (destination dropped en route). Symmetric in the two stops.
bool zero_detour_absorb(double ox, double oy, double dx, double dy, double sx, double sy);

// Share of in-zone vehicle drop-off points that let the vehicle absorb an
// in-zone trip (origin, destination uniform) with zero added distance, i.e.
// the mean area where zero_detour_absorb holds. Expected value 2/9.
Estimate intra_match_share(const McOptions& opts = {});

// Same share with the first trip's destination pinned to the far corner, so
// the whole quadrant past the origin qualifies. Expected value 1/4.
Estimate intra_match_share_far_corner(const McOptions& opts = {});

// Share of in-zone vehicle drop-off points on the departing side of a caller
// bound for direction `dir`: the half plane through the caller's origin for a
// cardinal direction (expected 1/2), the quadrant for a diagonal (expected
// 1/4).
Estimate outbound_match_share(Dir dir, const McOptions& opts = {});
// Same event with the caller's origin held fixed at (x, y) in the unit zone;
// e.g. a caller at the far corner of its quadrant sees share 1.
Estimate outbound_match_share_from(Dir dir, double x, double y, const McOptions& opts = {});

// Entry point uniform on one zone edge to the closer of two uniform interior
// drop-offs. Expected value 5/8.
Estimate border_to_closer_of_two(const McOptions& opts = {});

// Rectilinear distance between two uniform interior points. Expected 2/3.
Estimate interior_to_interior(const McOptions& opts = {});

// Entry point uniform on one zone edge to a uniform interior point
// (perpendicular 1/2 plus lateral 1/3). Expected value 5/6.
Estimate border_to_interior(const McOptions& opts = {});

// Both legs of a double drop-off whose two interior destinations admit a
// zero-detour route from a uniform pickup point (same quadrant, nested order
// in both axes): pickup to the closer destination, then closer to farther.
// Each leg has expected length 1/2.
struct PairLegs {
    Estimate first;
    Estimate second;
};
PairLegs no_detour_delivery_legs(const McOptions& opts = {});

// Uniform interior point to a fixed zone edge with no lateral movement.
// Expected value 1/2.
Estimate interior_to_border(const McOptions& opts = {});

// Crossing a zone border-to-border with no lateral movement, entering at a
// uniform edge point. Always the full zone width, 1.
Estimate through_zone(const McOptions& opts = {});

// Rectilinear distance from a caller to the nearest vehicle of a homogeneous
// Poisson field with `density` vehicles per zone area. Expected value
// sqrt(pi/(8*density)) ~= 0.6267/sqrt(density), the value the analytic
// model rounds to 0.63/sqrt(N). Ignores the antithetic flag.
Estimate nearest_pickup_distance(double density, const McOptions& opts = {});

}  // namespace ridesim::mc
