#include "ridesim/mc.hpp"

#include "ridesim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ridesim::mc {

namespace {

struct Point {
    double x = 0, y = 0;
};

Point draw(Rng& rng) { return {rng.uniform(), rng.uniform()}; }
Point mirror(Point p) { return {1.0 - p.x, 1.0 - p.y}; }

double l1(Point a, Point b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

// Mean and standard error of a sampled functional. With antithetic pairing
// the estimator runs the functional twice per sample (fresh and mirrored
// candidates) and accumulates the pair mean, so the error estimate stays
// valid however correlated the two halves are.
template <typename Fn>
Estimate run(const McOptions& opts, Fn&& value_of_sample) {
    if (opts.samples <= 1) throw std::invalid_argument("mc: samples must exceed 1");
    Rng rng(opts.seed);
    double sum = 0, sumsq = 0;
    for (long s = 0; s < opts.samples; ++s) {
        double v = value_of_sample(rng);
        sum += v;
        sumsq += v * v;
    }
    const double n = static_cast<double>(opts.samples);
    Estimate e;
    e.samples = opts.samples;
    e.mean = sum / n;
    double var = std::max(0.0, sumsq / n - e.mean * e.mean);
    e.std_error = std::sqrt(var / (n - 1));
    return e;
}

bool absorbs_without_detour(Point o, Point d, Point s) {
    return zero_detour_absorb(o.x, o.y, d.x, d.y, s.x, s.y);
}

bool on_departing_side(Dir dir, Point origin, Point s) {
    auto [dc, dr] = dir_step(dir);
    if (dc > 0 && s.x <= origin.x) return false;
    if (dc < 0 && s.x >= origin.x) return false;
    if (dr > 0 && s.y <= origin.y) return false;
    if (dr < 0 && s.y >= origin.y) return false;
    return true;
}

}  // namespace

bool zero_detour_absorb(double ox, double oy, double dx, double dy, double sx, double sy) {
    double ux = dx - ox, uy = dy - oy;
    double wx = sx - ox, wy = sy - oy;
    if (ux * wx < 0 || uy * wy < 0) return false;  // different quadrant
    bool inside = std::abs(wx) <= std::abs(ux) && std::abs(wy) <= std::abs(uy);
    bool beyond = std::abs(wx) >= std::abs(ux) && std::abs(wy) >= std::abs(uy);
    return inside || beyond;
}

Estimate intra_match_share(const McOptions& opts) {
    return run(opts, [&](Rng& rng) {
        Point o = draw(rng), d = draw(rng), s = draw(rng);
        double hit = absorbs_without_detour(o, d, s) ? 1.0 : 0.0;
        if (!opts.antithetic) return hit;
        double hit2 = absorbs_without_detour(o, d, mirror(s)) ? 1.0 : 0.0;
        return 0.5 * (hit + hit2);
    });
}

Estimate intra_match_share_far_corner(const McOptions& opts) {
    return run(opts, [&](Rng& rng) {
        Point o = draw(rng), s = draw(rng);
        Point corner{1.0, 1.0};
        double hit = absorbs_without_detour(o, corner, s) ? 1.0 : 0.0;
        if (!opts.antithetic) return hit;
        double hit2 = absorbs_without_detour(o, corner, mirror(s)) ? 1.0 : 0.0;
        return 0.5 * (hit + hit2);
    });
}

Estimate outbound_match_share(Dir dir, const McOptions& opts) {
    return run(opts, [&](Rng& rng) {
        Point o = draw(rng), s = draw(rng);
        double hit = on_departing_side(dir, o, s) ? 1.0 : 0.0;
        if (!opts.antithetic) return hit;
        double hit2 = on_departing_side(dir, o, mirror(s)) ? 1.0 : 0.0;
        return 0.5 * (hit + hit2);
    });
}

Estimate outbound_match_share_from(Dir dir, double x, double y, const McOptions& opts) {
    if (x < 0 || x > 1 || y < 0 || y > 1)
        throw std::invalid_argument("mc: caller origin must lie in the unit zone");
    Point o{x, y};
    return run(opts, [&](Rng& rng) {
        Point s = draw(rng);
        double hit = on_departing_side(dir, o, s) ? 1.0 : 0.0;
        if (!opts.antithetic) return hit;
        double hit2 = on_departing_side(dir, o, mirror(s)) ? 1.0 : 0.0;
        return 0.5 * (hit + hit2);
    });
}

Estimate border_to_closer_of_two(const McOptions& opts) {
    return run(opts, [&](Rng& rng) {
        Point entry{rng.uniform(), 0.0};
        Point a = draw(rng), b = draw(rng);
        double d = std::min(l1(entry, a), l1(entry, b));
        if (!opts.antithetic) return d;
        double d2 = std::min(l1(entry, mirror(a)), l1(entry, mirror(b)));
        return 0.5 * (d + d2);
    });
}

Estimate interior_to_interior(const McOptions& opts) {
    return run(opts, [&](Rng& rng) {
        Point a = draw(rng), b = draw(rng);
        double d = l1(a, b);
        if (!opts.antithetic) return d;
        return 0.5 * (d + l1(a, mirror(b)));
    });
}

Estimate border_to_interior(const McOptions& opts) {
    return run(opts, [&](Rng& rng) {
        Point entry{rng.uniform(), 0.0};
        Point a = draw(rng);
        double d = l1(entry, a);
        if (!opts.antithetic) return d;
        return 0.5 * (d + l1(entry, mirror(a)));
    });
}

PairLegs no_detour_delivery_legs(const McOptions& opts) {
    // Rejection sampling over (pickup, destination, destination) triples;
    // roughly 2/9 of the triples qualify. The two legs are measured from the
    // same accepted triples, so their estimates share a seed by construction.
    Rng rng(opts.seed);
    double sum1 = 0, sumsq1 = 0, sum2 = 0, sumsq2 = 0;
    for (long s = 0; s < opts.samples; ++s) {
        Point o, a, b;
        do {
            o = draw(rng);
            a = draw(rng);
            b = draw(rng);
            // "b absorbed into trip o->a" is symmetric in (a, b): it holds
            // exactly when the pair is quadrant-aligned and nested from o
        } while (!absorbs_without_detour(o, a, b));
        double first = std::min(l1(o, a), l1(o, b));
        double second = l1(a, b);
        sum1 += first;
        sumsq1 += first * first;
        sum2 += second;
        sumsq2 += second * second;
    }
    const double n = static_cast<double>(opts.samples);
    PairLegs legs;
    legs.first.samples = legs.second.samples = opts.samples;
    legs.first.mean = sum1 / n;
    legs.second.mean = sum2 / n;
    legs.first.std_error =
        std::sqrt(std::max(0.0, sumsq1 / n - legs.first.mean * legs.first.mean) / (n - 1));
    legs.second.std_error =
        std::sqrt(std::max(0.0, sumsq2 / n - legs.second.mean * legs.second.mean) / (n - 1));
    return legs;
}

Estimate interior_to_border(const McOptions& opts) {
    return run(opts, [&](Rng& rng) {
        Point a = draw(rng);
        double d = 1.0 - a.x;  // straight run to the east edge
        if (!opts.antithetic) return d;
        return 0.5 * (d + a.x);
    });
}

Estimate through_zone(const McOptions& opts) {
    return run(opts, [&](Rng& rng) {
        rng.uniform();  // entry point; the perpendicular crossing ignores it
        return 1.0;
    });
}

Estimate nearest_pickup_distance(double density, const McOptions& opts) {
    if (!(density > 0)) throw std::invalid_argument("mc: density must be positive");
    // Window half-width chosen so the chance of an empty diamond of that
    // radius, exp(-2 * density * w^2), is ~1e-18: truncation cannot move the
    // mean at any tested precision. Points outside the square window are
    // farther than w in rectilinear distance, so a hit inside is exact.
    const double w = 4.5 / std::sqrt(density);
    const double mean_count = density * (2 * w) * (2 * w);
    return run(opts, [&](Rng& rng) {
        long count = rng.poisson(mean_count);
        double best = w;
        for (long p = 0; p < count; ++p) {
            double x = rng.uniform(-w, w);
            double y = rng.uniform(-w, w);
            double d = std::abs(x) + std::abs(y);
            if (d < best) best = d;
        }
        return best;
    });
}

}  // namespace ridesim::mc
