#pragma once

// Hand-rolled generators for the property tests. Every generator takes the
// seeded Sampler so failures replay from the printed seed.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

#include <doctest.h>

#include "hybridcq/convex_sets.hpp"
#include "hybridcq/geometry.hpp"
#include "hybridcq/random.hpp"

namespace hybridcq::testing {

inline Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

//! Coordinates spread over several orders of magnitude, occasionally with exact zeros.
inline Vector gen_vector(Sampler& rng, int d) {
    Vector v(d);
    const double scale = std::pow(10.0, rng.uniform(-3.0, 3.0));
    for (int i = 0; i < d; ++i) v[i] = rng.uniform() < 0.1 ? 0.0 : scale * rng.normal();
    return v;
}

//! Moderate vector in [-r, r]^d, the regime the solvers work in.
inline Vector gen_point(Sampler& rng, int d, double r = 3.0) { return rng.uniform_cube(d, r); }

inline ConvexSet gen_box(Sampler& rng, int d) {
    const Vector c = rng.uniform_cube(d, 1.0);
    Vector lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
        lo[i] = c[i] - rng.uniform(0.2, 1.5);
        hi[i] = c[i] + rng.uniform(0.2, 1.5);
    }
    return Box{lo, hi};
}

inline ConvexSet gen_ball(Sampler& rng, int d) { return Ball{rng.uniform_cube(d, 1.0), rng.uniform(0.3, 2.0)}; }

//! Half-space through a point near the origin, so it is never empty.
inline DualHalfSpace gen_halfspace(Sampler& rng, int d) {
    Vector a(d);
    for (int i = 0; i < d; ++i) a[i] = rng.normal();
    const Vector anchor = rng.uniform_cube(d, 0.5);
    return {DualVector(a), anchor.dot(a)};
}

//! Two half-spaces sharing a common point, so the intersection is nonempty.
inline ConvexSet gen_two_halfspaces(Sampler& rng, int d) {
    const Vector anchor = rng.uniform_cube(d, 0.5);
    std::vector<ConvexSet> parts;
    for (int k = 0; k < 2; ++k) {
        Vector a(d);
        for (int i = 0; i < d; ++i) a[i] = rng.normal();
        parts.emplace_back(DualHalfSpace{DualVector(a), anchor.dot(a) + rng.uniform(0.0, 0.3)});
    }
    return Intersection{std::move(parts)};
}

//! One of: box, ball, half-space, two half-spaces, box cut by a half-space.
inline ConvexSet gen_set(Sampler& rng, int d) {
    switch (rng.below(5)) {
    case 0: return gen_box(rng, d);
    case 1: return gen_ball(rng, d);
    case 2: return gen_halfspace(rng, d);
    case 3: return gen_two_halfspaces(rng, d);
    default: {
        const ConvexSet box = gen_box(rng, d);
        const auto& b = *box.get_if<Box>();
        DualHalfSpace h = gen_halfspace(rng, d);
        // Keep the box centre strictly inside so the intersection is never empty.
        const Vector centre = 0.5 * (b.lower + b.upper);
        h.offset = std::max(h.offset, pairing(centre, h.normal) + 0.1 * h.normal.coords.norm());
        return Intersection{{box, ConvexSet(h)}};
    }
    }
}

//! Point of s: a random point pulled in by the metric projection.
inline Vector gen_member(Sampler& rng, const ConvexSet& s) {
    return metric_project(s, rng.uniform_cube(s.dim(), 3.0)).point;
}

//! Runs body(rng, trial) for the given number of trials with a per-trial INFO line.
inline void for_all(std::uint64_t seed, int trials, const std::function<void(Sampler&, int)>& body) {
    Sampler rng(seed);
    for (int t = 0; t < trials; ++t) {
        INFO("seed " << seed << " trial " << t);
        body(rng, t);
    }
}

} // namespace hybridcq::testing
