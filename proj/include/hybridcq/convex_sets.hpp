#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "hybridcq/geometry.hpp"

namespace hybridcq {

class ConvexSet;

//! {v : lower <= v <= upper} coordinate-wise. lower == upper gives a singleton.
struct Box {
    Vector lower;
    Vector upper;
};

//! Closed Euclidean ball. The radius is measured in the 2-norm in every geometry.
struct Ball {
    Vector center;
    double radius = 1.0;
};

//! {v : <v, normal> <= offset}. A zero normal with offset >= 0 is the whole space.
struct DualHalfSpace {
    DualVector normal;
    double offset = 0.0;

    //! offset - <v, normal>; nonnegative inside.
    double slack(const Vector& v) const { return offset - pairing(v, normal); }
};

struct Intersection {
    std::vector<ConvexSet> parts;
};

//! Closed convex subset of R^d.
class ConvexSet {
public:
    using Variant = std::variant<Box, Ball, DualHalfSpace, Intersection>;

    ConvexSet(Box b);
    ConvexSet(Ball b);
    ConvexSet(DualHalfSpace h);
    ConvexSet(Intersection i);

    static ConvexSet singleton(const Vector& p) { return Box{p, p}; }

    const Variant& variant() const { return v_; }
    Eigen::Index dim() const;

    //! True for nonempty Box and Ball, and an Intersection with a bounded part.
    bool is_bounded() const;

    //! Smallest R with ||v|| <= R on the set, in the norm of g. Exact for boxes
    //! (largest corner) and for balls in Hilbert geometry; a valid upper bound
    //! for balls in p-norm geometry. Throws for unbounded sets.
    double norm_radius(const SpaceGeometry& g) const;

    //! Euclidean diameter (upper bound for intersections).
    double diameter() const;

    template <typename T> const T* get_if() const { return std::get_if<T>(&v_); }

    std::string describe() const;

private:
    Variant v_;
};

//! True iff x violates no defining inequality of s by more than tol.
bool contains(const ConvexSet& s, const Vector& x, double tol);

//! Largest violation of a defining inequality; zero inside.
double violation(const ConvexSet& s, const Vector& x);

struct ProjectionResult {
    Vector point;
    std::vector<double> multipliers;
    double residual = 0.0;
    int inner_iterations = 0;
};

struct ProjectionOptions {
    double feasibility_tol = 1e-9;
    double kkt_tol = 1e-10;
    double gradient_tol = 1e-9;
    int max_inner_iterations = 10000;
    double dykstra_tol = 1e-10;
    int dykstra_max_iterations = 100000;
};

//! Nearest point in the 2-norm. Closed forms for Box, Ball, HalfSpace and the
//! intersection of two half-spaces; Dykstra's alternating projection otherwise.
ProjectionResult metric_project(const ConvexSet& s, const Vector& x,
                                const ProjectionOptions& opt = {});

//! Generalized projection: the minimizer of y -> phi(y, x) over s.
ProjectionResult generalized_project(const SpaceGeometry& g, const ConvexSet& s, const Vector& x,
                                     const ProjectionOptions& opt = {});

//! Generalized projection onto one half-space through its scalar dual.
//! y = J^{-1}(Jx - lambda a) with lambda >= 0 the root of <y(lambda), a> = b.
ProjectionResult project_halfspace_dual(const SpaceGeometry& g, const DualHalfSpace& h,
                                        const Vector& x, const ProjectionOptions& opt = {});

//! Generalized projection onto the intersection of two half-spaces by KKT
//! active-set enumeration (interior, h1 only, h2 only, both).
ProjectionResult project_two_halfspaces_dual(const SpaceGeometry& g, const DualHalfSpace& h1,
                                             const DualHalfSpace& h2, const Vector& x,
                                             const ProjectionOptions& opt = {});

struct BruteForceOptions {
    int starts = 20;
    int iterations = 50000;
    std::uint64_t seed = 12345;
};

//! Test oracle: multi-start projected gradient with diminishing steps on phi(., x).
//! Shares nothing with generalized_project beyond the Euclidean projection used to
//! stay feasible. Desk scale only (d <= 4).
Vector brute_force_project(const SpaceGeometry& g, const ConvexSet& s, const Vector& x,
                           const BruteForceOptions& opt = {});

} // namespace hybridcq
