#include <cmath>

#include <doctest.h>

#include "hybridcq/convex_sets.hpp"
#include "hybridcq/errors.hpp"
#include "support.hpp"

using namespace hybridcq;
using namespace hybridcq::testing;

namespace {

ConvexSet unit_box2() { return Box{vec({-1, -1}), vec({1, 1})}; }

ConvexSet two_quadrant() {
    return Intersection{{ConvexSet(DualHalfSpace{DualVector(vec({1, 0})), 1.0}),
                         ConvexSet(DualHalfSpace{DualVector(vec({0, 1})), 0.0})}};
}

// Dykstra through a three-part intersection whose third part is redundant, so the
// closed-form two-half-space path is bypassed.
Vector dykstra_reference(const ConvexSet& two, const Vector& x) {
    const auto& parts = two.get_if<Intersection>()->parts;
    const ConvexSet three = Intersection{{parts[0], parts[1], ConvexSet(Ball{Vector::Zero(x.size()), 1e6})}};
    return metric_project(three, x).point;
}

} // namespace

TEST_CASE("contains examples") {
    CHECK(contains(unit_box2(), vec({0, 0}), 1e-9));
    CHECK_FALSE(contains(ConvexSet(DualHalfSpace{DualVector(vec({1, 0})), 1.0}), vec({2, 0}), 1e-9));
    CHECK(contains(ConvexSet(Ball{vec({0, 0}), 1.0}), vec({1 + 5e-10, 0}), 1e-9));
    CHECK_FALSE(contains(ConvexSet(Ball{vec({0, 0}), 1.0}), vec({1 + 5e-9, 0}), 1e-9));
    CHECK(violation(unit_box2(), vec({3, 0})) == doctest::Approx(2.0));
    CHECK_THROWS_AS(contains(unit_box2(), vec({1, 2, 3}), 0.0), ConfigurationError);
}

TEST_CASE("set constructors validate their data") {
    CHECK_THROWS_AS(ConvexSet(Box{vec({1, 0}), vec({0, 0})}), ConfigurationError);
    CHECK_THROWS_AS(ConvexSet(Box{vec({0}), vec({0, 0})}), ConfigurationError);
    CHECK_THROWS_AS(ConvexSet(Ball{vec({0, 0}), 0.0}), ConfigurationError);
    CHECK_THROWS_AS(ConvexSet(Ball{vec({0, 0}), -1.0}), ConfigurationError);
    CHECK_THROWS_AS(ConvexSet(DualHalfSpace{DualVector(vec({0, 0})), -1.0}), InfeasibleError);
    CHECK_THROWS_AS(ConvexSet(DualHalfSpace{DualVector(vec({NAN, 0})), 1.0}), ConfigurationError);
    CHECK_THROWS_AS(ConvexSet(Intersection{}), ConfigurationError);
    CHECK_THROWS_AS(ConvexSet(Intersection{{unit_box2(), ConvexSet(Ball{vec({0, 0, 0}), 1.0})}}),
                    ConfigurationError);
    CHECK_NOTHROW(ConvexSet(DualHalfSpace{DualVector(vec({0, 0})), 0.0}));
    CHECK_NOTHROW(ConvexSet::singleton(vec({1, 2})));
}

TEST_CASE("set geometry helpers") {
    const auto e = SpaceGeometry::euclidean(2);
    CHECK(unit_box2().norm_radius(e) == doctest::Approx(std::sqrt(2.0)));
    CHECK(unit_box2().diameter() == doctest::Approx(std::sqrt(8.0)));
    CHECK(ConvexSet(Ball{vec({3, 4}), 1.0}).norm_radius(e) == doctest::Approx(6.0));
    CHECK(ConvexSet(Ball{vec({0, 0}), 2.0}).diameter() == 4.0);
    CHECK(unit_box2().is_bounded());
    CHECK_FALSE(ConvexSet(DualHalfSpace{DualVector(vec({1, 0})), 1.0}).is_bounded());
    CHECK(ConvexSet(Intersection{{two_quadrant(), unit_box2()}}).is_bounded());
    CHECK_THROWS_AS(two_quadrant().norm_radius(e), ConfigurationError);
    CHECK_THROWS_AS(two_quadrant().diameter(), ConfigurationError);
}

TEST_CASE("norm radius of a ball bounds the p-norm on the ball") {
    for_all(21, 200, [](Sampler& rng, int) {
        const int d = 2 + static_cast<int>(rng.below(3));
        const double p = rng.uniform() < 0.5 ? 1.5 : 3.0;
        const auto g = SpaceGeometry::p_norm(d, p);
        const ConvexSet b = gen_ball(rng, d);
        const auto& ball = *b.get_if<Ball>();
        const double r = b.norm_radius(g);
        const Vector v = rng.uniform_ball(ball.center, ball.radius);
        CHECK(g.norm(v) <= r * (1 + 1e-12));
        CHECK(r <= g.norm(ball.center) + ball.radius * std::pow(double(d), 0.5) + 1e-12);
    });
}

TEST_CASE("metric projection examples") {
    CHECK(metric_project(unit_box2(), vec({3, 4})).point == vec({1, 1}));
    CHECK(metric_project(ConvexSet(DualHalfSpace{DualVector(vec({1, 0})), 1.0}), vec({2, 5})).point ==
          vec({1, 5}));
    const Vector p = metric_project(two_quadrant(), vec({2, 3})).point;
    CHECK((p - vec({1, 0})).norm() <= 1e-14);
    CHECK((dykstra_reference(two_quadrant(), vec({2, 3})) - vec({1, 0})).norm() <= 1e-8);
    const Vector b = metric_project(ConvexSet(Ball{vec({0, 0}), 1.0}), vec({3, 4})).point;
    CHECK((b - vec({0.6, 0.8})).norm() <= 1e-15);
}

TEST_CASE("metric projection onto an empty intersection is an infeasibility error") {
    const ConvexSet empty = Intersection{{ConvexSet(DualHalfSpace{DualVector(vec({1, 0})), -1.0}),
                                          ConvexSet(DualHalfSpace{DualVector(vec({-1, 0})), -1.0})}};
    CHECK_THROWS_AS(metric_project(empty, vec({0, 0})), InfeasibleError);
    const ConvexSet disjoint_balls =
        Intersection{{ConvexSet(Ball{vec({0, 0}), 1.0}), ConvexSet(Ball{vec({3, 0}), 1.0})}};
    CHECK_THROWS_AS(metric_project(disjoint_balls, vec({1.5, 2})), InfeasibleError);
}

TEST_CASE("property: two half-space closed form agrees with Dykstra") {
    for_all(31, 200, [](Sampler& rng, int) {
        const int d = 2 + static_cast<int>(rng.below(3));
        const ConvexSet s = gen_two_halfspaces(rng, d);
        const Vector x = gen_point(rng, d, 4.0);
        CHECK((metric_project(s, x).point - dykstra_reference(s, x)).norm() <= 1e-7);
    });
}

TEST_CASE("generalized projection examples") {
    CHECK(generalized_project(SpaceGeometry::euclidean(2), unit_box2(), vec({3, 4})).point == vec({1, 1}));
    for_all(41, 20, [](Sampler& rng, int) {
        const ConvexSet s = gen_set(rng, 2);
        const Vector x = gen_member(rng, s);
        CHECK((generalized_project(SpaceGeometry::p_norm(2, 3.0), s, x).point - x).norm() <= 1e-9);
    });
    const auto g = SpaceGeometry::p_norm(2, 3.0);
    const Vector got = generalized_project(g, unit_box2(), vec({2, 0.5})).point;
    const Vector ref = brute_force_project(g, unit_box2(), vec({2, 0.5}));
    CHECK((got - ref).norm() <= 1e-4);
    // Not the clamp: in p = 3 geometry the second coordinate moves.
    CHECK(std::abs(got[1] - 0.5) > 1e-3);
}

TEST_CASE("generalized projection reports its cap as a convergence error") {
    ProjectionOptions opt;
    opt.max_inner_iterations = 1;
    opt.gradient_tol = 1e-300;
    const auto g = SpaceGeometry::p_norm(3, 3.0);
    const ConvexSet ball = Ball{vec({0.3, 0.1, -0.2}), 1.0};
    try {
        generalized_project(g, ball, vec({3, -2, 2}), opt);
        FAIL("expected a convergence error");
    } catch (const ConvergenceError& e) {
        CHECK(e.best_iterate().size() == 3);
        CHECK(contains(ball, e.best_iterate(), 1e-9));
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("half-space dual projection examples") {
    const DualHalfSpace h{DualVector(vec({1, 0})), 1.0};
    const auto r = project_halfspace_dual(SpaceGeometry::euclidean(2), h, vec({2, 0}));
    CHECK((r.point - vec({1, 0})).norm() <= 1e-15);
    CHECK(r.multipliers[0] == doctest::Approx(1.0));

    const auto inside = project_halfspace_dual(SpaceGeometry::p_norm(2, 3.0), h, vec({0.5, 3}));
    CHECK(inside.point == vec({0.5, 3}));
    CHECK(inside.multipliers[0] == 0.0);

    const auto g = SpaceGeometry::p_norm(2, 3.0);
    const DualHalfSpace h2{DualVector(vec({1, 0})), 0.5};
    const auto got = project_halfspace_dual(g, h2, vec({2, 1}));
    CHECK((got.point - brute_force_project(g, ConvexSet(h2), vec({2, 1}))).norm() <= 1e-6);
    CHECK(std::abs(h2.slack(got.point)) <= 1e-10);
    CHECK(got.residual <= 1e-10);
}

TEST_CASE("half-space dual projection with a zero normal") {
    const auto g = SpaceGeometry::p_norm(2, 3.0);
    CHECK(project_halfspace_dual(g, DualHalfSpace{DualVector::zero(2), 0.0}, vec({1, 2})).point == vec({1, 2}));
    CHECK_THROWS_AS(project_halfspace_dual(g, DualHalfSpace{DualVector::zero(2), -1.0}, vec({1, 2})),
                    InfeasibleError);
}

TEST_CASE("two half-space dual projection examples") {
    const ConvexSet quadrant = two_quadrant();
    const auto& parts = quadrant.get_if<Intersection>()->parts;
    const auto& h1 = *parts[0].get_if<DualHalfSpace>();
    const auto& h2 = *parts[1].get_if<DualHalfSpace>();
    const auto r = project_two_halfspaces_dual(SpaceGeometry::euclidean(2), h1, h2, vec({2, 3}));
    CHECK((r.point - metric_project(two_quadrant(), vec({2, 3})).point).norm() <= 1e-14);
    CHECK((r.point - vec({1, 0})).norm() <= 1e-14);

    const auto feasible = project_two_halfspaces_dual(SpaceGeometry::p_norm(2, 3.0), h1, h2, vec({0.5, -1}));
    CHECK(feasible.point == vec({0.5, -1}));
    CHECK(feasible.multipliers == std::vector<double>{0.0, 0.0});

    const DualHalfSpace a{DualVector(vec({1, 0})), -1.0}, b{DualVector(vec({-1, 0})), -1.0};
    CHECK_THROWS_AS(project_two_halfspaces_dual(SpaceGeometry::p_norm(2, 3.0), a, b, vec({0, 0})),
                    InfeasibleError);
    CHECK_THROWS_AS(project_two_halfspaces_dual(SpaceGeometry::euclidean(2), a, b, vec({0, 0})), InfeasibleError);
}

TEST_CASE("property: two half-space dual projection matches the oracle for p = 3") {
    const auto g3 = [](int d) { return SpaceGeometry::p_norm(d, 3.0); };
    for_all(51, 100, [&](Sampler& rng, int) {
        const int d = 2 + static_cast<int>(rng.below(2));
        const ConvexSet s = gen_two_halfspaces(rng, d);
        const auto& parts = s.get_if<Intersection>()->parts;
        const Vector x = gen_point(rng, d, 4.0);
        const auto r = project_two_halfspaces_dual(g3(d), *parts[0].get_if<DualHalfSpace>(),
                                                   *parts[1].get_if<DualHalfSpace>(), x);
        CHECK((r.point - brute_force_project(g3(d), s, x)).norm() <= 1e-4);
        for (double m : r.multipliers) CHECK(m >= 0.0);
    });
}

TEST_CASE("brute force oracle examples") {
    const Vector r = brute_force_project(SpaceGeometry::euclidean(2), ConvexSet(Ball{vec({0, 0}), 1.0}), vec({2, 0}));
    CHECK((r - vec({1, 0})).norm() <= 1e-8);
    CHECK(brute_force_project(SpaceGeometry::p_norm(2, 1.5), unit_box2(), vec({0.2, 0.3})) == vec({0.2, 0.3}));
    const auto g = SpaceGeometry::p_norm(2, 1.5);
    const Vector ref = brute_force_project(g, unit_box2(), vec({3, 0.5}));
    CHECK(contains(unit_box2(), ref, 1e-12));
    CHECK(g.lyapunov(ref, vec({3, 0.5})) <= g.lyapunov(vec({1, 0.5}), vec({3, 0.5})) + 1e-12);
}

// --- projection properties over random (geometry, set, point) triples ----

namespace {

struct Instance {
    SpaceGeometry g;
    ConvexSet s;
    Vector x;
    Vector proj;
};

Instance gen_instance(Sampler& rng) {
    const double ps[] = {1.5, 2.0, 3.0};
    const int d = 2 + static_cast<int>(rng.below(2));
    const auto g = SpaceGeometry::p_norm(d, ps[rng.below(3)]);
    ConvexSet s = gen_set(rng, d);
    const Vector x = gen_point(rng, d, 4.0);
    const Vector p = generalized_project(g, s, x).point;
    return {g, std::move(s), x, p};
}

} // namespace

TEST_CASE("property: projection lies in the set and satisfies the variational inequality") {
    for_all(61, 150, [](Sampler& rng, int) {
        const Instance in = gen_instance(rng);
        CHECK(contains(in.s, in.proj, 1e-9));
        const DualVector gap = in.g.duality_map(in.x) - in.g.duality_map(in.proj);
        for (int k = 0; k < 20; ++k) {
            const Vector y = gen_member(rng, in.s);
            CHECK(pairing(Vector(in.proj - y), gap) >= -1e-8);
            // Three-point inequality.
            CHECK(in.g.lyapunov(y, in.proj) + in.g.lyapunov(in.proj, in.x) <= in.g.lyapunov(y, in.x) + 1e-8);
        }
    });
}

TEST_CASE("property: projection is idempotent") {
    for_all(71, 150, [](Sampler& rng, int) {
        const Instance in = gen_instance(rng);
        CHECK((generalized_project(in.g, in.s, in.proj).point - in.proj).norm() <= 1e-8);
    });
}

TEST_CASE("property: euclidean generalized projection equals the metric projection") {
    for_all(81, 200, [](Sampler& rng, int) {
        const int d = 2 + static_cast<int>(rng.below(3));
        const ConvexSet s = gen_set(rng, d);
        const Vector x = gen_point(rng, d, 4.0);
        CHECK((generalized_project(SpaceGeometry::euclidean(d), s, x).point - metric_project(s, x).point).norm() <=
              1e-10);
    });
}

TEST_CASE("property: generalized projection matches the brute force oracle") {
    for_all(91, 60, [](Sampler& rng, int) {
        const Instance in = gen_instance(rng);
        CHECK((in.proj - brute_force_project(in.g, in.s, in.x)).norm() <= 1e-4);
    });
}

TEST_CASE("property: multipliers are nonnegative and complementary") {
    for_all(101, 200, [](Sampler& rng, int) {
        const int d = 2 + static_cast<int>(rng.below(2));
        const auto g = SpaceGeometry::p_norm(d, rng.uniform() < 0.5 ? 1.5 : 3.0);
        const DualHalfSpace h = gen_halfspace(rng, d);
        const auto r = project_halfspace_dual(g, h, gen_point(rng, d, 4.0));
        REQUIRE(r.multipliers.size() == 1);
        CHECK(r.multipliers[0] >= 0.0);
        CHECK(std::abs(r.multipliers[0] * h.slack(r.point)) <= 1e-8);

        const ConvexSet two = gen_two_halfspaces(rng, d);
        const auto& parts = two.get_if<Intersection>()->parts;
        const auto& h1 = *parts[0].get_if<DualHalfSpace>();
        const auto& h2 = *parts[1].get_if<DualHalfSpace>();
        const auto r2 = project_two_halfspaces_dual(g, h1, h2, gen_point(rng, d, 4.0));
        REQUIRE(r2.multipliers.size() == 2);
        CHECK(r2.multipliers[0] >= 0.0);
        CHECK(r2.multipliers[1] >= 0.0);
        CHECK(std::abs(r2.multipliers[0] * h1.slack(r2.point)) <= 1e-8);
        CHECK(std::abs(r2.multipliers[1] * h2.slack(r2.point)) <= 1e-8);
    });
}
