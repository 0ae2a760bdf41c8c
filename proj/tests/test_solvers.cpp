#include <cmath>
#include <numbers>

#include <doctest.h>

#include "hybridcq/errors.hpp"
#include "hybridcq/solvers.hpp"
#include "support.hpp"

using namespace hybridcq;
using namespace hybridcq::testing;

namespace {

ConvexSet unit_box2() { return Box{vec({-1, -1}), vec({1, 1})}; }

SolverConfig config(Vector x0, int max_iter = 500) {
    SolverConfig c;
    c.x0 = std::move(x0);
    c.max_iter = max_iter;
    return c;
}

double max_iterate_gap(const IterationTrace& a, const IterationTrace& b) {
    if (a.records.size() != b.records.size()) return INFINITY;
    double worst = (a.final_point - b.final_point).norm();
    for (std::size_t i = 0; i < a.records.size(); ++i)
        worst = std::max(worst, (a.records[i].x - b.records[i].x).norm());
    return worst;
}

bool contains_text(const std::vector<std::string>& messages, const std::string& needle) {
    for (const auto& m : messages)
        if (m.find(needle) != std::string::npos) return true;
    return false;
}

//! Checks the per-iteration guarantees of a CQ trace against an independent
//! recomputation of phi(x_n, x0).
void check_cq_invariants(const IterationTrace& t, const SpaceGeometry& g, const Vector& x0) {
    REQUIRE_FALSE(t.records.empty());
    double previous = -INFINITY;
    for (std::size_t i = 0; i < t.records.size(); ++i) {
        const auto& r = t.records[i];
        CHECK(r.n == static_cast<int>(i));
        CHECK(r.x.allFinite());
        CHECK(std::isfinite(r.phi_step));
        CHECK(std::isfinite(r.residual));
        CHECK(r.cn_slack_pref >= -1e-7);
        CHECK(r.qn_slack_pref >= -1e-7);
        const double phi = g.lyapunov(r.x, x0);
        CHECK(phi >= previous - 1e-8);
        previous = phi;
    }
    CHECK(g.lyapunov(t.final_point, x0) >= previous - 1e-8);
}

} // namespace

// --- step rules and small formulas ---------------------------------------

TEST_CASE("step rules") {
    CHECK(StepRule::constant(0.5).at(10) == 0.5);
    CHECK(StepRule::one_minus_inv(2).at(0) == 0.5);
    CHECK(StepRule::one_minus_inv(2).at(8) == doctest::Approx(0.9));
    CHECK(StepRule::inv(1).at(3) == 0.25);
    CHECK(StepRule::inv_square(1).at(1) == 0.25);
    CHECK(StepRule::one_minus_inv(2).limit() == 1.0);
    CHECK(StepRule::inv(1).limit() == 0.0);
    CHECK(StepRule::constant(0.3).limit() == 0.3);
    CHECK_THROWS_AS(StepRule::constant(1.5), ConfigurationError);
    CHECK_THROWS_AS(StepRule::constant(-0.1), ConfigurationError);
    CHECK_THROWS_AS(StepRule::one_minus_inv(0.5), ConfigurationError);
}

TEST_CASE("scheme names round-trip") {
    for (Scheme s : {Scheme::mann, Scheme::ishikawa, Scheme::nakajo_takahashi, Scheme::kim_xu, Scheme::myx,
                     Scheme::hybrid_hilbert, Scheme::hybrid_banach})
        CHECK(scheme_from_string(to_string(s)) == s);
    CHECK_FALSE(scheme_from_string("newton").has_value());
}

TEST_CASE("kim-xu theta example") {
    CHECK(kim_xu_theta(0.5, std::sqrt(1.01), 2.0) == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(kim_xu_theta(0.5, 1.0, 2.0) == 0.0);
}

TEST_CASE("Q_0 is the whole space") {
    const Vector x0 = vec({3, 4});
    for (const auto& g : {SpaceGeometry::euclidean(2), SpaceGeometry::p_norm(2, 3.0)}) {
        const DualHalfSpace q0 = half_space_of_Qn(g, x0, x0);
        CHECK(q0.normal.coords.norm() == 0.0);
        CHECK(q0.offset == 0.0);
        CHECK(q0.slack(vec({100, -100})) >= 0.0);
    }
}

TEST_CASE("Q_n contains the points on the far side of x_n") {
    const auto g = SpaceGeometry::p_norm(2, 3.0);
    const Vector x0 = vec({3, 4}), xn = vec({1, 1});
    const DualHalfSpace q = half_space_of_Qn(g, x0, xn);
    CHECK(std::abs(q.slack(xn)) <= 1e-14);
    CHECK(q.slack(vec({0, 0})) > 0.0);
    CHECK(q.slack(x0) < 0.0);
}

TEST_CASE("euclidean C_n with k = 1 has the MYX affine form") {
    Sampler rng(301);
    for (int t = 0; t < 100; ++t) {
        const Vector x = rng.uniform_cube(3, 2.0), y = rng.uniform_cube(3, 2.0), z = rng.uniform_cube(3, 2.0);
        const double a = rng.uniform(0.0, 0.9), M = rng.uniform(1.0, 50.0);
        const DualHalfSpace h = half_space_of_Cn(SpaceGeometry::euclidean(3), CnInputs{x, y, z, a, 1.0, M});
        const double w = 1.0 - a;
        const Vector normal = 2.0 * (x - y) + 2.0 * w * (z - x);
        const double offset = x.squaredNorm() - y.squaredNorm() + w * (z.squaredNorm() - x.squaredNorm());
        CHECK((h.normal.coords - normal).norm() <= 1e-12);
        CHECK(h.offset == doctest::Approx(offset).epsilon(1e-12));
    }
}

TEST_CASE("property: C_n membership matches the defining inequality") {
    Sampler rng(311);
    for (int t = 0; t < 1000; ++t) {
        const int d = 2 + static_cast<int>(rng.below(3));
        const double ps[] = {1.5, 2.0, 3.0};
        const auto g = t % 4 == 0 ? SpaceGeometry::euclidean(d) : SpaceGeometry::p_norm(d, ps[rng.below(3)]);
        const CnInputs in{rng.uniform_cube(d, 2.0), rng.uniform_cube(d, 2.0), rng.uniform_cube(d, 2.0),
                          rng.uniform(0.0, 0.9),    1.0 + rng.uniform(0.0, 1.0), rng.uniform(1.0, 30.0)};
        const DualHalfSpace h = half_space_of_Cn(g, in);
        const Vector v = rng.uniform_cube(d, 3.0);
        const double k2 = in.k * in.k;
        const double nx = g.norm(in.x), nz = g.norm(in.z);
        const DualVector dual_part = k2 * g.duality_map(in.z) - g.duality_map(in.x);
        const double rhs = g.lyapunov(v, in.x) + (1.0 - in.alpha) * (k2 * nz * nz - nx * nx + (k2 - 1.0) * in.M -
                                                                    2.0 * pairing(v, dual_part));
        const double direct = rhs - g.lyapunov(v, in.y);
        CHECK(h.slack(v) == doctest::Approx(direct).epsilon(1e-9).scale(1.0));
    }
}

// --- hypotheses --------------------------------------------------------------

TEST_CASE("hypothesis checks") {
    const auto box = MappingSpec::metric_projection(unit_box2());
    const auto e2 = SpaceGeometry::euclidean(2);

    auto bad_alpha = config(vec({3, 4}));
    bad_alpha.scheme = Scheme::hybrid_hilbert;
    bad_alpha.schedule.alpha = StepRule::constant(1.0);
    CHECK(contains_text(check_hypotheses(box, e2, bad_alpha), "limsup alpha_n<1"));
    CHECK_THROWS_AS(run_hybrid_hilbert(box, bad_alpha), ValidationError);

    auto bad_beta = config(vec({3, 4}));
    bad_beta.scheme = Scheme::myx;
    bad_beta.schedule.beta = StepRule::constant(0.5);
    CHECK(contains_text(check_hypotheses(box, e2, bad_beta), "beta_n->1"));

    auto small_M = config(vec({3, 4}));
    small_M.scheme = Scheme::hybrid_hilbert;
    small_M.M = 50.0; // the default domain has radius 10
    CHECK(contains_text(check_hypotheses(box, e2, small_M), "M>||v||^2"));

    auto outside = config(vec({30, 0}));
    outside.scheme = Scheme::nakajo_takahashi;
    CHECK(contains_text(check_hypotheses(box, e2, outside), "x0 must lie in C"));
    CHECK_THROWS_AS(run_nakajo_takahashi(box, outside), ValidationError);

    auto gk = config(vec({0.9, 0, 0, 0}));
    gk.scheme = Scheme::myx;
    CHECK(contains_text(check_hypotheses(MappingSpec::goebel_kirk(4), SpaceGeometry::euclidean(4), gk),
                        "nonexpansive"));

    auto banach = config(vec({3, 4}));
    banach.scheme = Scheme::nakajo_takahashi;
    const auto gp = MappingSpec::generalized_projection(SpaceGeometry::p_norm(2, 3.0), unit_box2());
    CHECK(contains_text(check_hypotheses(gp, gp.geometry(), banach), "Hilbert"));

    auto fine = config(vec({3, 4}));
    CHECK(check_hypotheses(box, e2, fine).empty());
    try {
        run_hybrid_hilbert(box, bad_alpha);
    } catch (const ValidationError& e) {
        CHECK_FALSE(e.messages().empty());
    }
}

TEST_CASE("M defaults to the squared norm radius plus one") {
    const auto m = MappingSpec::metric_projection(unit_box2()).with_domain(ConvexSet(Box{vec({-2, -2}), vec({2, 3})}));
    const auto c = config(vec({0, 0}));
    CHECK(resolve_M(m, SpaceGeometry::euclidean(2), c) == doctest::Approx(4 + 9 + 1));
    auto explicit_M = c;
    explicit_M.M = 100.0;
    CHECK(resolve_M(m, SpaceGeometry::euclidean(2), explicit_M) == 100.0);
}

// --- runner examples ---------------------------------------------------------

TEST_CASE("mann examples") {
    const auto t = run_mann(MappingSpec::contraction(0.5, vec({0, 0})), config(vec({1, 0})));
    CHECK(t.terminated_by == Termination::tolerance);
    CHECK(t.final_point.norm() <= 1e-8);

    const auto r = run_mann(MappingSpec::rotation(std::numbers::pi / 4), config(vec({1, 0}), 2000));
    CHECK(r.terminated_by == Termination::tolerance);
    CHECK(r.records.back().residual <= 1e-8);
    CHECK(r.final_point.norm() <= 1e-8);
    for (std::size_t i = 1; i < r.records.size(); ++i)
        CHECK(r.records[i].residual <= r.records[i - 1].residual + 1e-15);
}

TEST_CASE("ishikawa examples") {
    auto c = config(vec({1, 0}));
    c.schedule.beta = StepRule::constant(0.5);
    const auto t = run_ishikawa(MappingSpec::contraction(0.5, vec({0, 0})), c);
    CHECK(t.terminated_by == Termination::tolerance);
    CHECK(t.final_point.norm() <= 1e-8);

    c.schedule.beta = StepRule::constant(1.0);
    const auto m = MappingSpec::rotation(1.0);
    const auto a = run_ishikawa(m, c), b = run_mann(m, c);
    CHECK(max_iterate_gap(a, b) == 0.0);
}

TEST_CASE("stationary runs from a fixed point") {
    const auto box = MappingSpec::metric_projection(unit_box2());
    const Vector p = vec({0.5, -0.25});
    auto c = config(p);
    for (auto runner : {&run_mann, &run_ishikawa, &run_nakajo_takahashi, &run_kim_xu, &run_myx, &run_hybrid_hilbert}) {
        const auto t = runner(box, c);
        CHECK(t.records.size() == 1);
        CHECK(t.terminated_by == Termination::tolerance);
        CHECK(t.final_point == p);
    }
    const auto gp = MappingSpec::generalized_projection(SpaceGeometry::p_norm(2, 3.0), unit_box2());
    const auto t = run_hybrid_banach(gp, gp.geometry(), c);
    CHECK(t.records.size() == 1);
    CHECK(t.final_point == p);
}

TEST_CASE("CQ schemes approach the projection of x0 onto F(T)") {
    // These schemes converge at roughly 1/n on this instance, so the horizon
    // tolerance is loose; the invariants are what is checked tightly.
    const auto box = MappingSpec::metric_projection(unit_box2());
    auto c = config(vec({3, 4}), 300);
    c.target = vec({1, 1});
    for (auto runner : {&run_nakajo_takahashi, &run_myx, &run_kim_xu}) {
        const auto t = runner(box, c);
        CHECK(t.terminated_by != Termination::error);
        CHECK((t.final_point - vec({1, 1})).norm() <= 2e-2);
        check_cq_invariants(t, SpaceGeometry::euclidean(2), c.x0);
    }
    const auto rot = run_nakajo_takahashi(MappingSpec::rotation(std::numbers::pi / 3), config(vec({1, 1}), 300));
    CHECK(rot.terminated_by != Termination::error);
    CHECK(rot.final_point.norm() <= 2e-2);
}

TEST_CASE("hybrid hilbert with a synthetic k schedule") {
    const auto box = MappingSpec::metric_projection(unit_box2()).with_k_schedule(KSchedule::inverse_square());
    auto c = config(vec({3, 4}), 500);
    c.target = vec({1, 1});
    c.probes = {vec({1, 1}), vec({-1, 1}), vec({0, 0}), vec({1, -1})};
    const auto t = run_hybrid_hilbert(box, c);
    CHECK(t.terminated_by != Termination::error);
    CHECK(t.M == doctest::Approx(101.0));
    CHECK((t.final_point - vec({1, 1})).norm() <= 0.1);
    check_cq_invariants(t, SpaceGeometry::euclidean(2), c.x0);
}

TEST_CASE("hybrid hilbert on the goebel-kirk map") {
    const auto gk = MappingSpec::goebel_kirk(4);
    auto c = config(vec({0.9, 0, 0, 0}), 300);
    c.target = Vector::Zero(4);
    const auto t = run_hybrid_hilbert(gk, c);
    CHECK(t.terminated_by != Termination::error);
    CHECK(t.final_point.norm() <= 1e-2);
    check_cq_invariants(t, SpaceGeometry::euclidean(4), c.x0);
}

TEST_CASE("hybrid banach in p = 3 geometry") {
    const auto g = SpaceGeometry::p_norm(2, 3.0);
    const auto gp = MappingSpec::generalized_projection(g, unit_box2());
    auto c = config(vec({2, 0.5}), 300);
    const Vector target = generalized_project(g, unit_box2(), c.x0).point;
    c.target = target;
    const auto t = run_hybrid_banach(gp, g, c);
    CHECK(t.terminated_by != Termination::error);
    CHECK((t.final_point - target).norm() <= 2e-2);
    check_cq_invariants(t, g, c.x0);
}

TEST_CASE("trace fields are populated") {
    const auto box = MappingSpec::metric_projection(unit_box2());
    auto c = config(vec({3, 4}), 20);
    c.target = vec({1, 1});
    const auto t = run_myx(box, c);
    REQUIRE(t.records.size() == 20);
    CHECK(t.terminated_by == Termination::max_iter);
    const auto& r0 = t.records.front();
    CHECK(r0.x == c.x0);
    CHECK(r0.dist_to_target == doctest::Approx(std::sqrt(4 + 9)));
    CHECK(r0.residual == doctest::Approx(std::sqrt(4 + 9)));
    CHECK(r0.z.size() == 2);
    CHECK(r0.y.size() == 2);
    CHECK(r0.phi_step > 0.0);
    const auto mann = run_mann(box, c);
    CHECK(mann.records.front().cn_slack_pref == 0.0);
    CHECK(mann.records.front().qn_slack_pref == 0.0);
}

// --- reductions --------------------------------------------------------------

// Kim-Xu and the hybrid scheme iterate T^n where the others use T, so the k = 1
// reductions are exact only for idempotent maps.
std::vector<MappingSpec> idempotent_maps() {
    return {MappingSpec::metric_projection(unit_box2()),
            MappingSpec::metric_projection(ConvexSet(Ball{vec({1, 0}), 1.5}))};
}

TEST_CASE("reduction: kim-xu with k = 1 is nakajo-takahashi") {
    for (const auto& m : idempotent_maps()) {
        const auto c = config(vec({3, 4}), 200);
        CHECK(max_iterate_gap(run_kim_xu(m, c), run_nakajo_takahashi(m, c)) <= 1e-10);
    }
}

TEST_CASE("reduction: hybrid hilbert with k = 1 is MYX") {
    for (const auto& m : idempotent_maps()) {
        auto c = config(vec({3, 4}), 200);
        c.M = 1e4;
        CHECK(max_iterate_gap(run_hybrid_hilbert(m, c), run_myx(m, c)) <= 1e-10);
    }
}

TEST_CASE("reduction: MYX with beta = 1 is nakajo-takahashi") {
    for (const auto& m : {MappingSpec::metric_projection(unit_box2()), MappingSpec::rotation(1.0)}) {
        auto c = config(vec({3, 4}), 200);
        c.schedule.beta = StepRule::constant(1.0);
        CHECK(max_iterate_gap(run_myx(m, c), run_nakajo_takahashi(m, c)) <= 1e-10);
    }
}

TEST_CASE("reduction: hybrid banach with p = 2 is hybrid hilbert") {
    const std::vector<MappingSpec> maps = {
        MappingSpec::metric_projection(unit_box2()).with_k_schedule(KSchedule::inverse_square()),
        MappingSpec::rotation(1.0),
        MappingSpec::averaged(MappingSpec::metric_projection(ConvexSet(Ball{vec({1, 0}), 1.0})), 0.5),
    };
    for (const auto& m : maps) {
        INFO(m.describe());
        const auto c = config(vec({3, 4}), 200);
        CHECK(max_iterate_gap(run_hybrid_banach(m, SpaceGeometry::p_norm(2, 2.0), c), run_hybrid_hilbert(m, c)) <=
              1e-10);
    }
}

TEST_CASE("run_scheme dispatches on the configured scheme") {
    const auto box = MappingSpec::metric_projection(unit_box2());
    auto c = config(vec({3, 4}), 30);
    c.scheme = Scheme::kim_xu;
    const auto a = run_scheme(box, SpaceGeometry::euclidean(2), c);
    CHECK(a.scheme == Scheme::kim_xu);
    CHECK(max_iterate_gap(a, run_kim_xu(box, c)) == 0.0);
}

TEST_CASE("property: CQ invariants hold on random box instances") {
    for_all(321, 12, [](Sampler& rng, int t) {
        const ConvexSet k = gen_box(rng, 2);
        const double ps[] = {1.5, 3.0};
        const auto g = SpaceGeometry::p_norm(2, ps[t % 2]);
        const Vector x0 = rng.uniform_cube(2, 5.0);
        auto c = config(x0, 60);
        const Vector target = generalized_project(g, k, x0).point;
        c.target = target;
        Sampler probes(rng.below(1000));
        c.probes = {target, gen_member(probes, k), gen_member(probes, k)};
        const auto m = MappingSpec::generalized_projection(g, k);
        const auto tr = run_hybrid_banach(m, g, c);
        CHECK(tr.terminated_by != Termination::error);
        check_cq_invariants(tr, g, x0);
    });
}
