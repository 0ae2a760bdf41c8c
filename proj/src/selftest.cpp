#include <algorithm>
#include <cmath>
#include <sstream>

#include "hybridcq/errors.hpp"
#include "hybridcq/harness.hpp"
#include "hybridcq/random.hpp"

namespace hybridcq {

namespace {

Vector random_vector(Sampler& rng, int d) {
    Vector v(d);
    const double scale = std::pow(10.0, rng.uniform(-2.0, 2.0));
    for (int i = 0; i < d; ++i) v[i] = scale * rng.normal();
    return v;
}

SelftestCheck duality_identities(Sampler& rng) {
    double worst = 0.0;
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
        for (int t = 0; t < 200; ++t) {
            const int d = 1 + static_cast<int>(rng.below(5));
            const auto g = SpaceGeometry::p_norm(d, p);
            const Vector x = random_vector(rng, d);
            const double n = g.norm(x);
            const DualVector jx = g.duality_map(x);
            const double scale = std::max(1.0, n * n);
            worst = std::max(worst, std::abs(pairing(x, jx) - n * n) / scale);
            worst = std::max(worst, std::abs(g.dual_norm(jx) - n) / std::max(1.0, n));
            worst = std::max(worst, (g.inverse_duality_map(jx) - x).norm() / std::max(1.0, x.norm()));
        }
    }
    std::ostringstream os;
    os << "max relative error " << worst;
    return {"duality map identities", worst <= 1e-10, os.str()};
}

SelftestCheck lyapunov_sandwich(Sampler& rng) {
    double worst = 0.0;
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
        for (int t = 0; t < 200; ++t) {
            const int d = 1 + static_cast<int>(rng.below(5));
            const auto g = SpaceGeometry::p_norm(d, p);
            const Vector x = random_vector(rng, d), y = random_vector(rng, d);
            const double nx = g.norm(x), ny = g.norm(y);
            const double phi = g.lyapunov(x, y);
            const double tol = 1e-10 * std::max(1.0, (nx + ny) * (nx + ny));
            worst = std::max(worst, ((nx - ny) * (nx - ny) - phi) / tol);
            worst = std::max(worst, (phi - (nx + ny) * (nx + ny)) / tol);
        }
    }
    std::ostringstream os;
    os << "worst breach " << std::max(0.0, worst) << " tolerance units";
    return {"lyapunov sandwich bounds", worst <= 1.0, os.str()};
}

SelftestCheck projection_oracle(Sampler& rng) {
    double worst = 0.0;
    BruteForceOptions bf;
    bf.starts = 3;
    bf.iterations = 20000;
    for (double p : {1.5, 3.0}) {
        for (int t = 0; t < 4; ++t) {
            const int d = 2 + static_cast<int>(rng.below(2));
            const auto g = SpaceGeometry::p_norm(d, p);
            const Vector lo = -Vector::Ones(d) - rng.uniform_cube(d, 0.5).cwiseAbs();
            const Vector hi = Vector::Ones(d) + rng.uniform_cube(d, 0.5).cwiseAbs();
            const ConvexSet box = Box{lo, hi};
            const Vector x = rng.uniform_cube(d, 4.0);
            const Vector a = generalized_project(g, box, x).point;
            const Vector b = brute_force_project(g, box, x, bf);
            worst = std::max(worst, (a - b).norm());
        }
    }
    std::ostringstream os;
    os << "max deviation from brute force " << worst;
    return {"generalized projection vs oracle", worst <= 1e-4, os.str()};
}

SelftestCheck goebel_kirk_relative() {
    const auto m = MappingSpec::goebel_kirk(5);
    const auto rep = verify_relative_asymptotic_nonexpansiveness(m, 300, 3, 10);
    std::ostringstream os;
    os << "max violation " << rep.max_violation << " over " << rep.samples << " samples";
    return {"goebel-kirk relative bound", rep.passed, os.str()};
}

SelftestCheck cn_affine_form(Sampler& rng) {
    int mismatches = 0;
    const int trials = 300;
    for (int t = 0; t < trials; ++t) {
        const int d = 2 + static_cast<int>(rng.below(3));
        const auto g = rng.uniform() < 0.5 ? SpaceGeometry::euclidean(d) : SpaceGeometry::p_norm(d, 3.0);
        CnInputs in{rng.uniform_cube(d, 2.0), rng.uniform_cube(d, 2.0), rng.uniform_cube(d, 2.0),
                    rng.uniform(0.0, 0.9), 1.0 + rng.uniform(0.0, 0.5), rng.uniform(1.0, 20.0)};
        const DualHalfSpace h = half_space_of_Cn(g, in);
        const Vector v = rng.uniform_cube(d, 3.0);
        const double k2 = in.k * in.k;
        const double nx = g.norm(in.x), nz = g.norm(in.z);
        const double rhs = g.lyapunov(v, in.x) +
                           (1.0 - in.alpha) * (k2 * nz * nz - nx * nx + (k2 - 1.0) * in.M -
                                               2.0 * pairing(v, k2 * g.duality_map(in.z) - g.duality_map(in.x)));
        const double direct = rhs - g.lyapunov(v, in.y);
        const double slack = h.slack(v);
        const double nv = g.norm(v), ny = g.norm(in.y);
        const double scale = std::max(1.0, nv * nv + nx * nx + ny * ny + k2 * nz * nz + in.M);
        if (std::abs(direct - slack) > 1e-12 * scale) ++mismatches;
    }
    return {"C_n affine form", mismatches == 0, std::to_string(mismatches) + " mismatches in " +
                                                    std::to_string(trials)};
}

SelftestCheck banach_reduction() {
    Vector lo(2), hi(2), x0(2);
    lo << -1, -1;
    hi << 1, 1;
    x0 << 3, 4;
    const auto m = MappingSpec::metric_projection(Box{lo, hi}).with_k_schedule(KSchedule::inverse_square());
    SolverConfig cfg;
    cfg.x0 = x0;
    cfg.max_iter = 50;
    const auto a = run_hybrid_hilbert(m, cfg);
    const auto b = run_hybrid_banach(m, SpaceGeometry::p_norm(2, 2.0), cfg);
    double worst = a.records.size() == b.records.size() ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < std::min(a.records.size(), b.records.size()); ++i)
        worst = std::max(worst, (a.records[i].x - b.records[i].x).norm());
    std::ostringstream os;
    os << "max iterate gap " << worst << " over " << a.records.size() << " iterations";
    return {"p=2 banach run equals hilbert run", worst <= 1e-10, os.str()};
}

SelftestCheck trace_invariants() {
    Vector lo(2), hi(2), x0(2);
    lo << -1, -1;
    hi << 1, 1;
    x0 << 3, 4;
    const auto m = MappingSpec::metric_projection(Box{lo, hi}).with_k_schedule(KSchedule::inverse_square());
    SolverConfig cfg;
    cfg.x0 = x0;
    cfg.max_iter = 100;
    cfg.target = Vector::Ones(2);
    const auto tr = run_hybrid_hilbert(m, cfg);
    const double v = max_invariant_violation(tr, SpaceGeometry::euclidean(2), x0);
    std::ostringstream os;
    os << "max violation " << v;
    return {"slack and monotonicity invariants", tr.terminated_by != Termination::error && v <= 1e-7, os.str()};
}

template <typename F> SelftestCheck guarded(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        return {name, false, std::string("threw: ") + e.what()};
    }
}

} // namespace

std::vector<SelftestCheck> run_selftest(std::uint64_t seed) {
    Sampler rng(seed);
    std::vector<SelftestCheck> out;
    out.push_back(guarded("duality map identities", [&] { return duality_identities(rng); }));
    out.push_back(guarded("lyapunov sandwich bounds", [&] { return lyapunov_sandwich(rng); }));
    out.push_back(guarded("generalized projection vs oracle", [&] { return projection_oracle(rng); }));
    out.push_back(guarded("goebel-kirk relative bound", [] { return goebel_kirk_relative(); }));
    out.push_back(guarded("C_n affine form", [&] { return cn_affine_form(rng); }));
    out.push_back(guarded("p=2 banach run equals hilbert run", [] { return banach_reduction(); }));
    out.push_back(guarded("slack and monotonicity invariants", [] { return trace_invariants(); }));
    return out;
}

} // namespace hybridcq
