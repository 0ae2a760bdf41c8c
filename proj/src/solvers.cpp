#include "hybridcq/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "hybridcq/errors.hpp"

namespace hybridcq {

// ---------------------------------------------------------------------------
// Step rules

StepRule StepRule::constant(double c) {
    if (!(c >= 0.0 && c <= 1.0)) throw ConfigurationError("step rule: constant must lie in [0, 1]");
    return {Kind::constant, c};
}

StepRule StepRule::one_minus_inv(double n0) {
    if (!(n0 >= 1.0)) throw ConfigurationError("step rule: one_minus_inv needs n0 >= 1");
    return {Kind::one_minus_inv, n0};
}

StepRule StepRule::inv(double n0) {
    if (!(n0 >= 1.0)) throw ConfigurationError("step rule: inv needs n0 >= 1");
    return {Kind::inv, n0};
}

StepRule StepRule::inv_square(double n0) {
    if (!(n0 >= 1.0)) throw ConfigurationError("step rule: inv_square needs n0 >= 1");
    return {Kind::inv_square, n0};
}

double StepRule::at(int n) const {
    const double s = static_cast<double>(n) + param_;
    switch (kind_) {
    case Kind::constant: return param_;
    case Kind::one_minus_inv: return 1.0 - 1.0 / s;
    case Kind::inv: return 1.0 / s;
    case Kind::inv_square: return 1.0 / (s * s);
    }
    return param_;
}

double StepRule::limit() const {
    switch (kind_) {
    case Kind::constant: return param_;
    case Kind::one_minus_inv: return 1.0;
    case Kind::inv:
    case Kind::inv_square: return 0.0;
    }
    return param_;
}

std::string StepRule::describe() const {
    std::ostringstream os;
    switch (kind_) {
    case Kind::constant: os << param_; break;
    case Kind::one_minus_inv: os << "1-1/(n+" << param_ << ")"; break;
    case Kind::inv: os << "1/(n+" << param_ << ")"; break;
    case Kind::inv_square: os << "1/(n+" << param_ << ")^2"; break;
    }
    return os.str();
}

const char* to_string(Scheme s) {
    switch (s) {
    case Scheme::mann: return "mann";
    case Scheme::ishikawa: return "ishikawa";
    case Scheme::nakajo_takahashi: return "nakajo_takahashi";
    case Scheme::kim_xu: return "kim_xu";
    case Scheme::myx: return "myx";
    case Scheme::hybrid_hilbert: return "hybrid_hilbert";
    case Scheme::hybrid_banach: return "hybrid_banach";
    }
    return "unknown";
}

std::optional<Scheme> scheme_from_string(const std::string& s) {
    for (Scheme sc : {Scheme::mann, Scheme::ishikawa, Scheme::nakajo_takahashi, Scheme::kim_xu, Scheme::myx,
                      Scheme::hybrid_hilbert, Scheme::hybrid_banach})
        if (s == to_string(sc)) return sc;
    return std::nullopt;
}

const char* to_string(Termination t) {
    switch (t) {
    case Termination::tolerance: return "tolerance";
    case Termination::max_iter: return "max_iter";
    case Termination::error: return "error";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Half-space forms

DualHalfSpace half_space_of_Cn(const SpaceGeometry& g, const CnInputs& in) {
    // Every v-dependence of phi(v, w) is -2 <v, Jw>; the |v|^2 terms cancel, so
    //   <v, 2(Jx - Jy) + 2(1-a)(k^2 Jz - Jx)> <= |x|^2 - |y|^2 + (1-a)(k^2|z|^2 - |x|^2 + (k^2-1)M).
    // The offset is evaluated as <x, normal> plus the slack at x,
    //   (1-a)(k^2 phi(x, z) + (k^2-1)(M - |x|^2)) - phi(x, y),
    // which avoids subtracting nearby squares once the normal is tiny.
    const double k2 = in.k * in.k;
    const double w = 1.0 - in.alpha;
    const DualVector jx = g.duality_map(in.x);
    const DualVector jy = g.duality_map(in.y);
    const DualVector jz = g.duality_map(in.z);
    DualHalfSpace h;
    h.normal = 2.0 * (jx - jy) + 2.0 * w * (k2 * jz - jx);
    const double slack_at_x = w * (k2 * g.lyapunov(in.x, in.z) + (k2 - 1.0) * (in.M - g.norm_squared(in.x))) -
                              g.lyapunov(in.x, in.y);
    h.offset = pairing(in.x, h.normal) + slack_at_x;
    return h;
}

DualHalfSpace half_space_of_Qn(const SpaceGeometry& g, const Vector& x0, const Vector& xn) {
    DualHalfSpace h;
    h.normal = g.duality_map(x0) - g.duality_map(xn);
    h.offset = pairing(xn, h.normal);
    return h;
}

double kim_xu_theta(double alpha, double k, double diam) { return (1.0 - alpha) * (k * k - 1.0) * diam * diam; }

// ---------------------------------------------------------------------------
// Hypotheses

namespace {

constexpr double kAlphaMargin = 1e-3;
constexpr double kDomainTol = 1e-9;

bool is_cq(Scheme s) { return s != Scheme::mann && s != Scheme::ishikawa; }
bool uses_beta(Scheme s) {
    return s == Scheme::ishikawa || s == Scheme::myx || s == Scheme::hybrid_hilbert || s == Scheme::hybrid_banach;
}
bool needs_beta_to_one(Scheme s) { return s == Scheme::myx || s == Scheme::hybrid_hilbert || s == Scheme::hybrid_banach; }
bool uses_M(Scheme s) { return s == Scheme::hybrid_hilbert || s == Scheme::hybrid_banach; }
bool needs_bounded(Scheme s) { return s == Scheme::kim_xu || uses_M(s); }
bool needs_nonexpansive(Scheme s) {
    return s == Scheme::mann || s == Scheme::ishikawa || s == Scheme::nakajo_takahashi || s == Scheme::myx;
}

SpaceGeometry geometry_for(const MappingSpec& m, const SpaceGeometry& g, Scheme s) {
    return s == Scheme::hybrid_banach ? g : SpaceGeometry::euclidean(m.dim());
}

} // namespace

double resolve_M(const MappingSpec& m, const SpaceGeometry& g, const SolverConfig& cfg) {
    if (cfg.M) return *cfg.M;
    const double r = m.domain().norm_radius(geometry_for(m, g, cfg.scheme));
    return r * r + 1.0;
}

std::vector<std::string> check_hypotheses(const MappingSpec& m, const SpaceGeometry& g, const SolverConfig& cfg) {
    std::vector<std::string> errs;
    const Scheme s = cfg.scheme;
    const std::string name = to_string(s);

    if (s == Scheme::hybrid_banach) {
        if (g.dim() != m.dim()) errs.push_back(name + ": geometry dimension differs from the mapping dimension");
        else if (!m.is_relatively_certified(g))
            errs.push_back(name + ": mapping " + m.describe() +
                           " is not certified relatively asymptotically nonexpansive in this geometry");
    } else if (!m.geometry().is_hilbert()) {
        errs.push_back(name + ": requires a Hilbert (euclidean) mapping, got p-norm geometry");
    }
    if (needs_nonexpansive(s) && !m.is_nonexpansive())
        errs.push_back(name + ": requires a nonexpansive mapping, " + m.describe() + " is only asymptotically so");

    if (cfg.x0.size() != m.dim()) {
        errs.push_back("x0: expected dimension " + std::to_string(m.dim()) + ", got " + std::to_string(cfg.x0.size()));
    } else if (!cfg.x0.allFinite()) {
        errs.push_back("x0: non-finite coordinates");
    } else if (!contains(m.domain(), cfg.x0, kDomainTol)) {
        errs.push_back("x0 must lie in C (" + m.domain().describe() + ")");
    }
    if (cfg.max_iter <= 0) errs.push_back("max_iter must be positive");
    if (!(cfg.stop_tol > 0.0)) errs.push_back("stop_tol must be positive");
    if (!(cfg.projection_tol > 0.0)) errs.push_back("projection_tol must be positive");
    if (!(cfg.residual_tol > 0.0)) errs.push_back("residual_tol must be positive");

    const int horizon = std::max(cfg.max_iter, 1);
    double alpha_sup = -1.0, alpha_inf = 2.0, beta_inf = 2.0, beta_sup = -1.0;
    for (int n = 0; n <= horizon; ++n) {
        alpha_sup = std::max(alpha_sup, cfg.schedule.alpha.at(n));
        alpha_inf = std::min(alpha_inf, cfg.schedule.alpha.at(n));
        beta_sup = std::max(beta_sup, cfg.schedule.beta.at(n));
        beta_inf = std::min(beta_inf, cfg.schedule.beta.at(n));
    }
    if (alpha_inf < 0.0 || alpha_sup > 1.0) errs.push_back("alpha_n must lie in [0, 1]");
    if (uses_beta(s) && (beta_inf < 0.0 || beta_sup > 1.0)) errs.push_back("beta_n must lie in [0, 1]");
    if (is_cq(s)) {
        const double limsup = std::max(alpha_sup, cfg.schedule.alpha.limit());
        if (limsup > 1.0 - kAlphaMargin) {
            std::ostringstream os;
            os << "hypothesis violated: limsup alpha_n<1 (alpha_n = " << cfg.schedule.alpha.describe()
               << " reaches " << limsup << ", need <= " << 1.0 - kAlphaMargin << ")";
            errs.push_back(os.str());
        }
    }
    if (needs_beta_to_one(s) && std::abs(cfg.schedule.beta.limit() - 1.0) > 1e-12) {
        errs.push_back("hypothesis violated: beta_n->1 (beta_n = " + cfg.schedule.beta.describe() +
                       " does not tend to 1)");
    }
    if (needs_bounded(s) && !m.domain().is_bounded()) errs.push_back("hypothesis violated: C must be bounded");

    if (uses_M(s) && m.domain().is_bounded() && (s != Scheme::hybrid_banach || g.dim() == m.dim())) {
        const double r = m.domain().norm_radius(geometry_for(m, g, s));
        const double M = resolve_M(m, g, cfg);
        if (!(M > r * r)) {
            std::ostringstream os;
            os << "hypothesis violated: M>||v||^2 for all v in C (M = " << M << ", sup ||v||^2 = " << r * r << ")";
            errs.push_back(os.str());
        }
    }
    if (s == Scheme::kim_xu && cfg.diam_C && m.domain().is_bounded()) {
        const double d = m.domain().diameter();
        if (!(*cfg.diam_C >= d * (1.0 - 1e-12))) {
            std::ostringstream os;
            os << "hypothesis violated: diam C (given " << *cfg.diam_C << ", domain diameter " << d << ")";
            errs.push_back(os.str());
        }
    }
    return errs;
}

// ---------------------------------------------------------------------------
// Drivers

namespace {

void require_valid(const MappingSpec& m, const SpaceGeometry& g, const SolverConfig& cfg) {
    auto errs = check_hypotheses(m, g, cfg);
    if (!errs.empty()) throw ValidationError(std::move(errs));
}

double dist_to_target(const SpaceGeometry& g, const SolverConfig& cfg, const Vector& x) {
    return cfg.target ? g.norm(Vector(x - *cfg.target)) : 0.0;
}

double fixed_point_residual(const MappingSpec& m, const SpaceGeometry& g, const Vector& x) {
    return g.norm(Vector(m.apply(x) - x));
}

double min_slack(const DualHalfSpace& h, const SolverConfig& cfg) {
    if (cfg.probes.empty() && !cfg.target) return 0.0;
    double s = std::numeric_limits<double>::infinity();
    if (cfg.probes.empty()) return h.slack(*cfg.target);
    for (const auto& p : cfg.probes) s = std::min(s, h.slack(p));
    return s;
}

// Mann and Ishikawa: x_{n+1} = a x + (1-a) T y with y = b x + (1-b) T x.
IterationTrace run_plain(const MappingSpec& m, const SolverConfig& cfg, bool two_level) {
    const SpaceGeometry g = SpaceGeometry::euclidean(m.dim());
    IterationTrace trace;
    trace.scheme = cfg.scheme;
    Vector x = cfg.x0;
    try {
        for (int n = 0; n < cfg.max_iter; ++n) {
            const double a = cfg.schedule.alpha.at(n);
            const Vector tx = m.apply(x);
            Vector y = x;
            Vector ty = tx;
            if (two_level) {
                const double b = cfg.schedule.beta.at(n);
                y = b * x + (1.0 - b) * tx;
                ty = m.apply(y);
            }
            Vector next = a * x + (1.0 - a) * ty;
            IterationRecord rec;
            rec.n = n;
            rec.x = x;
            rec.y = y;
            rec.z = x;
            rec.phi_step = g.lyapunov(next, x);
            rec.step_to_y = g.norm(Vector(next - y));
            rec.residual = g.norm(Vector(tx - x));
            rec.dist_to_target = dist_to_target(g, cfg, x);
            trace.records.push_back(std::move(rec));
            const double moved = g.norm(Vector(next - x));
            x = std::move(next);
            if (moved <= cfg.stop_tol && fixed_point_residual(m, g, x) <= cfg.residual_tol) {
                trace.terminated_by = Termination::tolerance;
                break;
            }
        }
        // A final iterate leaving C is reported like any other domain escape.
        if (!contains(m.domain(), x, kDomainTol)) throw DomainError("iterate left the domain C");
    } catch (const Error& e) {
        trace.terminated_by = Termination::error;
        trace.error = e.what();
    }
    trace.final_point = x;
    return trace;
}

struct CqStep {
    Vector y;
    Vector z;
    DualHalfSpace cn;
};

using CqStepFn = std::function<CqStep(int n, const Vector& x)>;

// Shared CQ loop: build C_n and Q_n, project x0 onto the intersection.
IterationTrace run_cq(const MappingSpec& m, const SpaceGeometry& g, const SolverConfig& cfg, const CqStepFn& step,
                      double M) {
    IterationTrace trace;
    trace.scheme = cfg.scheme;
    trace.M = M;
    ProjectionOptions popt;
    popt.kkt_tol = cfg.projection_tol;
    const Vector& x0 = cfg.x0;
    Vector x = x0;
    try {
        for (int n = 0; n < cfg.max_iter; ++n) {
            CqStep s = step(n, x);
            const DualHalfSpace qn = half_space_of_Qn(g, x0, x);
            Vector next = generalized_project(g, Intersection{{ConvexSet(s.cn), ConvexSet(qn)}}, x0, popt).point;
            if (!contains(m.domain(), next, 1e-7)) {
                // C_n and Q_n are subsets of C; restore the dropped constraint.
                const ConvexSet triple = Intersection{{m.domain(), ConvexSet(s.cn), ConvexSet(qn)}};
                next = generalized_project(g, triple, x0, popt).point;
                ++trace.domain_fallbacks;
            }
            IterationRecord rec;
            rec.n = n;
            rec.x = x;
            rec.phi_step = g.lyapunov(next, x);
            rec.step_to_y = g.norm(Vector(next - s.y));
            rec.residual = g.norm(Vector(m.apply(x) - x));
            rec.dist_to_target = dist_to_target(g, cfg, x);
            rec.cn_slack_pref = min_slack(s.cn, cfg);
            rec.qn_slack_pref = min_slack(qn, cfg);
            rec.y = std::move(s.y);
            rec.z = std::move(s.z);
            trace.records.push_back(std::move(rec));
            const double moved = g.norm(Vector(next - x));
            x = std::move(next);
            if (moved <= cfg.stop_tol && fixed_point_residual(m, g, x) <= cfg.residual_tol) {
                trace.terminated_by = Termination::tolerance;
                break;
            }
        }
    } catch (const Error& e) {
        trace.terminated_by = Termination::error;
        trace.error = e.what();
    }
    trace.final_point = x;
    return trace;
}

// T^n with n = 0 read as T^1, matching the k_n convention.
Vector power(const MappingSpec& m, const Vector& x, int n) { return m.apply_power(x, std::max(n, 1)); }

SolverConfig with_scheme(SolverConfig cfg, Scheme s) {
    cfg.scheme = s;
    return cfg;
}

} // namespace

IterationTrace run_mann(const MappingSpec& m, const SolverConfig& cfg) {
    const auto c = with_scheme(cfg, Scheme::mann);
    require_valid(m, m.geometry(), c);
    return run_plain(m, c, false);
}

IterationTrace run_ishikawa(const MappingSpec& m, const SolverConfig& cfg) {
    const auto c = with_scheme(cfg, Scheme::ishikawa);
    require_valid(m, m.geometry(), c);
    return run_plain(m, c, true);
}

IterationTrace run_nakajo_takahashi(const MappingSpec& m, const SolverConfig& cfg) {
    const auto c = with_scheme(cfg, Scheme::nakajo_takahashi);
    require_valid(m, m.geometry(), c);
    const SpaceGeometry g = SpaceGeometry::euclidean(m.dim());
    return run_cq(
        m, g, c,
        [&](int n, const Vector& x) {
            const double a = c.schedule.alpha.at(n);
            Vector y = a * x + (1.0 - a) * m.apply(x);
            // ||y - v|| <= ||x - v||  <=>  <v, 2(x - y)> <= <x, 2(x - y)> - |x - y|^2
            const Vector normal = 2.0 * (x - y);
            DualHalfSpace cn{DualVector(normal), x.dot(normal) - (x - y).squaredNorm()};
            return CqStep{std::move(y), x, std::move(cn)};
        },
        0.0);
}

IterationTrace run_kim_xu(const MappingSpec& m, const SolverConfig& cfg) {
    const auto c = with_scheme(cfg, Scheme::kim_xu);
    require_valid(m, m.geometry(), c);
    const SpaceGeometry g = SpaceGeometry::euclidean(m.dim());
    const double diam = c.diam_C ? *c.diam_C : m.domain().diameter();
    return run_cq(
        m, g, c,
        [&](int n, const Vector& x) {
            const double a = c.schedule.alpha.at(n);
            Vector y = a * x + (1.0 - a) * power(m, x, n);
            const double theta = kim_xu_theta(a, m.k(n), diam);
            const Vector normal = 2.0 * (x - y);
            DualHalfSpace cn{DualVector(normal), x.dot(normal) + theta - (x - y).squaredNorm()};
            return CqStep{std::move(y), x, std::move(cn)};
        },
        0.0);
}

IterationTrace run_myx(const MappingSpec& m, const SolverConfig& cfg) {
    const auto c = with_scheme(cfg, Scheme::myx);
    require_valid(m, m.geometry(), c);
    const SpaceGeometry g = SpaceGeometry::euclidean(m.dim());
    return run_cq(
        m, g, c,
        [&](int n, const Vector& x) {
            const double a = c.schedule.alpha.at(n);
            const double b = c.schedule.beta.at(n);
            Vector z = b * x + (1.0 - b) * m.apply(x);
            Vector y = a * x + (1.0 - a) * m.apply(z);
            // Anchored at x: <v, normal> <= <x, normal> + (1-a)|x - z|^2 - |x - y|^2.
            const double w = 1.0 - a;
            const Vector normal = 2.0 * (x - y) + 2.0 * w * (z - x);
            DualHalfSpace cn{DualVector(normal),
                             x.dot(normal) + (w * (x - z).squaredNorm() - (x - y).squaredNorm())};
            return CqStep{std::move(y), std::move(z), std::move(cn)};
        },
        0.0);
}

IterationTrace run_hybrid_hilbert(const MappingSpec& m, const SolverConfig& cfg) {
    const auto c = with_scheme(cfg, Scheme::hybrid_hilbert);
    require_valid(m, m.geometry(), c);
    const SpaceGeometry g = SpaceGeometry::euclidean(m.dim());
    const double M = resolve_M(m, g, c);
    return run_cq(
        m, g, c,
        [&](int n, const Vector& x) {
            const double a = c.schedule.alpha.at(n);
            const double b = c.schedule.beta.at(n);
            const double k2 = m.k(n) * m.k(n);
            Vector z = b * x + (1.0 - b) * power(m, x, n);
            Vector y = a * x + (1.0 - a) * power(m, z, n);
            const double w = 1.0 - a;
            const Vector normal = 2.0 * (x - y) + 2.0 * w * (k2 * z - x);
            const double slack_at_x =
                w * (k2 * (x - z).squaredNorm() + (k2 - 1.0) * (M - x.squaredNorm())) - (x - y).squaredNorm();
            DualHalfSpace cn{DualVector(normal), x.dot(normal) + slack_at_x};
            return CqStep{std::move(y), std::move(z), std::move(cn)};
        },
        M);
}

IterationTrace run_hybrid_banach(const MappingSpec& m, const SpaceGeometry& g, const SolverConfig& cfg) {
    const auto c = with_scheme(cfg, Scheme::hybrid_banach);
    require_valid(m, g, c);
    const double M = resolve_M(m, g, c);
    return run_cq(
        m, g, c,
        [&](int n, const Vector& x) {
            const double a = c.schedule.alpha.at(n);
            const double b = c.schedule.beta.at(n);
            const DualVector jx = g.duality_map(x);
            Vector z = g.inverse_duality_map(b * jx + (1.0 - b) * g.duality_map(power(m, x, n)));
            Vector y = g.inverse_duality_map(a * jx + (1.0 - a) * g.duality_map(power(m, z, n)));
            DualHalfSpace cn = half_space_of_Cn(g, CnInputs{x, y, z, a, m.k(n), M});
            return CqStep{std::move(y), std::move(z), std::move(cn)};
        },
        M);
}

IterationTrace run_scheme(const MappingSpec& m, const SpaceGeometry& g, const SolverConfig& cfg) {
    switch (cfg.scheme) {
    case Scheme::mann: return run_mann(m, cfg);
    case Scheme::ishikawa: return run_ishikawa(m, cfg);
    case Scheme::nakajo_takahashi: return run_nakajo_takahashi(m, cfg);
    case Scheme::kim_xu: return run_kim_xu(m, cfg);
    case Scheme::myx: return run_myx(m, cfg);
    case Scheme::hybrid_hilbert: return run_hybrid_hilbert(m, cfg);
    case Scheme::hybrid_banach: return run_hybrid_banach(m, g, cfg);
    }
    throw ConfigurationError("run_scheme: unknown scheme");
}

} // namespace hybridcq
