#include "hybridcq/convex_sets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "hybridcq/errors.hpp"
#include "hybridcq/random.hpp"

namespace hybridcq {

namespace {

constexpr double kDegenerateNormal = 1e-13;
// Round-off floor for the offset of a zero-normal half-space.
constexpr double kDegenerateOffset = 1e-12;

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

bool is_full_space(const DualHalfSpace& h) {
    return h.normal.coords.norm() <= kDegenerateNormal && h.offset >= -kDegenerateOffset;
}

void flatten_into(const ConvexSet& s, std::vector<const ConvexSet*>& out) {
    if (const auto* inter = s.get_if<Intersection>()) {
        for (const auto& part : inter->parts) flatten_into(part, out);
        return;
    }
    if (const auto* h = s.get_if<DualHalfSpace>(); h && is_full_space(*h)) return;
    out.push_back(&s);
}

std::vector<const ConvexSet*> leaves(const ConvexSet& s) {
    std::vector<const ConvexSet*> out;
    flatten_into(s, out);
    return out;
}

// Scale used to make absolute feasibility tolerances meaningful for large data.
double halfspace_scale(const DualHalfSpace& h, const Vector& y) {
    return std::max({1.0, std::abs(h.offset), h.normal.coords.norm() * y.norm()});
}

bool halfspace_feasible(const DualHalfSpace& h, const Vector& y, double tol) {
    return -h.slack(y) <= tol * halfspace_scale(h, y);
}

ProjectionResult project_box(const Box& b, const Vector& x) {
    ProjectionResult r;
    r.point = x.cwiseMax(b.lower).cwiseMin(b.upper);
    r.multipliers.resize(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i)
        r.multipliers[static_cast<std::size_t>(i)] = std::abs(x[i] - r.point[i]);
    return r;
}

ProjectionResult project_ball(const Ball& b, const Vector& x) {
    ProjectionResult r;
    const Vector diff = x - b.center;
    const double dist = diff.norm();
    // The slack absorbs the rounding of a previous projection, so projecting twice
    // returns the same bits.
    if (dist <= b.radius * (1.0 + 8.0 * std::numeric_limits<double>::epsilon())) {
        r.point = x;
        r.multipliers = {0.0};
    } else {
        r.point = b.center + (b.radius / dist) * diff;
        r.multipliers = {dist / b.radius - 1.0};
    }
    return r;
}

ProjectionResult project_halfspace_euclidean(const DualHalfSpace& h, const Vector& x) {
    const Vector& a = h.normal.coords;
    const double nn = a.squaredNorm();
    ProjectionResult r;
    if (nn <= kDegenerateNormal * kDegenerateNormal) {
        if (h.offset < -kDegenerateOffset) throw InfeasibleError("half-space with zero normal and negative offset is empty");
        r.point = x;
        r.multipliers = {0.0};
        return r;
    }
    const double lambda = std::max(0.0, (x.dot(a) - h.offset) / nn);
    r.point = x - lambda * a;
    r.multipliers = {lambda};
    return r;
}

// Both constraints active in the Hilbert case: solve the 2x2 Gram system.
// Returns false when the normals are parallel.
bool solve_pair_euclidean(const DualHalfSpace& h1, const DualHalfSpace& h2, const Vector& x,
                          double& lambda, double& mu) {
    const Vector& a1 = h1.normal.coords;
    const Vector& a2 = h2.normal.coords;
    const double g11 = a1.squaredNorm();
    const double g12 = a1.dot(a2);
    const double g22 = a2.squaredNorm();
    const double det = g11 * g22 - g12 * g12;
    if (!(std::abs(det) > 1e-14 * g11 * g22)) return false;
    const double r1 = x.dot(a1) - h1.offset;
    const double r2 = x.dot(a2) - h2.offset;
    lambda = (g22 * r1 - g12 * r2) / det;
    mu = (g11 * r2 - g12 * r1) / det;
    return true;
}

ProjectionResult project_two_halfspaces_euclidean(const DualHalfSpace& h1, const DualHalfSpace& h2,
                                                  const Vector& x, const ProjectionOptions& opt);

Vector dykstra(const std::vector<const ConvexSet*>& sets, const Vector& x, const ProjectionOptions& opt,
               int& iterations);

ProjectionResult project_leaf_metric(const ConvexSet& s, const Vector& x, const ProjectionOptions& opt) {
    return std::visit(
        overloaded{
            [&](const Box& b) { return project_box(b, x); },
            [&](const Ball& b) { return project_ball(b, x); },
            [&](const DualHalfSpace& h) { return project_halfspace_euclidean(h, x); },
            [&](const Intersection&) { return metric_project(s, x, opt); },
        },
        s.variant());
}

} // namespace

// ---------------------------------------------------------------------------
// ConvexSet

ConvexSet::ConvexSet(Box b) : v_(std::move(b)) {
    const auto& bx = std::get<Box>(v_);
    if (bx.lower.size() != bx.upper.size() || bx.lower.size() == 0)
        throw ConfigurationError("box: lower and upper must have equal positive dimension");
    for (Eigen::Index i = 0; i < bx.lower.size(); ++i)
        if (!(bx.lower[i] <= bx.upper[i]))
            throw ConfigurationError("box: lower[" + std::to_string(i) + "] exceeds upper");
}

ConvexSet::ConvexSet(Ball b) : v_(std::move(b)) {
    const auto& bl = std::get<Ball>(v_);
    if (bl.center.size() == 0) throw ConfigurationError("ball: empty center");
    if (!(bl.radius > 0.0) || !std::isfinite(bl.radius))
        throw ConfigurationError("ball: radius must be positive and finite");
}

ConvexSet::ConvexSet(DualHalfSpace h) : v_(std::move(h)) {
    const auto& hs = std::get<DualHalfSpace>(v_);
    if (hs.normal.size() == 0) throw ConfigurationError("half-space: empty normal");
    if (!std::isfinite(hs.offset) || !hs.normal.coords.allFinite())
        throw ConfigurationError("half-space: non-finite data");
    if (hs.normal.coords.norm() <= kDegenerateNormal && hs.offset < -kDegenerateOffset)
        throw InfeasibleError("half-space: zero normal with negative offset is empty");
}

ConvexSet::ConvexSet(Intersection i) : v_(std::move(i)) {
    const auto& parts = std::get<Intersection>(v_).parts;
    if (parts.empty()) throw ConfigurationError("intersection: no parts");
    for (const auto& p : parts)
        if (p.dim() != parts.front().dim()) throw ConfigurationError("intersection: mixed dimensions");
}

Eigen::Index ConvexSet::dim() const {
    return std::visit(overloaded{
                          [](const Box& b) { return b.lower.size(); },
                          [](const Ball& b) { return b.center.size(); },
                          [](const DualHalfSpace& h) { return h.normal.size(); },
                          [](const Intersection& i) { return i.parts.front().dim(); },
                      },
                      v_);
}

bool ConvexSet::is_bounded() const {
    return std::visit(overloaded{
                          [](const Box&) { return true; },
                          [](const Ball&) { return true; },
                          [](const DualHalfSpace&) { return false; },
                          [](const Intersection& i) {
                              return std::any_of(i.parts.begin(), i.parts.end(),
                                                 [](const ConvexSet& p) { return p.is_bounded(); });
                          },
                      },
                      v_);
}

double ConvexSet::norm_radius(const SpaceGeometry& g) const {
    g.check_dim(dim(), "norm_radius");
    return std::visit(
        overloaded{
            [&](const Box& b) {
                return g.norm(Vector(b.lower.cwiseAbs().cwiseMax(b.upper.cwiseAbs())));
            },
            [&](const Ball& b) {
                // sup of ||u||_p over the Euclidean unit sphere.
                double stretch = 1.0;
                if (!g.is_hilbert() && g.p() < 2.0)
                    stretch = std::pow(static_cast<double>(g.dim()), 1.0 / g.p() - 0.5);
                return g.norm(b.center) + b.radius * stretch;
            },
            [&](const DualHalfSpace&) -> double {
                throw ConfigurationError("norm_radius: half-space is unbounded");
            },
            [&](const Intersection& i) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& p : i.parts)
                    if (p.is_bounded()) best = std::min(best, p.norm_radius(g));
                if (!std::isfinite(best)) throw ConfigurationError("norm_radius: unbounded intersection");
                return best;
            },
        },
        v_);
}

double ConvexSet::diameter() const {
    return std::visit(overloaded{
                          [](const Box& b) { return (b.upper - b.lower).norm(); },
                          [](const Ball& b) { return 2.0 * b.radius; },
                          [](const DualHalfSpace&) -> double {
                              throw ConfigurationError("diameter: half-space is unbounded");
                          },
                          [](const Intersection& i) {
                              double best = std::numeric_limits<double>::infinity();
                              for (const auto& p : i.parts)
                                  if (p.is_bounded()) best = std::min(best, p.diameter());
                              if (!std::isfinite(best))
                                  throw ConfigurationError("diameter: unbounded intersection");
                              return best;
                          },
                      },
                      v_);
}

std::string ConvexSet::describe() const {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const Box& b) { os << "Box(dim=" << b.lower.size() << ")"; },
                   [&](const Ball& b) { os << "Ball(dim=" << b.center.size() << ", r=" << b.radius << ")"; },
                   [&](const DualHalfSpace& h) { os << "HalfSpace(dim=" << h.normal.size() << ")"; },
                   [&](const Intersection& i) {
                       os << "Intersection[";
                       for (std::size_t k = 0; k < i.parts.size(); ++k) os << (k ? ", " : "") << i.parts[k].describe();
                       os << "]";
                   },
               },
               v_);
    return os.str();
}

double violation(const ConvexSet& s, const Vector& x) {
    if (x.size() != s.dim()) throw ConfigurationError("contains: dimension mismatch");
    return std::visit(overloaded{
                          [&](const Box& b) {
                              return std::max({0.0, (b.lower - x).maxCoeff(), (x - b.upper).maxCoeff()});
                          },
                          [&](const Ball& b) { return std::max(0.0, (x - b.center).norm() - b.radius); },
                          [&](const DualHalfSpace& h) { return std::max(0.0, -h.slack(x)); },
                          [&](const Intersection& i) {
                              double v = 0.0;
                              for (const auto& p : i.parts) v = std::max(v, violation(p, x));
                              return v;
                          },
                      },
                      s.variant());
}

bool contains(const ConvexSet& s, const Vector& x, double tol) { return violation(s, x) <= tol; }

// ---------------------------------------------------------------------------
// Metric projection

namespace {

ProjectionResult project_two_halfspaces_euclidean(const DualHalfSpace& h1, const DualHalfSpace& h2,
                                                  const Vector& x, const ProjectionOptions& opt) {
    const double tol = opt.feasibility_tol;
    if (halfspace_feasible(h1, x, tol) && halfspace_feasible(h2, x, tol))
        return {x, {0.0, 0.0}, 0.0, 0};

    // Opposite normals bound a slab, empty when the offsets cross.
    const double n1 = h1.normal.coords.norm(), n2 = h2.normal.coords.norm();
    if (n1 > kDegenerateNormal && n2 > kDegenerateNormal &&
        h1.normal.coords.dot(h2.normal.coords) <= -(1.0 - 1e-12) * n1 * n2 &&
        h1.offset / n1 + h2.offset / n2 < -tol)
        throw InfeasibleError("two half-spaces: opposite normals with crossing offsets (empty slab)");

    auto single1 = project_halfspace_euclidean(h1, x);
    if (halfspace_feasible(h2, single1.point, tol)) return {single1.point, {single1.multipliers[0], 0.0}, 0.0, 1};
    auto single2 = project_halfspace_euclidean(h2, x);
    if (halfspace_feasible(h1, single2.point, tol)) return {single2.point, {0.0, single2.multipliers[0]}, 0.0, 2};

    double lambda = 0.0, mu = 0.0;
    if (solve_pair_euclidean(h1, h2, x, lambda, mu) && lambda >= -tol && mu >= -tol) {
        lambda = std::max(lambda, 0.0);
        mu = std::max(mu, 0.0);
        Vector y = x - lambda * h1.normal.coords - mu * h2.normal.coords;
        if (halfspace_feasible(h1, y, tol) && halfspace_feasible(h2, y, tol))
            return {std::move(y), {lambda, mu}, 0.0, 3};
    }
    throw InfeasibleError("two half-spaces: no active set yields a feasible point (empty intersection)");
}

Vector dykstra(const std::vector<const ConvexSet*>& sets, const Vector& x, const ProjectionOptions& opt,
               int& iterations) {
    const std::size_t m = sets.size();
    std::vector<Vector> increments(m, Vector::Zero(x.size()));
    Vector y = x;
    for (iterations = 1; iterations <= opt.dykstra_max_iterations; ++iterations) {
        const Vector cycle_start = y;
        double increment_change = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const Vector shifted = y + increments[i];
            y = project_leaf_metric(*sets[i], shifted, opt).point;
            const Vector next = shifted - y;
            increment_change += (next - increments[i]).squaredNorm();
            increments[i] = next;
        }
        // The iterate can sit still at a corner while the increments are still
        // rebalancing, so both must settle. On an empty intersection the increments
        // grow without bound and the loop runs into the cap.
        const double tol = opt.dykstra_tol * std::max(1.0, y.norm());
        if ((y - cycle_start).norm() <= tol && std::sqrt(increment_change) <= tol) {
            double gap = 0.0;
            for (const auto* s : sets) gap = std::max(gap, violation(*s, y));
            if (gap <= opt.feasibility_tol) return y;
            throw InfeasibleError("Dykstra stalled with positive infimum gap " + std::to_string(gap) +
                                  " (empty intersection)");
        }
    }
    double gap = 0.0;
    for (const auto* s : sets) gap = std::max(gap, violation(*s, y));
    if (gap > opt.feasibility_tol)
        throw InfeasibleError("Dykstra hit the iteration cap with infimum gap " + std::to_string(gap));
    return y;
}

} // namespace

ProjectionResult metric_project(const ConvexSet& s, const Vector& x, const ProjectionOptions& opt) {
    if (x.size() != s.dim()) throw ConfigurationError("metric_project: dimension mismatch");
    if (!s.get_if<Intersection>()) return project_leaf_metric(s, x, opt);

    auto parts = leaves(s);
    if (parts.empty()) return {x, {}, 0.0, 0};
    if (parts.size() == 1) return project_leaf_metric(*parts.front(), x, opt);
    if (parts.size() == 2) {
        const auto* h1 = parts[0]->get_if<DualHalfSpace>();
        const auto* h2 = parts[1]->get_if<DualHalfSpace>();
        if (h1 && h2) return project_two_halfspaces_euclidean(*h1, *h2, x, opt);
    }
    ProjectionResult r;
    r.point = dykstra(parts, x, opt, r.inner_iterations);
    for (const auto* p : parts) r.residual = std::max(r.residual, violation(*p, r.point));
    return r;
}

// ---------------------------------------------------------------------------
// Generalized projection

namespace {

// m(lambda) = <J^{-1}(Jx - lambda a), a> - b and its derivative.
struct ScalarDual {
    const SpaceGeometry& g;
    const DualVector& jx;
    const DualVector& a;
    double b;

    Vector point(double lambda) const { return g.inverse_duality_map(jx - lambda * a); }
    double value(double lambda) const { return pairing(point(lambda), a) - b; }
    double derivative(double lambda) const {
        const Eigen::MatrixXd jac = g.inverse_duality_jacobian(jx - lambda * a);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            if (a.coords[i] == 0.0) continue;
            for (Eigen::Index j = 0; j < a.size(); ++j) {
                if (a.coords[j] == 0.0) continue;
                acc += a.coords[i] * jac(i, j) * a.coords[j];
            }
        }
        return -acc;
    }
};

} // namespace

ProjectionResult project_halfspace_dual(const SpaceGeometry& g, const DualHalfSpace& h, const Vector& x,
                                        const ProjectionOptions& opt) {
    g.check_dim(x.size(), "project_halfspace_dual");
    g.check_dim(h.normal.size(), "project_halfspace_dual");
    if (h.normal.coords.norm() <= kDegenerateNormal) {
        if (h.offset < -std::max(opt.feasibility_tol, kDegenerateOffset))
            throw InfeasibleError("half-space with zero normal and negative offset is empty");
        return {x, {0.0}, 0.0, 0};
    }
    if (h.slack(x) >= 0.0) return {x, {0.0}, 0.0, 0};
    if (g.is_hilbert()) return project_halfspace_euclidean(h, x);

    const DualVector jx = g.duality_map(x);
    const ScalarDual m{g, jx, h.normal, h.offset};
    const double scale = halfspace_scale(h, x);
    const double target = opt.kkt_tol * scale;

    // Bracket the root; m(0) > 0 and m is strictly decreasing.
    double lo = 0.0;
    double m_lo = m.value(0.0);
    double hi = m_lo / h.normal.coords.squaredNorm();
    const double d0 = m.derivative(0.0);
    if (std::isfinite(d0) && d0 < 0.0) hi = m_lo / -d0;
    if (!(hi > 0.0) || !std::isfinite(hi)) hi = 1.0;
    double m_hi = m.value(hi);
    int doublings = 0;
    while (m_hi > 0.0) {
        lo = hi;
        m_lo = m_hi;
        hi *= 2.0;
        m_hi = m.value(hi);
        if (++doublings > 200)
            throw NumericalError("project_halfspace_dual: bracketing failed (degenerate normal?)");
    }

    // Safeguarded Newton: fall back to bisection whenever the Newton step leaves
    // the bracket, the derivative is unusable, or the step fails to halve.
    double lambda = (m_hi == 0.0) ? hi : 0.5 * (lo + hi);
    double value = m.value(lambda);
    double previous_step = hi - lo;
    int it = 0;
    for (; it < 200; ++it) {
        if (std::abs(value) <= 1e-15 * scale) break;
        if (value > 0.0) lo = lambda; else hi = lambda;
        const double dm = m.derivative(lambda);
        double next = 0.5 * (lo + hi);
        if (std::isfinite(dm) && dm < 0.0) {
            const double newton = lambda - value / dm;
            if (newton > lo && newton < hi && std::abs(newton - lambda) <= 0.5 * previous_step) next = newton;
        }
        previous_step = std::abs(next - lambda);
        if (next == lambda || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
            lambda = next;
            value = m.value(lambda);
            break;
        }
        lambda = next;
        value = m.value(lambda);
    }
    if (std::abs(value) > target)
        throw ConvergenceError("project_halfspace_dual: scalar dual did not converge", m.point(lambda),
                               std::abs(value));
    ProjectionResult r;
    r.point = m.point(lambda);
    r.multipliers = {lambda};
    r.residual = std::abs(value);
    r.inner_iterations = it + doublings;
    return r;
}

namespace {

// Both constraints active in a general geometry. The system
//   <J^{-1}(Jx - l a1 - u a2), a_i> = b_i
// is the gradient of the (concave) dual function; damped Newton with a central
// finite-difference Jacobian. Returns false when the Jacobian is singular.
bool solve_pair_general(const SpaceGeometry& g, const DualHalfSpace& h1, const DualHalfSpace& h2,
                        const Vector& x, const DualVector& jx, double lambda0, double mu0,
                        const ProjectionOptions& opt, double& lambda, double& mu, double& residual, int& iters) {
    auto F = [&](double l, double u) {
        const Vector y = g.inverse_duality_map(jx - l * h1.normal - u * h2.normal);
        return Eigen::Vector2d(pairing(y, h1.normal) - h1.offset, pairing(y, h2.normal) - h2.offset);
    };
    const double scale = std::max(halfspace_scale(h1, x), halfspace_scale(h2, x));
    Eigen::Vector2d w(lambda0, mu0);
    Eigen::Vector2d r = F(w[0], w[1]);
    for (iters = 0; iters < 100; ++iters) {
        if (r.lpNorm<Eigen::Infinity>() <= 1e-15 * scale) break;
        Eigen::Matrix2d jac;
        for (int k = 0; k < 2; ++k) {
            const double step = 1e-7 * std::max(1.0, std::abs(w[k]));
            Eigen::Vector2d wp = w, wm = w;
            wp[k] += step;
            wm[k] -= step;
            jac.col(k) = (F(wp[0], wp[1]) - F(wm[0], wm[1])) / (2.0 * step);
        }
        const double det = jac.determinant();
        const double jscale = jac.cwiseAbs().maxCoeff();
        if (!(std::abs(det) > 1e-13 * jscale * jscale)) return false;
        const Eigen::Vector2d dir = -jac.inverse() * r;
        double t = 1.0;
        bool improved = false;
        for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
            const Eigen::Vector2d trial = w + t * dir;
            const Eigen::Vector2d rt = F(trial[0], trial[1]);
            if (rt.norm() < r.norm()) {
                w = trial;
                r = rt;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    residual = r.lpNorm<Eigen::Infinity>();
    lambda = w[0];
    mu = w[1];
    if (residual > opt.kkt_tol * scale)
        throw ConvergenceError("project_two_halfspaces_dual: Newton stalled on the both-active system",
                               g.inverse_duality_map(jx - w[0] * h1.normal - w[1] * h2.normal), residual);
    return true;
}

} // namespace

ProjectionResult project_two_halfspaces_dual(const SpaceGeometry& g, const DualHalfSpace& h1,
                                             const DualHalfSpace& h2, const Vector& x,
                                             const ProjectionOptions& opt) {
    g.check_dim(x.size(), "project_two_halfspaces_dual");
    g.check_dim(h1.normal.size(), "project_two_halfspaces_dual");
    g.check_dim(h2.normal.size(), "project_two_halfspaces_dual");
    if (g.is_hilbert()) {
        if (is_full_space(h1)) {
            auto r = project_halfspace_euclidean(h2, x);
            return {r.point, {0.0, r.multipliers[0]}, 0.0, 1};
        }
        if (is_full_space(h2)) {
            auto r = project_halfspace_euclidean(h1, x);
            return {r.point, {r.multipliers[0], 0.0}, 0.0, 1};
        }
        return project_two_halfspaces_euclidean(h1, h2, x, opt);
    }

    const double tol = opt.feasibility_tol;
    if (halfspace_feasible(h1, x, tol) && halfspace_feasible(h2, x, tol))
        return {x, {0.0, 0.0}, 0.0, 0};

    // Opposite normals bound a slab, empty when the offsets cross.
    const double n1 = h1.normal.coords.norm(), n2 = h2.normal.coords.norm();
    if (n1 > kDegenerateNormal && n2 > kDegenerateNormal &&
        h1.normal.coords.dot(h2.normal.coords) <= -(1.0 - 1e-12) * n1 * n2 &&
        h1.offset / n1 + h2.offset / n2 < -tol)
        throw InfeasibleError("two half-spaces: opposite normals with crossing offsets (empty slab)");

    auto single1 = project_halfspace_dual(g, h1, x, opt);
    if (halfspace_feasible(h2, single1.point, tol))
        return {single1.point, {single1.multipliers[0], 0.0}, single1.residual, single1.inner_iterations};
    auto single2 = project_halfspace_dual(g, h2, x, opt);
    if (halfspace_feasible(h1, single2.point, tol))
        return {single2.point, {0.0, single2.multipliers[0]}, single2.residual,
                single1.inner_iterations + single2.inner_iterations};

    if (!is_full_space(h1) && !is_full_space(h2)) {
        const DualVector jx = g.duality_map(x);
        double lambda = 0.0, mu = 0.0, residual = 0.0;
        int iters = 0;
        if (solve_pair_general(g, h1, h2, x, jx, single1.multipliers[0], single2.multipliers[0], opt, lambda,
                               mu, residual, iters) &&
            lambda >= -tol && mu >= -tol) {
            lambda = std::max(lambda, 0.0);
            mu = std::max(mu, 0.0);
            Vector y = g.inverse_duality_map(jx - lambda * h1.normal - mu * h2.normal);
            if (halfspace_feasible(h1, y, tol) && halfspace_feasible(h2, y, tol))
                return {std::move(y), {lambda, mu}, residual,
                        single1.inner_iterations + single2.inner_iterations + iters};
        }
    }
    throw InfeasibleError("two half-spaces: no active set yields a feasible point (empty intersection)");
}

namespace {

// Projected gradient on f(y) = |y|^2 - 2 <y, Jx> with Barzilai-Borwein trial steps
// and Armijo backtracking. The projection step is the Euclidean projection onto s.
ProjectionResult projected_gradient(const SpaceGeometry& g, const ConvexSet& s, const Vector& x,
                                    const ProjectionOptions& opt) {
    const DualVector jx = g.duality_map(x);
    auto objective = [&](const Vector& y) {
        const double n = g.norm(y);
        return n * n - 2.0 * pairing(y, jx);
    };
    auto gradient = [&](const Vector& y) { return Vector(2.0 * (g.duality_map(y) - jx).coords); };
    auto project = [&](const Vector& v) { return metric_project(s, v, opt).point; };

    Vector y = project(x);
    double fy = objective(y);
    Vector gy = gradient(y);
    const double tol = opt.gradient_tol * std::max(1.0, g.norm(x));
    double t = 0.5;
    double stationarity = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt.max_inner_iterations; ++it) {
        stationarity = (y - project(y - 0.5 * gy)).norm();
        if (stationarity <= tol) return {y, {}, stationarity, it};

        bool accepted = false;
        Vector y_new;
        double f_new = 0.0;
        for (int bt = 0; bt < 80; ++bt, t *= 0.5) {
            y_new = project(y - t * gy);
            f_new = objective(y_new);
            const double slope = gy.dot(y_new - y);
            if (f_new <= fy + 1e-4 * slope + 1e-15 * std::max(1.0, std::abs(fy))) {
                accepted = true;
                break;
            }
        }
        if (!accepted || y_new == y) {
            // No representable decrease left.
            if (stationarity <= 1e3 * tol) return {y, {}, stationarity, it};
            throw ConvergenceError("generalized_project: line search stalled", y, stationarity);
        }
        const Vector g_new = gradient(y_new);
        const Vector sk = y_new - y;
        const double curvature = sk.dot(g_new - gy);
        t = curvature > 0.0 ? std::clamp(sk.squaredNorm() / curvature, 1e-10, 1e10) : 0.5;
        y = std::move(y_new);
        fy = f_new;
        gy = g_new;
    }
    throw ConvergenceError("generalized_project: projected gradient exceeded the iteration cap", y,
                           stationarity);
}

} // namespace

ProjectionResult generalized_project(const SpaceGeometry& g, const ConvexSet& s, const Vector& x,
                                     const ProjectionOptions& opt) {
    g.check_dim(x.size(), "generalized_project");
    g.check_dim(s.dim(), "generalized_project");
    if (g.is_hilbert()) return metric_project(s, x, opt);
    if (contains(s, x, 0.0)) return {x, {}, 0.0, 0};

    if (const auto* h = s.get_if<DualHalfSpace>()) return project_halfspace_dual(g, *h, x, opt);
    if (s.get_if<Intersection>()) {
        auto parts = leaves(s);
        if (parts.empty()) return {x, {}, 0.0, 0};
        if (parts.size() == 1) return generalized_project(g, *parts.front(), x, opt);
        if (parts.size() == 2) {
            const auto* h1 = parts[0]->get_if<DualHalfSpace>();
            const auto* h2 = parts[1]->get_if<DualHalfSpace>();
            if (h1 && h2) {
                // Nearly parallel normals make the both-active Newton system singular;
                // the first-order method still works there and detects true emptiness.
                try {
                    return project_two_halfspaces_dual(g, *h1, *h2, x, opt);
                } catch (const InfeasibleError&) {
                } catch (const ConvergenceError&) {
                }
            }
        }
    }
    return projected_gradient(g, s, x, opt);
}

// ---------------------------------------------------------------------------
// Oracle

Vector brute_force_project(const SpaceGeometry& g, const ConvexSet& s, const Vector& x,
                           const BruteForceOptions& opt) {
    g.check_dim(x.size(), "brute_force_project");
    if (contains(s, x, 0.0)) return x;
    const DualVector jx = g.duality_map(x);
    auto value = [&](const Vector& y) { return g.lyapunov(y, x); };
    auto project = [&](const Vector& v) { return metric_project(s, v).point; };

    Sampler rng(opt.seed);
    const double spread = 1.0 + x.norm();
    Vector best = project(x);
    double best_value = value(best);
    for (int start = 0; start < opt.starts; ++start) {
        Vector y = start == 0 ? project(x) : project(Vector(x + rng.uniform_cube(x.size(), spread)));
        for (int k = 0; k < opt.iterations; ++k) {
            const double step = 0.25 / std::sqrt(1.0 + k / 1000.0);
            const Vector grad = 2.0 * (g.duality_map(y) - jx).coords;
            Vector next = project(y - step * grad);
            const double moved = (next - y).norm();
            y = std::move(next);
            if (moved <= 1e-15 * (1.0 + y.norm())) break;
        }
        const double v = value(y);
        if (v < best_value) {
            best_value = v;
            best = y;
        }
    }
    return best;
}

} // namespace hybridcq
