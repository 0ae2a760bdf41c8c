#include "hybridcq/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hybridcq/errors.hpp"

namespace hybridcq {

namespace {

// ||v||_r computed with scaling so large or tiny coordinates do not overflow.
double lr_norm(const Eigen::VectorXd& v, double r) {
    const double m = v.cwiseAbs().maxCoeff();
    if (!(m > 0.0)) return 0.0;
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v[i]) / m, r);
    return m * std::pow(s, 1.0 / r);
}

// Normalized duality map of (R^d, ||.||_r): |v|^{2-r} |v_i|^{r-1} sign(v_i).
Eigen::VectorXd lr_duality(const Eigen::VectorXd& v, double r) {
    const double n = lr_norm(v, r);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
    if (n == 0.0) return out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] == 0.0) continue;
        const double mag = n * std::pow(std::abs(v[i]) / n, r - 1.0);
        out[i] = std::copysign(mag, v[i]);
    }
    return out;
}

Eigen::MatrixXd lr_duality_jacobian(const Eigen::VectorXd& v, double r) {
    const Eigen::Index d = v.size();
    const double n = lr_norm(v, r);
    if (n == 0.0 || r == 2.0) return Eigen::MatrixXd::Identity(d, d);
    // Work with u = v / |v| so every power is O(1); the map is 1-homogeneous so
    // its Jacobian is 0-homogeneous.
    Eigen::VectorXd s(d);
    Eigen::VectorXd diag(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double u = std::abs(v[i]) / n;
        s[i] = std::copysign(std::pow(u, r - 1.0), v[i]);
        if (v[i] == 0.0) s[i] = 0.0;
        diag[i] = (r - 1.0) * std::pow(u, r - 2.0);
    }
    Eigen::MatrixXd jac = (2.0 - r) * s * s.transpose();
    jac.diagonal() += diag;
    return jac;
}

// |x|_r^2 - |y|_r^2 without subtracting two nearby squares: each |a|^r - |b|^r
// and the final power go through expm1/log1p of a small relative change.
double lr_norm_squared_difference(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double r) {
    const double m = std::max(x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff());
    if (!(m > 0.0)) return 0.0;
    double sx = 0.0, sy = 0.0, diff = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double a = std::abs(x[i]) / m;
        const double b = std::abs(y[i]) / m;
        const double pa = std::pow(a, r);
        const double pb = std::pow(b, r);
        sx += pa;
        sy += pb;
        // log1p is ill-conditioned near -1, so only nearby pairs take that route.
        if (b > 0.0 && a >= 0.5 * b && a <= 2.0 * b) diff += pb * std::expm1(r * std::log1p((a - b) / b));
        else diff += pa - pb;
    }
    double out = 0.0;
    if (sy == 0.0) out = std::pow(sx, 2.0 / r);
    else if (std::abs(diff) <= 0.5 * sy) out = std::pow(sy, 2.0 / r) * std::expm1((2.0 / r) * std::log1p(diff / sy));
    else out = std::pow(sx, 2.0 / r) - std::pow(sy, 2.0 / r);
    return out * m * m;
}

} // namespace

double pairing(const Vector& x, const DualVector& f) {
    if (x.size() != f.size())
        throw ConfigurationError("pairing: dimension mismatch (" + std::to_string(x.size()) +
                                 " vs " + std::to_string(f.size()) + ")");
    return x.dot(f.coords);
}

SpaceGeometry::SpaceGeometry(GeometryKind kind, int dim, double p)
    : kind_(kind), dim_(dim), p_(p), q_(p / (p - 1.0)) {
    if (dim <= 0) throw ConfigurationError("geometry: dimension must be positive");
    if (!(p > 1.0) || !std::isfinite(p))
        throw ConfigurationError("geometry: p must lie in (1, inf), got " + std::to_string(p));
}

SpaceGeometry SpaceGeometry::euclidean(int dim) { return {GeometryKind::euclidean, dim, 2.0}; }

SpaceGeometry SpaceGeometry::p_norm(int dim, double p) { return {GeometryKind::p_norm, dim, p}; }

void SpaceGeometry::check_dim(Eigen::Index n, const char* what) const {
    if (n != dim_)
        throw ConfigurationError(std::string(what) + ": expected dimension " + std::to_string(dim_) +
                                 ", got " + std::to_string(n));
}

double SpaceGeometry::norm(const Vector& x) const {
    check_dim(x.size(), "norm");
    if (is_hilbert()) return x.norm();
    return lr_norm(x, p_);
}

double SpaceGeometry::norm_squared(const Vector& x) const {
    check_dim(x.size(), "norm_squared");
    if (is_hilbert()) return x.squaredNorm();
    const double n = lr_norm(x, p_);
    return n * n;
}

double SpaceGeometry::norm_squared_difference(const Vector& x, const Vector& y) const {
    check_dim(x.size(), "norm_squared_difference");
    check_dim(y.size(), "norm_squared_difference");
    if (is_hilbert()) return (x - y).dot(x + y);
    return lr_norm_squared_difference(x, y, p_);
}

double SpaceGeometry::dual_norm(const DualVector& f) const {
    check_dim(f.size(), "dual_norm");
    if (is_hilbert()) return f.coords.norm();
    return lr_norm(f.coords, q_);
}

DualVector SpaceGeometry::duality_map(const Vector& x) const {
    check_dim(x.size(), "duality_map");
    if (is_hilbert()) return DualVector(x);
    return DualVector(lr_duality(x, p_));
}

Vector SpaceGeometry::inverse_duality_map(const DualVector& f) const {
    check_dim(f.size(), "inverse_duality_map");
    if (is_hilbert()) return f.coords;
    return lr_duality(f.coords, q_);
}

Eigen::MatrixXd SpaceGeometry::inverse_duality_jacobian(const DualVector& f) const {
    check_dim(f.size(), "inverse_duality_jacobian");
    if (is_hilbert()) return Eigen::MatrixXd::Identity(dim_, dim_);
    return lr_duality_jacobian(f.coords, q_);
}

double SpaceGeometry::lyapunov(const Vector& x, const Vector& y) const {
    check_dim(x.size(), "lyapunov");
    check_dim(y.size(), "lyapunov");
    if (is_hilbert()) return (x - y).squaredNorm();
    const double nx = norm(x);
    const double ny = norm(y);
    // Uses <y, Jy> = |y|^2: phi = (|x|^2 - |y|^2) - 2 <x - y, Jy>. Both terms vanish
    // to first order as x -> y, so nearby points keep their relative accuracy.
    const double v = norm_squared_difference(x, y) - 2.0 * pairing(x - y, duality_map(y));
    if (v >= 0.0) return v;
    // Cancellation error scales with the magnitude of the summands.
    const double floor = -kLyapunovRoundoff * std::max(1.0, nx * nx + ny * ny);
    if (v >= floor) return 0.0;
    throw NumericalError("lyapunov: negative value " + std::to_string(v) +
                         " violates the lower sandwich bound");
}

} // namespace hybridcq
