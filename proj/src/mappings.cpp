#include "hybridcq/mappings.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hybridcq/errors.hpp"

namespace hybridcq {

namespace {

constexpr double kDomainTol = 1e-9;

ConvexSet default_domain(int dim) { return Ball{Vector::Zero(dim), kDefaultDomainRadius}; }

} // namespace

// ---------------------------------------------------------------------------
// KSchedule

KSchedule KSchedule::constant(double value) {
    if (!(value >= 1.0) || !std::isfinite(value)) throw ConfigurationError("k schedule: constant must be >= 1");
    KSchedule k;
    k.kind_ = Kind::constant;
    k.value_ = value;
    return k;
}

KSchedule KSchedule::inverse_square() {
    KSchedule k;
    k.kind_ = Kind::inverse_square;
    return k;
}

KSchedule KSchedule::goebel_kirk(std::vector<double> coefficients) {
    KSchedule k;
    k.kind_ = Kind::goebel_kirk;
    k.coefficients_ = std::move(coefficients);
    return k;
}

double KSchedule::at(int n) const {
    const int idx = std::max(n, 1);
    switch (kind_) {
    case Kind::constant:
        return value_;
    case Kind::inverse_square: {
        const double s = static_cast<double>(idx) + 1.0;
        return 1.0 + 1.0 / (s * s);
    }
    case Kind::goebel_kirk: {
        // coefficients_[j] holds a_{j+2}.
        double prod = 2.0;
        const std::size_t upto = std::min<std::size_t>(static_cast<std::size_t>(idx - 1), coefficients_.size());
        for (std::size_t j = 0; j < upto; ++j) prod *= coefficients_[j];
        return std::max(1.0, prod);
    }
    }
    return 1.0;
}

const char* to_string(MappingKind k) {
    switch (k) {
    case MappingKind::rotation: return "rotation";
    case MappingKind::contraction: return "contraction";
    case MappingKind::metric_projection: return "metric_projection";
    case MappingKind::generalized_projection: return "generalized_projection";
    case MappingKind::averaged: return "averaged";
    case MappingKind::goebel_kirk: return "goebel_kirk";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// FixedSetRef

Vector FixedSetRef::project(const Vector& x) const { return generalized_project(geometry, set, x).point; }

Vector sample_point(Sampler& rng, const ConvexSet& region) {
    if (const auto* b = region.get_if<Ball>()) return rng.uniform_ball(b->center, b->radius);
    if (const auto* bx = region.get_if<Box>()) {
        Vector v(bx->lower.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(bx->lower[i], bx->upper[i]);
        return v;
    }
    return metric_project(region, rng.uniform_cube(region.dim(), kDefaultDomainRadius)).point;
}

Vector FixedSetRef::sample(Sampler& rng, const ConvexSet& around) const {
    return metric_project(set, sample_point(rng, around)).point;
}

// ---------------------------------------------------------------------------
// MappingSpec

MappingSpec::MappingSpec(MappingKind kind, SpaceGeometry g, ConvexSet domain)
    : kind_(kind), geometry_(std::move(g)), domain_(std::move(domain)), k_(KSchedule::constant(1.0)) {}

MappingSpec MappingSpec::rotation(double angle) {
    if (!std::isfinite(angle)) throw ConfigurationError("rotation: angle must be finite");
    MappingSpec m(MappingKind::rotation, SpaceGeometry::euclidean(2), default_domain(2));
    m.angle_ = angle;
    return m;
}

MappingSpec MappingSpec::contraction(double factor, Vector center) {
    if (!(factor >= 0.0 && factor < 1.0)) throw ConfigurationError("contraction: factor must lie in [0, 1)");
    const int d = static_cast<int>(center.size());
    MappingSpec m(MappingKind::contraction, SpaceGeometry::euclidean(d), default_domain(d));
    if (!contains(m.domain_, center, kDomainTol))
        throw ConfigurationError("contraction: center must lie in the domain");
    m.factor_ = factor;
    m.center_ = std::move(center);
    return m;
}

MappingSpec MappingSpec::metric_projection(ConvexSet target) {
    const int d = static_cast<int>(target.dim());
    MappingSpec m(MappingKind::metric_projection, SpaceGeometry::euclidean(d), default_domain(d));
    m.target_ = std::move(target);
    return m;
}

MappingSpec MappingSpec::generalized_projection(const SpaceGeometry& g, ConvexSet target) {
    g.check_dim(target.dim(), "generalized_projection");
    MappingSpec m(MappingKind::generalized_projection, g, default_domain(g.dim()));
    m.target_ = std::move(target);
    return m;
}

MappingSpec MappingSpec::averaged(const MappingSpec& inner, double weight) {
    if (!(weight >= 0.0 && weight < 1.0)) throw ConfigurationError("averaged: weight must lie in [0, 1)");
    MappingSpec m(MappingKind::averaged, inner.geometry_, inner.domain_);
    m.inner_ = std::make_shared<const MappingSpec>(inner);
    m.weight_ = weight;
    m.k_ = inner.k_;
    return m;
}

MappingSpec MappingSpec::goebel_kirk(int dim) {
    if (dim < 3) throw ConfigurationError("goebel_kirk: dimension must be at least 3");
    const double a = std::pow(0.5, 1.0 / static_cast<double>(dim - 2));
    return goebel_kirk(std::vector<double>(static_cast<std::size_t>(dim - 2), a));
}

MappingSpec MappingSpec::goebel_kirk(std::vector<double> coefficients) {
    if (coefficients.empty()) throw ConfigurationError("goebel_kirk: need at least one coefficient");
    for (double a : coefficients)
        if (!(a > 0.0 && a < 1.0)) throw ConfigurationError("goebel_kirk: coefficients must lie in (0, 1)");
    const double prod = std::accumulate(coefficients.begin(), coefficients.end(), 1.0, std::multiplies<>());
    if (std::abs(prod - 0.5) > 1e-12)
        throw ConfigurationError("goebel_kirk: coefficients must multiply to 1/2");
    const int d = static_cast<int>(coefficients.size()) + 2;
    MappingSpec m(MappingKind::goebel_kirk, SpaceGeometry::euclidean(d), Ball{Vector::Zero(d), 1.0});
    m.k_ = KSchedule::goebel_kirk(coefficients);
    m.coefficients_ = std::move(coefficients);
    return m;
}

MappingSpec MappingSpec::with_k_schedule(KSchedule k) const {
    MappingSpec m = *this;
    m.k_ = std::move(k);
    return m;
}

MappingSpec MappingSpec::with_domain(ConvexSet domain) const {
    geometry_.check_dim(domain.dim(), "with_domain");
    if (kind_ == MappingKind::goebel_kirk) throw UnsupportedError("goebel_kirk: the domain is fixed to the unit ball");
    MappingSpec m = *this;
    m.domain_ = std::move(domain);
    return m;
}

bool MappingSpec::is_nonexpansive() const {
    switch (kind_) {
    case MappingKind::rotation:
    case MappingKind::contraction:
    case MappingKind::metric_projection:
        return true;
    case MappingKind::generalized_projection:
        return geometry_.is_hilbert();
    case MappingKind::averaged:
        return inner_->is_nonexpansive();
    case MappingKind::goebel_kirk:
        return false;
    }
    return false;
}

bool MappingSpec::is_relatively_certified(const SpaceGeometry& g) const {
    if (g.dim() != dim()) return false;
    if (kind_ == MappingKind::generalized_projection) return g == geometry_ || (g.is_hilbert() && geometry_.is_hilbert());
    // Every other certified kind is a Hilbert-space construction, where relative
    // and plain asymptotic nonexpansiveness coincide.
    return g.is_hilbert();
}

Vector MappingSpec::apply_unchecked(const Vector& x) const {
    switch (kind_) {
    case MappingKind::rotation: {
        const double c = std::cos(angle_), s = std::sin(angle_);
        Vector out(2);
        out << c * x[0] - s * x[1], s * x[0] + c * x[1];
        return out;
    }
    case MappingKind::contraction:
        return center_ + factor_ * (x - center_);
    case MappingKind::metric_projection:
        return metric_project(*target_, x).point;
    case MappingKind::generalized_projection:
        return generalized_project(geometry_, *target_, x).point;
    case MappingKind::averaged:
        return weight_ * x + (1.0 - weight_) * inner_->apply(x);
    case MappingKind::goebel_kirk: {
        const Eigen::Index d = x.size();
        Vector out = Vector::Zero(d);
        out[1] = x[0] * x[0];
        for (Eigen::Index k = 2; k < d; ++k) out[k] = coefficients_[static_cast<std::size_t>(k - 2)] * x[k - 1];
        return out;
    }
    }
    throw UnsupportedError("apply: unknown mapping kind");
}

Vector MappingSpec::apply(const Vector& x) const {
    geometry_.check_dim(x.size(), "apply");
    if (!x.allFinite()) throw DomainError("apply: non-finite input");
    const double v = violation(domain_, x);
    if (v > kDomainTol) {
        std::ostringstream os;
        os << to_string(kind_) << ": point outside the domain C (violation " << v << ")";
        throw DomainError(os.str());
    }
    return apply_unchecked(x);
}

Vector MappingSpec::apply_power(const Vector& x, int n) const {
    if (n < 0) throw ConfigurationError("apply_power: negative power");
    Vector y = x;
    for (int i = 0; i < n; ++i) y = apply(y);
    return y;
}

FixedSetRef MappingSpec::fixed_set() const {
    switch (kind_) {
    case MappingKind::rotation: {
        const double turns = angle_ / (2.0 * M_PI);
        if (std::abs(turns - std::round(turns)) < 1e-12)
            throw UnsupportedError("rotation by a multiple of 2*pi fixes every point");
        return {ConvexSet::singleton(Vector::Zero(2)), geometry_};
    }
    case MappingKind::contraction:
        return {ConvexSet::singleton(center_), geometry_};
    case MappingKind::metric_projection:
    case MappingKind::generalized_projection:
        return {*target_, geometry_};
    case MappingKind::averaged:
        return {inner_->fixed_set().set, geometry_};
    case MappingKind::goebel_kirk:
        return {ConvexSet::singleton(Vector::Zero(dim())), geometry_};
    }
    throw UnsupportedError("fixed_set: uncertified mapping kind");
}

std::string MappingSpec::describe() const {
    std::ostringstream os;
    os << to_string(kind_) << "(dim=" << dim();
    switch (kind_) {
    case MappingKind::rotation: os << ", angle=" << angle_; break;
    case MappingKind::contraction: os << ", factor=" << factor_; break;
    case MappingKind::metric_projection:
    case MappingKind::generalized_projection: os << ", set=" << target_->describe(); break;
    case MappingKind::averaged: os << ", weight=" << weight_ << ", inner=" << inner_->describe(); break;
    case MappingKind::goebel_kirk: break;
    }
    os << ")";
    return os.str();
}

// ---------------------------------------------------------------------------

RelativeCheckReport verify_relative_asymptotic_nonexpansiveness(const MappingSpec& m, int samples,
                                                                std::uint64_t seed, int max_power, double tol) {
    if (samples <= 0) throw ConfigurationError("verify: samples must be positive");
    if (max_power <= 0) throw ConfigurationError("verify: max_power must be positive");
    const FixedSetRef fixed = m.fixed_set();
    const SpaceGeometry& g = m.geometry();
    Sampler rng(seed);
    RelativeCheckReport report;
    report.max_violation = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        const Vector x = sample_point(rng, m.domain());
        const Vector p = fixed.sample(rng, m.domain());
        const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_power)));
        const double k = m.k(n);
        const double gap = g.lyapunov(p, m.apply_power(x, n)) - k * k * g.lyapunov(p, x);
        if (gap > report.max_violation) {
            report.max_violation = gap;
            report.worst_x = x;
            report.worst_p = p;
            report.worst_n = n;
        }
        ++report.samples;
    }
    report.passed = report.max_violation <= tol;
    return report;
}

} // namespace hybridcq
