#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hybridcq/convex_sets.hpp"
#include "hybridcq/geometry.hpp"
#include "hybridcq/random.hpp"

namespace hybridcq {

//! Asymptotic constants k_n >= 1, k_n -> 1.
class KSchedule {
public:
    enum class Kind { constant, inverse_square, goebel_kirk };

    //! k_n = value for all n.
    static KSchedule constant(double value = 1.0);
    //! k_n = 1 + 1 / (n + 1)^2. A valid (loose) upper bound for any nonexpansive map.
    static KSchedule inverse_square();
    //! k_n = max(1, 2 prod_{i=2}^{min(n, d-1)} a_i).
    static KSchedule goebel_kirk(std::vector<double> coefficients);

    Kind kind() const { return kind_; }
    //! Iteration n consumes k_n; n = 0 uses k_1.
    double at(int n) const;
    const std::vector<double>& coefficients() const { return coefficients_; }
    double value() const { return value_; }

private:
    Kind kind_ = Kind::constant;
    double value_ = 1.0;
    std::vector<double> coefficients_;
};

enum class MappingKind { rotation, contraction, metric_projection, generalized_projection, averaged, goebel_kirk };

const char* to_string(MappingKind k);

//! Known fixed-point set F(T) together with the ambient geometry used to project on it.
struct FixedSetRef {
    ConvexSet set;
    SpaceGeometry geometry;

    //! Pi_{F(T)} x in the ambient geometry.
    Vector project(const Vector& x) const;
    //! Some point of F(T), drawn by projecting a random point of `around`.
    Vector sample(Sampler& rng, const ConvexSet& around) const;
};

//! Test operator T: C -> C with certified constants k_n and known F(T). Immutable.
class MappingSpec {
public:
    static MappingSpec rotation(double angle);
    static MappingSpec contraction(double factor, Vector center);
    static MappingSpec metric_projection(ConvexSet target);
    static MappingSpec generalized_projection(const SpaceGeometry& g, ConvexSet target);
    static MappingSpec averaged(const MappingSpec& inner, double weight);
    //! Uniform coefficients a_i = 2^{-1/(d-2)}, so prod_{i=2}^{d-1} a_i = 1/2.
    static MappingSpec goebel_kirk(int dim);
    static MappingSpec goebel_kirk(std::vector<double> coefficients);

    MappingKind kind() const { return kind_; }
    const SpaceGeometry& geometry() const { return geometry_; }
    int dim() const { return geometry_.dim(); }
    //! Domain C. A ball of radius 10 about the origin unless overridden; the unit
    //! ball for goebel_kirk.
    const ConvexSet& domain() const { return domain_; }
    const KSchedule& k_schedule() const { return k_; }
    double k(int n) const { return k_.at(n); }
    //! True when ||Tx - Ty|| <= ||x - y|| is certified.
    bool is_nonexpansive() const;
    //! True when phi(p, T^n x) <= k_n^2 phi(p, x) is certified in geometry g.
    bool is_relatively_certified(const SpaceGeometry& g) const;

    MappingSpec with_k_schedule(KSchedule k) const;
    MappingSpec with_domain(ConvexSet domain) const;

    double angle() const { return angle_; }
    double factor() const { return factor_; }
    const Vector& center() const { return center_; }
    const ConvexSet* target() const { return target_ ? &*target_ : nullptr; }
    const MappingSpec* inner() const { return inner_.get(); }
    double weight() const { return weight_; }
    const std::vector<double>& coefficients() const { return coefficients_; }

    //! Tx. Throws DomainError when x is outside C (tolerance 1e-9).
    Vector apply(const Vector& x) const;
    //! T^n x by n-fold application.
    Vector apply_power(const Vector& x, int n) const;
    FixedSetRef fixed_set() const;

    std::string describe() const;

private:
    MappingSpec(MappingKind kind, SpaceGeometry g, ConvexSet domain);

    Vector apply_unchecked(const Vector& x) const;

    MappingKind kind_;
    SpaceGeometry geometry_;
    ConvexSet domain_;
    KSchedule k_;
    double angle_ = 0.0;
    double factor_ = 0.0;
    Vector center_;
    std::optional<ConvexSet> target_;
    std::shared_ptr<const MappingSpec> inner_;
    double weight_ = 0.0;
    std::vector<double> coefficients_;
};

inline constexpr double kDefaultDomainRadius = 10.0;

//! Random point of a ball or box (uniform); other sets get a projected cube sample.
Vector sample_point(Sampler& rng, const ConvexSet& region);

struct RelativeCheckReport {
    double max_violation = 0.0;
    Vector worst_x;
    Vector worst_p;
    int worst_n = 0;
    int samples = 0;
    bool passed = true;
};

//! Samples x in C, p in F(T), n in 1..max_power and checks
//! phi(p, T^n x) <= k_n^2 phi(p, x) + tol in the mapping's geometry.
RelativeCheckReport verify_relative_asymptotic_nonexpansiveness(const MappingSpec& m, int samples,
                                                                std::uint64_t seed = 1, int max_power = 20,
                                                                double tol = 1e-8);

} // namespace hybridcq
