#pragma once

#include <Eigen/Core>

namespace hybridcq {

//! Primal point of the ambient space R^d.
using Vector = Eigen::VectorXd;

//! Element of the dual space. Only meaningful through pairing() against a Vector.
struct DualVector {
    Eigen::VectorXd coords;

    DualVector() = default;
    explicit DualVector(Eigen::VectorXd c) : coords(std::move(c)) {}

    static DualVector zero(Eigen::Index d) { return DualVector(Eigen::VectorXd::Zero(d)); }

    Eigen::Index size() const { return coords.size(); }

    DualVector& operator+=(const DualVector& o) { coords += o.coords; return *this; }
    DualVector& operator-=(const DualVector& o) { coords -= o.coords; return *this; }
    DualVector& operator*=(double s) { coords *= s; return *this; }

    friend DualVector operator+(DualVector a, const DualVector& b) { return a += b; }
    friend DualVector operator-(DualVector a, const DualVector& b) { return a -= b; }
    friend DualVector operator*(double s, DualVector a) { return a *= s; }
    friend DualVector operator*(DualVector a, double s) { return a *= s; }
    friend DualVector operator-(DualVector a) { a.coords = -a.coords; return a; }
};

//! Coordinate pairing <x, f>.
double pairing(const Vector& x, const DualVector& f);

enum class GeometryKind { euclidean, p_norm };

//! R^d with either the Euclidean norm or the p-norm, 1 < p < inf.
//!
//! The p-norm space is uniformly convex and uniformly smooth, so the normalized
//! duality map J is single valued and bijective with inverse given by the duality
//! map of the conjugate exponent q = p / (p - 1).
class SpaceGeometry {
public:
    static SpaceGeometry euclidean(int dim);
    static SpaceGeometry p_norm(int dim, double p);

    GeometryKind kind() const { return kind_; }
    bool is_euclidean() const { return kind_ == GeometryKind::euclidean; }
    //! True for euclidean and for p_norm with p == 2.
    bool is_hilbert() const { return kind_ == GeometryKind::euclidean || p_ == 2.0; }
    int dim() const { return dim_; }
    double p() const { return p_; }
    //! Conjugate exponent.
    double q() const { return q_; }

    double norm(const Vector& x) const;
    double dual_norm(const DualVector& f) const;
    //! ||x||^2; exact squaredNorm() in Hilbert geometry.
    double norm_squared(const Vector& x) const;
    //! ||x||^2 - ||y||^2, accurate relative to |x - y| when x and y are close.
    double norm_squared_difference(const Vector& x, const Vector& y) const;

    //! (Jx)_i = |x|^{2-p} |x_i|^{p-1} sign(x_i); J(0) = 0.
    DualVector duality_map(const Vector& x) const;
    //! Duality map of the dual space, the inverse of duality_map.
    Vector inverse_duality_map(const DualVector& f) const;

    //! phi(x, y) = |x|^2 - 2 <x, Jy> + |y|^2.
    double lyapunov(const Vector& x, const Vector& y) const;

    //! Jacobian of inverse_duality_map at f. Entries may be infinite where a
    //! coordinate of f vanishes and q < 2.
    Eigen::MatrixXd inverse_duality_jacobian(const DualVector& f) const;

    void check_dim(Eigen::Index n, const char* what) const;

    friend bool operator==(const SpaceGeometry& a, const SpaceGeometry& b) {
        return a.kind_ == b.kind_ && a.dim_ == b.dim_ && a.p_ == b.p_;
    }

private:
    SpaceGeometry(GeometryKind kind, int dim, double p);

    GeometryKind kind_;
    int dim_;
    double p_;
    double q_;
};

//! Round-off below this magnitude in phi is clamped to zero.
inline constexpr double kLyapunovRoundoff = 1e-12;

} // namespace hybridcq
