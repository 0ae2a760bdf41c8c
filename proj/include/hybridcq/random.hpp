#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace hybridcq {

//! Seeded sampler with platform-independent output.
//!
//! std::uniform_real_distribution is implementation defined, so reals are built
//! directly from the 53 high bits of mt19937_64.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    double normal() {
        // Box-Muller, one value per call.
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Eigen::VectorXd uniform_cube(Eigen::Index d, double radius) {
        Eigen::VectorXd v(d);
        for (Eigen::Index i = 0; i < d; ++i) v[i] = uniform(-radius, radius);
        return v;
    }

    //! Uniform in the Euclidean ball of the given center and radius.
    Eigen::VectorXd uniform_ball(const Eigen::VectorXd& center, double radius) {
        const Eigen::Index d = center.size();
        Eigen::VectorXd g(d);
        for (Eigen::Index i = 0; i < d; ++i) g[i] = normal();
        const double n = g.norm();
        if (n == 0.0) return center;
        const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(d));
        return center + (r / n) * g;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace hybridcq
