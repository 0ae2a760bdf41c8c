#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hybridcq {

//! Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

//! Malformed input: dimension mismatch, bad parameter, schedule or scheme precondition breached.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

//! A value that the theory guarantees cannot occur (e.g. a negative Lyapunov gap).
class NumericalError : public Error {
public:
    using Error::Error;
};

//! The constraint set of a projection turned out to be empty.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

//! A point was passed to a mapping outside of its declared domain.
class DomainError : public Error {
public:
    using Error::Error;
};

//! The request is outside the certified set of constructions.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

//! An inner iterative solver ran out of iterations. Carries the best point found.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, Eigen::VectorXd best, double residual)
        : Error(what), best_(std::move(best)), residual_(residual) {}

    const Eigen::VectorXd& best_iterate() const { return best_; }
    double residual() const { return residual_; }

private:
    Eigen::VectorXd best_;
    double residual_;
};

//! One or more configuration fields failed validation; every message is kept.
class ValidationError : public ConfigurationError {
public:
    explicit ValidationError(std::vector<std::string> messages)
        : ConfigurationError(join(messages)), messages_(std::move(messages)) {}

    const std::vector<std::string>& messages() const { return messages_; }

private:
    static std::string join(const std::vector<std::string>& m) {
        std::string out;
        for (const auto& s : m) {
            if (!out.empty()) out += "\n";
            out += s;
        }
        return out;
    }

    std::vector<std::string> messages_;
};

} // namespace hybridcq
