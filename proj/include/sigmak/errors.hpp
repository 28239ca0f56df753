#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sigmak {

/// Input outside the mathematical domain of an operation (u <= 0, lambda
/// outside the cone, r <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure could not produce a trustworthy value (singular
/// metric, failed factorization, non-bracketing bisection).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Eigenvalues left the admissible cone at a discretization node.
class ConeExitError : public DomainError {
public:
    ConeExitError(const std::string& what, std::size_t node)
        : DomainError(what), node_(node) {}

    [[nodiscard]] std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

/// Invalid configuration or precondition on a campaign/sweep setup.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace sigmak
