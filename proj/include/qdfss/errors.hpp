#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qdfss {

/// Invalid or unparsable run configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative solver failed to reach its tolerance (CLI exit code 3).
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double final_residual,
                std::vector<double> history = {})
        : std::runtime_error(what), residual_(final_residual), history_(std::move(history)) {}

    double final_residual() const noexcept { return residual_; }
    const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    double residual_;
    std::vector<double> history_;
};

/// Device geometry violates a containment or resolution requirement (CLI exit code 4).
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qdfss
