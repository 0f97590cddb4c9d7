#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace cutbiot {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Invalid user input: box, degrees, physical or stabilization parameters.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Cut-cell reconstruction failed: the level set could not be resolved
/// linearly at the maximum subdivision depth.
class GeometryResolutionError : public std::runtime_error {
public:
    GeometryResolutionError(const std::string& what, int cell)
        : std::runtime_error(what), cell_(cell) {}
    int cell() const { return cell_; }

private:
    int cell_;
};

/// Both boundary parts pass through the same point of a cell.
class GeometryConflictError : public std::runtime_error {
public:
    GeometryConflictError(const std::string& what, int cell)
        : std::runtime_error(what), cell_(cell) {}
    int cell() const { return cell_; }

private:
    int cell_;
};

/// Inconsistent dof layout or missing quadrature data during assembly.
class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Factorization breakdown. `location` is the row where the residual of the
/// failed solve is largest (-1 if unknown).
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, long location = -1)
        : std::runtime_error(what), location_(location) {}
    long location() const { return location_; }

private:
    long location_;
};

void log_warning(const std::string& msg);
void set_warnings_enabled(bool on);

} // namespace cutbiot
