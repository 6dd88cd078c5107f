#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cnb {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Mismatched curvature signs, or an operation applied on the wrong manifold.
class DomainError : public Error {
public:
    using Error::Error;
};

// A point or vector fails its manifold constraint beyond tolerance.
class ConstraintViolation : public Error {
public:
    using Error::Error;
};

enum class SingularityKind { Collision, Antipodal };

class SingularityError : public Error {
public:
    SingularityError(SingularityKind kind, std::optional<std::size_t> i, std::optional<std::size_t> j,
                     double bracket, double time = std::numeric_limits<double>::quiet_NaN());

    SingularityKind kind() const noexcept { return kind_; }
    std::optional<std::size_t> first() const noexcept { return i_; }
    std::optional<std::size_t> second() const noexcept { return j_; }
    double bracket() const noexcept { return bracket_; }
    double time() const noexcept { return time_; }

    SingularityError at_time(double t) const;
    SingularityError with_pair(std::size_t i, std::size_t j) const;

private:
    SingularityKind kind_;
    std::optional<std::size_t> i_, j_;
    double bracket_;
    double time_;
};

class ProjectionSingularity : public Error {
public:
    using Error::Error;
};

// Parameter or schema violation. Carries every offending field name.
class ValidationError : public Error {
public:
    ValidationError(std::vector<std::string> fields, const std::string& message);
    explicit ValidationError(const std::string& field, const std::string& message)
        : ValidationError(std::vector<std::string>{field}, message) {}

    const std::vector<std::string>& fields() const noexcept { return fields_; }
    /// The message without the appended field list.
    const std::string& reason() const noexcept { return reason_; }

private:
    std::vector<std::string> fields_;
    std::string reason_;
};

// A closed-form candidate failed residual substitution into the equations of motion.
class FamilyValidationError : public Error {
public:
    FamilyValidationError(const std::string& message, double max_residual)
        : Error(message), max_residual_(max_residual) {}
    double max_residual() const noexcept { return max_residual_; }

private:
    double max_residual_;
};

class StepRejected : public Error {
public:
    StepRejected(double drift, double limit, double time);
    double drift() const noexcept { return drift_; }
    double time() const noexcept { return time_; }

private:
    double drift_;
    double time_;
};

class NotRigidRotation : public Error {
public:
    NotRigidRotation(double reconstruction_error, double limit);
    double reconstruction_error() const noexcept { return error_; }

private:
    double error_;
};

/// Unreadable, unwritable or malformed files. `line` is 1-based when known.
class IoError : public Error {
public:
    IoError(std::string path, const std::string& message, std::optional<std::size_t> line = std::nullopt);
    const std::string& path() const noexcept { return path_; }
    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    std::string path_;
    std::optional<std::size_t> line_;
};

}  // namespace cnb
