#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dalembert {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A smooth primitive was evaluated outside its domain (log of a
/// non-positive number, division by zero, ...).
class DomainError : public Error {
public:
    DomainError(std::string primitive, double argument);

    const std::string &primitive() const noexcept { return primitive_; }
    double argument() const noexcept { return argument_; }

private:
    std::string primitive_;
    double argument_;
};

/// Syntax or vocabulary error while parsing an expression.
class ParseError : public Error {
public:
    ParseError(std::string message, std::size_t line, std::size_t column,
               std::vector<std::string> expected = {});

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::vector<std::string> &expected() const noexcept { return expected_; }
    const std::string &detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::size_t line_;
    std::size_t column_;
    std::vector<std::string> expected_;
};

class UnboundVariable : public Error {
public:
    explicit UnboundVariable(std::string name);
    const std::string &name() const noexcept { return name_; }

private:
    std::string name_;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Square Jacobian whose condition estimate exceeds the singularity threshold.
class SingularJacobian : public Error {
public:
    SingularJacobian(const std::string &what, double condition);
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// Embedding Jacobian of lower rank than the intrinsic dimension.
class RankDeficiency : public Error {
public:
    RankDeficiency(std::size_t expected, std::size_t found, double t);
    std::size_t rank() const noexcept { return found_; }

private:
    std::size_t found_;
};

/// Pointwise Newton inversion of a frame map did not converge.
class InversionFailure : public Error {
public:
    using Error::Error;
};

class FrameValidityError : public Error {
public:
    FrameValidityError(double t, double lo, double hi);
    double time() const noexcept { return t_; }

private:
    double t_;
};

/// The velocity Hessian (or the Newton system of a boundary problem) is
/// singular; the engine refuses to produce a trajectory.
class DegenerateLagrangian : public Error {
public:
    DegenerateLagrangian(const std::string &what, double t, double condition);
    double time() const noexcept { return t_; }
    double condition() const noexcept { return condition_; }

private:
    double t_;
    double condition_;
};

/// Inner Newton iteration of an implicit integrator failed.
class NewtonDivergence : public Error {
public:
    NewtonDivergence(double t, double residual);
    double time() const noexcept { return t_; }

private:
    double t_;
};

/// Mixed second derivatives that disagree beyond tolerance: the function is
/// not smooth at the evaluation point.
class AsymmetricHessian : public Error {
public:
    AsymmetricHessian(std::size_t i, std::size_t j, double difference);
};

class UnknownFrame : public Error {
public:
    explicit UnknownFrame(const std::string &id);
};

/// Malformed or inconsistent scenario file; names the offending field.
class ScenarioError : public Error {
public:
    ScenarioError(std::string field, const std::string &message);
    const std::string &field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace dalembert
