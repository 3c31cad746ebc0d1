#include "dalembert/errors.hpp"

#include <sstream>

namespace dalembert {

namespace {

std::string join(const std::vector<std::string> &items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    return out;
}

std::string format_number(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

} // namespace

DomainError::DomainError(std::string primitive, double argument)
    : Error("domain error in " + primitive + " at argument " + format_number(argument)),
      primitive_(std::move(primitive)), argument_(argument) {}

ParseError::ParseError(std::string message, std::size_t line, std::size_t column,
                       std::vector<std::string> expected)
    : Error("parse error at line " + std::to_string(line) + ", column " + std::to_string(column) +
            ": " + message + (expected.empty() ? "" : " (expected one of: " + join(expected) + ")")),
      detail_(std::move(message)), line_(line), column_(column), expected_(std::move(expected)) {}

UnboundVariable::UnboundVariable(std::string name)
    : Error("unbound variable '" + name + "'"), name_(std::move(name)) {}

SingularJacobian::SingularJacobian(const std::string &what, double condition)
    : Error(what + ": singular Jacobian (condition estimate " + format_number(condition) + ")"),
      condition_(condition) {}

RankDeficiency::RankDeficiency(std::size_t expected, std::size_t found, double t)
    : Error("embedding Jacobian has rank " + std::to_string(found) + ", expected " +
            std::to_string(expected) + " at t = " + format_number(t)),
      found_(found) {}

FrameValidityError::FrameValidityError(double t, double lo, double hi)
    : Error("time " + format_number(t) + " outside frame validity interval [" + format_number(lo) +
            ", " + format_number(hi) + "]"),
      t_(t) {}

DegenerateLagrangian::DegenerateLagrangian(const std::string &what, double t, double condition)
    : Error("DegenerateLagrangian at t = " + format_number(t) + ": " + what +
            " (condition estimate " + format_number(condition) + ")"),
      t_(t), condition_(condition) {}

NewtonDivergence::NewtonDivergence(double t, double residual)
    : Error("implicit step Newton iteration diverged at t = " + format_number(t) +
            " (last update norm " + format_number(residual) + ")"),
      t_(t) {}

AsymmetricHessian::AsymmetricHessian(std::size_t i, std::size_t j, double difference)
    : Error("velocity Hessian asymmetric at (" + std::to_string(i) + ", " + std::to_string(j) +
            "): difference " + format_number(difference)) {}

UnknownFrame::UnknownFrame(const std::string &id) : Error("unknown frame id '" + id + "'") {}

ScenarioError::ScenarioError(std::string field, const std::string &message)
    : Error("scenario field '" + field + "': " + message), field_(std::move(field)) {}

} // namespace dalembert
