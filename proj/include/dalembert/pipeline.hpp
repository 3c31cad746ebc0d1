#pragma once

// Scenario pipelines behind the command-line runner: solve, verify, action.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dalembert/scenario.hpp"

namespace dalembert {

struct SolveResult {
    Trajectory solve;                // in the solve chart
    std::optional<Trajectory> fixed; // pushed into the fixed chart, when a frame or constraint is present
};

/// Integrates the scenario's initial value problem. Throws ScenarioError
/// when solver.initial is missing, and solver errors as raised.
SolveResult run_solve(const Scenario &scenario);

/// Runs the scenario's boundary problem (solver.boundary unless overridden).
DiscretePath run_boundary(const Scenario &scenario, const std::optional<BoundaryData> &override = std::nullopt);

/// Header t, x1..xm, xd1..xdm, then q1..qn, qd1..qdn when a fixed-chart
/// trajectory is present; 17 significant digits.
void write_csv(std::ostream &out, const SolveResult &result);

struct CheckRecord {
    std::string name;
    std::string kind;
    std::string anchor;
    std::optional<double> value;
    double tolerance = 0.0;
    std::optional<double> lower;
    bool pass = false;
    std::string note;
};

struct VerificationReport {
    std::string scenario;
    std::vector<CheckRecord> checks;

    bool pass() const;
    std::string to_json() const;
    std::string to_text() const;
};

/// Descriptive label of the property a check kind establishes.
std::string check_anchor(const std::string &kind);

/// Runs every check in verify.checks. Upper tolerances are multiplied by
/// `tol_scale`. Errors raised inside a check fail that check only.
VerificationReport run_verify(const Scenario &scenario, double tol_scale = 1.0);

struct ActionValue {
    std::string label;
    double value = 0.0;
};

/// Continuous and discrete action values of the scenario's solutions.
std::vector<ActionValue> run_action(const Scenario &scenario);

/// Class name of an engine error ("DegenerateLagrangian", ...).
std::string error_kind(const std::exception &e);

} // namespace dalembert
