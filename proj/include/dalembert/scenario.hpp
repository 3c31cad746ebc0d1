#pragma once

// Scenario files: YAML documents whose sections mirror the library modules.
// See the README for the schema.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dalembert/constraints.hpp"
#include "dalembert/frames.hpp"
#include "dalembert/mechanics.hpp"
#include "dalembert/solvers.hpp"
#include "dalembert/spacetime.hpp"

namespace dalembert {

struct InitialData {
    Vector position;
    Vector velocity;
    /// True when given in the fixed chart and pulled back through the frame.
    bool fixed_chart = false;
};

struct BoundaryData {
    Vector start;
    Vector end;
    double a = 0.0;
    double b = 1.0;
    std::size_t nodes = kDefaultNodes;
};

struct SolverSettings {
    Method method = Method::Rk4;
    double step = kDefaultStep;
    double a = 0.0;
    double b = 1.0;
    std::optional<InitialData> initial;
    std::optional<BoundaryData> boundary;
};

/// One requested verification. `kind` selects the procedure; the optional
/// fields are read by the kinds that need them.
struct CheckSpec {
    std::string kind;
    std::string name;
    double tolerance = 0.0;
    std::optional<double> lower;
    std::vector<Expr> exact;
    std::string expect;   // error class for expect_error
    std::string pipeline; // "ivp" or "bvp" for expect_error
    std::optional<BoundaryData> boundary;
};

struct VerifySettings {
    std::size_t samples = 20;
    std::uint64_t seed = 1;
    std::vector<CheckSpec> checks;
};

struct OutputSettings {
    std::string trajectory;
    std::string report;
};

struct Scenario {
    std::string name;
    std::string description;
    Constants parameters;

    std::size_t dimension = 0;
    std::optional<Expr> lagrangian;
    std::optional<FrameMap> frame;
    std::optional<ConstraintEmbedding> constraint;
    std::optional<FrameAtlas> atlas;

    SolverSettings solver;
    VerifySettings verify;
    OutputSettings output;

    /// L in the fixed (or standard) chart. Throws ScenarioError when the
    /// lagrangian section is missing.
    LagrangianSystem fixed_lagrangian() const;
    /// The Lagrangian the solvers run on: pulled back through the frame or
    /// the constraint when one is present.
    LagrangianSystem solve_lagrangian() const;
    std::size_t solve_dimension() const;

    /// Fixed-chart map of the solve chart, if any (frame or constraint).
    const ParametricMap *solve_map() const;
};

/// Throws ScenarioError naming the offending field (with line and column
/// for YAML and expression syntax errors).
Scenario parse_scenario(const std::string &text, const std::string &fallback_name = "scenario");
Scenario load_scenario(const std::filesystem::path &path);

} // namespace dalembert
