#pragma once

// Two independent routes to motions: initial-value integration of the
// explicit Euler-Lagrange equations, and Newton stationarization of the
// midpoint-discretized action with fixed endpoints.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "dalembert/mechanics.hpp"

namespace dalembert {

enum class Method { Rk4, ImplicitMidpoint };

std::string_view method_name(Method m);
/// Accepts "rk4" and "implicit_midpoint".
Method parse_method(std::string_view name);

inline constexpr double kDefaultStep = 1e-3;
inline constexpr std::size_t kDefaultNodes = 200;

/// Inner Newton iteration of the implicit midpoint rule.
inline constexpr double kImplicitTolerance = 1e-12;
inline constexpr int kImplicitMaxIterations = 50;

/// Integrates (q, qd) from t = a to t = b. The step is adjusted to divide
/// [a, b] into a whole number of equal steps. Every sample stores the
/// acceleration from el_accelerations. Throws DegenerateLagrangian and
/// NewtonDivergence.
Trajectory integrate_el(const LagrangianSystem &L, const Vector &q0, const Vector &v0, double a, double b,
                        double step = kDefaultStep, Method method = Method::Rk4);

/// Nodes q_0..q_N (columns) at uniform times over [a, b].
struct DiscretePath {
    Matrix nodes;
    double a = 0.0;
    double b = 1.0;
    bool fixed_start = true;
    bool fixed_end = true;

    std::size_t panels() const noexcept { return static_cast<std::size_t>(nodes.cols()) - 1; }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(nodes.rows()); }
    double step() const noexcept { return (b - a) / static_cast<double>(panels()); }
    double time(std::size_t k) const noexcept { return a + static_cast<double>(k) * step(); }

    /// Straight line between the endpoints.
    static DiscretePath linear(const Vector &qa, const Vector &qb, double a, double b, std::size_t N);
    /// Nodes sampled from a trajectory-like callable q(t).
    template <typename F>
    static DiscretePath sampled(F &&q, std::size_t n, double a, double b, std::size_t N) {
        DiscretePath p{Matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(N + 1)), a, b};
        for (std::size_t k = 0; k <= N; ++k) p.nodes.col(static_cast<Eigen::Index>(k)) = q(p.time(k));
        return p;
    }
    /// Linear interpolation of the nodes at time t.
    Vector at(double t) const;
};

/// S_d = sum_k h L((q_k + q_{k+1})/2, (q_{k+1} - q_k)/h, t_k + h/2).
double discrete_action(const LagrangianSystem &L, const DiscretePath &path);

/// dS_d/dq_k for every node, as an n x (N+1) matrix.
Matrix discrete_action_gradient(const LagrangianSystem &L, const DiscretePath &path);

struct StationaryOptions {
    double gradient_tolerance = 1e-10;
    int max_iterations = 200;
    int max_halvings = 30;
    /// Reject boundary problems whose extrapolated discrete Jacobi operator
    /// is singular (conjugate endpoints).
    bool detect_conjugate_points = true;
};

/// Newton iteration did not reach the gradient tolerance.
class NonConvergence : public Error {
public:
    NonConvergence(double best_gradient, DiscretePath best);
    double best_gradient() const noexcept { return best_gradient_; }
    const DiscretePath &best_path() const noexcept { return best_; }

private:
    double best_gradient_;
    DiscretePath best_;
};

/// Interior nodes with max |dS_d/dq_k| <= tolerance, endpoints q_a, q_b.
/// Throws NonConvergence and DegenerateLagrangian (singular Newton system,
/// including conjugate endpoints).
DiscretePath stationary_action_solve(const LagrangianSystem &L, const Vector &qa, const Vector &qb, double a,
                                     double b, std::size_t N, const std::optional<DiscretePath> &init = std::nullopt,
                                     const StationaryOptions &options = {});

} // namespace dalembert
