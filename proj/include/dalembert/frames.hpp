#pragma once

// Moving reference frames: a time-dependent diffeomorphism q = Q(x, t) from
// the moving chart M (coordinates x) onto the fixed chart Q (coordinates q).

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dalembert/mechanics.hpp"
#include "dalembert/parametric_map.hpp"

namespace dalembert {

struct TimeInterval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double t) const noexcept { return t >= lo && t <= hi; }
};

/// Newton inversion policy for frames without an explicit inverse.
inline constexpr double kInversionTolerance = 1e-12;
inline constexpr int kInversionMaxIterations = 50;

class FrameMap {
public:
    /// `forward` over x1..xn, t; `inverse` (if any) over q1..qn, t.
    explicit FrameMap(std::vector<Expr> forward, std::optional<std::vector<Expr>> inverse = std::nullopt,
                      TimeInterval valid = {});

    /// From maps already in parametric form; the inverse's source is q
    /// renamed to x1..xn.
    FrameMap(ParametricMap forward, std::optional<ParametricMap> inverse, TimeInterval valid = {});

    static FrameMap identity(std::size_t n);

    std::size_t dimension() const noexcept { return map_.source_dimension(); }
    const ParametricMap &forward() const noexcept { return map_; }
    const std::optional<ParametricMap> &inverse() const noexcept { return inverse_; }
    const TimeInterval &valid() const noexcept { return valid_; }

    /// Throws FrameValidityError outside the validity interval.
    void check_time(double t) const;

    Vector position(const Vector &x, double t) const;
    Matrix jacobian(const Vector &x, double t) const;

    /// x = X(q, t): explicit inverse when supplied, otherwise Newton iteration
    /// from `guess` (q itself when absent). Throws InversionFailure.
    Vector invert(const Vector &q, double t, const std::optional<Vector> &guess = std::nullopt) const;

    /// Composite frame (this o inner): q = Q(inner(y, t), t). The inverse is
    /// composed too when both frames carry one.
    FrameMap compose(const FrameMap &inner) const;

private:
    ParametricMap map_;
    std::optional<ParametricMap> inverse_; // source chart q
    TimeInterval valid_;
};

struct VelocityState {
    std::string chart;
    Vector position;
    Vector velocity;
    double time = 0.0;
};

/// omega_t at q = Q(x, t): dQ/dt.
Vector angular_velocity_fixed(const FrameMap &frame, const Vector &x, double t);

/// Omega_t at x: J^{-1} dQ/dt. Throws SingularJacobian.
Vector angular_velocity_moving(const FrameMap &frame, const Vector &x, double t);

/// (x, xd) -> (Q(x, t), J xd + dQ/dt).
VelocityState push_velocity(const FrameMap &frame, const VelocityState &state);

/// (q, qd) -> (X(q, t), J^{-1} (qd - dQ/dt)).
VelocityState pull_velocity(const FrameMap &frame, const VelocityState &state,
                            const std::optional<Vector> &guess = std::nullopt);

/// l(x, xd, t) = L(Q(x, t), J xd + dQ/dt, t).
LagrangianSystem pullback_lagrangian(const LagrangianSystem &L, const FrameMap &frame,
                                     std::string chart = "x");

/// Maps every jet of a moving-chart trajectory into the fixed chart.
Trajectory map_trajectory(const FrameMap &frame, const Trajectory &moving, std::string chart = "q");

} // namespace dalembert
