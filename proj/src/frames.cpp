#include "dalembert/frames.hpp"

#include <cmath>

namespace dalembert {

namespace {

// Inverse expressions are authored over q1..qn; ParametricMap sources are x1..xn.
ParametricMap inverse_map(std::vector<Expr> exprs, std::size_t n) {
    std::map<std::string, Expr, std::less<>> rename;
    const auto q = indexed_names("q", n);
    const auto x = indexed_names("x", n);
    for (std::size_t i = 0; i < n; ++i) rename.emplace(q[i], Expr::variable(x[i]));
    for (auto &e : exprs) e = e.substitute(rename);
    return {n, std::move(exprs)};
}

Vector solve_checked(const Matrix &j, const Vector &rhs, const char *what) {
    const double cond = condition_number(j);
    if (!(cond <= kSingularCondition)) throw SingularJacobian(what, cond);
    return j.partialPivLu().solve(rhs);
}

} // namespace

FrameMap::FrameMap(std::vector<Expr> forward, std::optional<std::vector<Expr>> inverse, TimeInterval valid)
    : valid_(valid) {
    const std::size_t n = forward.size();
    map_ = ParametricMap(n, std::move(forward));
    if (inverse) {
        if (inverse->size() != n)
            throw DimensionMismatch("frame inverse has " + std::to_string(inverse->size()) +
                                    " components, forward has " + std::to_string(n));
        inverse_ = inverse_map(std::move(*inverse), n);
    }
}

FrameMap::FrameMap(ParametricMap forward, std::optional<ParametricMap> inverse, TimeInterval valid)
    : map_(std::move(forward)), inverse_(std::move(inverse)), valid_(valid) {}

FrameMap FrameMap::identity(std::size_t n) {
    std::vector<Expr> fwd, inv;
    for (const auto &name : indexed_names("x", n)) fwd.push_back(Expr::variable(name));
    for (const auto &name : indexed_names("q", n)) inv.push_back(Expr::variable(name));
    return FrameMap(std::move(fwd), std::move(inv));
}

void FrameMap::check_time(double t) const {
    if (!valid_.contains(t)) throw FrameValidityError(t, valid_.lo, valid_.hi);
}

Vector FrameMap::position(const Vector &x, double t) const {
    check_time(t);
    return map_.position(x, t);
}

Matrix FrameMap::jacobian(const Vector &x, double t) const {
    check_time(t);
    return map_.jacobian(x, t);
}

Vector FrameMap::invert(const Vector &q, double t, const std::optional<Vector> &guess) const {
    check_time(t);
    if (inverse_) return inverse_->position(q, t);
    Vector x = guess.value_or(q);
    const double scale = std::max(1.0, q.lpNorm<Eigen::Infinity>());
    for (int it = 0; it < kInversionMaxIterations; ++it) {
        const Vector r = map_.position(x, t) - q;
        if (r.lpNorm<Eigen::Infinity>() <= kInversionTolerance * scale) return x;
        x -= solve_checked(map_.jacobian(x, t), r, "frame inversion");
    }
    const Vector r = map_.position(x, t) - q;
    if (r.lpNorm<Eigen::Infinity>() <= kInversionTolerance * scale) return x;
    throw InversionFailure("Newton inversion of frame map did not converge at t = " + std::to_string(t));
}

FrameMap FrameMap::compose(const FrameMap &inner) const {
    std::optional<ParametricMap> inv;
    if (inverse_ && inner.inverse_) inv = inner.inverse_->compose(*inverse_);
    const TimeInterval valid{std::max(valid_.lo, inner.valid_.lo), std::min(valid_.hi, inner.valid_.hi)};
    return FrameMap(map_.compose(inner.map_), std::move(inv), valid);
}

Vector angular_velocity_fixed(const FrameMap &frame, const Vector &x, double t) {
    frame.check_time(t);
    return frame.forward().time_derivative(x, t);
}

Vector angular_velocity_moving(const FrameMap &frame, const Vector &x, double t) {
    frame.check_time(t);
    return solve_checked(frame.forward().jacobian(x, t), frame.forward().time_derivative(x, t),
                         "angular velocity in the moving frame");
}

VelocityState push_velocity(const FrameMap &frame, const VelocityState &state) {
    frame.check_time(state.time);
    return {"q", frame.forward().position(state.position, state.time),
            frame.forward().velocity(state.position, state.velocity, state.time), state.time};
}

VelocityState pull_velocity(const FrameMap &frame, const VelocityState &state, const std::optional<Vector> &guess) {
    const double t = state.time;
    const Vector x = frame.invert(state.position, t, guess);
    const Vector rel = state.velocity - frame.forward().time_derivative(x, t);
    return {"x", x, solve_checked(frame.forward().jacobian(x, t), rel, "velocity pull-back"), t};
}

LagrangianSystem pullback_lagrangian(const LagrangianSystem &L, const FrameMap &frame, std::string chart) {
    if (frame.dimension() != L.dimension())
        throw DimensionMismatch("frame dimension " + std::to_string(frame.dimension()) +
                                " differs from Lagrangian dimension " + std::to_string(L.dimension()));
    return pullback_through(L, frame.forward(), 0.0, std::move(chart));
}

Trajectory map_trajectory(const FrameMap &frame, const Trajectory &moving, std::string chart) {
    Trajectory out{std::move(chart), {}, moving.step, moving.method};
    out.samples.reserve(moving.samples.size());
    for (const auto &jet : moving.samples) {
        frame.check_time(jet.t);
        out.samples.push_back(frame.forward().push_jet(jet));
    }
    return out;
}

} // namespace dalembert
