#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dalembert/expr.hpp"
#include "dalembert/linalg.hpp"
#include "dalembert/mechanics.hpp"

namespace dalembert {

/// Time-dependent map q^i = Q^i(x1..xm, t), i = 1..n, written in the
/// expression language over x1..xm and t. Shared by moving frames (m = n)
/// and constraint embeddings (m <= n). Derivatives are always taken by AD.
class ParametricMap {
public:
    ParametricMap() = default;
    ParametricMap(std::size_t source_dim, std::vector<Expr> forward);

    std::size_t source_dimension() const noexcept { return m_; }
    std::size_t target_dimension() const noexcept { return exprs_.size(); }
    const std::vector<Expr> &forward() const noexcept { return exprs_; }

    /// True when no component depends on t.
    bool time_independent() const;

    template <typename T>
    std::vector<T> evaluate(std::span<const T> x, const T &t) const {
        if (x.size() != m_) throw DimensionMismatch("map expects " + std::to_string(m_) + " coordinates");
        std::vector<T> args(x.begin(), x.end());
        args.push_back(t);
        std::vector<T> out;
        out.reserve(compiled_.size());
        for (const auto &c : compiled_) out.push_back(c(std::span<const T>(args)));
        return out;
    }

    Vector position(const Vector &x, double t) const;
    /// dQ/dx, n x m.
    Matrix jacobian(const Vector &x, double t) const;
    /// dQ/dt.
    Vector time_derivative(const Vector &x, double t) const;
    /// J xd + dQ/dt.
    Vector velocity(const Vector &x, const Vector &xd, double t) const;
    /// (q, qd, qdd) of t -> Q(x(t), t) from the jet of x(t): one hyperdual pass.
    CurveJet push_jet(const CurveJet &jet) const;

    /// Q'(x, t) = Q(inner(x, t), t).
    ParametricMap compose(const ParametricMap &inner) const;
    /// Q(x, t + offset).
    ParametricMap shifted_time(double offset) const;

private:
    std::size_t m_ = 0;
    std::vector<Expr> exprs_;
    std::vector<CompiledExpr> compiled_;
};

/// l(x, xd, t) = L(Q(x, t), J xd + dQ/dt, t + offset). The map is written in
/// the caller's time t; `offset` shifts only the time slot handed to L.
LagrangianSystem pullback_through(const LagrangianSystem &L, const ParametricMap &map, double time_offset,
                                  std::string chart);

} // namespace dalembert
