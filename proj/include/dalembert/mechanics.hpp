#pragma once

// Lagrangian calculus: Euler-Lagrange residuals, variational derivatives,
// action integrals, velocity Hessian and explicit accelerations. All partial
// derivatives come from seeded Dual2 evaluations of L(q, qd, t).

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dalembert/dualnum.hpp"
#include "dalembert/expr.hpp"
#include "dalembert/linalg.hpp"

namespace dalembert {

/// Evaluable L(q, qd, t) on plain and hyperdual scalars.
class LagrangianFunction {
public:
    virtual ~LagrangianFunction() = default;
    virtual double evaluate(std::span<const double> q, std::span<const double> qd, double t) const = 0;
    virtual Dual2 evaluate(std::span<const Dual2> q, std::span<const Dual2> qd, Dual2 t) const = 0;
};

namespace detail {
template <typename F>
class CallableLagrangian final : public LagrangianFunction {
public:
    explicit CallableLagrangian(F f) : f_(std::move(f)) {}
    double evaluate(std::span<const double> q, std::span<const double> qd, double t) const override {
        return f_(q, qd, t);
    }
    Dual2 evaluate(std::span<const Dual2> q, std::span<const Dual2> qd, Dual2 t) const override {
        return f_(q, qd, t);
    }

private:
    F f_;
};
} // namespace detail

class LagrangianSystem {
public:
    LagrangianSystem(std::size_t n, std::string chart, std::shared_ptr<const LagrangianFunction> fn);

    /// L written over q1..qn, qd1..qdn, t.
    static LagrangianSystem from_expression(const Expr &expr, std::size_t n, std::string chart = "q");

    /// `f` is a generic callable (span<const S> q, span<const S> qd, S t) -> S
    /// invoked with S = double and S = Dual2.
    template <typename F>
    static LagrangianSystem from_callable(std::size_t n, std::string chart, F f) {
        return {n, std::move(chart), std::make_shared<detail::CallableLagrangian<F>>(std::move(f))};
    }

    std::size_t dimension() const noexcept { return n_; }
    const std::string &chart() const noexcept { return chart_; }

    double operator()(const Vector &q, const Vector &qd, double t) const;
    Dual2 operator()(std::span<const Dual2> q, std::span<const Dual2> qd, Dual2 t) const {
        return fn_->evaluate(q, qd, t);
    }

    /// L with inputs (q, qd, t) lifted along the directions u and v, each laid
    /// out as [q-part (n), qd-part (n), t-part (1)].
    Dual2 seeded(const Vector &q, const Vector &qd, double t, std::span<const double> u,
                 std::span<const double> v) const;

private:
    std::size_t n_;
    std::string chart_;
    std::shared_ptr<const LagrangianFunction> fn_;
};

/// Second-order jet of a curve at one instant.
struct CurveJet {
    double t = 0.0;
    Vector pos;
    Vector vel;
    Vector acc;
};

/// Time-sampled curve with jets in a named chart.
struct Trajectory {
    std::string chart;
    std::vector<CurveJet> samples;
    double step = 0.0;
    std::string method;
};

/// Curve given by one expression of t per coordinate.
class AnalyticCurve {
public:
    explicit AnalyticCurve(std::vector<Expr> components);

    std::size_t dimension() const noexcept { return exprs_.size(); }
    const std::vector<Expr> &components() const noexcept { return exprs_; }
    CurveJet jet(double t) const;

private:
    std::vector<Expr> exprs_;
    std::vector<CompiledExpr> compiled_;
};

/// Displacement field xi^i(q, t) in a chart.
class DisplacementField {
public:
    explicit DisplacementField(std::vector<Expr> components);

    std::size_t dimension() const noexcept { return exprs_.size(); }
    Vector at(const Vector &q, double t) const;

private:
    std::vector<Expr> exprs_;
    std::vector<CompiledExpr> compiled_;
};

/// E_i = dL/dq^i - d/dt dL/dqd^i along the jet; zero exactly on motions.
Vector el_residual(const LagrangianSystem &L, const CurveJet &jet);

/// sum_i E_i xi^i.
double variational_derivative(const LagrangianSystem &L, const CurveJet &jet, const Vector &xi);
double variational_derivative(const LagrangianSystem &L, const CurveJet &jet, const DisplacementField &xi);

inline constexpr std::size_t kDefaultQuadPanels = 1000;

/// Composite Simpson quadrature of L along the curve over [a, b].
double action_integral(const LagrangianSystem &L, const AnalyticCurve &curve, double a, double b,
                       std::size_t quad_n = kDefaultQuadPanels);

/// Velocity Hessian d^2L/dqd dqd; throws AsymmetricHessian if the mixed
/// partials disagree beyond 1e-8 (relative).
Matrix mass_matrix(const LagrangianSystem &L, const Vector &q, const Vector &qd, double t);

/// dL/dq.
Vector position_gradient(const LagrangianSystem &L, const Vector &q, const Vector &qd, double t);

/// dL/dqd.
Vector velocity_gradient(const LagrangianSystem &L, const Vector &q, const Vector &qd, double t);

/// Solve M qdd = dL/dq - (d^2L/dqd dq) qd - d^2L/dqd dt. Throws
/// DegenerateLagrangian when cond(M) exceeds kSingularCondition.
Vector el_accelerations(const LagrangianSystem &L, const Vector &q, const Vector &qd, double t);

/// qd . dL/dqd - L.
double jacobi_energy(const LagrangianSystem &L, const Vector &q, const Vector &qd, double t);

} // namespace dalembert
