#include "dalembert/mechanics.hpp"

#include <algorithm>
#include <cmath>

namespace dalembert {

namespace {

class ExprLagrangian final : public LagrangianFunction {
public:
    ExprLagrangian(const Expr &expr, std::size_t n) : n_(n) {
        std::vector<std::string> slots = indexed_names("q", n);
        const auto qd = indexed_names("qd", n);
        slots.insert(slots.end(), qd.begin(), qd.end());
        slots.emplace_back("t");
        compiled_ = CompiledExpr(expr, slots);
    }

    double evaluate(std::span<const double> q, std::span<const double> qd, double t) const override {
        return run<double>(q, qd, t);
    }
    Dual2 evaluate(std::span<const Dual2> q, std::span<const Dual2> qd, Dual2 t) const override {
        return run<Dual2>(q, qd, t);
    }

private:
    template <typename T>
    T run(std::span<const T> q, std::span<const T> qd, T t) const {
        std::vector<T> args(2 * n_ + 1);
        std::copy(q.begin(), q.end(), args.begin());
        std::copy(qd.begin(), qd.end(), args.begin() + static_cast<std::ptrdiff_t>(n_));
        args[2 * n_] = t;
        return compiled_(std::span<const T>(args));
    }

    std::size_t n_;
    CompiledExpr compiled_;
};

std::vector<double> unit(std::size_t size, std::size_t index) {
    std::vector<double> e(size, 0.0);
    e[index] = 1.0;
    return e;
}

} // namespace

LagrangianSystem::LagrangianSystem(std::size_t n, std::string chart, std::shared_ptr<const LagrangianFunction> fn)
    : n_(n), chart_(std::move(chart)), fn_(std::move(fn)) {}

LagrangianSystem LagrangianSystem::from_expression(const Expr &expr, std::size_t n, std::string chart) {
    return {n, std::move(chart), std::make_shared<ExprLagrangian>(expr, n)};
}

double LagrangianSystem::operator()(const Vector &q, const Vector &qd, double t) const {
    if (static_cast<std::size_t>(q.size()) != n_ || static_cast<std::size_t>(qd.size()) != n_)
        throw DimensionMismatch("Lagrangian of dimension " + std::to_string(n_) + " evaluated at state of size " +
                                std::to_string(q.size()));
    return fn_->evaluate(as_span(q), as_span(qd), t);
}

Dual2 LagrangianSystem::seeded(const Vector &q, const Vector &qd, double t, std::span<const double> u,
                               std::span<const double> v) const {
    if (static_cast<std::size_t>(q.size()) != n_ || static_cast<std::size_t>(qd.size()) != n_)
        throw DimensionMismatch("Lagrangian of dimension " + std::to_string(n_) + " evaluated at state of size " +
                                std::to_string(q.size()));
    std::vector<Dual2> dq(n_), dqd(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        dq[i] = lift(q(static_cast<Eigen::Index>(i)), u[i], v[i]);
        dqd[i] = lift(qd(static_cast<Eigen::Index>(i)), u[n_ + i], v[n_ + i]);
    }
    return fn_->evaluate(dq, dqd, lift(t, u[2 * n_], v[2 * n_]));
}

AnalyticCurve::AnalyticCurve(std::vector<Expr> components) : exprs_(std::move(components)) {
    const std::vector<std::string> slots{"t"};
    compiled_ = compile_all(exprs_, slots);
}

CurveJet AnalyticCurve::jet(double t) const {
    const auto n = static_cast<Eigen::Index>(exprs_.size());
    CurveJet j{t, Vector(n), Vector(n), Vector(n)};
    const Dual2 tt(t, 1.0, 1.0, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Dual2 r = compiled_[static_cast<std::size_t>(i)](std::span<const Dual2>(&tt, 1));
        j.pos(i) = r.val;
        j.vel(i) = r.d1;
        j.acc(i) = r.d12;
    }
    return j;
}

DisplacementField::DisplacementField(std::vector<Expr> components) : exprs_(std::move(components)) {
    std::vector<std::string> slots = indexed_names("q", exprs_.size());
    slots.emplace_back("t");
    compiled_ = compile_all(exprs_, slots);
}

Vector DisplacementField::at(const Vector &q, double t) const {
    if (static_cast<std::size_t>(q.size()) != exprs_.size())
        throw DimensionMismatch("displacement field dimension differs from chart dimension");
    std::vector<double> args(q.data(), q.data() + q.size());
    args.push_back(t);
    Vector out(q.size());
    for (Eigen::Index i = 0; i < q.size(); ++i)
        out(i) = compiled_[static_cast<std::size_t>(i)](std::span<const double>(args));
    return out;
}

Vector position_gradient(const LagrangianSystem &L, const Vector &q, const Vector &qd, double t) {
    const std::size_t n = L.dimension();
    const std::vector<double> zero(2 * n + 1, 0.0);
    Vector g(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) g(static_cast<Eigen::Index>(i)) = L.seeded(q, qd, t, unit(2 * n + 1, i), zero).d1;
    return g;
}

Vector velocity_gradient(const LagrangianSystem &L, const Vector &q, const Vector &qd, double t) {
    const std::size_t n = L.dimension();
    const std::vector<double> zero(2 * n + 1, 0.0);
    Vector g(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        g(static_cast<Eigen::Index>(i)) = L.seeded(q, qd, t, unit(2 * n + 1, n + i), zero).d1;
    return g;
}

Vector el_residual(const LagrangianSystem &L, const CurveJet &jet) {
    const std::size_t n = L.dimension();
    if (static_cast<std::size_t>(jet.pos.size()) != n || static_cast<std::size_t>(jet.acc.size()) != n)
        throw DimensionMismatch("jet dimension differs from Lagrangian dimension");
    // Total time direction (qd, qdd, 1): the mixed part against e_i in the
    // velocity slot expands d/dt dL/dqd^i by the chain rule.
    std::vector<double> along(2 * n + 1);
    for (std::size_t j = 0; j < n; ++j) {
        along[j] = jet.vel(static_cast<Eigen::Index>(j));
        along[n + j] = jet.acc(static_cast<Eigen::Index>(j));
    }
    along[2 * n] = 1.0;
    const Vector dq = position_gradient(L, jet.pos, jet.vel, jet.t);
    Vector e(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double ddt = L.seeded(jet.pos, jet.vel, jet.t, unit(2 * n + 1, n + i), along).d12;
        e(static_cast<Eigen::Index>(i)) = dq(static_cast<Eigen::Index>(i)) - ddt;
    }
    return e;
}

double variational_derivative(const LagrangianSystem &L, const CurveJet &jet, const Vector &xi) {
    if (static_cast<std::size_t>(xi.size()) != L.dimension())
        throw DimensionMismatch("displacement dimension differs from Lagrangian dimension");
    return el_residual(L, jet).dot(xi);
}

double variational_derivative(const LagrangianSystem &L, const CurveJet &jet, const DisplacementField &xi) {
    return variational_derivative(L, jet, xi.at(jet.pos, jet.t));
}

double action_integral(const LagrangianSystem &L, const AnalyticCurve &curve, double a, double b, std::size_t quad_n) {
    if (curve.dimension() != L.dimension()) throw DimensionMismatch("curve dimension differs from Lagrangian dimension");
    if (quad_n < 2) throw Error("action_integral: quad_n must be at least 2");
    if (b < a) throw Error("action_integral: interval end precedes start");
    if (a == b) return 0.0;
    const double h = (b - a) / static_cast<double>(quad_n);
    auto f = [&](double t) {
        const CurveJet j = curve.jet(t);
        return L(j.pos, j.vel, t);
    };
    double sum = f(a) + f(b);
    for (std::size_t k = 1; k < quad_n; ++k) sum += 2.0 * f(a + static_cast<double>(k) * h);
    for (std::size_t k = 0; k < quad_n; ++k) sum += 4.0 * f(a + (static_cast<double>(k) + 0.5) * h);
    return sum * h / 6.0;
}

Matrix mass_matrix(const LagrangianSystem &L, const Vector &q, const Vector &qd, double t) {
    const std::size_t n = L.dimension();
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                L.seeded(q, qd, t, unit(2 * n + 1, n + i), unit(2 * n + 1, n + j)).d12;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
            const double diff = std::abs(m(i, j) - m(j, i));
            const double scale = std::max({1.0, std::abs(m(i, j)), std::abs(m(j, i))});
            if (diff > 1e-8 * scale)
                throw AsymmetricHessian(static_cast<std::size_t>(i), static_cast<std::size_t>(j), diff);
            const double avg = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = avg;
            m(j, i) = avg;
        }
    }
    return m;
}

Vector el_accelerations(const LagrangianSystem &L, const Vector &q, const Vector &qd, double t) {
    const std::size_t n = L.dimension();
    const Matrix m = mass_matrix(L, q, qd, t);
    const double cond = condition_number(m);
    if (!(cond <= kSingularCondition)) throw DegenerateLagrangian("velocity Hessian is singular", t, cond);

    std::vector<double> along(2 * n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) along[j] = qd(static_cast<Eigen::Index>(j));
    along[2 * n] = 1.0;
    Vector rhs = position_gradient(L, q, qd, t);
    for (std::size_t i = 0; i < n; ++i)
        rhs(static_cast<Eigen::Index>(i)) -= L.seeded(q, qd, t, unit(2 * n + 1, n + i), along).d12;
    return m.partialPivLu().solve(rhs);
}

double jacobi_energy(const LagrangianSystem &L, const Vector &q, const Vector &qd, double t) {
    return qd.dot(velocity_gradient(L, q, qd, t)) - L(q, qd, t);
}

} // namespace dalembert
