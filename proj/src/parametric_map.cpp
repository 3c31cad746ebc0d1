#include "dalembert/parametric_map.hpp"

#include <algorithm>

namespace dalembert {

namespace {

class EmbeddedLagrangian final : public LagrangianFunction {
public:
    EmbeddedLagrangian(LagrangianSystem base, ParametricMap map, double offset)
        : base_(std::move(base)), map_(std::move(map)), offset_(offset) {}

    double evaluate(std::span<const double> x, std::span<const double> xd, double t) const override {
        return run<double>(x, xd, t);
    }
    Dual2 evaluate(std::span<const Dual2> x, std::span<const Dual2> xd, Dual2 t) const override {
        return run<Dual2>(x, xd, t);
    }

private:
    // One forward pass in Dual<T> with tangent (xd, 1) yields both q and
    // the velocity-addition law J xd + dQ/dt.
    template <typename T>
    T run(std::span<const T> x, std::span<const T> xd, T t) const {
        std::vector<Dual<T>> lifted(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) lifted[i] = Dual<T>(x[i], xd[i]);
        const auto out = map_.evaluate<Dual<T>>(lifted, Dual<T>(t, T(1.0)));
        std::vector<T> q(out.size()), qd(out.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            q[i] = out[i].v;
            qd[i] = out[i].d;
        }
        return call_base(std::span<const T>(q), std::span<const T>(qd), t + offset_);
    }

    double call_base(std::span<const double> q, std::span<const double> qd, double t) const {
        return base_(to_vector(q), to_vector(qd), t);
    }
    Dual2 call_base(std::span<const Dual2> q, std::span<const Dual2> qd, Dual2 t) const { return base_(q, qd, t); }

    LagrangianSystem base_;
    ParametricMap map_;
    double offset_;
};

} // namespace

ParametricMap::ParametricMap(std::size_t source_dim, std::vector<Expr> forward)
    : m_(source_dim), exprs_(std::move(forward)) {
    std::vector<std::string> slots = indexed_names("x", m_);
    slots.emplace_back("t");
    compiled_ = compile_all(exprs_, slots);
}

bool ParametricMap::time_independent() const {
    return std::none_of(exprs_.begin(), exprs_.end(), [](const Expr &e) {
        const auto &v = e.free_vars();
        return std::find(v.begin(), v.end(), "t") != v.end();
    });
}

Vector ParametricMap::position(const Vector &x, double t) const {
    return to_vector(evaluate<double>(as_span(x), t));
}

Matrix ParametricMap::jacobian(const Vector &x, double t) const {
    const auto n = static_cast<Eigen::Index>(exprs_.size());
    const auto m = static_cast<Eigen::Index>(m_);
    Matrix j(n, m);
    std::vector<Dual<double>> lifted(m_);
    for (Eigen::Index c = 0; c < m; ++c) {
        for (Eigen::Index i = 0; i < m; ++i) lifted[static_cast<std::size_t>(i)] = Dual<double>(x(i), i == c ? 1.0 : 0.0);
        const auto out = evaluate<Dual<double>>(lifted, Dual<double>(t));
        for (Eigen::Index r = 0; r < n; ++r) j(r, c) = out[static_cast<std::size_t>(r)].d;
    }
    return j;
}

Vector ParametricMap::time_derivative(const Vector &x, double t) const {
    std::vector<Dual<double>> lifted(m_);
    for (std::size_t i = 0; i < m_; ++i) lifted[i] = Dual<double>(x(static_cast<Eigen::Index>(i)));
    const auto out = evaluate<Dual<double>>(lifted, Dual<double>(t, 1.0));
    Vector w(static_cast<Eigen::Index>(out.size()));
    for (std::size_t i = 0; i < out.size(); ++i) w(static_cast<Eigen::Index>(i)) = out[i].d;
    return w;
}

Vector ParametricMap::velocity(const Vector &x, const Vector &xd, double t) const {
    if (static_cast<std::size_t>(xd.size()) != m_) throw DimensionMismatch("velocity dimension differs from map source");
    std::vector<Dual<double>> lifted(m_);
    for (std::size_t i = 0; i < m_; ++i)
        lifted[i] = Dual<double>(x(static_cast<Eigen::Index>(i)), xd(static_cast<Eigen::Index>(i)));
    const auto out = evaluate<Dual<double>>(lifted, Dual<double>(t, 1.0));
    Vector v(static_cast<Eigen::Index>(out.size()));
    for (std::size_t i = 0; i < out.size(); ++i) v(static_cast<Eigen::Index>(i)) = out[i].d;
    return v;
}

CurveJet ParametricMap::push_jet(const CurveJet &jet) const {
    if (static_cast<std::size_t>(jet.pos.size()) != m_) throw DimensionMismatch("jet dimension differs from map source");
    // x(t + e1 + e2) = x + xd (e1 + e2) + xdd e1 e2 in hyperdual form.
    std::vector<Dual2> lifted(m_);
    for (std::size_t i = 0; i < m_; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        lifted[i] = Dual2(jet.pos(k), jet.vel(k), jet.vel(k), jet.acc(k));
    }
    const auto out = evaluate<Dual2>(lifted, Dual2(jet.t, 1.0, 1.0, 0.0));
    const auto n = static_cast<Eigen::Index>(out.size());
    CurveJet r{jet.t, Vector(n), Vector(n), Vector(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        r.pos(i) = out[static_cast<std::size_t>(i)].val;
        r.vel(i) = out[static_cast<std::size_t>(i)].d1;
        r.acc(i) = out[static_cast<std::size_t>(i)].d12;
    }
    return r;
}

ParametricMap ParametricMap::compose(const ParametricMap &inner) const {
    if (inner.target_dimension() != m_)
        throw DimensionMismatch("composition: inner map lands in dimension " +
                                std::to_string(inner.target_dimension()) + ", outer expects " + std::to_string(m_));
    std::map<std::string, Expr, std::less<>> repl;
    const auto names = indexed_names("x", m_);
    for (std::size_t i = 0; i < m_; ++i) repl.emplace(names[i], inner.forward()[i]);
    std::vector<Expr> out;
    out.reserve(exprs_.size());
    for (const auto &e : exprs_) out.push_back(e.substitute(repl));
    return {inner.source_dimension(), std::move(out)};
}

ParametricMap ParametricMap::shifted_time(double offset) const {
    if (offset == 0.0) return *this;
    std::map<std::string, Expr, std::less<>> repl;
    repl.emplace("t", Expr::variable("t") + Expr::number(offset));
    std::vector<Expr> out;
    out.reserve(exprs_.size());
    for (const auto &e : exprs_) out.push_back(e.substitute(repl));
    return {m_, std::move(out)};
}

LagrangianSystem pullback_through(const LagrangianSystem &L, const ParametricMap &map, double time_offset,
                                  std::string chart) {
    if (map.target_dimension() != L.dimension())
        throw DimensionMismatch("map lands in dimension " + std::to_string(map.target_dimension()) +
                                " but the Lagrangian has dimension " + std::to_string(L.dimension()));
    return {map.source_dimension(), std::move(chart), std::make_shared<EmbeddedLagrangian>(L, map, time_offset)};
}

} // namespace dalembert
