#include "dalembert/constraints.hpp"

#include <algorithm>
#include <cmath>

namespace dalembert {

ConstraintEmbedding::ConstraintEmbedding(std::size_t m, std::vector<Expr> forward, std::vector<Expr> residuals)
    : residual_exprs_(std::move(residuals)) {
    if (forward.size() < m)
        throw DimensionMismatch("embedding of a " + std::to_string(m) + "-dimensional space into dimension " +
                                std::to_string(forward.size()));
    const std::size_t n = forward.size();
    map_ = ParametricMap(m, std::move(forward));
    if (!residual_exprs_.empty()) {
        if (residual_exprs_.size() != n - m)
            throw DimensionMismatch("expected " + std::to_string(n - m) + " constraint residuals, got " +
                                    std::to_string(residual_exprs_.size()));
        std::vector<std::string> slots = indexed_names("q", n);
        slots.emplace_back("t");
        residuals_ = compile_all(residual_exprs_, slots);
    }
}

std::size_t ConstraintEmbedding::rank(const Vector &x, double t) const {
    Eigen::FullPivLU<Matrix> lu(map_.jacobian(x, t));
    lu.setThreshold(kRankThreshold);
    return static_cast<std::size_t>(lu.rank());
}

void ConstraintEmbedding::check_rank(const Vector &x, double t) const {
    const std::size_t r = rank(x, t);
    if (r < intrinsic_dimension()) throw RankDeficiency(intrinsic_dimension(), r, t);
}

Vector ConstraintEmbedding::residuals(const Vector &q, double t) const {
    if (static_cast<std::size_t>(q.size()) != ambient_dimension())
        throw DimensionMismatch("residuals evaluated at a point of the wrong dimension");
    std::vector<double> args(q.data(), q.data() + q.size());
    args.push_back(t);
    Vector f(static_cast<Eigen::Index>(residuals_.size()));
    for (std::size_t a = 0; a < residuals_.size(); ++a)
        f(static_cast<Eigen::Index>(a)) = residuals_[a](std::span<const double>(args));
    return f;
}

double AffineVelocitySpace::distance(const Vector &qd) const {
    const Vector rel = qd - offset;
    const Vector coeff = basis.colPivHouseholderQr().solve(rel);
    return (basis * coeff - rel).norm();
}

LagrangianSystem intrinsic_lagrangian(const LagrangianSystem &L, const ConstraintEmbedding &emb, std::string chart) {
    return pullback_through(L, emb.map(), 0.0, std::move(chart));
}

AffineVelocitySpace velocity_spaces(const ConstraintEmbedding &emb, const Vector &x, double t) {
    emb.check_rank(x, t);
    return {emb.map().time_derivative(x, t), emb.map().jacobian(x, t)};
}

double dalembert_check(const LagrangianSystem &L, const ConstraintEmbedding &emb, const CurveJet &jet) {
    emb.check_rank(jet.pos, jet.t);
    const Vector e = el_residual(L, emb.map().push_jet(jet));
    const Matrix basis = emb.map().jacobian(jet.pos, jet.t);
    return (basis.transpose() * e).lpNorm<Eigen::Infinity>();
}

DriftReport constraint_drift(const ConstraintEmbedding &emb, const Trajectory &ambient) {
    if (!emb.has_residuals()) return {0.0, "no residuals"};
    double worst = 0.0;
    for (const auto &s : ambient.samples) worst = std::max(worst, emb.residuals(s.pos, s.t).lpNorm<Eigen::Infinity>());
    return {worst, ""};
}

} // namespace dalembert
