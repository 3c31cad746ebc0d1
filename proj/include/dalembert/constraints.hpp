#pragma once

// Time-dependent holonomic constraints given parametrically as immersions
// q = Q(x, t) of an m-dimensional space into the n-dimensional configuration
// space. Implicit residuals f_a(q, t) are optional and used for drift reports.

#include <cstddef>
#include <string>
#include <vector>

#include "dalembert/mechanics.hpp"
#include "dalembert/parametric_map.hpp"

namespace dalembert {

/// Relative pivot threshold for the rank test on dQ/dx.
inline constexpr double kRankThreshold = 1e-10;

class ConstraintEmbedding {
public:
    /// `forward`: n expressions over x1..xm, t. `residuals`: expressions over
    /// q1..qn, t that vanish on the image.
    ConstraintEmbedding(std::size_t m, std::vector<Expr> forward, std::vector<Expr> residuals = {});

    std::size_t intrinsic_dimension() const noexcept { return map_.source_dimension(); }
    std::size_t ambient_dimension() const noexcept { return map_.target_dimension(); }
    const ParametricMap &map() const noexcept { return map_; }
    bool has_residuals() const noexcept { return !residuals_.empty(); }

    /// Rank of dQ/dx by full-pivot elimination.
    std::size_t rank(const Vector &x, double t) const;
    /// Throws RankDeficiency when rank(x, t) < m.
    void check_rank(const Vector &x, double t) const;

    /// f_a(q, t).
    Vector residuals(const Vector &q, double t) const;

private:
    ParametricMap map_;
    std::vector<Expr> residual_exprs_;
    std::vector<CompiledExpr> residuals_;
};

/// Admissible velocities offset + basis * xd; the columns of `basis` span the
/// virtual displacements.
struct AffineVelocitySpace {
    Vector offset;
    Matrix basis;

    /// Distance from qd to the affine space after least-squares projection.
    double distance(const Vector &qd) const;
};

/// l(x, xd, t) = L(Q(x, t), J xd + dQ/dt, t) on the intrinsic space.
LagrangianSystem intrinsic_lagrangian(const LagrangianSystem &L, const ConstraintEmbedding &emb,
                                      std::string chart = "x");

/// Throws RankDeficiency.
AffineVelocitySpace velocity_spaces(const ConstraintEmbedding &emb, const Vector &x, double t);

/// max_j |E(L, ambient jet) . dQ/dx^j|, the ambient jet pushed from `jet`.
double dalembert_check(const LagrangianSystem &L, const ConstraintEmbedding &emb, const CurveJet &jet);

struct DriftReport {
    double value = 0.0;
    std::string note;
};

/// max over samples and residuals of |f_a(q(t), t)|.
DriftReport constraint_drift(const ConstraintEmbedding &emb, const Trajectory &ambient);

} // namespace dalembert
