#include "dalembert/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dalembert {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

std::size_t uniform_steps(double a, double b, double step) {
    if (!(step > 0.0)) throw Error("integration step must be positive");
    if (!(b >= a)) throw Error("integration interval end precedes start");
    if (b == a) return 0;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround((b - a) / step)));
}

struct State {
    Vector q;
    Vector v;
};

// -- initial value problem ---------------------------------------------------

Trajectory integrate_rk4(const LagrangianSystem &L, State y, double a, double b, std::size_t steps) {
    const double h = steps ? (b - a) / static_cast<double>(steps) : 0.0;
    Trajectory out{L.chart(), {}, h, std::string(method_name(Method::Rk4))};
    out.samples.reserve(steps + 1);
    for (std::size_t k = 0;; ++k) {
        const double t = a + static_cast<double>(k) * h;
        const Vector acc = el_accelerations(L, y.q, y.v, t);
        out.samples.push_back({t, y.q, y.v, acc});
        if (k == steps) break;

        const Vector &k1q = y.v;
        const Vector &k1v = acc;
        const Vector k2q = y.v + 0.5 * h * k1v;
        const Vector k2v = el_accelerations(L, y.q + 0.5 * h * k1q, k2q, t + 0.5 * h);
        const Vector k3q = y.v + 0.5 * h * k2v;
        const Vector k3v = el_accelerations(L, y.q + 0.5 * h * k2q, k3q, t + 0.5 * h);
        const Vector k4q = y.v + h * k3v;
        const Vector k4v = el_accelerations(L, y.q + h * k3q, k4q, t + h);
        y.q += (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        y.v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    return out;
}

// f(t, y) = (v, el_accelerations) on the stacked state [q; v].
Vector vector_field(const LagrangianSystem &L, const Vector &y, double t) {
    const Index n = y.size() / 2;
    Vector f(y.size());
    f.head(n) = y.tail(n);
    f.tail(n) = el_accelerations(L, y.head(n), y.tail(n), t);
    return f;
}

Matrix field_jacobian(const LagrangianSystem &L, const Vector &y, double t) {
    const Index m = y.size();
    Matrix j(m, m);
    for (Index c = 0; c < m; ++c) {
        const double eps = 1e-7 * std::max(1.0, std::abs(y(c)));
        Vector yp = y, ym = y;
        yp(c) += eps;
        ym(c) -= eps;
        j.col(c) = (vector_field(L, yp, t) - vector_field(L, ym, t)) / (2.0 * eps);
    }
    return j;
}

Trajectory integrate_midpoint(const LagrangianSystem &L, State s, double a, double b, std::size_t steps) {
    const double h = steps ? (b - a) / static_cast<double>(steps) : 0.0;
    const Index n = s.q.size();
    Trajectory out{L.chart(), {}, h, std::string(method_name(Method::ImplicitMidpoint))};
    out.samples.reserve(steps + 1);
    Vector y(2 * n);
    y << s.q, s.v;
    for (std::size_t k = 0;; ++k) {
        const double t = a + static_cast<double>(k) * h;
        const Vector f0 = vector_field(L, y, t);
        out.samples.push_back({t, y.head(n), y.tail(n), f0.tail(n)});
        if (k == steps) break;

        // z - y - h f(t + h/2, (y + z)/2) = 0, chord Newton with the
        // Jacobian frozen at the explicit Euler predictor.
        const double tm = t + 0.5 * h;
        Vector z = y + h * f0;
        const Matrix jr = Matrix::Identity(2 * n, 2 * n) - 0.5 * h * field_jacobian(L, 0.5 * (y + z), tm);
        const auto lu = jr.partialPivLu();
        double res = std::numeric_limits<double>::infinity();
        bool converged = false;
        for (int it = 0; it < kImplicitMaxIterations; ++it) {
            const Vector r = z - y - h * vector_field(L, 0.5 * (y + z), tm);
            res = r.lpNorm<Eigen::Infinity>();
            if (!std::isfinite(res)) break;
            if (res <= kImplicitTolerance * std::max(1.0, z.lpNorm<Eigen::Infinity>())) {
                converged = true;
                break;
            }
            z -= lu.solve(r);
        }
        if (!converged) throw NewtonDivergence(t, res);
        y = z;
    }
    return out;
}

// -- discrete action -----------------------------------------------------------

// Direction in (q, qd, t) space induced by moving component c of the left
// (side 0) or right (side 1) node of a panel of width h.
void panel_direction(std::size_t n, std::size_t var, double h, std::vector<double> &dir) {
    std::fill(dir.begin(), dir.end(), 0.0);
    const std::size_t c = var % n;
    const bool right = var >= n;
    dir[c] = 0.5;
    dir[n + c] = right ? 1.0 / h : -1.0 / h;
}

struct Panel {
    Vector mid;
    Vector vel;
    double t;
};

Panel panel(const DiscretePath &p, std::size_t k) {
    const double h = p.step();
    const Vector qk = p.nodes.col(idx(k)), qk1 = p.nodes.col(idx(k + 1));
    return {0.5 * (qk + qk1), (qk1 - qk) / h, p.time(k) + 0.5 * h};
}

// Gradient (2n) of h L over one panel with respect to its two nodes.
Vector panel_gradient(const LagrangianSystem &L, const DiscretePath &p, std::size_t k) {
    const std::size_t n = p.dimension();
    const double h = p.step();
    const Panel pk = panel(p, k);
    std::vector<double> u(2 * n + 1), zero(2 * n + 1, 0.0);
    Vector g(idx(2 * n));
    for (std::size_t i = 0; i < 2 * n; ++i) {
        panel_direction(n, i, h, u);
        g(idx(i)) = h * L.seeded(pk.mid, pk.vel, pk.t, u, zero).d1;
    }
    return g;
}

Matrix panel_hessian(const LagrangianSystem &L, const DiscretePath &p, std::size_t k) {
    const std::size_t n = p.dimension();
    const double h = p.step();
    const Panel pk = panel(p, k);
    std::vector<double> u(2 * n + 1), v(2 * n + 1);
    Matrix hess(idx(2 * n), idx(2 * n));
    for (std::size_t i = 0; i < 2 * n; ++i) {
        panel_direction(n, i, h, u);
        for (std::size_t j = i; j < 2 * n; ++j) {
            panel_direction(n, j, h, v);
            const double hij = h * L.seeded(pk.mid, pk.vel, pk.t, u, v).d12;
            hess(idx(i), idx(j)) = hij;
            hess(idx(j), idx(i)) = hij;
        }
    }
    return hess;
}

// Symmetric block-tridiagonal Hessian over the interior nodes 1..N-1.
struct BlockTridiag {
    std::vector<Matrix> diag;  // M blocks
    std::vector<Matrix> upper; // M-1 blocks, coupling i -> i+1
    std::vector<double> times; // node time of each diagonal block

    Vector multiply(const Vector &x, Index n) const {
        const std::size_t m = diag.size();
        Vector y = Vector::Zero(x.size());
        for (std::size_t i = 0; i < m; ++i) {
            y.segment(idx(i) * n, n) += diag[i] * x.segment(idx(i) * n, n);
            if (i + 1 < m) {
                y.segment(idx(i) * n, n) += upper[i] * x.segment(idx(i + 1) * n, n);
                y.segment(idx(i + 1) * n, n) += upper[i].transpose() * x.segment(idx(i) * n, n);
            }
        }
        return y;
    }
};

BlockTridiag assemble_hessian(const LagrangianSystem &L, const DiscretePath &p) {
    const std::size_t n = p.dimension(), N = p.panels();
    BlockTridiag t;
    t.diag.assign(N - 1, Matrix::Zero(idx(n), idx(n)));
    t.upper.assign(N > 2 ? N - 2 : 0, Matrix::Zero(idx(n), idx(n)));
    for (std::size_t k = 1; k < N; ++k) t.times.push_back(p.time(k));
    const Index nn = idx(n);
    for (std::size_t k = 0; k < N; ++k) {
        const Matrix hk = panel_hessian(L, p, k);
        // panel k couples node k (interior index k-1) and node k+1 (index k)
        if (k >= 1) t.diag[k - 1] += hk.topLeftCorner(nn, nn);
        if (k + 1 <= N - 1) t.diag[k] += hk.bottomRightCorner(nn, nn);
        if (k >= 1 && k + 1 <= N - 1) t.upper[k - 1] += hk.topRightCorner(nn, nn);
    }
    return t;
}

// Block Thomas factorization; every pivot block is checked for singularity.
class ThomasFactor {
public:
    explicit ThomasFactor(const BlockTridiag &t) : t_(t) {
        const std::size_t m = t.diag.size();
        Matrix pivot = t.diag[0];
        for (std::size_t i = 0; i < m; ++i) {
            const double cond = condition_number(pivot);
            if (!(cond <= kSingularCondition))
                throw DegenerateLagrangian("singular Newton system", t.times[i], cond);
            lu_.emplace_back(pivot.partialPivLu());
            if (i + 1 < m) {
                reduced_upper_.push_back(lu_.back().solve(t.upper[i]));
                pivot = t.diag[i + 1] - t.upper[i].transpose() * reduced_upper_.back();
            }
        }
    }

    Vector solve(const Vector &r) const {
        const std::size_t m = lu_.size();
        const Index n = t_.diag[0].rows();
        Vector x(r.size());
        x.segment(0, n) = lu_[0].solve(r.segment(0, n));
        for (std::size_t i = 1; i < m; ++i)
            x.segment(idx(i) * n, n) =
                lu_[i].solve(r.segment(idx(i) * n, n) - t_.upper[i - 1].transpose() * x.segment(idx(i - 1) * n, n));
        for (std::size_t i = m - 1; i-- > 0;)
            x.segment(idx(i) * n, n) -= reduced_upper_[i] * x.segment(idx(i + 1) * n, n);
        return x;
    }

private:
    const BlockTridiag &t_;
    std::vector<Eigen::PartialPivLU<Matrix>> lu_;
    std::vector<Matrix> reduced_upper_;
};

Vector interior_gradient(const LagrangianSystem &L, const DiscretePath &p) {
    const Matrix g = discrete_action_gradient(L, p);
    const Index n = g.rows();
    const Index m = g.cols() - 2;
    Vector out(n * m);
    for (Index i = 0; i < m; ++i) out.segment(i * n, n) = g.col(i + 1);
    return out;
}

void add_interior(DiscretePath &p, const Vector &step, double alpha) {
    const Index n = p.nodes.rows();
    for (Index i = 0; i + 2 < p.nodes.cols(); ++i) p.nodes.col(i + 1) += alpha * step.segment(i * n, n);
}

// Smallest-magnitude eigenvalue of the interior Hessian by inverse iteration.
double smallest_eigenvalue(const BlockTridiag &t, Index n) {
    const ThomasFactor f(t);
    const Index size = n * static_cast<Index>(t.diag.size());
    Vector x(size);
    for (Index i = 0; i < size; ++i) x(i) = 1.0 + 0.25 * std::sin(0.7 * static_cast<double>(i));
    x.normalize();
    double lambda = x.dot(t.multiply(x, n));
    for (int it = 0; it < 200; ++it) {
        x = f.solve(x);
        x.normalize();
        const double next = x.dot(t.multiply(x, n));
        const bool done = std::abs(next - lambda) <= 1e-13 * std::max(1.0, std::abs(next));
        lambda = next;
        if (done) break;
    }
    return lambda;
}

// The scaled smallest eigenvalue of the discrete Hessian, divided by h,
// approximates the smallest eigenvalue of the Jacobi operator at O(h^2).
// A Richardson-extrapolated estimate that vanishes relative to the raw
// values marks conjugate endpoints, which a plain condition test on the
// discrete system cannot see (it stays near 1/h^3).
void check_conjugate(const LagrangianSystem &L, const DiscretePath &fine) {
    const std::size_t N = fine.panels();
    const std::size_t Nc = N / 2;
    if (Nc < 3) return;
    const Index n = idx(fine.dimension());
    const DiscretePath coarse =
        DiscretePath::sampled([&](double t) { return fine.at(t); }, fine.dimension(), fine.a, fine.b, Nc);
    const double hf = fine.step(), hc = coarse.step();
    const double mf = smallest_eigenvalue(assemble_hessian(L, fine), n) / hf;
    const double mc = smallest_eigenvalue(assemble_hessian(L, coarse), n) / hc;
    const double extrapolated = (mf * hc * hc - mc * hf * hf) / (hc * hc - hf * hf);
    const double scale = std::max(std::abs(mf), std::abs(mc));
    if (std::abs(extrapolated) <= 0.05 * scale) {
        const double cond = std::abs(extrapolated) > 0.0 ? scale / std::abs(extrapolated)
                                                         : std::numeric_limits<double>::infinity();
        throw DegenerateLagrangian("singular Newton system: conjugate point", fine.b, cond);
    }
}

} // namespace

std::string_view method_name(Method m) {
    switch (m) {
    case Method::Rk4: return "rk4";
    case Method::ImplicitMidpoint: return "implicit_midpoint";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "rk4") return Method::Rk4;
    if (name == "implicit_midpoint") return Method::ImplicitMidpoint;
    throw Error("unknown integration method '" + std::string(name) + "'");
}

Trajectory integrate_el(const LagrangianSystem &L, const Vector &q0, const Vector &v0, double a, double b, double step,
                        Method method) {
    if (static_cast<std::size_t>(q0.size()) != L.dimension() || static_cast<std::size_t>(v0.size()) != L.dimension())
        throw DimensionMismatch("initial data dimension differs from Lagrangian dimension");
    const std::size_t steps = uniform_steps(a, b, step);
    if (method == Method::Rk4) return integrate_rk4(L, {q0, v0}, a, b, steps);
    return integrate_midpoint(L, {q0, v0}, a, b, steps);
}

NonConvergence::NonConvergence(double best_gradient, DiscretePath best)
    : Error("stationary action solve did not converge; best gradient norm " + std::to_string(best_gradient)),
      best_gradient_(best_gradient), best_(std::move(best)) {}

DiscretePath DiscretePath::linear(const Vector &qa, const Vector &qb, double a, double b, std::size_t N) {
    return sampled([&](double t) -> Vector { return qa + (qb - qa) * ((t - a) / (b - a)); },
                   static_cast<std::size_t>(qa.size()), a, b, N);
}

Vector DiscretePath::at(double t) const {
    const double s = std::clamp((t - a) / step(), 0.0, static_cast<double>(panels()));
    const auto k = std::min(static_cast<std::size_t>(s), panels() - 1);
    const double w = s - static_cast<double>(k);
    return (1.0 - w) * nodes.col(idx(k)) + w * nodes.col(idx(k + 1));
}

double discrete_action(const LagrangianSystem &L, const DiscretePath &path) {
    if (path.nodes.cols() < 2) throw Error("discrete path needs at least one panel");
    if (path.dimension() != L.dimension()) throw DimensionMismatch("path dimension differs from Lagrangian dimension");
    const double h = path.step();
    double s = 0.0;
    for (std::size_t k = 0; k < path.panels(); ++k) {
        const Panel pk = panel(path, k);
        s += h * L(pk.mid, pk.vel, pk.t);
    }
    return s;
}

Matrix discrete_action_gradient(const LagrangianSystem &L, const DiscretePath &path) {
    if (path.nodes.cols() < 2) throw Error("discrete path needs at least one panel");
    if (path.dimension() != L.dimension()) throw DimensionMismatch("path dimension differs from Lagrangian dimension");
    const Index n = idx(path.dimension());
    Matrix g = Matrix::Zero(n, path.nodes.cols());
    for (std::size_t k = 0; k < path.panels(); ++k) {
        const Vector gk = panel_gradient(L, path, k);
        g.col(idx(k)) += gk.head(n);
        g.col(idx(k + 1)) += gk.tail(n);
    }
    return g;
}

DiscretePath stationary_action_solve(const LagrangianSystem &L, const Vector &qa, const Vector &qb, double a, double b,
                                     std::size_t N, const std::optional<DiscretePath> &init,
                                     const StationaryOptions &options) {
    if (N < 2) throw Error("boundary problem needs at least two panels");
    if (!(b > a)) throw Error("boundary problem needs a < b");
    if (static_cast<std::size_t>(qa.size()) != L.dimension() || static_cast<std::size_t>(qb.size()) != L.dimension())
        throw DimensionMismatch("boundary data dimension differs from Lagrangian dimension");

    DiscretePath path = init ? *init : DiscretePath::linear(qa, qb, a, b, N);
    if (path.panels() != N || path.dimension() != L.dimension() || path.a != a || path.b != b)
        throw DimensionMismatch("initial path does not match the boundary problem");
    path.nodes.col(0) = qa;
    path.nodes.col(idx(N)) = qb;
    path.fixed_start = path.fixed_end = true;

    Vector g = interior_gradient(L, path);
    double gnorm = g.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < options.max_iterations && gnorm > options.gradient_tolerance; ++it) {
        const BlockTridiag hess = assemble_hessian(L, path);
        const Vector step = ThomasFactor(hess).solve(-g);
        double alpha = 1.0;
        bool improved = false;
        for (int half = 0; half <= options.max_halvings; ++half, alpha *= 0.5) {
            DiscretePath trial = path;
            add_interior(trial, step, alpha);
            Vector gt;
            try {
                gt = interior_gradient(L, trial);
            } catch (const DomainError &) {
                continue;
            }
            const double tn = gt.lpNorm<Eigen::Infinity>();
            if (tn < gnorm) {
                path = std::move(trial);
                g = std::move(gt);
                gnorm = tn;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    if (!(gnorm <= options.gradient_tolerance)) throw NonConvergence(gnorm, path);
    if (options.detect_conjugate_points) check_conjugate(L, path);
    return path;
}

} // namespace dalembert
