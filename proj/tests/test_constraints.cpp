#include "doctest.h"

#include <cmath>
#include <random>

#include "dalembert/constraints.hpp"
#include "dalembert/frames.hpp"
#include "dalembert/solvers.hpp"

using namespace dalembert;

namespace {

constexpr double R = 1.0, W = 2.0, G = 9.81;

std::vector<Expr> exprs(std::initializer_list<const char *> texts, const Constants &c = {}) {
    std::vector<Expr> e;
    for (const char *s : texts) e.push_back(Expr::parse(s, c));
    return e;
}

ConstraintEmbedding circle() {
    return ConstraintEmbedding(1, exprs({"cos(x1)", "sin(x1)"}), exprs({"q1^2 + q2^2 - 1"}));
}

ConstraintEmbedding hoop() {
    const Constants c{{"R", R}, {"W", W}};
    return ConstraintEmbedding(1, exprs({"R*sin(x1)*cos(W*t)", "R*sin(x1)*sin(W*t)", "-R*cos(x1)"}, c),
                               exprs({"q1^2 + q2^2 + q3^2 - R^2", "q1*sin(W*t) - q2*cos(W*t)"}, c));
}

LagrangianSystem free2() { return LagrangianSystem::from_expression(Expr::parse("0.5*(qd1^2 + qd2^2)"), 2); }

LagrangianSystem gravity3() {
    return LagrangianSystem::from_expression(Expr::parse("0.5*(qd1^2 + qd2^2 + qd3^2) - g*q3", {{"g", G}}), 3);
}

Vector v1(double a) { return Vector::Constant(1, a); }

struct Rng {
    std::mt19937_64 g{99};
    double operator()(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(g); }
};

} // namespace

TEST_CASE("intrinsic_lagrangian examples") {
    Rng r;
    const auto lc = intrinsic_lagrangian(free2(), circle());
    const auto lh = intrinsic_lagrangian(gravity3(), hoop());
    for (int k = 0; k < 100; ++k) {
        const double x = r(-3, 3), xd = r(-2, 2), t = r(-2, 2);
        CHECK(std::abs(lc(v1(x), v1(xd), t) - 0.5 * xd * xd) <= 1e-12);
        const double oracle = 0.5 * R * R * xd * xd + 0.5 * R * R * W * W * std::sin(x) * std::sin(x) + G * R * std::cos(x);
        CHECK(std::abs(lh(v1(x), v1(xd), t) - oracle) <= 1e-12);
    }

    // m = n: agrees with the frame pullback
    const auto fwd = exprs({"x1*cos(t) - x2*sin(t)", "x1*sin(t) + x2*cos(t)"});
    const auto a = intrinsic_lagrangian(free2(), ConstraintEmbedding(2, fwd));
    const auto b = pullback_lagrangian(free2(), FrameMap(fwd));
    for (int k = 0; k < 50; ++k) {
        Vector x(2), xd(2);
        x << r(), r();
        xd << r(), r();
        const double t = r();
        CHECK(std::abs(a(x, xd, t) - b(x, xd, t)) <= 1e-12);
    }
}

TEST_CASE("time-independent embedding restricts L to the tangent bundle") {
    Rng r;
    const auto L = LagrangianSystem::from_expression(Expr::parse("0.5*(qd1^2 + qd2^2) - q2 + q1*qd2"), 2);
    const auto l = intrinsic_lagrangian(L, circle());
    for (int k = 0; k < 50; ++k) {
        const double x = r(-3, 3), xd = r(), t = r();
        Vector q(2), qd(2);
        q << std::cos(x), std::sin(x);
        qd << -std::sin(x) * xd, std::cos(x) * xd;
        CHECK(std::abs(l(v1(x), v1(xd), t) - L(q, qd, t)) <= 1e-12);
    }
}

TEST_CASE("velocity_spaces examples") {
    const double x = 0.8;
    const auto sc = velocity_spaces(circle(), v1(x), 1.3);
    CHECK(sc.offset.isZero());
    CHECK(std::abs(sc.basis(0, 0) + std::sin(x)) <= 1e-15);
    CHECK(std::abs(sc.basis(1, 0) - std::cos(x)) <= 1e-15);

    const double th = 0.6, t = 0.4;
    const auto sh = velocity_spaces(hoop(), v1(th), t);
    Vector oracle(3);
    oracle << -std::sin(W * t), std::cos(W * t), 0.0;
    oracle *= R * W * std::sin(th);
    CHECK((sh.offset - oracle).norm() <= 1e-14);
    const double h = 1e-6;
    const Vector fd = (hoop().map().position(v1(th), t + h) - hoop().map().position(v1(th), t - h)) / (2 * h);
    CHECK((sh.offset - fd).norm() <= 1e-8);

    Rng r;
    for (int k = 0; k < 50; ++k) {
        const double xx = r(-3, 3), xd = r(), tt = r();
        const auto s = velocity_spaces(hoop(), v1(xx), tt);
        CHECK(s.distance(hoop().map().velocity(v1(xx), v1(xd), tt)) <= 1e-12);
    }
    Vector off(3);
    off << 0.0, 0.0, 1.0;
    CHECK(sh.distance(sh.offset + off) >= 0.1);
}

TEST_CASE("rank deficiency is reported") {
    // the hoop degenerates at the poles only through the rotation; use a
    // collapsing embedding instead.
    const ConstraintEmbedding flat(1, exprs({"x1^2", "x1^3"}));
    CHECK(flat.rank(v1(0.5), 0.0) == 1);
    CHECK_THROWS_AS((void)velocity_spaces(flat, v1(0.0), 0.0), RankDeficiency);
    CHECK_THROWS_AS(ConstraintEmbedding(3, exprs({"x1", "x2"})), DimensionMismatch);
    CHECK_THROWS_AS(ConstraintEmbedding(1, exprs({"x1", "x1"}), exprs({"q1", "q2"})), DimensionMismatch);
}

TEST_CASE("dalembert_check examples") {
    for (double t : {0.0, 0.5, 1.7}) {
        const double c = 1.3;
        const CurveJet uniform{t, v1(c * t), v1(c), v1(0.0)};
        CHECK(dalembert_check(free2(), circle(), uniform) <= 1e-10);
        const CurveJet accel{t, v1(t * t), v1(2 * t), v1(2.0)};
        CHECK(dalembert_check(free2(), circle(), accel) == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("dalembert_check along an integrated hoop motion") {
    const auto l = intrinsic_lagrangian(gravity3(), hoop());
    const auto traj = integrate_el(l, v1(0.3), v1(0.0), 0.0, 2.0, 1e-3, Method::Rk4);
    double worst = 0.0;
    for (const auto &s : traj.samples) worst = std::max(worst, dalembert_check(gravity3(), hoop(), s));
    CHECK(worst <= 1e-6);
}

TEST_CASE("constraint_drift examples") {
    const auto l = intrinsic_lagrangian(gravity3(), hoop());
    const auto traj = integrate_el(l, v1(0.3), v1(0.5), 0.0, 1.0, 1e-2, Method::Rk4);
    Trajectory amb{"q", {}, traj.step, traj.method};
    for (const auto &s : traj.samples) amb.samples.push_back(hoop().map().push_jet(s));
    CHECK(constraint_drift(hoop(), amb).value <= 1e-12);

    const double Rs = 2.0;
    const ConstraintEmbedding sphere(2,
                                     exprs({"R*sin(x1)*cos(x2)", "R*sin(x1)*sin(x2)", "R*cos(x1)"}, {{"R", Rs}}),
                                     exprs({"q1^2 + q2^2 + q3^2 - R^2"}, {{"R", Rs}}));
    Trajectory pert{"q", {}, 0.1, "analytic"};
    for (int k = 0; k < 10; ++k) {
        Vector x(2);
        x << 0.3 + 0.1 * k, 0.2 * k;
        Vector q = sphere.map().position(x, 0.0);
        q += 0.01 * q.normalized();
        pert.samples.push_back({0.1 * k, q, Vector::Zero(3), Vector::Zero(3)});
    }
    const double drift = constraint_drift(sphere, pert).value;
    CHECK(std::abs(drift - 2 * Rs * 0.01) <= 0.01 * 0.01 * 1.01);

    const auto none = constraint_drift(ConstraintEmbedding(1, exprs({"cos(x1)", "sin(x1)"})), pert);
    CHECK(none.value == 0.0);
    CHECK(none.note == "no residuals");
}

TEST_CASE("property: constrained variational derivative equals the ambient one on virtual displacements") {
    Rng r;
    const auto L = gravity3();
    const auto emb = hoop();
    const auto l = intrinsic_lagrangian(L, emb);
    for (int k = 0; k < 100; ++k) {
        const CurveJet g{r(-2, 2), v1(r(0.2, 2.5)), v1(r()), v1(r())};
        const double xi = r();
        const double lhs = variational_derivative(l, g, v1(xi));
        const Vector eta = emb.map().jacobian(g.pos, g.t) * v1(xi);
        const double rhs = variational_derivative(L, emb.map().push_jet(g), eta);
        CHECK(std::abs(lhs - rhs) <= 1e-9);
    }
}

TEST_CASE("property: actions along corresponding curves agree") {
    const auto L = gravity3();
    const auto emb = hoop();
    const auto l = intrinsic_lagrangian(L, emb);
    const AnalyticCurve gamma_sigma({Expr::parse("0.4 + 0.3*sin(2*t)")});
    const Constants c{{"R", R}, {"W", W}};
    const AnalyticCurve gamma({Expr::parse("R*sin(0.4 + 0.3*sin(2*t))*cos(W*t)", c),
                               Expr::parse("R*sin(0.4 + 0.3*sin(2*t))*sin(W*t)", c),
                               Expr::parse("-R*cos(0.4 + 0.3*sin(2*t))", c)});
    CHECK(std::abs(action_integral(l, gamma_sigma, 0.0, 2.0) - action_integral(L, gamma, 0.0, 2.0)) <= 1e-9);
}
