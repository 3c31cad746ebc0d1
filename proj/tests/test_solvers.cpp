#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "dalembert/solvers.hpp"

using namespace dalembert;

namespace {

constexpr double kPi = std::numbers::pi;

LagrangianSystem lag(const std::string &text, std::size_t n = 1) {
    return LagrangianSystem::from_expression(Expr::parse(text), n);
}

const LagrangianSystem kFree = lag("0.5*qd1^2");
const LagrangianSystem kOsc = lag("0.5*qd1^2 - 0.5*q1^2");

Vector v1(double a) { return Vector::Constant(1, a); }

double sup_error_vs_sin(const DiscretePath &p) {
    double e = 0.0;
    for (std::size_t k = 0; k <= p.panels(); ++k)
        e = std::max(e, std::abs(p.nodes(0, static_cast<Eigen::Index>(k)) - std::sin(p.time(k))));
    return e;
}

} // namespace

TEST_CASE("integrate_el examples") {
    const auto osc = integrate_el(kOsc, v1(1.0), v1(0.0), 0.0, 2 * kPi, 1e-3, Method::Rk4);
    CHECK(std::abs(osc.samples.back().pos(0) - 1.0) <= 1e-9);
    CHECK(std::abs(osc.samples.back().t - 2 * kPi) <= 1e-12);

    const auto fr = integrate_el(kFree, v1(0.0), v1(2.0), 0.0, 3.0, 1e-2, Method::Rk4);
    for (const auto &s : fr.samples) {
        CHECK(std::abs(s.pos(0) - 2 * s.t) <= 1e-12);
        CHECK(s.acc(0) == 0.0);
    }

    try {
        (void)integrate_el(lag("qd1"), v1(0.0), v1(0.0), 0.5, 1.0, 1e-2, Method::Rk4);
        FAIL("expected DegenerateLagrangian");
    } catch (const DegenerateLagrangian &e) {
        CHECK(e.time() == 0.5);
    }
}

TEST_CASE("trajectory invariants") {
    const auto tr = integrate_el(kOsc, v1(1.0), v1(0.0), 0.0, 1.0, 0.3, Method::ImplicitMidpoint);
    CHECK(tr.samples.size() == 4);
    CHECK(tr.method == "implicit_midpoint");
    for (std::size_t k = 1; k < tr.samples.size(); ++k) {
        CHECK(tr.samples[k].t > tr.samples[k - 1].t);
        CHECK(std::abs(tr.samples[k].t - tr.samples[k - 1].t - tr.step) <= 1e-12);
    }
    CHECK(integrate_el(kOsc, v1(1.0), v1(0.0), 2.0, 2.0).samples.size() == 1);
    CHECK_THROWS((void)integrate_el(kOsc, v1(1.0), v1(0.0), 0.0, 1.0, 0.0));
    CHECK(parse_method("rk4") == Method::Rk4);
    CHECK_THROWS((void)parse_method("euler"));
}

TEST_CASE("convergence orders of the integrators") {
    auto err = [](Method m, double h) {
        const auto tr = integrate_el(kOsc, v1(1.0), v1(0.0), 0.0, 2.0, h, m);
        return std::abs(tr.samples.back().pos(0) - std::cos(2.0));
    };
    const double r4 = err(Method::Rk4, 0.02) / err(Method::Rk4, 0.01);
    CHECK(r4 >= 14.0);
    CHECK(r4 <= 18.0);
    const double r2 = err(Method::ImplicitMidpoint, 0.02) / err(Method::ImplicitMidpoint, 0.01);
    CHECK(r2 >= 3.5);
    CHECK(r2 <= 4.5);
}

TEST_CASE("implicit midpoint conserves the pendulum energy") {
    const auto pend = lag("0.5*qd1^2 + cos(q1)");
    const auto tr = integrate_el(pend, v1(0.5), v1(0.0), 0.0, 100.0, 1e-2, Method::ImplicitMidpoint);
    CHECK(tr.samples.size() == 10001);
    const double e0 = jacobi_energy(pend, tr.samples.front().pos, tr.samples.front().vel, 0.0);
    double drift = 0.0;
    for (const auto &s : tr.samples) drift = std::max(drift, std::abs(jacobi_energy(pend, s.pos, s.vel, s.t) - e0));
    MESSAGE("pendulum energy drift " << drift);
    CHECK(drift <= 1e-6);
}

TEST_CASE("discrete_action examples") {
    for (std::size_t N : {1u, 3u, 10u, 77u}) {
        const auto p = DiscretePath::linear(v1(0.0), v1(1.0), 0.0, 1.0, N);
        CHECK(discrete_action(kFree, p) == doctest::Approx(0.5).epsilon(1e-15));
    }
    CHECK(discrete_action(lag("1 + 0*q1"), DiscretePath::linear(v1(0.0), v1(0.0), 0.0, 1.0, 1)) == 1.0);
    const auto s = DiscretePath::sampled([](double t) { return v1(std::sin(t)); }, 1, 0.0, kPi, 1000);
    CHECK(std::abs(discrete_action(kOsc, s) - action_integral(kOsc, AnalyticCurve({Expr::parse("sin(t)")}), 0.0, kPi)) <=
          1e-5);
}

TEST_CASE("discrete action gradient matches finite differences") {
    const auto L = lag("0.5*(1 + q1^2)*qd1^2 - cos(q1 + t)");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    auto p = DiscretePath::sampled([&](double t) { return v1(std::sin(t) + u(rng)); }, 1, 0.0, 1.0, 12);
    const Matrix g = discrete_action_gradient(L, p);
    for (Eigen::Index k = 0; k <= 12; ++k) {
        const double h = 1e-6;
        auto pp = p, pm = p;
        pp.nodes(0, k) += h;
        pm.nodes(0, k) -= h;
        const double fd = (discrete_action(L, pp) - discrete_action(L, pm)) / (2 * h);
        CHECK(std::abs(fd - g(0, k)) <= 1e-7);
    }
}

TEST_CASE("stationary_action_solve examples") {
    const auto fr = stationary_action_solve(kFree, v1(0.0), v1(1.0), 0.0, 1.0, 10);
    for (std::size_t k = 0; k <= 10; ++k) CHECK(std::abs(fr.nodes(0, static_cast<Eigen::Index>(k)) - fr.time(k)) <= 1e-12);

    const auto osc = stationary_action_solve(kOsc, v1(0.0), v1(1.0), 0.0, kPi / 2, 200);
    CHECK(sup_error_vs_sin(osc) <= 2e-4);

    bool refused = false;
    try {
        (void)stationary_action_solve(kOsc, v1(0.0), v1(0.0), 0.0, kPi, 200);
    } catch (const DegenerateLagrangian &) {
        refused = true;
    } catch (const NonConvergence &) {
        refused = true;
    }
    CHECK(refused);

    CHECK_THROWS_AS((void)stationary_action_solve(lag("qd1"), v1(0.0), v1(1.0), 0.0, 1.0, 20), DegenerateLagrangian);
}

TEST_CASE("conjugate-point detection leaves nearby regular problems alone") {
    // Just short of and beyond the first conjugate time; both regular.
    CHECK_NOTHROW((void)stationary_action_solve(kOsc, v1(0.0), v1(1.0), 0.0, 0.8 * kPi, 200));
    CHECK_NOTHROW((void)stationary_action_solve(kOsc, v1(0.0), v1(1.0), 0.0, 1.25 * kPi, 200));
    CHECK_THROWS_AS((void)stationary_action_solve(kOsc, v1(0.0), v1(0.0), 0.0, 2 * kPi, 200), DegenerateLagrangian);
    CHECK_THROWS_AS((void)stationary_action_solve(kOsc, v1(0.0), v1(0.0), 0.0, kPi, 201), DegenerateLagrangian);
}

TEST_CASE("non-convergence reports the best iterate") {
    StationaryOptions opts;
    opts.max_iterations = 1;
    const auto L = lag("0.5*qd1^2 + cos(q1)*q1^2");
    try {
        (void)stationary_action_solve(L, v1(0.0), v1(3.0), 0.0, 1.0, 50, std::nullopt, opts);
        FAIL("expected NonConvergence");
    } catch (const NonConvergence &e) {
        CHECK(e.best_gradient() > 1e-10);
        CHECK(e.best_path().panels() == 50);
    }
}

TEST_CASE("second-order convergence of the boundary solve") {
    const double e1 = sup_error_vs_sin(stationary_action_solve(kOsc, v1(0.0), v1(1.0), 0.0, kPi / 2, 200));
    const double e2 = sup_error_vs_sin(stationary_action_solve(kOsc, v1(0.0), v1(1.0), 0.0, kPi / 2, 400));
    CHECK(e1 / e2 >= 3.5);
    CHECK(e1 / e2 <= 4.5);
}

TEST_CASE("property: boundary solve and shooting agree to second order") {
    // Driven pendulum; the reference motion comes from bisection shooting on
    // the initial velocity with a fine rk4 grid.
    const auto L = lag("0.5*qd1^2 + cos(q1) + 0.3*q1*sin(t)");
    const double a = 0.0, b = 1.5, qa = 0.2, qb = -0.4;
    auto shoot = [&](double v0) {
        return integrate_el(L, v1(qa), v1(v0), a, b, 5e-4, Method::Rk4).samples.back().pos(0) - qb;
    };
    double lo = -5, hi = 5;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (shoot(lo) * shoot(mid) <= 0 ? hi : lo) = mid;
    }
    const auto ref = integrate_el(L, v1(qa), v1(0.5 * (lo + hi)), a, b, 5e-4, Method::Rk4);
    auto diff = [&](std::size_t N) {
        const auto p = stationary_action_solve(L, v1(qa), v1(qb), a, b, N);
        double e = 0;
        for (std::size_t k = 0; k <= N; ++k) {
            const auto j = static_cast<std::size_t>(std::llround((p.time(k) - a) / ref.step));
            e = std::max(e, std::abs(p.nodes(0, static_cast<Eigen::Index>(k)) - ref.samples[j].pos(0)));
        }
        return e;
    };
    const double ratio = diff(50) / diff(100);
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
}

TEST_CASE("property: discrete d'Alembert along converged paths") {
    const auto L = lag("0.5*(qd1^2 + qd2^2) - 0.5*(q1^2 + 3*q2^2) + 0.2*q1*q2*t", 2);
    Vector qa(2), qb(2);
    qa << 0.1, -0.2;
    qb << 0.5, 0.3;
    const auto p = stationary_action_solve(L, qa, qb, 0.0, 1.0, 80);
    const Matrix g = discrete_action_gradient(L, p);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        double s = 0;
        for (Eigen::Index j = 1; j < g.cols() - 1; ++j) s += g(0, j) * u(rng) + g(1, j) * u(rng);
        CHECK(std::abs(s) <= 1e-9);
    }
}

TEST_CASE("DiscretePath interpolation") {
    const auto p = DiscretePath::linear(v1(1.0), v1(3.0), 0.0, 2.0, 4);
    CHECK(p.at(0.0)(0) == 1.0);
    CHECK(p.at(2.0)(0) == doctest::Approx(3.0));
    CHECK(p.at(0.75)(0) == doctest::Approx(1.75));
}
