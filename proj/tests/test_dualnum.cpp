#include "doctest.h"

#include <cmath>
#include <numbers>

#include "dalembert/dualnum.hpp"
#include "dalembert/expr.hpp"
#include "support/random_expr.hpp"

using namespace dalembert;

namespace {

SecondOrderResult eval_text(const std::string &text, std::span<const double> p, std::span<const double> u,
                            std::span<const double> v) {
    const Expr e = Expr::parse(text);
    const CompiledExpr c(e, indexed_names("x", p.size()));
    return d2_eval([&](std::span<const Dual2> args) { return c(args); }, p, u, v);
}

} // namespace

TEST_CASE("lift seeds the first-order parts only") {
    CHECK(lift(3, 1, 0) == Dual2(3, 1, 0, 0));
    CHECK(lift(0, 0, 0) == Dual2(0, 0, 0, 0));
    CHECK(lift(2.5, 0, 1) == Dual2(2.5, 0, 1, 0));
    CHECK(Dual2(7.0) == Dual2(7, 0, 0, 0));
}

TEST_CASE("hyperdual product rule") {
    const Dual2 a(1.5, 0.25, -2.0, 0.75);
    const Dual2 b(-0.5, 3.0, 0.5, -1.25);
    const Dual2 p = a * b;
    CHECK(p.val == a.val * b.val);
    CHECK(p.d12 == a.d12 * b.val + a.d1 * b.d2 + a.d2 * b.d1 + a.val * b.d12);
}

TEST_CASE("d2_eval examples") {
    const std::vector<double> one{1.0}, three{3.0}, zero{0.0};

    auto r = d2_eval([](std::span<const Dual2> x) { return x[0] * x[0]; }, three, one, one);
    CHECK(r.value == 9.0);
    CHECK(r.du == 6.0);
    CHECK(r.dv == 6.0);
    CHECK(r.duv == 2.0);

    r = d2_eval([](std::span<const Dual2> x) { return ad::sin(x[0]); }, zero, one, one);
    CHECK(r.value == 0.0);
    CHECK(r.du == 1.0);
    CHECK(r.dv == 1.0);
    CHECK(r.duv == doctest::Approx(0.0));

    r = d2_eval([](std::span<const Dual2>) { return Dual2(7.0); }, three, one, one);
    CHECK(r.value == 7.0);
    CHECK(r.du == 0.0);
    CHECK(r.dv == 0.0);
    CHECK(r.duv == 0.0);
}

TEST_CASE("pure second derivative when u == v") {
    // f = x^3 y at (2, -1): H(u, u) with u = (1, 2).
    const std::vector<double> p{2.0, -1.0}, u{1.0, 2.0};
    const auto r = eval_text("x1^3*x2", p, u, u);
    // f_xx = 6 x y = -12, f_xy = 3x^2 = 12, f_yy = 0  ->  -12 + 2*2*12 = 36
    CHECK(r.duv == doctest::Approx(36.0).epsilon(1e-14));
}

TEST_CASE("domain errors name the primitive") {
    const std::vector<double> p{-1.0}, u{1.0};
    try {
        (void)eval_text("log(x1)", p, u, u);
        FAIL("expected DomainError");
    } catch (const DomainError &e) {
        CHECK(e.primitive() == "log");
        CHECK(e.argument() == -1.0);
    }
    CHECK_THROWS_AS((void)eval_text("1/(x1+1)", p, u, u), DomainError);
    CHECK_THROWS_AS((void)eval_text("x1^0.5", p, u, u), DomainError);
    CHECK_THROWS_AS((void)eval_text("sqrt(x1)", p, u, u), DomainError);
}

TEST_CASE("sqrt at zero: constant allowed, differentiated argument rejected") {
    CHECK(ad::sqrt(Dual2(0.0)) == Dual2(0.0));
    CHECK_THROWS_AS(ad::sqrt(lift(0.0, 1.0, 0.0)), DomainError);
}

TEST_CASE("nested dual carries hyperdual tangents") {
    // d/ds sin((x + s)^2) at s=0, as a function of hyperdual x seeded along 1.
    const Dual<Dual2> x(lift(0.7, 1.0, 1.0), Dual2(1.0));
    const auto y = ad::sin(ad::powi(x, 2));
    // g(x) = 2x cos(x^2); g'(x) = 2cos(x^2) - 4x^2 sin(x^2); g'' = -12x sin(x^2) - 8x^3 cos(x^2)
    const double xv = 0.7;
    CHECK(y.d.val == doctest::Approx(2 * xv * std::cos(xv * xv)).epsilon(1e-14));
    CHECK(y.d.d1 == doctest::Approx(2 * std::cos(xv * xv) - 4 * xv * xv * std::sin(xv * xv)).epsilon(1e-14));
    CHECK(y.d.d12 ==
          doctest::Approx(-12 * xv * std::sin(xv * xv) - 8 * xv * xv * xv * std::cos(xv * xv)).epsilon(1e-13));
}

TEST_CASE("property: random expressions agree with central differences") {
    testing::ExprGenerator gen(20260415, 3);
    for (int k = 0; k < 200; ++k) {
        const auto re = gen.next(4);
        std::vector<double> p(3), u(3), v(3);
        for (int i = 0; i < 3; ++i) {
            p[static_cast<std::size_t>(i)] = gen.uniform(-1.0, 1.0);
            u[static_cast<std::size_t>(i)] = gen.uniform(-1.0, 1.0);
            v[static_cast<std::size_t>(i)] = gen.uniform(-1.0, 1.0);
        }
        CAPTURE(re.text);
        const auto r = eval_text(re.text, p, u, v);
        const auto fd = testing::central_differences(re.f, p, u, v);
        CHECK(testing::rel_error(r.du, static_cast<double>(fd.du)) <= 1e-6);
        CHECK(testing::rel_error(r.dv, static_cast<double>(fd.dv)) <= 1e-6);
        CHECK(testing::rel_error(r.duv, static_cast<double>(fd.duv)) <= 1e-4);

        // symmetry: swapping directions swaps du/dv and keeps duv exactly
        const auto s = eval_text(re.text, p, v, u);
        CHECK(s.du == r.dv);
        CHECK(s.dv == r.du);
        CHECK(s.duv == r.duv);
    }
}

TEST_CASE("property: linearity of d2_eval") {
    testing::ExprGenerator gen(77, 2);
    for (int k = 0; k < 50; ++k) {
        const auto f = gen.next(3), g = gen.next(3);
        const double a = gen.uniform(-2, 2), b = gen.uniform(-2, 2);
        const std::vector<double> p{gen.uniform(-1, 1), gen.uniform(-1, 1)};
        const std::vector<double> u{gen.uniform(-1, 1), gen.uniform(-1, 1)};
        const std::vector<double> v{gen.uniform(-1, 1), gen.uniform(-1, 1)};
        const Expr ef = Expr::parse(f.text), eg = Expr::parse(g.text);
        const auto slots = indexed_names("x", 2);
        const CompiledExpr cf(ef, slots), cg(eg, slots);
        const auto rf = d2_eval([&](std::span<const Dual2> x) { return cf(x); }, p, u, v);
        const auto rg = d2_eval([&](std::span<const Dual2> x) { return cg(x); }, p, u, v);
        const auto rc = d2_eval([&](std::span<const Dual2> x) { return a * cf(x) + b * cg(x); }, p, u, v);
        auto close = [](double x, double y) {
            return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
        };
        CHECK(close(rc.value, a * rf.value + b * rg.value));
        CHECK(close(rc.du, a * rf.du + b * rg.du));
        CHECK(close(rc.dv, a * rf.dv + b * rg.dv));
        CHECK(close(rc.duv, a * rf.duv + b * rg.duv));
    }
}
