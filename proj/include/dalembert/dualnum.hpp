#pragma once

// Forward-mode automatic differentiation scalars.
//
// Dual2 is the four-component hyperdual number (val, d1, d2, d12): seeding
// an input with directions u and v yields the directional derivatives along u
// and v and the bilinear Hessian form H(u, v) in one pass. Dual<T> is a
// first-order dual over an arbitrary scalar and nests, so Dual<Dual2> carries
// a Jacobian-vector product whose entries are themselves hyperdual.
//
// Every primitive checks its domain on the primal value and throws
// DomainError naming itself; nothing propagates NaN silently.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dalembert/errors.hpp"

namespace dalembert {

struct Dual2 {
    double val = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d12 = 0.0;

    constexpr Dual2() = default;
    constexpr Dual2(double value) : val(value) {} // NOLINT: constants lift implicitly
    constexpr Dual2(double value, double du, double dv, double duv)
        : val(value), d1(du), d2(dv), d12(duv) {}

    constexpr bool operator==(const Dual2 &) const = default;
};

/// Seed a variable with directions u and v; the mixed part starts at zero.
constexpr Dual2 lift(double value, double seed_u, double seed_v) {
    return {value, seed_u, seed_v, 0.0};
}

template <typename T>
struct Dual {
    T v{};
    T d{};

    constexpr Dual() = default;
    constexpr Dual(double value) : v(value), d(0.0) {} // NOLINT
    constexpr Dual(T value, T tangent) : v(value), d(tangent) {}
};

// -- primal value / constness ---------------------------------------------

inline double primal(double x) { return x; }
inline double primal(const Dual2 &x) { return x.val; }
template <typename T>
double primal(const Dual<T> &x) { return primal(x.v); }

inline bool is_constant(double) { return true; }
inline bool is_constant(const Dual2 &x) { return x.d1 == 0.0 && x.d2 == 0.0 && x.d12 == 0.0; }
template <typename T>
bool is_constant(const Dual<T> &x) { return is_constant(x.v) && is_constant(x.d); }

// -- Dual2 arithmetic -----------------------------------------------------

namespace detail {
// f applied to a hyperdual argument given f, f', f'' at the primal value.
// Mixed terms are grouped so that swapping d1 and d2 is bitwise exact.
constexpr Dual2 chain(const Dual2 &a, double f0, double f1, double f2) {
    return {f0, f1 * a.d1, f1 * a.d2, f2 * (a.d1 * a.d2) + f1 * a.d12};
}
} // namespace detail

constexpr Dual2 operator-(const Dual2 &a) { return {-a.val, -a.d1, -a.d2, -a.d12}; }
constexpr Dual2 operator+(const Dual2 &a, const Dual2 &b) {
    return {a.val + b.val, a.d1 + b.d1, a.d2 + b.d2, a.d12 + b.d12};
}
constexpr Dual2 operator-(const Dual2 &a, const Dual2 &b) {
    return {a.val - b.val, a.d1 - b.d1, a.d2 - b.d2, a.d12 - b.d12};
}
constexpr Dual2 operator*(const Dual2 &a, const Dual2 &b) {
    return {a.val * b.val, a.d1 * b.val + a.val * b.d1, a.d2 * b.val + a.val * b.d2,
            a.d12 * b.val + (a.d1 * b.d2 + a.d2 * b.d1) + a.val * b.d12};
}
constexpr Dual2 operator*(double s, const Dual2 &a) { return {s * a.val, s * a.d1, s * a.d2, s * a.d12}; }
constexpr Dual2 operator*(const Dual2 &a, double s) { return s * a; }
constexpr Dual2 operator+(const Dual2 &a, double s) { return {a.val + s, a.d1, a.d2, a.d12}; }
constexpr Dual2 operator+(double s, const Dual2 &a) { return a + s; }
constexpr Dual2 operator-(const Dual2 &a, double s) { return {a.val - s, a.d1, a.d2, a.d12}; }
constexpr Dual2 operator-(double s, const Dual2 &a) { return {s - a.val, -a.d1, -a.d2, -a.d12}; }

inline Dual2 operator/(const Dual2 &a, const Dual2 &b) {
    if (b.val == 0.0) throw DomainError("division", b.val);
    // Quotient rule solved for r in r * b = a, component by component.
    const double r0 = a.val / b.val;
    const double r1 = (a.d1 - r0 * b.d1) / b.val;
    const double r2 = (a.d2 - r0 * b.d2) / b.val;
    const double r12 = (a.d12 - r0 * b.d12 - (r1 * b.d2 + r2 * b.d1)) / b.val;
    return {r0, r1, r2, r12};
}
inline Dual2 operator/(const Dual2 &a, double s) {
    if (s == 0.0) throw DomainError("division", s);
    return (1.0 / s) * a;
}
inline Dual2 operator/(double s, const Dual2 &b) { return Dual2(s) / b; }

inline Dual2 &operator+=(Dual2 &a, const Dual2 &b) { return a = a + b; }
inline Dual2 &operator-=(Dual2 &a, const Dual2 &b) { return a = a - b; }
inline Dual2 &operator*=(Dual2 &a, const Dual2 &b) { return a = a * b; }

// -- Dual<T> arithmetic ---------------------------------------------------

template <typename T>
Dual<T> operator-(const Dual<T> &a) { return {-a.v, -a.d}; }
template <typename T>
Dual<T> operator+(const Dual<T> &a, const Dual<T> &b) { return {a.v + b.v, a.d + b.d}; }
template <typename T>
Dual<T> operator-(const Dual<T> &a, const Dual<T> &b) { return {a.v - b.v, a.d - b.d}; }
template <typename T>
Dual<T> operator*(const Dual<T> &a, const Dual<T> &b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
namespace ad {
inline double div(double a, double b);
inline Dual2 div(const Dual2 &a, const Dual2 &b);
template <typename T>
Dual<T> div(const Dual<T> &a, const Dual<T> &b);
} // namespace ad
template <typename T>
Dual<T> operator/(const Dual<T> &a, const Dual<T> &b) {
    const T q = ad::div(a.v, b.v);
    return {q, ad::div(a.d - q * b.d, b.v)};
}
template <typename T>
Dual<T> operator*(double s, const Dual<T> &a) { return {s * a.v, s * a.d}; }
template <typename T>
Dual<T> operator*(const Dual<T> &a, double s) { return s * a; }
template <typename T>
Dual<T> operator+(const Dual<T> &a, double s) { return {a.v + s, a.d}; }
template <typename T>
Dual<T> operator+(double s, const Dual<T> &a) { return a + s; }
template <typename T>
Dual<T> operator-(const Dual<T> &a, double s) { return {a.v - s, a.d}; }
template <typename T>
Dual<T> operator-(double s, const Dual<T> &a) { return {s - a.v, -a.d}; }
template <typename T>
Dual<T> operator/(const Dual<T> &a, double s) { return a / Dual<T>(s); }
template <typename T>
Dual<T> operator/(double s, const Dual<T> &a) { return Dual<T>(s) / a; }
template <typename T>
Dual<T> &operator+=(Dual<T> &a, const Dual<T> &b) { return a = a + b; }
template <typename T>
Dual<T> &operator-=(Dual<T> &a, const Dual<T> &b) { return a = a - b; }
template <typename T>
Dual<T> &operator*=(Dual<T> &a, const Dual<T> &b) { return a = a * b; }

// -- smooth primitives ----------------------------------------------------
//
// Always call these qualified (ad::sin, ...). The double overloads apply the
// same domain rules as the dual ones so plain and dual evaluation agree.

namespace ad {

inline double div(double a, double b) {
    if (b == 0.0) throw DomainError("division", b);
    return a / b;
}
inline Dual2 div(const Dual2 &a, const Dual2 &b) { return a / b; }
template <typename T>
Dual<T> div(const Dual<T> &a, const Dual<T> &b) { return a / b; }

inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double tan(double x) {
    if (std::cos(x) == 0.0) throw DomainError("tan", x);
    return std::tan(x);
}
inline double exp(double x) { return std::exp(x); }
inline double log(double x) {
    if (!(x > 0.0)) throw DomainError("log", x);
    return std::log(x);
}
inline double sqrt(double x) {
    if (!(x >= 0.0)) throw DomainError("sqrt", x);
    return std::sqrt(x);
}
inline double atan2(double y, double x) {
    if (y == 0.0 && x == 0.0) throw DomainError("atan2", 0.0);
    return std::atan2(y, x);
}
inline double powi(double x, int k) {
    if (k < 0 && x == 0.0) throw DomainError("pow", x);
    return std::pow(x, k);
}
inline bool is_integral(double e) { return std::isfinite(e) && std::floor(e) == e && std::abs(e) < 1 << 30; }
inline double pow(double x, double e) {
    if (is_integral(e)) return powi(x, static_cast<int>(e));
    if (x < 0.0 || (x == 0.0 && e < 0.0)) throw DomainError("pow", x);
    return std::pow(x, e);
}

inline Dual2 sin(const Dual2 &a) {
    const double s = std::sin(a.val), c = std::cos(a.val);
    return detail::chain(a, s, c, -s);
}
inline Dual2 cos(const Dual2 &a) {
    const double s = std::sin(a.val), c = std::cos(a.val);
    return detail::chain(a, c, -s, -c);
}
inline Dual2 tan(const Dual2 &a) {
    const double t = ad::tan(a.val);
    const double sec2 = 1.0 + t * t;
    return detail::chain(a, t, sec2, 2.0 * t * sec2);
}
inline Dual2 exp(const Dual2 &a) {
    const double e = std::exp(a.val);
    return detail::chain(a, e, e, e);
}
inline Dual2 log(const Dual2 &a) {
    const double l = ad::log(a.val);
    const double inv = 1.0 / a.val;
    return detail::chain(a, l, inv, -inv * inv);
}
inline Dual2 sqrt(const Dual2 &a) {
    const double s = ad::sqrt(a.val);
    if (s == 0.0) {
        if (!is_constant(a)) throw DomainError("sqrt", a.val);
        return {};
    }
    return detail::chain(a, s, 0.5 / s, -0.25 / (s * a.val));
}
inline Dual2 atan2(const Dual2 &y, const Dual2 &x) {
    const double r2 = x.val * x.val + y.val * y.val;
    if (r2 == 0.0) throw DomainError("atan2", 0.0);
    // Partials of atan2(y, x): (x, -y)/r2; second partials from r2^-2 terms.
    const double gy = x.val / r2, gx = -y.val / r2;
    const double r4 = r2 * r2;
    const double hyy = -2.0 * x.val * y.val / r4;
    const double hxx = 2.0 * x.val * y.val / r4;
    const double hxy = (y.val * y.val - x.val * x.val) / r4;
    return {std::atan2(y.val, x.val), gy * y.d1 + gx * x.d1, gy * y.d2 + gx * x.d2,
            gy * y.d12 + gx * x.d12 + hyy * (y.d1 * y.d2) + hxx * (x.d1 * x.d2) +
                hxy * (y.d1 * x.d2 + x.d1 * y.d2)};
}
inline Dual2 powi(const Dual2 &a, int k) {
    if (k == 0) return Dual2(1.0);
    if (k == 1) return a;
    if (k < 0 && a.val == 0.0) throw DomainError("pow", a.val);
    const double f1 = k * std::pow(a.val, k - 1);
    const double f2 = k * (k - 1) * std::pow(a.val, k - 2);
    return detail::chain(a, std::pow(a.val, k), f1, f2);
}
inline Dual2 pow(const Dual2 &a, const Dual2 &e) {
    if (is_constant(e) && is_integral(e.val)) return powi(a, static_cast<int>(e.val));
    if (a.val > 0.0) {
        Dual2 r = ad::exp(e * ad::log(a));
        r.val = std::pow(a.val, e.val); // bitwise agreement with plain evaluation
        return r;
    }
    if (a.val == 0.0 && is_constant(a) && is_constant(e) && e.val > 0.0) return {};
    throw DomainError("pow", a.val);
}

template <typename T> Dual<T> sin(const Dual<T> &a);
template <typename T> Dual<T> cos(const Dual<T> &a);
template <typename T> Dual<T> tan(const Dual<T> &a);
template <typename T> Dual<T> exp(const Dual<T> &a);
template <typename T> Dual<T> log(const Dual<T> &a);
template <typename T> Dual<T> sqrt(const Dual<T> &a);
template <typename T> Dual<T> atan2(const Dual<T> &y, const Dual<T> &x);
template <typename T> Dual<T> powi(const Dual<T> &a, int k);
template <typename T> Dual<T> pow(const Dual<T> &a, const Dual<T> &e);

template <typename T>
Dual<T> sin(const Dual<T> &a) { return {ad::sin(a.v), ad::cos(a.v) * a.d}; }
template <typename T>
Dual<T> cos(const Dual<T> &a) { return {ad::cos(a.v), -(ad::sin(a.v) * a.d)}; }
template <typename T>
Dual<T> tan(const Dual<T> &a) {
    const T t = ad::tan(a.v);
    return {t, (1.0 + t * t) * a.d};
}
template <typename T>
Dual<T> exp(const Dual<T> &a) {
    const T e = ad::exp(a.v);
    return {e, e * a.d};
}
template <typename T>
Dual<T> log(const Dual<T> &a) { return {ad::log(a.v), ad::div(a.d, a.v)}; }
template <typename T>
Dual<T> sqrt(const Dual<T> &a) {
    const T s = ad::sqrt(a.v);
    if (primal(s) == 0.0) {
        if (!is_constant(a)) throw DomainError("sqrt", primal(a));
        return {};
    }
    return {s, ad::div(a.d, 2.0 * s)};
}
template <typename T>
Dual<T> atan2(const Dual<T> &y, const Dual<T> &x) {
    const T r2 = x.v * x.v + y.v * y.v;
    if (primal(r2) == 0.0) throw DomainError("atan2", 0.0);
    return {ad::atan2(y.v, x.v), ad::div(x.v * y.d - y.v * x.d, r2)};
}
template <typename T>
Dual<T> powi(const Dual<T> &a, int k) {
    if (k == 0) return Dual<T>(1.0);
    if (k == 1) return a;
    if (k < 0 && primal(a) == 0.0) throw DomainError("pow", primal(a));
    return {ad::powi(a.v, k), static_cast<double>(k) * ad::powi(a.v, k - 1) * a.d};
}
template <typename T>
Dual<T> pow(const Dual<T> &a, const Dual<T> &e) {
    if (is_constant(e) && is_integral(primal(e))) return ad::powi(a, static_cast<int>(primal(e)));
    if (primal(a) > 0.0) return ad::exp(e * ad::log(a));
    if (primal(a) == 0.0 && is_constant(a) && is_constant(e) && primal(e) > 0.0) return {};
    throw DomainError("pow", primal(a));
}

} // namespace ad

// -- seeded evaluation ----------------------------------------------------

struct SecondOrderResult {
    double value = 0.0;
    double du = 0.0;
    double dv = 0.0;
    double duv = 0.0;
};

/// Evaluate f at `point` with every input seeded along (dir_u, dir_v).
/// `f` takes std::span<const Dual2> and returns Dual2.
template <typename F>
SecondOrderResult d2_eval(F &&f, std::span<const double> point, std::span<const double> dir_u,
                          std::span<const double> dir_v) {
    if (dir_u.size() != point.size() || dir_v.size() != point.size())
        throw DimensionMismatch("d2_eval: direction length differs from point length");
    std::vector<Dual2> args(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) args[i] = lift(point[i], dir_u[i], dir_v[i]);
    const Dual2 r = f(std::span<const Dual2>(args));
    return {r.val, r.d1, r.d2, r.d12};
}

} // namespace dalembert
