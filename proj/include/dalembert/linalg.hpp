#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>

namespace dalembert {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Matrices whose 2-norm condition estimate exceeds this are treated as singular.
inline constexpr double kSingularCondition = 1e12;

/// Ratio of extreme singular values; +inf for a zero matrix.
inline double condition_number(const Matrix &m) {
    if (m.size() == 0) return 1.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto &s = svd.singularValues();
    const double smax = s(0);
    const double smin = s(s.size() - 1);
    if (smax == 0.0 || smin == 0.0) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

inline std::span<const double> as_span(const Vector &v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

inline Vector to_vector(std::span<const double> s) {
    return Eigen::Map<const Vector>(s.data(), static_cast<Eigen::Index>(s.size()));
}

} // namespace dalembert
