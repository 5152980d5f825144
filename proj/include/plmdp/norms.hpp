#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace plmdp {

/// Squared empirical norm ||v||_n^2 = (1/n) sum v_i^2.
template <typename Derived>
typename Derived::Scalar empirical_norm_sq(const Eigen::MatrixBase<Derived>& v) {
    if (v.size() == 0)
        throw std::invalid_argument("empirical_norm_sq: empty vector");
    return v.squaredNorm() / static_cast<typename Derived::Scalar>(v.size());
}

/// Empirical norm ||v||_n.
template <typename Derived>
typename Derived::Scalar empirical_norm(const Eigen::MatrixBase<Derived>& v) {
    using std::sqrt;
    return sqrt(empirical_norm_sq(v));
}

/// Proximal operator of the l1 penalty: sign(v) * max(|v| - gamma, 0).
template <typename Scalar>
Scalar soft_threshold(Scalar v, Scalar gamma) {
    if (v > gamma) return v - gamma;
    if (v < -gamma) return v + gamma;
    return Scalar(0);
}

}  // namespace plmdp
