#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>

namespace plmdp {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

/// Observed triple (X, z, y) of a partial linear dataset: y depends
/// linearly on the p columns of X and through an unknown smooth
/// function on the scalar covariate z.
struct DesignData {
    Matrix X;  // n x p
    Vector z;  // n
    Vector y;  // n

    Index n() const { return X.rows(); }
    Index p() const { return X.cols(); }

    // Throws std::invalid_argument on dimension mismatch, n < 2, p < 1
    // or non-finite entries.
    void validate() const;
};

/// Penalty weights and solver tolerances shared by all fitters.
/// The objective convention is ||y - X b - g||_n^2 + lambda*||b||_1
/// + mu_sq * (int g''^2 + c * int g^2), with ||v||_n^2 = v'v/n.
struct PenaltyConfig {
    double lambda = 0.0;  // l1 weight
    double mu_sq = 0.0;   // smoothness weight (mu squared)
    double c = 1e-3;      // ridge part inside J^2 so J is a norm

    double tol_objective = 1e-8;  // relative objective-decrease stop
    double tol_kkt = 1e-6;        // stationarity certificate threshold
    int max_outer_iters = 200;
    int max_cd_passes = 10000;

    void validate() const;
};

inline void DesignData::validate() const {
    if (X.rows() < 2 || X.cols() < 1)
        throw std::invalid_argument("DesignData: need n >= 2 and p >= 1");
    if (z.size() != X.rows() || y.size() != X.rows())
        throw std::invalid_argument("DesignData: z and y must have length n = rows(X)");
    if (!X.allFinite() || !z.allFinite() || !y.allFinite())
        throw std::invalid_argument("DesignData: non-finite entries");
}

inline void PenaltyConfig::validate() const {
    if (lambda < 0 || mu_sq < 0 || c < 0)
        throw std::invalid_argument("PenaltyConfig: penalty weights must be nonnegative");
    if (!(tol_objective > 0) || !(tol_kkt > 0))
        throw std::invalid_argument("PenaltyConfig: tolerances must be positive");
    if (max_outer_iters < 1 || max_cd_passes < 1)
        throw std::invalid_argument("PenaltyConfig: iteration limits must be positive");
}

}  // namespace plmdp
