#pragma once

#include <optional>
#include <vector>

#include "plmdp/types.hpp"

namespace plmdp {

/// Coordinate-descent state for min_b ||r - X b||_n^2 + lambda ||b||_1.
/// The residual invariant r - X*beta is restored from scratch every 50
/// passes to cap floating-point drift.
struct LassoWorkspace {
    Vector col_norms_sq;  // ||X_j||_n^2 per column
    Vector residual;      // r - X*beta
    Vector beta;
};

struct LassoResult {
    Vector beta;
    double kkt_residual = 0.0;
    int passes = 0;
    bool converged = false;
    // Objective ||r - X b||_n^2 + lambda ||b||_1 recorded after every
    // completed coordinate pass.
    std::vector<double> objective_trace;
};

/// Cyclic coordinate descent with the ||.||_n^2 convention: the
/// stationarity threshold is lambda/2, not the lambda of the 1/(2n)
/// parametrisation used by much of the lasso literature.
///
/// The update is b_j <- soft_threshold(X_j'(residual + X_j b_j)/n,
/// lambda/2) / ||X_j||_n^2, swept in ascending index order. After a
/// pass whose largest coordinate move falls below an adaptive
/// threshold the exact KKT residual is evaluated; the solver only
/// reports convergence once it is <= tol_kkt. Columns with zero norm
/// keep coefficient 0. Passes over the current active set are
/// interleaved with full passes and count towards max_cd_passes.
LassoResult lasso_fit(const Matrix& X, const Vector& r, double lambda,
                      const PenaltyConfig& cfg,
                      const std::optional<Vector>& warm_start = std::nullopt);

/// KKT stationarity residual at beta: for active coordinates
/// |(-2/n) X_j'(r - X b) + lambda sign(b_j)|, for zero coordinates
/// max(|(2/n) X_j'(r - X b)| - lambda, 0); returns the max over j.
double lasso_kkt_residual(const Matrix& X, const Vector& r, const Vector& beta,
                          double lambda);

/// ||r - X b||_n^2 + lambda ||b||_1.
double lasso_objective(const Matrix& X, const Vector& r, const Vector& beta,
                       double lambda);

}  // namespace plmdp
