#pragma once

#include <optional>
#include <vector>

#include "plmdp/spline.hpp"
#include "plmdp/types.hpp"

namespace plmdp {

/// A fitted doubly penalised estimate: sparse linear coefficients plus
/// a smoothing-spline nuisance fit, with the convergence evidence.
struct PartialLinearFit {
    Vector beta;
    SplineModel spline;
    double objective = 0.0;
    int outer_iters = 0;
    double kkt_beta = 0.0;
    double kkt_g = 0.0;
    double kkt_max_residual = 0.0;
    bool converged = false;
    std::vector<double> objective_trace;  // one entry per outer iteration
};

/// Full penalised objective
///   ||y - X b - g(z)||_n^2 + lambda ||b||_1 + mu_sq J^2(g),
/// with J^2(g) = a' omega a + c a' gram a evaluated from the spline
/// representation.
double dp_objective(const DesignData& data, const Vector& beta, const SplineModel& spline,
                    const PenaltyConfig& cfg);

/// Block coordinate descent on (beta, g): the g-block is a direct
/// solve against a cached factorisation, the beta-block a warm-started
/// lasso. g is initialised to the pure spline fit of y. The loop stops
/// once the relative objective decrease falls below tol_objective AND
/// both block KKT residuals certify <= tol_kkt; if certification fails
/// it keeps alternating (the beta block sees the refreshed g) up to
/// max_outer_iters and returns the best iterate with converged=false.
///
/// When frozen_g is given the nuisance is fixed at those
/// per-observation values and only the beta block runs: frozen at g^0
/// this is the known-nuisance lasso, frozen at 0 the standard lasso.
PartialLinearFit dp_fit(const DesignData& data, const PenaltyConfig& cfg,
                        const std::optional<Vector>& frozen_g = std::nullopt);

struct KktResiduals {
    double beta_block = 0.0;
    double g_block = 0.0;
};

/// Stationarity residuals of the joint objective at the given fit.
KktResiduals kkt_residuals(const DesignData& data, const PartialLinearFit& fit,
                           const PenaltyConfig& cfg);

/// Lasso with known nuisance function: lasso_fit(X, y - g0, lambda).
Vector fit_lk(const DesignData& data, const Vector& g0_values, const PenaltyConfig& cfg);

/// Standard lasso ignoring the nuisance: lasso_fit(X, y, lambda).
Vector fit_ln(const DesignData& data, const PenaltyConfig& cfg);

}  // namespace plmdp
