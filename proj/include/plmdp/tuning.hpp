#pragma once

#include "plmdp/types.hpp"

namespace plmdp {

/// Default l1 weight: scale * sigma_hat * sqrt(2 log(2p) / n). The
/// rate factor is dictated by the theory; the multiplicative constant
/// (default 2) is a declared choice, exposed as a CLI flag.
double lambda_default(Index n, Index p, double sigma_hat, double scale = 2.0);

/// Default smoothness weight mu = n^{-2/5} / 100 (returns mu, not
/// mu^2).
double mu_default(Index n);

/// Diagnostic ceiling s0 * lambda^2 / lambda_min_sq for the combined
/// prediction-plus-estimation quantity of the oracle bound. A flag,
/// not an assertion: the constants behind it are not sharp.
double oracle_bound(Index s0, double lambda, double lambda_min_sq);

/// Refitted residual scale: iterates a conservative fit (lambda scale
/// 4) and returns sqrt(||y - X b - g||_n^2 * n / (n - df)) with df =
/// |support(b)| + trace of the spline smoother, floored at 1e-6.
double sigma_estimate(const DesignData& data, const PenaltyConfig& cfg);

}  // namespace plmdp
