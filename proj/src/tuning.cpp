#include "plmdp/tuning.hpp"

#include <cmath>
#include <stdexcept>

#include "plmdp/norms.hpp"
#include "plmdp/solver.hpp"

namespace plmdp {

double lambda_default(Index n, Index p, double sigma_hat, double scale) {
    if (n < 1 || p < 1) throw std::invalid_argument("lambda_default: need n, p >= 1");
    if (sigma_hat < 0 || scale <= 0)
        throw std::invalid_argument("lambda_default: bad sigma_hat or scale");
    return scale * sigma_hat * std::sqrt(2.0 * std::log(2.0 * static_cast<double>(p)) /
                                         static_cast<double>(n));
}

double mu_default(Index n) {
    if (n < 1) throw std::invalid_argument("mu_default: need n >= 1");
    return std::pow(static_cast<double>(n), -0.4) / 100.0;
}

double oracle_bound(Index s0, double lambda, double lambda_min_sq) {
    if (s0 < 0) throw std::invalid_argument("oracle_bound: negative s0");
    if (!(lambda_min_sq > 0))
        throw std::invalid_argument("oracle_bound: lambda_min_sq must be positive");
    return static_cast<double>(s0) * lambda * lambda / lambda_min_sq;
}

double sigma_estimate(const DesignData& data, const PenaltyConfig& cfg) {
    data.validate();
    const Index n = data.n();
    if (n <= 10) throw std::invalid_argument("sigma_estimate: need n > 10");

    const double rate =
        std::sqrt(2.0 * std::log(2.0 * static_cast<double>(data.p())) / static_cast<double>(n));
    const double floor = 1e-6;

    const double mean = data.y.mean();
    double sigma = std::max(empirical_norm(Vector(data.y.array() - mean)), floor);

    // A single conservative fit over-shrinks when the signal dominates;
    // a few refits drive lambda down with the shrinking residual scale.
    for (int it = 0; it < 5; ++it) {
        PenaltyConfig fit_cfg = cfg;
        fit_cfg.lambda = 4.0 * sigma * rate;
        const PartialLinearFit fit = dp_fit(data, fit_cfg);

        Index support = 0;
        for (Index j = 0; j < fit.beta.size(); ++j)
            if (fit.beta[j] != 0.0) ++support;
        const SplineSolver smoother(fit.spline, fit_cfg.mu_sq, fit_cfg.c);
        double df = static_cast<double>(support) + smoother.smoother_trace();
        df = std::min(df, static_cast<double>(n) - 1.0);

        const Vector resid = data.y - data.X * fit.beta - fitted_values(fit.spline);
        const double updated = std::max(
            std::sqrt(empirical_norm_sq(resid) * static_cast<double>(n) /
                      (static_cast<double>(n) - df)),
            floor);
        const bool settled = std::abs(updated - sigma) <= 0.05 * sigma;
        sigma = updated;
        if (settled) break;
    }
    return sigma;
}

}  // namespace plmdp
