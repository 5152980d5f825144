#include "plmdp/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "plmdp/lasso.hpp"
#include "plmdp/norms.hpp"

namespace plmdp {

double dp_objective(const DesignData& data, const Vector& beta, const SplineModel& spline,
                    const PenaltyConfig& cfg) {
    data.validate();
    cfg.validate();
    if (beta.size() != data.p())
        throw std::invalid_argument("dp_objective: length(beta) != cols(X)");
    const Vector g_z = spline_eval(spline, data.z);
    return empirical_norm_sq(data.y - data.X * beta - g_z) + cfg.lambda * beta.lpNorm<1>() +
           cfg.mu_sq * j_squared(spline, cfg.c);
}

namespace {

// Interpolating spline through per-observation values, used to carry a
// frozen nuisance in the returned fit.
SplineModel frozen_spline(const SplineModel& basis, const Vector& values) {
    Vector sum = Vector::Zero(basis.num_knots());
    Vector cnt = Vector::Zero(basis.num_knots());
    for (Index i = 0; i < values.size(); ++i) {
        sum[basis.obs_knot[static_cast<size_t>(i)]] += values[i];
        cnt[basis.obs_knot[static_cast<size_t>(i)]] += 1.0;
    }
    return with_coeffs(basis, sum.cwiseQuotient(cnt));
}

}  // namespace

PartialLinearFit dp_fit(const DesignData& data, const PenaltyConfig& cfg,
                        const std::optional<Vector>& frozen_g) {
    data.validate();
    cfg.validate();
    if (!frozen_g && cfg.lambda == 0.0 && cfg.mu_sq == 0.0)
        throw std::invalid_argument("dp_fit: lambda and mu_sq both zero");

    // The beta block is solved a notch tighter than the joint
    // certificate so the residual left by the following g update still
    // fits under tol_kkt.
    PenaltyConfig sub = cfg;
    sub.tol_kkt = 0.25 * cfg.tol_kkt;

    PartialLinearFit fit;

    if (frozen_g) {
        if (frozen_g->size() != data.n())
            throw std::invalid_argument("dp_fit: frozen nuisance has wrong length");
        if (!frozen_g->allFinite())
            throw std::invalid_argument("dp_fit: frozen nuisance not finite");
        const LassoResult res = lasso_fit(data.X, data.y - *frozen_g, cfg.lambda, sub);
        fit.beta = res.beta;
        fit.spline = frozen_spline(build_spline_basis(data.z), *frozen_g);
        fit.kkt_beta = res.kkt_residual;
        fit.kkt_g = 0.0;
        fit.kkt_max_residual = res.kkt_residual;
        fit.converged = res.converged;
        fit.outer_iters = 1;
        fit.objective = empirical_norm_sq(data.y - data.X * fit.beta - *frozen_g) +
                        cfg.lambda * fit.beta.lpNorm<1>();
        fit.objective_trace.push_back(fit.objective);
        return fit;
    }

    const SplineModel basis = build_spline_basis(data.z);
    const SplineSolver gsolver(basis, cfg.mu_sq, cfg.c);

    Vector a = gsolver.fit(data.y);  // start from the pure smooth of y
    Vector beta = Vector::Zero(data.p());
    Vector g_values(data.n());
    auto map_g = [&] {
        for (Index i = 0; i < data.n(); ++i)
            g_values[i] = a[basis.obs_knot[static_cast<size_t>(i)]];
    };
    map_g();

    auto objective_at = [&]() {
        return empirical_norm_sq(data.y - data.X * beta - g_values) +
               cfg.lambda * beta.lpNorm<1>() + cfg.mu_sq * j_squared(basis, a, cfg.c);
    };

    double obj_prev = std::numeric_limits<double>::infinity();
    double kkt_beta = std::numeric_limits<double>::infinity();
    double kkt_g = std::numeric_limits<double>::infinity();
    bool certified = false;
    int iter = 0;
    while (iter < cfg.max_outer_iters) {
        ++iter;
        const LassoResult bres = lasso_fit(data.X, data.y - g_values, cfg.lambda, sub, beta);
        beta = bres.beta;
        const Vector rg = data.y - data.X * beta;
        a = gsolver.fit(rg);
        map_g();

        const double obj = objective_at();
        if (!std::isfinite(obj))
            throw std::runtime_error("dp_fit: non-finite objective at outer iteration " +
                                     std::to_string(iter));
        fit.objective_trace.push_back(obj);

        const bool stalled = obj_prev - obj <= cfg.tol_objective * std::max(1.0, std::abs(obj_prev));
        obj_prev = obj;
        if (stalled) {
            // Certify against the g held by the current iterate.
            kkt_beta = lasso_kkt_residual(data.X, data.y - g_values, beta, cfg.lambda);
            kkt_g = gsolver.kkt_residual(a, rg);
            if (kkt_beta <= cfg.tol_kkt && kkt_g <= cfg.tol_kkt) {
                certified = true;
                break;
            }
        }
    }
    if (!certified) {
        kkt_beta = lasso_kkt_residual(data.X, data.y - g_values, beta, cfg.lambda);
        kkt_g = gsolver.kkt_residual(a, data.y - data.X * beta);
    }

    fit.beta = beta;
    fit.spline = with_coeffs(basis, a);
    fit.outer_iters = iter;
    fit.objective = fit.objective_trace.back();
    fit.kkt_beta = kkt_beta;
    fit.kkt_g = kkt_g;
    fit.kkt_max_residual = std::max(kkt_beta, kkt_g);
    fit.converged = fit.kkt_max_residual <= cfg.tol_kkt;
    return fit;
}

KktResiduals kkt_residuals(const DesignData& data, const PartialLinearFit& fit,
                           const PenaltyConfig& cfg) {
    data.validate();
    KktResiduals out;
    const Vector g_values = fitted_values(fit.spline);
    out.beta_block = lasso_kkt_residual(data.X, data.y - g_values, fit.beta, cfg.lambda);
    const SplineSolver gsolver(fit.spline, cfg.mu_sq, cfg.c);
    out.g_block = gsolver.kkt_residual(fit.spline.coeffs, data.y - data.X * fit.beta);
    return out;
}

Vector fit_lk(const DesignData& data, const Vector& g0_values, const PenaltyConfig& cfg) {
    data.validate();
    cfg.validate();
    if (g0_values.size() != data.n())
        throw std::invalid_argument("fit_lk: length(g0) != n");
    if (!g0_values.allFinite()) throw std::invalid_argument("fit_lk: non-finite g0");
    PenaltyConfig sub = cfg;
    sub.tol_kkt = 0.25 * cfg.tol_kkt;
    return lasso_fit(data.X, data.y - g0_values, cfg.lambda, sub).beta;
}

Vector fit_ln(const DesignData& data, const PenaltyConfig& cfg) {
    return fit_lk(data, Vector::Zero(data.n()), cfg);
}

}  // namespace plmdp
