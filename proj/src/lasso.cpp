#include "plmdp/lasso.hpp"

#include <cmath>
#include <stdexcept>

#include "plmdp/norms.hpp"

namespace plmdp {

namespace {

constexpr int kRefreshEvery = 50;

// One cyclic sweep over the given coordinates; returns the largest
// absolute coefficient move.
double cd_pass(const Matrix& X, LassoWorkspace& ws, double lambda,
               const std::vector<Index>& coords) {
    const double n = static_cast<double>(X.rows());
    double max_change = 0.0;
    for (Index j : coords) {
        const double norm_sq = ws.col_norms_sq[j];
        if (norm_sq == 0.0) continue;  // coefficient pinned to 0
        const double old = ws.beta[j];
        const double rho = X.col(j).dot(ws.residual) / n + norm_sq * old;
        const double updated = soft_threshold(rho, 0.5 * lambda) / norm_sq;
        const double change = updated - old;
        if (change != 0.0) {
            ws.residual.noalias() -= X.col(j) * change;
            ws.beta[j] = updated;
            max_change = std::max(max_change, std::abs(change));
        }
    }
    return max_change;
}

}  // namespace

double lasso_kkt_residual(const Matrix& X, const Vector& r, const Vector& beta,
                          double lambda) {
    const double n = static_cast<double>(X.rows());
    const Vector corr = X.transpose() * (r - X * beta) / n;
    double worst = 0.0;
    for (Index j = 0; j < beta.size(); ++j) {
        const double v = beta[j] != 0.0
                             ? std::abs(-2.0 * corr[j] + lambda * (beta[j] > 0 ? 1.0 : -1.0))
                             : std::max(2.0 * std::abs(corr[j]) - lambda, 0.0);
        worst = std::max(worst, v);
    }
    return worst;
}

double lasso_objective(const Matrix& X, const Vector& r, const Vector& beta,
                       double lambda) {
    return empirical_norm_sq(r - X * beta) + lambda * beta.lpNorm<1>();
}

LassoResult lasso_fit(const Matrix& X, const Vector& r, double lambda,
                      const PenaltyConfig& cfg, const std::optional<Vector>& warm_start) {
    const Index n = X.rows();
    const Index p = X.cols();
    if (n < 1 || p < 1) throw std::invalid_argument("lasso_fit: empty problem");
    if (r.size() != n) throw std::invalid_argument("lasso_fit: length(r) != rows(X)");
    if (lambda < 0) throw std::invalid_argument("lasso_fit: negative lambda");
    if (!X.allFinite() || !r.allFinite())
        throw std::invalid_argument("lasso_fit: non-finite input");

    LassoWorkspace ws;
    ws.col_norms_sq = X.colwise().squaredNorm() / static_cast<double>(n);
    ws.beta = Vector::Zero(p);
    if (warm_start) {
        if (warm_start->size() != p)
            throw std::invalid_argument("lasso_fit: warm start has wrong length");
        ws.beta = *warm_start;
        for (Index j = 0; j < p; ++j)
            if (ws.col_norms_sq[j] == 0.0) ws.beta[j] = 0.0;
    }
    ws.residual = r - X * ws.beta;

    std::vector<Index> all(static_cast<size_t>(p));
    for (Index j = 0; j < p; ++j) all[static_cast<size_t>(j)] = j;

    LassoResult res;
    const double scale = 1.0 + empirical_norm(r);
    double threshold = cfg.tol_kkt * scale;
    int since_refresh = 0;
    auto after_pass = [&] {
        ++res.passes;
        if (++since_refresh >= kRefreshEvery) {
            ws.residual = r - X * ws.beta;
            since_refresh = 0;
        }
        res.objective_trace.push_back(
            empirical_norm_sq(ws.residual) + lambda * ws.beta.lpNorm<1>());
    };

    while (res.passes < cfg.max_cd_passes) {
        const double full_change = cd_pass(X, ws, lambda, all);
        after_pass();
        if (full_change <= threshold) {
            res.kkt_residual = lasso_kkt_residual(X, r, ws.beta, lambda);
            if (res.kkt_residual <= cfg.tol_kkt || full_change == 0.0) {
                res.converged = res.kkt_residual <= cfg.tol_kkt;
                res.beta = ws.beta;
                return res;
            }
            threshold *= 0.1;
            continue;
        }
        // Converge the active set before paying for another full pass.
        std::vector<Index> active;
        for (Index j = 0; j < p; ++j)
            if (ws.beta[j] != 0.0) active.push_back(j);
        while (res.passes < cfg.max_cd_passes && !active.empty()) {
            const double change = cd_pass(X, ws, lambda, active);
            after_pass();
            if (change <= threshold) break;
        }
    }
    res.kkt_residual = lasso_kkt_residual(X, r, ws.beta, lambda);
    res.converged = res.kkt_residual <= cfg.tol_kkt;
    res.beta = ws.beta;
    return res;
}

}  // namespace plmdp
