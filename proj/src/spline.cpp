#include "plmdp/spline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace plmdp {

namespace {

// 4-point Gauss-Legendre on [-1,1]; exact through degree 7, enough for
// products of two cubics.
constexpr double kGlNode[4] = {-0.8611363115940526, -0.3399810435848563,
                               0.3399810435848563, 0.8611363115940526};
constexpr double kGlWeight[4] = {0.3478548451374538, 0.6521451548625461,
                                 0.6521451548625461, 0.3478548451374538};

// Second-difference matrix Q (K x K-2) and tridiagonal R (K-2 x K-2)
// of the Green-Silverman construction: Q' a = R gamma_int for the
// natural interpolant, and int s'' ^2 = gamma_int' R gamma_int.
void build_qr(const Vector& knots, Matrix& q, Matrix& r) {
    const Index k = knots.size();
    const Index m = k - 2;
    q = Matrix::Zero(k, m);
    r = Matrix::Zero(m, m);
    for (Index j = 0; j < m; ++j) {
        const double h0 = knots[j + 1] - knots[j];
        const double h1 = knots[j + 2] - knots[j + 1];
        q(j, j) = 1.0 / h0;
        q(j + 1, j) = -1.0 / h0 - 1.0 / h1;
        q(j + 2, j) = 1.0 / h1;
        r(j, j) = (h0 + h1) / 3.0;
        if (j + 1 < m) {
            r(j, j + 1) = h1 / 6.0;
            r(j + 1, j) = h1 / 6.0;
        }
    }
}

}  // namespace

SplineModel build_spline_basis(const Vector& z, double merge_tol) {
    const Index n = z.size();
    if (n < 2) throw std::invalid_argument("build_spline_basis: need n >= 2");
    if (!z.allFinite()) throw std::invalid_argument("build_spline_basis: non-finite z");

    std::vector<Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Index(0));
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return z[a] < z[b]; });

    const double range = z[order.back()] - z[order.front()];
    if (merge_tol < 0) merge_tol = 1e-4 * range;

    SplineModel model;
    model.obs_knot.assign(static_cast<size_t>(n), 0);

    // Cluster sorted observations; a cluster's knot is its mean.
    std::vector<double> knot_vals;
    std::vector<double> counts;
    double cluster_start = z[order[0]];
    double cluster_sum = 0.0;
    Index cluster_size = 0;
    auto close_cluster = [&] {
        knot_vals.push_back(cluster_sum / static_cast<double>(cluster_size));
        counts.push_back(static_cast<double>(cluster_size));
    };
    for (Index s = 0; s < n; ++s) {
        const Index i = order[static_cast<size_t>(s)];
        if (cluster_size > 0 && z[i] - cluster_start > merge_tol) {
            close_cluster();
            cluster_start = z[i];
            cluster_sum = 0.0;
            cluster_size = 0;
        }
        cluster_sum += z[i];
        ++cluster_size;
        model.obs_knot[static_cast<size_t>(i)] = static_cast<Index>(knot_vals.size());
    }
    close_cluster();

    const Index k = static_cast<Index>(knot_vals.size());
    if (k < 2)
        throw std::invalid_argument("build_spline_basis: fewer than 2 distinct z values");

    model.knots = Eigen::Map<const Vector>(knot_vals.data(), k);
    model.counts = Eigen::Map<const Vector>(counts.data(), k);
    model.coeffs = Vector::Zero(k);
    model.gamma = Vector::Zero(k);

    if (k == 2) {
        // Any natural spline on two knots is linear: zero curvature.
        model.omega = Matrix::Zero(2, 2);
    }

    const Index m = k - 2;
    Matrix q, r, c;
    if (m > 0) {
        build_qr(model.knots, q, r);
        c = Eigen::LLT<Matrix>(r).solve(q.transpose());  // gamma_int = C a
        model.omega = q * c;
        model.omega = (0.5 * (model.omega + model.omega.transpose())).eval();
    }

    // int s^2 assembled exactly per interval in the mixed (a, gamma)
    // coordinates, then mapped back through gamma_int = C a.
    Matrix l_aa = Matrix::Zero(k, k);
    Matrix l_ag = Matrix::Zero(k, std::max<Index>(m, 0));
    Matrix l_gg = Matrix::Zero(std::max<Index>(m, 0), std::max<Index>(m, 0));
    for (Index i = 0; i + 1 < k; ++i) {
        const double h = model.knots[i + 1] - model.knots[i];
        for (int qn = 0; qn < 4; ++qn) {
            const double u = 0.5 * h * (1.0 + kGlNode[qn]);
            const double ub = h - u;
            const double w = 0.5 * h * kGlWeight[qn];
            const double ca0 = ub / h;
            const double ca1 = u / h;
            const double d0 = -(u * ub / 6.0) * (1.0 + ub / h);
            const double d1 = -(u * ub / 6.0) * (1.0 + u / h);
            l_aa(i, i) += w * ca0 * ca0;
            l_aa(i, i + 1) += w * ca0 * ca1;
            l_aa(i + 1, i) += w * ca1 * ca0;
            l_aa(i + 1, i + 1) += w * ca1 * ca1;
            // full gamma indices i, i+1 map to interior columns i-1, i
            const Index g0 = i - 1;
            const Index g1 = i;
            if (g0 >= 0) {
                l_ag(i, g0) += w * ca0 * d0;
                l_ag(i + 1, g0) += w * ca1 * d0;
                l_gg(g0, g0) += w * d0 * d0;
            }
            if (g1 < m) {
                l_ag(i, g1) += w * ca0 * d1;
                l_ag(i + 1, g1) += w * ca1 * d1;
                l_gg(g1, g1) += w * d1 * d1;
                if (g0 >= 0) {
                    l_gg(g0, g1) += w * d0 * d1;
                    l_gg(g1, g0) += w * d1 * d0;
                }
            }
        }
    }
    if (m > 0) {
        Matrix cross = l_ag * c;
        model.gram = l_aa + cross + cross.transpose() + c.transpose() * (l_gg * c);
        model.gram = (0.5 * (model.gram + model.gram.transpose())).eval();
    } else {
        model.gram = l_aa;
    }
    return model;
}

SplineSolver::SplineSolver(const SplineModel& model, double mu_sq, double c)
    : model_(&model), mu_sq_(mu_sq), c_(c) {
    if (mu_sq < 0 || c < 0)
        throw std::invalid_argument("SplineSolver: negative penalty weight");
    const double n = static_cast<double>(model.num_obs());
    system_ = mu_sq * (model.omega + c * model.gram);
    system_.diagonal() += model.counts / n;
    llt_.compute(system_);
    if (llt_.info() != Eigen::Success)
        throw std::runtime_error("SplineSolver: smoothing system is not positive definite");
}

Vector SplineSolver::rhs(const Vector& r) const {
    const Index n = model_->num_obs();
    if (r.size() != n)
        throw std::invalid_argument("SplineSolver: residual length does not match basis");
    Vector b = Vector::Zero(model_->num_knots());
    for (Index i = 0; i < n; ++i) b[model_->obs_knot[static_cast<size_t>(i)]] += r[i];
    return b / static_cast<double>(n);
}

Vector SplineSolver::fit(const Vector& r) const {
    Vector a = llt_.solve(rhs(r));
    if (!a.allFinite())
        throw std::runtime_error("SplineSolver: non-finite solution");
    return a;
}

double SplineSolver::kkt_residual(const Vector& coeffs, const Vector& r) const {
    return (system_ * coeffs - rhs(r)).cwiseAbs().maxCoeff();
}

double SplineSolver::smoother_trace() const {
    const Index k = model_->num_knots();
    const Matrix inv = llt_.solve(Matrix::Identity(k, k));
    return inv.diagonal().dot(model_->counts) / static_cast<double>(model_->num_obs());
}

namespace {

// gamma at all knots (boundary values zero) for given knot values:
// the textbook tridiagonal system R gamma_int = Q' a, solved in O(K).
Vector solve_gamma(const SplineModel& model, const Vector& coeffs) {
    const Index k = model.num_knots();
    const Vector& t = model.knots;
    Vector gamma = Vector::Zero(k);
    const Index m = k - 2;
    if (m <= 0) return gamma;
    Vector diag(m), upper(m), rhs(m);
    for (Index j = 0; j < m; ++j) {
        const double h0 = t[j + 1] - t[j];
        const double h1 = t[j + 2] - t[j + 1];
        diag[j] = (h0 + h1) / 3.0;
        upper[j] = h1 / 6.0;  // entry (j, j+1); unused at j = m-1
        rhs[j] = (coeffs[j + 2] - coeffs[j + 1]) / h1 - (coeffs[j + 1] - coeffs[j]) / h0;
    }
    for (Index j = 1; j < m; ++j) {
        const double w = upper[j - 1] / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    gamma[m] = rhs[m - 1] / diag[m - 1];
    for (Index j = m - 2; j >= 0; --j)
        gamma[j + 1] = (rhs[j] - upper[j] * gamma[j + 2]) / diag[j];
    return gamma;
}

}  // namespace

SplineModel with_coeffs(const SplineModel& model, const Vector& coeffs) {
    if (coeffs.size() != model.num_knots())
        throw std::invalid_argument("with_coeffs: wrong coefficient count");
    SplineModel out = model;
    out.coeffs = coeffs;
    out.gamma = solve_gamma(model, coeffs);
    return out;
}

SplineModel spline_fit(const SplineModel& model, const Vector& z, const Vector& r,
                       double mu_sq, double c) {
    if (z.size() != model.num_obs() || r.size() != model.num_obs())
        throw std::invalid_argument("spline_fit: z/r length does not match the basis");
    if (!r.allFinite()) throw std::invalid_argument("spline_fit: non-finite residual");
    SplineSolver solver(model, mu_sq, c);
    return with_coeffs(model, solver.fit(r));
}

Vector spline_eval(const SplineModel& model, const Vector& zq) {
    const Index k = model.num_knots();
    const Vector& t = model.knots;
    const Vector& a = model.coeffs;
    const Vector& g = model.gamma;
    Vector out(zq.size());
    for (Index q = 0; q < zq.size(); ++q) {
        const double x = zq[q];
        if (x <= t[0]) {
            const double h = t[1] - t[0];
            const double slope = (a[1] - a[0]) / h - g[1] * h / 6.0;
            out[q] = a[0] + (x - t[0]) * slope;
        } else if (x >= t[k - 1]) {
            const double h = t[k - 1] - t[k - 2];
            const double slope = (a[k - 1] - a[k - 2]) / h + g[k - 2] * h / 6.0;
            out[q] = a[k - 1] + (x - t[k - 1]) * slope;
        } else {
            const double* begin = t.data();
            Index i = static_cast<Index>(std::upper_bound(begin, begin + k, x) - begin) - 1;
            if (i > k - 2) i = k - 2;
            const double h = t[i + 1] - t[i];
            const double u = x - t[i];
            const double ub = t[i + 1] - x;
            out[q] = (ub * a[i] + u * a[i + 1]) / h -
                     (u * ub / 6.0) * ((1.0 + ub / h) * g[i] + (1.0 + u / h) * g[i + 1]);
        }
    }
    return out;
}

SplineEval spline_eval_checked(const SplineModel& model, const Vector& zq) {
    SplineEval ev;
    ev.values = spline_eval(model, zq);
    for (Index q = 0; q < zq.size(); ++q)
        if (zq[q] < model.knots[0] || zq[q] > model.knots[model.num_knots() - 1])
            ++ev.extrapolated;
    return ev;
}

double j_squared(const SplineModel& model, const Vector& coeffs, double c) {
    // Same value as coeffs' (omega + c gram) coeffs, but summed over
    // intervals as nonnegative contributions; the K x K quadratic
    // forms mix entries of size 1/h^3 and cancel catastrophically.
    const Index k = model.num_knots();
    if (coeffs.size() != k)
        throw std::invalid_argument("j_squared: wrong coefficient count");
    const Vector gamma = solve_gamma(model, coeffs);
    const Vector& t = model.knots;
    double curvature = 0.0;
    double l2 = 0.0;
    for (Index i = 0; i + 1 < k; ++i) {
        const double h = t[i + 1] - t[i];
        curvature += h / 3.0 *
                     (gamma[i] * gamma[i] + gamma[i] * gamma[i + 1] +
                      gamma[i + 1] * gamma[i + 1]);
        for (int qn = 0; qn < 4; ++qn) {
            const double u = 0.5 * h * (1.0 + kGlNode[qn]);
            const double ub = h - u;
            const double s =
                (ub * coeffs[i] + u * coeffs[i + 1]) / h -
                (u * ub / 6.0) *
                    ((1.0 + ub / h) * gamma[i] + (1.0 + u / h) * gamma[i + 1]);
            l2 += 0.5 * h * kGlWeight[qn] * s * s;
        }
    }
    return curvature + c * l2;
}

double j_squared(const SplineModel& model, double c) {
    return j_squared(model, model.coeffs, c);
}

Vector fitted_values(const SplineModel& model) {
    const Index n = model.num_obs();
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = model.coeffs[model.obs_knot[static_cast<size_t>(i)]];
    return v;
}

}  // namespace plmdp
