#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <vector>

#include "plmdp/types.hpp"

namespace plmdp {

/// Natural cubic smoothing spline in the value representation: the
/// spline is stored as its values `coeffs` at the strictly increasing
/// `knots`, together with the precomputed quadratic forms of the
/// roughness penalty,
///
///   a' * omega * a = int (s_a'')^2,   a' * gram * a = int (s_a)^2,
///
/// where s_a is the natural cubic interpolant of (knots, a) and both
/// integrals run over [knots.front(), knots.back()].
///
/// Knots are the distinct values of the observation vector z the basis
/// was built from; observations closer than `merge_tol` share a knot
/// (exact ties always do). `obs_knot` maps each observation to its
/// knot and `counts` holds knot multiplicities, so the incidence
/// matrix N never has to be materialised: N'N = diag(counts) and
/// (N'r)_k = sum of r_i over observations at knot k.
struct SplineModel {
    Vector knots;   // K, strictly increasing
    Vector coeffs;  // K, values of the spline at the knots
    Matrix omega;   // K x K, curvature penalty, PSD, nullspace = affine
    Matrix gram;    // K x K, L2 penalty over the knot range, PD

    Vector gamma;                 // K, second derivatives at knots (ends are 0)
    std::vector<Index> obs_knot;  // n, observation -> knot index
    Vector counts;                // K, multiplicity of each knot

    Index num_knots() const { return knots.size(); }
    Index num_obs() const { return static_cast<Index>(obs_knot.size()); }
};

/// Builds the spline basis for the observation vector z. Observations
/// within merge_tol of each other collapse into one knot (default:
/// 1e-4 of the observed range); pass merge_tol = 0 for exact-tie
/// merging only. Throws std::invalid_argument with fewer than 2
/// distinct values. coeffs are zeroed.
SplineModel build_spline_basis(const Vector& z, double merge_tol = -1.0);

/// Caches the factorisation of the smoothing system
///   A = N'N/n + mu_sq * (omega + c * gram)
/// so repeated fits against different residuals (the g-block of the
/// block-descent solver) reuse one Cholesky decomposition.
class SplineSolver {
public:
    SplineSolver(const SplineModel& model, double mu_sq, double c);

    /// Solves A a = N'r/n, returning the knot values a.
    Vector fit(const Vector& r) const;

    /// Max-norm of the normal-equation residual A a - N'r/n.
    double kkt_residual(const Vector& coeffs, const Vector& r) const;

    /// Trace of the smoother matrix N A^{-1} N'/n (effective degrees
    /// of freedom of the g-block).
    double smoother_trace() const;

    double mu_sq() const { return mu_sq_; }
    double c() const { return c_; }

private:
    const SplineModel* model_;
    double mu_sq_;
    double c_;
    Matrix system_;  // A
    Eigen::LLT<Matrix> llt_;

    Vector rhs(const Vector& r) const;  // N'r/n
};

/// Fits min_a ||r - N a||_n^2 + mu_sq * (a'(omega + c*gram)a) and
/// returns a copy of the model with coeffs (and gamma) set. The model
/// must have been built from the same z multiset as r is indexed by.
SplineModel spline_fit(const SplineModel& model, const Vector& z, const Vector& r,
                       double mu_sq, double c);

/// Copy of the model with the given knot values installed and the
/// interpolating second derivatives recomputed.
SplineModel with_coeffs(const SplineModel& model, const Vector& coeffs);

/// Evaluates the natural cubic interpolant of (knots, coeffs) at the
/// query points. Outside the knot range the extension is linear (zero
/// second derivative).
Vector spline_eval(const SplineModel& model, const Vector& zq);

struct SplineEval {
    Vector values;
    Index extrapolated = 0;  // number of query points outside the knot range
};

/// spline_eval plus extrapolation metadata.
SplineEval spline_eval_checked(const SplineModel& model, const Vector& zq);

/// J^2(g) = a' omega a + c * a' gram a, evaluated stably interval by
/// interval through the second derivatives (the matrix forms cancel
/// catastrophically when knot gaps are small).
double j_squared(const SplineModel& model, double c);
double j_squared(const SplineModel& model, const Vector& coeffs, double c);

/// Values of the fitted spline at the observations the basis was built
/// from, i.e. N * coeffs. This is the g-vector the solver objective
/// uses; it coincides with spline_eval at the original z up to knot
/// merging.
Vector fitted_values(const SplineModel& model);

}  // namespace plmdp
