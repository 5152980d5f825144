#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plmdp/spline.hpp"
#include "plmdp/types.hpp"

namespace plmdp {

enum class NuisanceId { G1, G2, G3 };

enum class EstimatorId { LK, LN, DPi, DPd };

std::string to_string(NuisanceId id);
std::string to_string(EstimatorId id);

/// One experimental cell: dimensions, sparsity, signal strength,
/// nuisance shape and replication plan.
struct DesignSpec {
    Index p = 250;
    Index s0 = 5;
    double lsnr = 8.0;
    NuisanceId g_id = NuisanceId::G1;
    bool dependent = false;
    Index n = 72;
    Index replicates = 1;
    std::uint64_t base_seed = 0;
    // Empty: synthetic truncated-normal design. Otherwise path of a
    // headerless CSV whose columns are sampled without replacement.
    std::string csv_path;

    bool synthetic() const { return csv_path.empty(); }
    void validate() const;
};

/// Metric record of one (replicate, estimator) fit.
struct ReplicateResult {
    Index design_id = 0;
    Index replicate = 0;
    EstimatorId estimator = EstimatorId::LK;
    double pred_error = 0.0;
    double est_error_l1 = 0.0;
    std::optional<double> tpr;      // absent when s0 = 0
    std::optional<double> fpr;      // absent when s0 = p
    std::optional<double> g_error;  // DP only
    std::optional<double> tsnr;
    double runtime_ms = 0.0;
};

/// Generated data of one replicate plus the generating truth.
struct SimulatedData {
    DesignData data;
    Vector beta0;
    Vector g0_values;
    double sigma = 0.0;
};

/// The three nuisance functions: g1 = 0, g2(z) = -20 z^2 - 10,
/// g3(z) = 3 (e^{2z} + sin(12 z)).
double gen_nuisance(NuisanceId id, double z);
Vector gen_nuisance(NuisanceId id, const Vector& z);

/// Draws one replicate: z ~ U[-0.5, 0.5]; X standard normal truncated
/// to [-3,3] (or columns sampled from csv_matrix); active coefficients
/// +-1 on {1..s0}; optional dependent overwrite of the first three
/// columns; sigma = ||X beta0||_n / lsnr; y = X beta0 + g0(z) + sigma*eps.
/// All randomness is keyed by (base_seed, design_id, replicate).
SimulatedData gen_design(const DesignSpec& spec, Index design_id, Index replicate,
                         const Matrix* csv_matrix = nullptr);

/// Total signal-to-noise ratio sqrt(||X beta0 + g0||_n^2 / sigma^2).
double tsnr(const Matrix& X, const Vector& beta0, const Vector& g0_values, double sigma);

/// Support threshold for TPR/FPR: coordinate descent produces exact
/// zeros, so this only guards float noise.
constexpr double kSupportThreshold = 1e-8;

/// Fills the error/selection metrics of a fitted beta (and optional
/// fitted g values at the observations) against the generating truth.
ReplicateResult metrics(const Vector& beta_hat, const std::optional<Vector>& ghat_values,
                        EstimatorId estimator, const SimulatedData& truth);

/// Smallest eigenvalue of the Gram matrix of the design residualised
/// on a spline smooth of z (mu from the default rule). Returns 0 when
/// p > n. With `support`, restricts to those columns first.
double min_eigen_diagnostic(const Matrix& X, const Vector& z);
double min_eigen_diagnostic(const Matrix& X, const Vector& z,
                            const std::vector<Index>& support);

}  // namespace plmdp
