#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tunesel/lasso.hpp"

namespace tunesel {

// A selected penalty level with enough recorded intermediates to replay the
// defining formula.
struct LambdaResult {
    std::string rule;
    double lambda = 0.0;
    double alpha = 0.0;
    double c = 0.0;
    std::optional<double> preliminary_lambda;
    std::string residual_source;
    std::optional<int> quantile_draws;
    std::vector<std::pair<double, double>> per_grid; // (lambda, criterion)
    std::vector<std::pair<std::string, double>> meta;
};

// Recommended level 0.1 / log(p v n).
double default_alpha(int n, int p);

// Geometric progression of `size` points from lo to hi (inclusive).
std::vector<double> geometric_grid(double lo, double hi, int size);
// Default cross-validation grid: 100 points from 1/n to n.
std::vector<double> default_lambda_grid(int n);

// Gaussian-quantile rule for known noise level sigma:
//   lambda = (2 c sigma / sqrt(n)) * Phi^{-1}(1 - alpha/(2p)) * max_j ||x_j||_{2,n}
LambdaResult brt_lambda(const Dataset& d, double sigma, double c = 1.1,
                        std::optional<double> alpha = std::nullopt);

struct BcchSelection {
    LambdaResult result;
    LassoFit fit; // Lasso at the final penalty
};

// Three-step moment rule: preliminary penalty from x^2 y^2 moments, pilot
// residuals from the preliminary fit, final penalty from x^2 ehat^2 moments.
BcchSelection bcch_lambda(const Dataset& d, double c = 1.1,
                          std::optional<double> alpha = std::nullopt,
                          const SolverConfig& cfg = {});

// Same pilot as bcch_lambda, but the final penalty is
// (2c/sqrt(n)) * q_{1-alpha} with q the empirical quantile of the
// Gaussian-multiplier statistic max_j |n^{-1/2} sum_i w_i x_ij ehat_i|.
BcchSelection bootstrap_lambda(const Dataset& d, double c, std::optional<double> alpha,
                               int bootstrap_draws, std::uint64_t seed,
                               const SolverConfig& cfg = {});

// Unbiased-risk grid rule for known noise variance sigma2: minimizes
// MSE(lambda) + 2*sigma2*||beta(lambda)||_0/n - sigma2 over the grid.
LambdaResult sure_lambda(const Dataset& d, double sigma2,
                         const std::vector<double>& grid,
                         const SolverConfig& cfg = {});

// Mean squared residual of the bcch_lambda final fit; plug-in noise
// variance for sure_lambda.
double bcch_noise_variance(const Dataset& d, double c = 1.1,
                           std::optional<double> alpha = std::nullopt,
                           const SolverConfig& cfg = {});

struct CvLambdaSelection {
    LambdaResult result;
    Eigen::VectorXd beta_average; // mean of fold coefficient vectors at the chosen penalty
    LassoFit fit_full;            // whole-sample refit at the chosen penalty
};

// V-fold cross-validation over a penalty grid; the criterion is the sum of
// out-of-fold squared prediction errors.
CvLambdaSelection cv_lambda(const Dataset& d, int folds,
                            const std::vector<double>& grid, std::uint64_t seed,
                            const SolverConfig& cfg = {});

// Cluster-robust three-step rule: group score sums replace per-observation
// terms inside the root mean square.
BcchSelection cluster_bcch_lambda(const Dataset& d, double c = 1.1,
                                  std::optional<double> alpha = std::nullopt,
                                  const SolverConfig& cfg = {});

// Panel rule: within-transforms the data, then applies the cluster rule
// with units as groups.
BcchSelection panel_bcch_lambda(const Dataset& d, double c = 1.1,
                                std::optional<double> alpha = std::nullopt,
                                const SolverConfig& cfg = {});

// Pivotal rule for the u-th penalized quantile regression: simulates
// sqrt(n) * max_j |n^{-1} sum_i x_ij (u - 1{u_i <= u})| / sqrt(u(1-u)) with
// u_i ~ U(0,1) and sets lambda = c * q_{1-alpha} / sqrt(n). The response
// never enters.
LambdaResult quantile_pivotal_lambda(const Dataset& d, double u, double c = 1.1,
                                     std::optional<double> alpha = std::nullopt,
                                     int simulation_draws = 10000,
                                     std::uint64_t seed = 0);

struct GlmCvBootstrapSelection {
    LambdaResult result;
    LassoFit fit;     // penalized logit at the final penalty
    double lambda_cv; // penalty chosen by the fold stage
};

// Bootstrap-after-cross-validation for the penalized logit: V-fold
// cross-validation picks a preliminary penalty, out-of-fold score estimates
// (expit(x_i^T beta_fold) - y_i) feed a multiplier bootstrap of the maximum
// score statistic, and lambda = (c/sqrt(n)) * q_{1-alpha}.
GlmCvBootstrapSelection glm_bootstrap_after_cv_lambda(
    const Dataset& d, int folds, const std::vector<double>& grid, double c,
    std::optional<double> alpha, int bootstrap_draws, std::uint64_t seed,
    const SolverConfig& cfg = {});

} // namespace tunesel
