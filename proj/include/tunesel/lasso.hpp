#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "tunesel/dataset.hpp"

namespace tunesel {

struct SolverConfig {
    double tol = 1e-8;  // KKT gap at which convergence is declared
    int max_iter = 10000;
    bool record_objective = false; // keep the per-iteration objective trace
};

struct LassoFit {
    Eigen::VectorXd beta;
    double lambda = 0.0;
    std::vector<int> active_set; // indices of nonzero coefficients
    int iterations = 0;          // full sweeps / gradient steps taken
    double kkt_gap = 0.0;
    double objective = 0.0;
    std::vector<double> objective_trace; // filled when cfg.record_objective
};

// Raised when the iteration budget runs out; carries the KKT gap reached.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& message, double gap)
        : std::runtime_error(message), kkt_gap(gap) {}
    double kkt_gap;
};

// Penalized least squares
//   min_b n^{-1} sum_i (y_i - x_i^T b)^2 + lambda * ||b||_1
// by cyclic coordinate descent with covariance updates from a zero start.
// Convergence is declared on the KKT gap: |2 n^{-1} sum_i x_ij r_i| <=
// lambda + tol on the inactive set and within tol of lambda*sign(b_j) on the
// active set.
LassoFit lasso_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   double lambda, const SolverConfig& cfg = {});
LassoFit lasso_fit(const Dataset& d, double lambda, const SolverConfig& cfg = {});

// Penalized logistic regression for y in {0,1}
//   min_b n^{-1} sum_i [log(1+exp(x_i^T b)) - y_i x_i^T b] + lambda * ||b||_1
// by accelerated proximal gradient with backtracking, zero start. The KKT
// contract bounds the smooth-part gradient by lambda on the inactive set.
LassoFit logit_penalized_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             double lambda, const SolverConfig& cfg = {});
LassoFit logit_penalized_fit(const Dataset& d, double lambda,
                             const SolverConfig& cfg = {});

double lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda);
double lasso_kkt_gap(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& beta, double lambda);
double logit_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda);
double logit_kkt_gap(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& beta, double lambda);

} // namespace tunesel
