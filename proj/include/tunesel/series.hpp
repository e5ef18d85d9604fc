#pragma once

#include <Eigen/Dense>
#include <functional>

#include "tunesel/basis.hpp"
#include "tunesel/dataset.hpp"

namespace tunesel {

// OLS fit of y on the basis expansion of a scalar covariate.
struct SeriesFit {
    BasisSpec spec;
    Eigen::VectorXd beta;      // k coefficients
    Eigen::VectorXd fitted;    // n in-sample predictions
    Eigen::VectorXd residuals; // y - fitted
    Eigen::VectorXd leverage;  // diagonal of the projection matrix

    int k() const { return spec.k; }
    double predict(double x) const { return eval_basis(spec, x).dot(beta); }
    Eigen::VectorXd predict_many(const Eigen::VectorXd& xs) const {
        return design_matrix(spec, xs) * beta;
    }
};

// Least squares via a singular value decomposition of the design. Requires
// n >= k and smallest singular value > 1e-10 x largest; violations raise an
// error naming the offending k.
SeriesFit fit_series(const Eigen::VectorXd& xs, const Eigen::VectorXd& y,
                     const BasisSpec& spec);
SeriesFit fit_series(const Dataset& d, const BasisSpec& spec); // requires p == 1

// Heteroskedasticity-adjusted trace term
//   tr{ (sum_i p p^T)^{-1} sum_i resid_i^2 p p^T },
// which equals sum_i resid_i^2 * leverage_i of the k-term fit. With
// resid^2 constant at s2 this is exactly s2 * k.
double hetero_trace(const Eigen::VectorXd& xs, const BasisSpec& spec,
                    const Eigen::VectorXd& resid);
double hetero_trace(const Dataset& d, const BasisSpec& spec,
                    const Eigen::VectorXd& resid);

// ----- error metrics on [0,1] ------------------------------------------

using RealFn = std::function<double(double)>;

inline constexpr int kL2GridPoints = 10001;     // trapezoid quadrature grid
inline constexpr int kUniformGridPoints = 1001; // sup-norm evaluation grid

enum class ErrorMetric { L2, Prediction, Uniform, Pointwise };

std::string to_string(ErrorMetric metric);

// sqrt of the trapezoid-rule integral of (estimate - truth)^2 over [0,1]
// (the l2 distance when the covariate is uniform on [0,1]).
double l2_error(const RealFn& estimate, const RealFn& truth);

// root mean square of estimate - truth over the sample points.
double prediction_error(const RealFn& estimate, const RealFn& truth,
                        const Eigen::VectorXd& xs);

// max |estimate - truth| over an equispaced grid on [0,1].
double uniform_error(const RealFn& estimate, const RealFn& truth);

double pointwise_error(const RealFn& estimate, const RealFn& truth, double x0);

// Dispatcher; xs is used by Prediction, x0 by Pointwise.
double error_metric(ErrorMetric metric, const RealFn& estimate, const RealFn& truth,
                    const Eigen::VectorXd& xs, double x0);

} // namespace tunesel
