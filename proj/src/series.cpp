#include "tunesel/series.hpp"

#include <cmath>
#include <stdexcept>

namespace tunesel {

namespace {

Eigen::VectorXd scalar_covariate(const Dataset& d) {
    if (d.p() != 1)
        throw std::invalid_argument("series: requires a single covariate column");
    return d.x.col(0);
}

} // namespace

SeriesFit fit_series(const Eigen::VectorXd& xs, const Eigen::VectorXd& y,
                     const BasisSpec& spec) {
    if (xs.size() != y.size())
        throw std::invalid_argument("fit_series: x/y length mismatch");
    if (xs.size() < spec.k)
        throw std::invalid_argument("fit_series: n < k at k=" + std::to_string(spec.k));
    const Eigen::MatrixXd design = design_matrix(spec, xs);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-10 * sv(0))
        throw std::runtime_error("fit_series: rank-deficient design at k=" +
                                 std::to_string(spec.k));
    SeriesFit fit;
    fit.spec = spec;
    fit.beta = svd.solve(y);
    fit.fitted = design * fit.beta;
    fit.residuals = y - fit.fitted;
    // projection diagonal: M = U U^T, so h_i = ||row_i(U)||^2
    fit.leverage = svd.matrixU().rowwise().squaredNorm();
    return fit;
}

SeriesFit fit_series(const Dataset& d, const BasisSpec& spec) {
    return fit_series(scalar_covariate(d), d.y, spec);
}

double hetero_trace(const Eigen::VectorXd& xs, const BasisSpec& spec,
                    const Eigen::VectorXd& resid) {
    if (xs.size() != resid.size())
        throw std::invalid_argument("hetero_trace: residual length mismatch");
    const Eigen::MatrixXd design = design_matrix(spec, xs);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-10 * sv(0))
        throw std::runtime_error("hetero_trace: rank-deficient design at k=" +
                                 std::to_string(spec.k));
    // tr{(P^T P)^{-1} P^T diag(e^2) P} = sum_i e_i^2 h_i
    const Eigen::VectorXd leverage = svd.matrixU().rowwise().squaredNorm();
    return leverage.dot(resid.array().square().matrix());
}

double hetero_trace(const Dataset& d, const BasisSpec& spec,
                    const Eigen::VectorXd& resid) {
    return hetero_trace(scalar_covariate(d), spec, resid);
}

std::string to_string(ErrorMetric metric) {
    switch (metric) {
        case ErrorMetric::L2: return "l2";
        case ErrorMetric::Prediction: return "prediction";
        case ErrorMetric::Uniform: return "uniform";
        case ErrorMetric::Pointwise: return "pointwise";
    }
    return "?";
}

double l2_error(const RealFn& estimate, const RealFn& truth) {
    const int m = kL2GridPoints;
    const double h = 1.0 / (m - 1);
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        const double x = static_cast<double>(i) * h;
        const double diff = estimate(x) - truth(x);
        const double w = (i == 0 || i == m - 1) ? 0.5 : 1.0;
        acc += w * diff * diff;
    }
    return std::sqrt(acc * h);
}

double prediction_error(const RealFn& estimate, const RealFn& truth,
                        const Eigen::VectorXd& xs) {
    if (xs.size() == 0) throw std::invalid_argument("prediction_error: empty grid");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
        const double diff = estimate(xs(i)) - truth(xs(i));
        acc += diff * diff;
    }
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

double uniform_error(const RealFn& estimate, const RealFn& truth) {
    const int m = kUniformGridPoints;
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        const double x = static_cast<double>(i) / (m - 1);
        worst = std::max(worst, std::fabs(estimate(x) - truth(x)));
    }
    return worst;
}

double pointwise_error(const RealFn& estimate, const RealFn& truth, double x0) {
    return std::fabs(estimate(x0) - truth(x0));
}

double error_metric(ErrorMetric metric, const RealFn& estimate, const RealFn& truth,
                    const Eigen::VectorXd& xs, double x0) {
    switch (metric) {
        case ErrorMetric::L2: return l2_error(estimate, truth);
        case ErrorMetric::Prediction: return prediction_error(estimate, truth, xs);
        case ErrorMetric::Uniform: return uniform_error(estimate, truth);
        case ErrorMetric::Pointwise: return pointwise_error(estimate, truth, x0);
    }
    throw std::logic_error("error_metric: unreachable");
}

} // namespace tunesel
