#include "tunesel/lasso.hpp"

#include <cmath>

namespace tunesel {

namespace {

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

std::vector<int> nonzero_indices(const Eigen::VectorXd& beta) {
    std::vector<int> idx;
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        if (beta(j) != 0.0) idx.push_back(static_cast<int>(j));
    return idx;
}

// max KKT violation given the smooth-part gradient and the penalty scale:
// inactive coordinates must satisfy |g_j| <= scale, active ones
// g_j = -scale * sign(b_j).
double kkt_gap_from_gradient(const Eigen::VectorXd& grad,
                             const Eigen::VectorXd& beta, double scale) {
    double gap = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (beta(j) == 0.0) {
            gap = std::max(gap, std::fabs(grad(j)) - scale);
        } else {
            gap = std::max(gap, std::fabs(grad(j) + scale * (beta(j) > 0 ? 1.0 : -1.0)));
        }
    }
    return std::max(gap, 0.0);
}

double logexp1p(double t) {
    // log(1 + exp(t)) without overflow
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double expit(double t) {
    if (t >= 0.0) {
        const double z = std::exp(-t);
        return 1.0 / (1.0 + z);
    }
    const double z = std::exp(t);
    return z / (1.0 + z);
}

} // namespace

double lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda) {
    const double n = static_cast<double>(y.size());
    return (y - x * beta).squaredNorm() / n + lambda * beta.lpNorm<1>();
}

double lasso_kkt_gap(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& beta, double lambda) {
    const double n = static_cast<double>(y.size());
    // gradient of the smooth part: -2 n^{-1} X^T (y - X b)
    const Eigen::VectorXd grad = -2.0 / n * (x.transpose() * (y - x * beta));
    return kkt_gap_from_gradient(grad, beta, lambda);
}

LassoFit lasso_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   double lambda, const SolverConfig& cfg) {
    if (lambda <= 0.0) throw std::invalid_argument("lasso_fit: lambda must be positive");
    if (x.rows() != y.size()) throw std::invalid_argument("lasso_fit: x/y row mismatch");
    if (cfg.tol <= 0.0 || cfg.max_iter < 1)
        throw std::invalid_argument("lasso_fit: invalid solver config");
    const auto n = static_cast<double>(x.rows());
    const auto p = static_cast<int>(x.cols());

    // covariance form: gram = X^T X / n, corr = X^T y / n
    const Eigen::MatrixXd gram = x.transpose() * x / n;
    const Eigen::VectorXd corr = x.transpose() * y / n;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd gram_beta = Eigen::VectorXd::Zero(p); // gram * beta
    LassoFit fit;
    fit.lambda = lambda;

    for (int sweep = 1; sweep <= cfg.max_iter; ++sweep) {
        for (int j = 0; j < p; ++j) {
            const double diag = gram(j, j);
            if (diag == 0.0) continue; // all-zero column stays at zero
            const double z = corr(j) - gram_beta(j) + diag * beta(j);
            const double updated = soft_threshold(z, lambda / 2.0) / diag;
            const double delta = updated - beta(j);
            if (delta != 0.0) {
                gram_beta += gram.col(j) * delta;
                beta(j) = updated;
            }
        }
        fit.iterations = sweep;
        if (cfg.record_objective)
            fit.objective_trace.push_back(lasso_objective(x, y, beta, lambda));
        fit.kkt_gap = kkt_gap_from_gradient(2.0 * (gram_beta - corr), beta, lambda);
        if (fit.kkt_gap <= cfg.tol) {
            fit.beta = beta;
            fit.active_set = nonzero_indices(beta);
            fit.objective = lasso_objective(x, y, beta, lambda);
            return fit;
        }
    }
    throw SolverError("lasso_fit: not converged after " + std::to_string(cfg.max_iter) +
                          " sweeps (kkt gap " + std::to_string(fit.kkt_gap) + ")",
                      fit.kkt_gap);
}

LassoFit lasso_fit(const Dataset& d, double lambda, const SolverConfig& cfg) {
    return lasso_fit(d.x, d.y, lambda, cfg);
}

double logit_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda) {
    const Eigen::VectorXd eta = x * beta;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        loss += logexp1p(eta(i)) - y(i) * eta(i);
    return loss / static_cast<double>(y.size()) + lambda * beta.lpNorm<1>();
}

double logit_kkt_gap(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& beta, double lambda) {
    const double n = static_cast<double>(y.size());
    Eigen::VectorXd mu(x.rows());
    const Eigen::VectorXd eta = x * beta;
    for (Eigen::Index i = 0; i < eta.size(); ++i) mu(i) = expit(eta(i));
    const Eigen::VectorXd grad = x.transpose() * (mu - y) / n;
    return kkt_gap_from_gradient(grad, beta, lambda);
}

LassoFit logit_penalized_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             double lambda, const SolverConfig& cfg) {
    if (lambda <= 0.0)
        throw std::invalid_argument("logit_penalized_fit: lambda must be positive");
    if (x.rows() != y.size())
        throw std::invalid_argument("logit_penalized_fit: x/y row mismatch");
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y(i) != 0.0 && y(i) != 1.0)
            throw std::invalid_argument("logit_penalized_fit: response must be binary");
    const double n = static_cast<double>(y.size());
    const auto p = static_cast<int>(x.cols());

    auto smooth_loss = [&](const Eigen::VectorXd& b) {
        const Eigen::VectorXd eta = x * b;
        double loss = 0.0;
        for (Eigen::Index i = 0; i < eta.size(); ++i)
            loss += logexp1p(eta(i)) - y(i) * eta(i);
        return loss / n;
    };
    auto smooth_grad = [&](const Eigen::VectorXd& b) {
        const Eigen::VectorXd eta = x * b;
        Eigen::VectorXd mu(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) mu(i) = expit(eta(i));
        return Eigen::VectorXd(x.transpose() * (mu - y) / n);
    };

    // FISTA with backtracking and restart on non-monotone steps
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd momentum = beta;
    double t_accel = 1.0;
    // Lipschitz constant of the gradient is at most ||X||^2 / (4n)
    double step = 4.0 * n / x.squaredNorm();
    double loss_beta = smooth_loss(beta);

    LassoFit fit;
    fit.lambda = lambda;
    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        const Eigen::VectorXd grad = smooth_grad(momentum);
        const double loss_momentum = smooth_loss(momentum);
        Eigen::VectorXd next(p);
        while (true) {
            for (int j = 0; j < p; ++j)
                next(j) = soft_threshold(momentum(j) - step * grad(j), step * lambda);
            const Eigen::VectorXd diff = next - momentum;
            const double quad = loss_momentum + grad.dot(diff) +
                                diff.squaredNorm() / (2.0 * step);
            if (smooth_loss(next) <= quad + 1e-16) break;
            step *= 0.5;
            if (step < 1e-18)
                throw SolverError("logit_penalized_fit: line search failed", fit.kkt_gap);
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_accel * t_accel));
        momentum = next + ((t_accel - 1.0) / t_next) * (next - beta);
        t_accel = t_next;
        const double loss_next = smooth_loss(next);
        if (loss_next + lambda * next.lpNorm<1>() >
            loss_beta + lambda * beta.lpNorm<1>()) {
            momentum = next; // restart momentum after an objective increase
            t_accel = 1.0;
        }
        beta = next;
        loss_beta = loss_next;

        fit.iterations = iter;
        fit.kkt_gap = kkt_gap_from_gradient(smooth_grad(beta), beta, lambda);
        if (fit.kkt_gap <= cfg.tol) {
            fit.beta = beta;
            fit.active_set = nonzero_indices(beta);
            fit.objective = loss_beta + lambda * beta.lpNorm<1>();
            return fit;
        }
    }
    throw SolverError("logit_penalized_fit: not converged after " +
                          std::to_string(cfg.max_iter) + " steps (kkt gap " +
                          std::to_string(fit.kkt_gap) + ")",
                      fit.kkt_gap);
}

LassoFit logit_penalized_fit(const Dataset& d, double lambda, const SolverConfig& cfg) {
    return logit_penalized_fit(d.x, d.y, lambda, cfg);
}

} // namespace tunesel
