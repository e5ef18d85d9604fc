#include "tunesel/select_lambda.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "tunesel/rng.hpp"
#include "tunesel/stats.hpp"

namespace tunesel {

namespace {

double checked_alpha(std::optional<double> alpha, int n, int p) {
    const double a = alpha ? *alpha : default_alpha(n, p);
    if (!(a > 0.0 && a < 1.0))
        throw std::invalid_argument("select_lambda: alpha must lie in (0,1)");
    return a;
}

double quantile_factor(double alpha, int p) {
    return normal_quantile(1.0 - alpha / (2.0 * p));
}

// max_j sqrt(n^{-1} sum_i x_ij^2 u_i^2)
double iid_moment(const Eigen::MatrixXd& x, const Eigen::VectorXd& u) {
    const double n = static_cast<double>(x.rows());
    double best = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double t = x(i, j) * u(i);
            acc += t * t;
        }
        best = std::max(best, std::sqrt(acc / n));
    }
    return best;
}

// max_j sqrt(n^{-1} sum_g (sum_{i in g} x_ij u_i)^2)
double cluster_moment(const Eigen::MatrixXd& x, const Eigen::VectorXd& u,
                      const std::vector<std::vector<int>>& groups) {
    const double n = static_cast<double>(x.rows());
    double best = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        double acc = 0.0;
        for (const auto& group : groups) {
            double s = 0.0;
            for (int i : group) s += x(i, j) * u(i);
            acc += s * s;
        }
        best = std::max(best, std::sqrt(acc / n));
    }
    return best;
}

using MomentFn = std::function<double(const Eigen::VectorXd&)>;

// Shared three-step skeleton: preliminary penalty from the response
// moments, residuals from the preliminary fit, final penalty from the
// residual moments.
BcchSelection three_step(const Dataset& d, double c, std::optional<double> alpha_in,
                         const SolverConfig& cfg, const std::string& rule,
                         const MomentFn& moment) {
    const int n = d.n();
    const int p = d.p();
    const double alpha = checked_alpha(alpha_in, n, p);
    const double q = quantile_factor(alpha, p);
    const double scale = 2.0 * c / std::sqrt(static_cast<double>(n));

    const double moment_prelim = moment(d.y);
    if (moment_prelim <= 0.0)
        throw std::runtime_error(rule + ": degenerate response moments");
    const double lambda0 = scale * q * moment_prelim;
    const LassoFit prelim = lasso_fit(d.x, d.y, lambda0, cfg);
    const Eigen::VectorXd ehat = d.y - d.x * prelim.beta;

    const double moment_final = moment(ehat);
    if (moment_final <= 0.0)
        throw std::runtime_error(rule + ": degenerate residual moments");
    const double lambda = scale * q * moment_final;

    BcchSelection sel;
    sel.fit = lasso_fit(d.x, d.y, lambda, cfg);
    auto& res = sel.result;
    res.rule = rule;
    res.lambda = lambda;
    res.alpha = alpha;
    res.c = c;
    res.preliminary_lambda = lambda0;
    res.residual_source = "preliminary lasso fit";
    res.meta.emplace_back("quantile_term", q);
    res.meta.emplace_back("moment_prelim", moment_prelim);
    res.meta.emplace_back("moment_final", moment_final);
    res.meta.emplace_back("n", static_cast<double>(n));
    res.meta.emplace_back("p", static_cast<double>(p));
    return sel;
}

} // namespace

double default_alpha(int n, int p) {
    return 0.1 / std::log(static_cast<double>(std::max(p, n)));
}

std::vector<double> geometric_grid(double lo, double hi, int size) {
    if (size < 1) throw std::invalid_argument("geometric_grid: size must be positive");
    if (!(lo > 0.0) || !(hi >= lo))
        throw std::invalid_argument("geometric_grid: need 0 < lo <= hi");
    std::vector<double> grid(static_cast<std::size_t>(size));
    if (size == 1) {
        grid[0] = lo;
        return grid;
    }
    const double step = std::log(hi / lo) / (size - 1);
    for (int i = 0; i < size; ++i)
        grid[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
    return grid;
}

std::vector<double> default_lambda_grid(int n) {
    return geometric_grid(1.0 / n, static_cast<double>(n), 100);
}

LambdaResult brt_lambda(const Dataset& d, double sigma, double c,
                        std::optional<double> alpha_in) {
    if (sigma <= 0.0) throw std::invalid_argument("brt_lambda: sigma must be positive");
    const int n = d.n();
    const int p = d.p();
    const double alpha = checked_alpha(alpha_in, n, p);
    const double q = quantile_factor(alpha, p);
    double max_norm = 0.0;
    for (Eigen::Index j = 0; j < d.x.cols(); ++j)
        max_norm = std::max(max_norm, std::sqrt(d.x.col(j).squaredNorm() / n));
    if (max_norm <= 0.0) throw std::runtime_error("brt_lambda: all covariates are zero");

    LambdaResult res;
    res.rule = "brt";
    res.lambda = 2.0 * c * sigma / std::sqrt(static_cast<double>(n)) * q * max_norm;
    res.alpha = alpha;
    res.c = c;
    res.residual_source = "known sigma";
    res.meta.emplace_back("sigma", sigma);
    res.meta.emplace_back("quantile_term", q);
    res.meta.emplace_back("max_col_norm", max_norm);
    res.meta.emplace_back("n", static_cast<double>(n));
    res.meta.emplace_back("p", static_cast<double>(p));
    return res;
}

BcchSelection bcch_lambda(const Dataset& d, double c, std::optional<double> alpha,
                          const SolverConfig& cfg) {
    return three_step(d, c, alpha, cfg, "bcch",
                      [&d](const Eigen::VectorXd& u) { return iid_moment(d.x, u); });
}

BcchSelection bootstrap_lambda(const Dataset& d, double c, std::optional<double> alpha_in,
                               int bootstrap_draws, std::uint64_t seed,
                               const SolverConfig& cfg) {
    if (bootstrap_draws < 500)
        throw std::invalid_argument("bootstrap_lambda: needs at least 500 draws");
    const int n = d.n();
    const int p = d.p();
    const double alpha = checked_alpha(alpha_in, n, p);
    const double q = quantile_factor(alpha, p);
    const double scale = 2.0 * c / std::sqrt(static_cast<double>(n));

    // steps one and two are the moment rule's
    const double moment_prelim = iid_moment(d.x, d.y);
    if (moment_prelim <= 0.0)
        throw std::runtime_error("bootstrap_lambda: degenerate response moments");
    const double lambda0 = scale * q * moment_prelim;
    const LassoFit prelim = lasso_fit(d.x, d.y, lambda0, cfg);
    const Eigen::VectorXd ehat = d.y - d.x * prelim.beta;

    auto engine = make_engine(seed, 0x626f6f74ULL); // "boot"
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> draws(static_cast<std::size_t>(bootstrap_draws));
    Eigen::VectorXd g(n);
    for (int b = 0; b < bootstrap_draws; ++b) {
        for (int i = 0; i < n; ++i) g(i) = normal(engine) * ehat(i);
        draws[static_cast<std::size_t>(b)] =
            (d.x.transpose() * g).cwiseAbs().maxCoeff() / std::sqrt(static_cast<double>(n));
    }
    const double qhat = empirical_quantile(draws, 1.0 - alpha);
    if (qhat <= 0.0)
        throw std::runtime_error("bootstrap_lambda: degenerate bootstrap statistic "
                                 "(zero pilot residuals?)");
    const double lambda = scale * qhat;

    BcchSelection sel;
    sel.fit = lasso_fit(d.x, d.y, lambda, cfg);
    auto& res = sel.result;
    res.rule = "bootstrap";
    res.lambda = lambda;
    res.alpha = alpha;
    res.c = c;
    res.preliminary_lambda = lambda0;
    res.residual_source = "preliminary lasso fit";
    res.quantile_draws = bootstrap_draws;
    res.meta.emplace_back("quantile_term", q);
    res.meta.emplace_back("moment_prelim", moment_prelim);
    res.meta.emplace_back("q_hat", qhat);
    res.meta.emplace_back("n", static_cast<double>(n));
    res.meta.emplace_back("p", static_cast<double>(p));
    return sel;
}

LambdaResult sure_lambda(const Dataset& d, double sigma2,
                         const std::vector<double>& grid, const SolverConfig& cfg) {
    if (sigma2 <= 0.0) throw std::invalid_argument("sure_lambda: sigma2 must be positive");
    if (grid.empty()) throw std::invalid_argument("sure_lambda: empty grid");
    const double n = static_cast<double>(d.n());

    LambdaResult res;
    res.rule = "sure";
    res.residual_source = "caller-supplied sigma2";
    int best = -1;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double value = std::numeric_limits<double>::quiet_NaN();
        try {
            const LassoFit fit = lasso_fit(d.x, d.y, grid[g], cfg);
            const double mse = (d.y - d.x * fit.beta).squaredNorm() / n;
            value = mse + 2.0 * sigma2 * static_cast<double>(fit.active_set.size()) / n -
                    sigma2;
        } catch (const SolverError&) {
            // failed grid point; recorded as NaN and skipped
        }
        res.per_grid.emplace_back(grid[g], value);
        if (std::isfinite(value) && value < best_value) {
            best_value = value;
            best = static_cast<int>(g);
        }
    }
    if (best < 0) throw std::runtime_error("sure_lambda: every grid fit failed");
    res.lambda = grid[static_cast<std::size_t>(best)];
    res.meta.emplace_back("sigma2", sigma2);
    res.meta.emplace_back("chosen_index", static_cast<double>(best));
    res.meta.emplace_back("criterion_min", best_value);
    return res;
}

double bcch_noise_variance(const Dataset& d, double c, std::optional<double> alpha,
                           const SolverConfig& cfg) {
    const BcchSelection sel = bcch_lambda(d, c, alpha, cfg);
    return (d.y - d.x * sel.fit.beta).squaredNorm() / d.n();
}

CvLambdaSelection cv_lambda(const Dataset& d, int folds,
                            const std::vector<double>& grid, std::uint64_t seed,
                            const SolverConfig& cfg) {
    if (folds < 2) throw std::invalid_argument("cv_lambda: V must be at least 2");
    if (folds > d.n()) throw std::invalid_argument("cv_lambda: V exceeds sample size");
    if (grid.empty()) throw std::invalid_argument("cv_lambda: empty grid");
    const int n = d.n();
    const int p = d.p();

    const auto part = random_partition(n, folds, seed);
    // fold training blocks
    std::vector<Eigen::MatrixXd> x_train(static_cast<std::size_t>(folds));
    std::vector<Eigen::VectorXd> y_train(static_cast<std::size_t>(folds));
    for (int v = 0; v < folds; ++v) {
        const auto& test = part[static_cast<std::size_t>(v)];
        const int rows = n - static_cast<int>(test.size());
        Eigen::MatrixXd xt(rows, p);
        Eigen::VectorXd yt(rows);
        int r = 0;
        std::size_t t = 0;
        for (int i = 0; i < n; ++i) {
            if (t < test.size() && test[t] == i) {
                ++t;
                continue;
            }
            xt.row(r) = d.x.row(i);
            yt(r) = d.y(i);
            ++r;
        }
        x_train[static_cast<std::size_t>(v)] = std::move(xt);
        y_train[static_cast<std::size_t>(v)] = std::move(yt);
    }

    LambdaResult res;
    res.rule = "cv";
    res.residual_source = "out-of-fold prediction";
    int best = -1;
    double best_value = std::numeric_limits<double>::infinity();
    std::vector<Eigen::VectorXd> best_fold_betas;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double criterion = 0.0;
        std::vector<Eigen::VectorXd> fold_betas;
        fold_betas.reserve(static_cast<std::size_t>(folds));
        for (int v = 0; v < folds; ++v) {
            const LassoFit fit = lasso_fit(x_train[static_cast<std::size_t>(v)],
                                           y_train[static_cast<std::size_t>(v)],
                                           grid[g], cfg);
            for (int i : part[static_cast<std::size_t>(v)]) {
                const double e = d.y(i) - d.x.row(i).dot(fit.beta);
                criterion += e * e;
            }
            fold_betas.push_back(fit.beta);
        }
        res.per_grid.emplace_back(grid[g], criterion);
        if (criterion < best_value) {
            best_value = criterion;
            best = static_cast<int>(g);
            best_fold_betas = std::move(fold_betas);
        }
    }
    res.lambda = grid[static_cast<std::size_t>(best)];
    res.meta.emplace_back("folds", static_cast<double>(folds));
    res.meta.emplace_back("chosen_index", static_cast<double>(best));
    res.meta.emplace_back("criterion_min", best_value);

    CvLambdaSelection sel;
    sel.beta_average = Eigen::VectorXd::Zero(p);
    for (const auto& beta : best_fold_betas) sel.beta_average += beta;
    sel.beta_average /= static_cast<double>(folds);
    sel.fit_full = lasso_fit(d.x, d.y, res.lambda, cfg);
    sel.result = std::move(res);
    return sel;
}

BcchSelection cluster_bcch_lambda(const Dataset& d, double c,
                                  std::optional<double> alpha,
                                  const SolverConfig& cfg) {
    if (!d.has_cluster())
        throw std::invalid_argument("cluster_bcch_lambda: cluster labels required");
    const auto groups = d.cluster_groups();
    if (groups.size() < 2)
        throw std::invalid_argument("cluster_bcch_lambda: needs at least two clusters");
    BcchSelection sel = three_step(
        d, c, alpha, cfg, "bcch_cluster",
        [&d, &groups](const Eigen::VectorXd& u) { return cluster_moment(d.x, u, groups); });
    sel.result.meta.emplace_back("num_groups", static_cast<double>(groups.size()));
    return sel;
}

BcchSelection panel_bcch_lambda(const Dataset& d, double c, std::optional<double> alpha,
                                const SolverConfig& cfg) {
    const Dataset demeaned = within_transform(d); // errors on T = 1
    BcchSelection sel = cluster_bcch_lambda(demeaned, c, alpha, cfg);
    sel.result.rule = "bcch_panel";
    sel.result.meta.emplace_back("units", static_cast<double>(d.num_units()));
    sel.result.meta.emplace_back("periods", static_cast<double>(d.num_periods()));
    return sel;
}

LambdaResult quantile_pivotal_lambda(const Dataset& d, double u, double c,
                                     std::optional<double> alpha_in,
                                     int simulation_draws, std::uint64_t seed) {
    if (!(u > 0.0 && u < 1.0))
        throw std::invalid_argument("quantile_pivotal_lambda: u must lie in (0,1)");
    if (simulation_draws < 1000)
        throw std::invalid_argument("quantile_pivotal_lambda: needs at least 1000 draws");
    const int n = d.n();
    const int p = d.p();
    const double alpha = checked_alpha(alpha_in, n, p);
    if (d.x.cwiseAbs().maxCoeff() <= 0.0)
        throw std::runtime_error("quantile_pivotal_lambda: all covariates are zero");

    const double denom = std::sqrt(u * (1.0 - u));
    auto engine = make_engine(seed, 0x7175616eULL); // "quan"
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> draws(static_cast<std::size_t>(simulation_draws));
    Eigen::VectorXd score(n);
    for (int s = 0; s < simulation_draws; ++s) {
        for (int i = 0; i < n; ++i) {
            const double ui = unif(engine);
            score(i) = (u - (ui <= u ? 1.0 : 0.0)) / denom;
        }
        const double stat = (d.x.transpose() * score).cwiseAbs().maxCoeff() /
                            static_cast<double>(n);
        draws[static_cast<std::size_t>(s)] = std::sqrt(static_cast<double>(n)) * stat;
    }
    const double qhat = empirical_quantile(draws, 1.0 - alpha);

    LambdaResult res;
    res.rule = "quantile_pivotal";
    res.lambda = c * qhat / std::sqrt(static_cast<double>(n));
    res.alpha = alpha;
    res.c = c;
    res.residual_source = "pivotal simulation";
    res.quantile_draws = simulation_draws;
    res.meta.emplace_back("u", u);
    res.meta.emplace_back("q_hat", qhat);
    res.meta.emplace_back("n", static_cast<double>(n));
    res.meta.emplace_back("p", static_cast<double>(p));
    return res;
}

GlmCvBootstrapSelection glm_bootstrap_after_cv_lambda(
    const Dataset& d, int folds, const std::vector<double>& grid, double c,
    std::optional<double> alpha_in, int bootstrap_draws, std::uint64_t seed,
    const SolverConfig& cfg) {
    if (folds < 2)
        throw std::invalid_argument("glm_bootstrap_after_cv_lambda: V must be at least 2");
    if (grid.empty())
        throw std::invalid_argument("glm_bootstrap_after_cv_lambda: empty grid");
    if (bootstrap_draws < 500)
        throw std::invalid_argument("glm_bootstrap_after_cv_lambda: needs at least 500 draws");
    const int n = d.n();
    const int p = d.p();
    const double alpha = checked_alpha(alpha_in, n, p);

    const auto part = random_partition(n, folds, seed);
    std::vector<Eigen::MatrixXd> x_train(static_cast<std::size_t>(folds));
    std::vector<Eigen::VectorXd> y_train(static_cast<std::size_t>(folds));
    for (int v = 0; v < folds; ++v) {
        const auto& test = part[static_cast<std::size_t>(v)];
        const int rows = n - static_cast<int>(test.size());
        Eigen::MatrixXd xt(rows, p);
        Eigen::VectorXd yt(rows);
        int r = 0;
        std::size_t t = 0;
        for (int i = 0; i < n; ++i) {
            if (t < test.size() && test[t] == i) {
                ++t;
                continue;
            }
            xt.row(r) = d.x.row(i);
            yt(r) = d.y(i);
            ++r;
        }
        x_train[static_cast<std::size_t>(v)] = std::move(xt);
        y_train[static_cast<std::size_t>(v)] = std::move(yt);
    }

    auto logit_loss = [](double eta, double y) {
        const double l = eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
        return l - y * eta;
    };

    // fold stage: out-of-fold logistic loss over the grid
    int best = -1;
    double best_value = std::numeric_limits<double>::infinity();
    std::vector<Eigen::VectorXd> best_fold_betas;
    std::vector<std::pair<double, double>> per_grid;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double criterion = 0.0;
        std::vector<Eigen::VectorXd> fold_betas;
        fold_betas.reserve(static_cast<std::size_t>(folds));
        for (int v = 0; v < folds; ++v) {
            const LassoFit fit = logit_penalized_fit(x_train[static_cast<std::size_t>(v)],
                                                     y_train[static_cast<std::size_t>(v)],
                                                     grid[g], cfg);
            for (int i : part[static_cast<std::size_t>(v)])
                criterion += logit_loss(d.x.row(i).dot(fit.beta), d.y(i));
            fold_betas.push_back(fit.beta);
        }
        per_grid.emplace_back(grid[g], criterion);
        if (criterion < best_value) {
            best_value = criterion;
            best = static_cast<int>(g);
            best_fold_betas = std::move(fold_betas);
        }
    }
    const double lambda_cv = grid[static_cast<std::size_t>(best)];

    // out-of-fold score estimates m1_i = expit(x_i^T beta_fold) - y_i
    Eigen::VectorXd scores(n);
    for (int v = 0; v < folds; ++v) {
        const auto& beta = best_fold_betas[static_cast<std::size_t>(v)];
        for (int i : part[static_cast<std::size_t>(v)]) {
            const double eta = d.x.row(i).dot(beta);
            const double mu = eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta))
                                         : std::exp(eta) / (1.0 + std::exp(eta));
            scores(i) = mu - d.y(i);
        }
    }
    if (scores.cwiseAbs().maxCoeff() <= 0.0)
        throw std::runtime_error("glm_bootstrap_after_cv_lambda: degenerate scores");

    auto engine = make_engine(seed, 0x676c6d62ULL); // "glmb"
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> draws(static_cast<std::size_t>(bootstrap_draws));
    Eigen::VectorXd g(n);
    for (int b = 0; b < bootstrap_draws; ++b) {
        for (int i = 0; i < n; ++i) g(i) = normal(engine) * scores(i);
        draws[static_cast<std::size_t>(b)] =
            (d.x.transpose() * g).cwiseAbs().maxCoeff() / std::sqrt(static_cast<double>(n));
    }
    const double qhat = empirical_quantile(draws, 1.0 - alpha);
    if (qhat <= 0.0)
        throw std::runtime_error("glm_bootstrap_after_cv_lambda: degenerate bootstrap statistic");
    const double lambda = c * qhat / std::sqrt(static_cast<double>(n));

    GlmCvBootstrapSelection sel;
    sel.lambda_cv = lambda_cv;
    sel.fit = logit_penalized_fit(d.x, d.y, lambda, cfg);
    auto& res = sel.result;
    res.rule = "glm_cv_bootstrap";
    res.lambda = lambda;
    res.alpha = alpha;
    res.c = c;
    res.preliminary_lambda = lambda_cv;
    res.residual_source = "out-of-fold logit scores";
    res.quantile_draws = bootstrap_draws;
    res.per_grid = std::move(per_grid);
    res.meta.emplace_back("q_hat", qhat);
    res.meta.emplace_back("folds", static_cast<double>(folds));
    res.meta.emplace_back("n", static_cast<double>(n));
    res.meta.emplace_back("p", static_cast<double>(p));
    return sel;
}

} // namespace tunesel
