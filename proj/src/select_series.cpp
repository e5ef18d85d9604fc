#include "tunesel/select_series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tunesel/rng.hpp"
#include "tunesel/stats.hpp"

namespace tunesel {

namespace {

Eigen::VectorXd scalar_covariate(const Dataset& d) {
    if (d.p() != 1)
        throw std::invalid_argument("select_series: requires a single covariate column");
    return d.x.col(0);
}

void check_candidates(const std::vector<int>& kn) {
    if (kn.empty()) throw std::invalid_argument("select_series: empty candidate set");
    for (std::size_t i = 0; i < kn.size(); ++i) {
        if (kn[i] < 1) throw std::invalid_argument("select_series: candidate k < 1");
        if (i > 0 && kn[i] <= kn[i - 1])
            throw std::invalid_argument("select_series: candidates must be strictly increasing");
    }
}

// index of the smallest minimizer
int argmin_index(const std::vector<double>& values) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i)
        if (values[static_cast<std::size_t>(i)] < values[static_cast<std::size_t>(best)])
            best = i;
    return best;
}

std::vector<SeriesFit> fit_all(const Eigen::VectorXd& xs, const Eigen::VectorXd& y,
                               BasisFamily family, const std::vector<int>& kn) {
    std::vector<SeriesFit> fits;
    fits.reserve(kn.size());
    for (int k : kn) fits.push_back(fit_series(xs, y, BasisSpec{family, k}));
    return fits;
}

Eigen::VectorXd pilot_residuals(const Eigen::VectorXd& xs, const Eigen::VectorXd& y,
                                BasisFamily family, int kbar,
                                const std::vector<int>& kn,
                                const std::vector<SeriesFit>& fits) {
    auto it = std::find(kn.begin(), kn.end(), kbar);
    if (it != kn.end()) return fits[static_cast<std::size_t>(it - kn.begin())].residuals;
    return fit_series(xs, y, BasisSpec{family, kbar}).residuals;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
    return out;
}

} // namespace

int SelectorResult::chosen_index() const {
    if (!chosen_k) throw std::logic_error("SelectorResult: no chosen_k");
    auto it = std::find(candidates.begin(), candidates.end(), *chosen_k);
    if (it == candidates.end()) throw std::logic_error("SelectorResult: chosen_k not a candidate");
    return static_cast<int>(it - candidates.begin());
}

const SeriesFit& KSelection::chosen_fit() const {
    return fits[static_cast<std::size_t>(result.chosen_index())];
}

int default_pilot_k(int n) {
    if (n < 1) throw std::invalid_argument("default_pilot_k: n must be positive");
    int m = 1;
    while (static_cast<long long>(m) * m * m < n) ++m;
    return m;
}

std::vector<int> default_candidate_set(int n) {
    std::vector<int> kn(static_cast<std::size_t>(default_pilot_k(n)));
    std::iota(kn.begin(), kn.end(), 1);
    return kn;
}

KSelection mallows_select(const Dataset& d, BasisFamily family,
                          const std::vector<int>& kn, int kbar) {
    check_candidates(kn);
    const Eigen::VectorXd xs = scalar_covariate(d);
    const double n = static_cast<double>(d.n());

    KSelection sel;
    sel.fits = fit_all(xs, d.y, family, kn);
    const Eigen::VectorXd pilot = pilot_residuals(xs, d.y, family, kbar, kn, sel.fits);
    const Eigen::VectorXd pilot_sq = pilot.array().square();

    auto& res = sel.result;
    res.method = "mallows";
    res.candidates = kn;
    res.criterion.reserve(kn.size());
    for (std::size_t i = 0; i < kn.size(); ++i) {
        const auto& fit = sel.fits[i];
        const double mse = fit.residuals.squaredNorm() / n;
        const double ahat = fit.leverage.dot(pilot_sq);
        res.criterion.push_back(mse + 2.0 * ahat / n);
        res.meta.emplace_back("ahat_" + std::to_string(kn[i]), ahat);
    }
    res.chosen_k = kn[static_cast<std::size_t>(argmin_index(res.criterion))];
    res.meta.emplace_back("kbar", static_cast<double>(kbar));
    return sel;
}

KSelection stein_select(const Dataset& d, BasisFamily family,
                        const std::vector<int>& kn, int kbar) {
    KSelection sel = mallows_select(d, family, kn, kbar);
    sel.result.method = "stein";
    return sel;
}

KSelection loo_select(const Dataset& d, BasisFamily family,
                      const std::vector<int>& kn) {
    check_candidates(kn);
    const Eigen::VectorXd xs = scalar_covariate(d);
    const double n = static_cast<double>(d.n());

    KSelection sel;
    sel.fits = fit_all(xs, d.y, family, kn);
    auto& res = sel.result;
    res.method = "loo";
    res.candidates = kn;
    for (std::size_t i = 0; i < kn.size(); ++i) {
        const auto& fit = sel.fits[i];
        double acc = 0.0;
        for (int r = 0; r < d.n(); ++r) {
            const double margin = 1.0 - fit.leverage(r);
            if (margin <= 1e-10)
                throw std::runtime_error("loo_select: leverage reaches 1 at k=" +
                                         std::to_string(kn[i]));
            const double t = fit.residuals(r) / margin;
            acc += t * t;
        }
        res.criterion.push_back(acc / n);
    }
    res.chosen_k = kn[static_cast<std::size_t>(argmin_index(res.criterion))];
    return sel;
}

std::pair<std::vector<int>, std::vector<int>> validation_split(int n, double train_frac,
                                                               std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0))
        throw std::invalid_argument("validation_split: train_frac must lie in (0,1)");
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto engine = make_engine(seed, 0x73706c6974ULL); // "split"
    std::shuffle(order.begin(), order.end(), engine);
    const int n_train = static_cast<int>(std::lround(train_frac * n));
    std::vector<int> train(order.begin(), order.begin() + n_train);
    std::vector<int> valid(order.begin() + n_train, order.end());
    std::sort(train.begin(), train.end());
    std::sort(valid.begin(), valid.end());
    return {std::move(train), std::move(valid)};
}

KSelection validation_select(const Dataset& d, BasisFamily family,
                             const std::vector<int>& kn, std::uint64_t seed,
                             double train_frac) {
    check_candidates(kn);
    const Eigen::VectorXd xs = scalar_covariate(d);
    const int n = d.n();
    const int kmax = kn.back();

    auto [train, valid] = validation_split(n, train_frac, seed);
    const int n_train = static_cast<int>(train.size());
    if (n_train < kmax + 1 || n - n_train < kmax + 1)
        throw std::invalid_argument("validation_select: fold too small for max(Kn)");

    const Eigen::VectorXd xs_train = gather(xs, train);
    const Eigen::VectorXd y_train = gather(d.y, train);
    const Eigen::VectorXd xs_valid = gather(xs, valid);
    const Eigen::VectorXd y_valid = gather(d.y, valid);

    KSelection sel;
    auto& res = sel.result;
    res.method = "validation";
    res.candidates = kn;
    for (int k : kn) {
        SeriesFit fit = fit_series(xs_train, y_train, BasisSpec{family, k});
        const Eigen::VectorXd pred = fit.predict_many(xs_valid);
        res.criterion.push_back((y_valid - pred).squaredNorm() /
                                static_cast<double>(valid.size()));
        sel.fits.push_back(std::move(fit));
    }
    res.chosen_k = kn[static_cast<std::size_t>(argmin_index(res.criterion))];
    res.meta.emplace_back("n_train", static_cast<double>(n_train));
    return sel;
}

VfoldSelection vfold_select(const Dataset& d, BasisFamily family,
                            const std::vector<int>& kn, int folds,
                            std::uint64_t seed) {
    check_candidates(kn);
    const int n = d.n();
    if (folds < 2) throw std::invalid_argument("vfold_select: V must be at least 2");
    if (folds > n) throw std::invalid_argument("vfold_select: V exceeds sample size");
    const Eigen::VectorXd xs = scalar_covariate(d);

    const auto part = random_partition(n, folds, seed);
    std::vector<int> fold_of(static_cast<std::size_t>(n), -1);
    for (int v = 0; v < folds; ++v)
        for (int i : part[static_cast<std::size_t>(v)]) fold_of[static_cast<std::size_t>(i)] = v;

    // complements
    std::vector<std::vector<int>> comp(static_cast<std::size_t>(folds));
    for (int i = 0; i < n; ++i)
        for (int v = 0; v < folds; ++v)
            if (fold_of[static_cast<std::size_t>(i)] != v)
                comp[static_cast<std::size_t>(v)].push_back(i);

    std::vector<double> criterion(kn.size(), 0.0);
    // fold fits per candidate, kept so the chosen ones can be returned
    std::vector<std::vector<SeriesFit>> fold_fits(kn.size());
    for (std::size_t ik = 0; ik < kn.size(); ++ik) {
        const BasisSpec spec{family, kn[ik]};
        for (int v = 0; v < folds; ++v) {
            const auto& train = comp[static_cast<std::size_t>(v)];
            SeriesFit fit = fit_series(gather(xs, train), gather(d.y, train), spec);
            const auto& test = part[static_cast<std::size_t>(v)];
            for (int i : test) {
                const double e = d.y(i) - fit.predict(xs(i));
                criterion[ik] += e * e;
            }
            fold_fits[ik].push_back(std::move(fit));
        }
        criterion[ik] /= static_cast<double>(n);
    }

    const int best = argmin_index(criterion);
    VfoldSelection sel;
    sel.result.method = "vfold";
    sel.result.candidates = kn;
    sel.result.criterion = criterion;
    sel.result.chosen_k = kn[static_cast<std::size_t>(best)];
    sel.result.meta.emplace_back("folds", static_cast<double>(folds));
    sel.full_fit = fit_series(xs, d.y, BasisSpec{family, kn[static_cast<std::size_t>(best)]});
    sel.fold_fits = std::move(fold_fits[static_cast<std::size_t>(best)]);
    sel.fold_of = std::move(fold_of);
    return sel;
}

double VfoldSelection::predict_average(double x) const {
    double acc = 0.0;
    for (const auto& fit : fold_fits) acc += fit.predict(x);
    return acc / static_cast<double>(fold_fits.size());
}

Eigen::VectorXd VfoldSelection::fitted_average(const Eigen::VectorXd& xs) const {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(xs.size());
    for (const auto& fit : fold_fits) acc += fit.predict_many(xs);
    return acc / static_cast<double>(fold_fits.size());
}

KSelection lepski_select(const Dataset& d, BasisFamily family,
                         const std::vector<int>& kn, const LepskiConfig& cfg) {
    check_candidates(kn);
    if (cfg.bootstrap_draws < 500)
        throw std::invalid_argument("lepski_select: needs at least 500 bootstrap draws");
    if (cfg.x0 < -1e-12 || cfg.x0 > 1.0 + 1e-12)
        throw std::domain_error("lepski_select: x0 outside [0,1]");
    const Eigen::VectorXd xs = scalar_covariate(d);
    const int n = d.n();
    const int m = static_cast<int>(kn.size());
    const int kbar = cfg.kbar > 0 ? cfg.kbar : default_pilot_k(n);

    KSelection sel;
    sel.fits = fit_all(xs, d.y, family, kn);
    const Eigen::VectorXd ehat =
        pilot_residuals(xs, d.y, family, kbar, kn, sel.fits);
    const Eigen::ArrayXd ehat_sq = ehat.array().square();

    // per candidate: value of the fit at x0 and the influence vector
    // d_k(x_i) = p^k(x0)^T Q_k^{-1} p^k(x_i), Q_k = P_k^T P_k / n
    std::vector<Eigen::VectorXd> influence(static_cast<std::size_t>(m));
    Eigen::VectorXd fx0(m);
    for (int a = 0; a < m; ++a) {
        const BasisSpec spec{family, kn[static_cast<std::size_t>(a)]};
        const Eigen::MatrixXd design = design_matrix(spec, xs);
        const Eigen::MatrixXd q = design.transpose() * design / static_cast<double>(n);
        const Eigen::VectorXd p0 = eval_basis(spec, cfg.x0);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(q);
        if (ldlt.info() != Eigen::Success)
            throw std::runtime_error("lepski_select: singular design at k=" +
                                     std::to_string(spec.k));
        influence[static_cast<std::size_t>(a)] = design * ldlt.solve(p0);
        fx0(a) = p0.dot(sel.fits[static_cast<std::size_t>(a)].beta);
    }

    // all ordered pairs (a, b) with b > a
    struct Pair { int a, b; double tstat, phat; };
    std::vector<Pair> pairs;
    Eigen::MatrixXd contrasts(n, m * (m - 1) / 2);
    for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
            const int r = static_cast<int>(pairs.size());
            contrasts.col(r) = influence[static_cast<std::size_t>(b)] -
                               influence[static_cast<std::size_t>(a)];
            const double phat =
                (ehat_sq * contrasts.col(r).array().square()).sum() /
                (static_cast<double>(n) * static_cast<double>(n));
            if (phat <= 0.0)
                throw std::runtime_error(
                    "lepski_select: degenerate variance for pair (k=" +
                    std::to_string(kn[static_cast<std::size_t>(a)]) + ", k'=" +
                    std::to_string(kn[static_cast<std::size_t>(b)]) + ")");
            pairs.push_back({a, b, std::fabs(fx0(b) - fx0(a)), phat});
            const std::string tag = std::to_string(kn[static_cast<std::size_t>(a)]) +
                                    "_" + std::to_string(kn[static_cast<std::size_t>(b)]);
            sel.result.meta.emplace_back("phat_" + tag, phat);
            sel.result.meta.emplace_back("tstat_" + tag, pairs.back().tstat);
        }
    }

    // multiplier bootstrap, shared draws across candidates
    const int draws = cfg.bootstrap_draws;
    Eigen::MatrixXd w(n, draws);
    {
        auto engine = make_engine(cfg.seed, 0x6c657073ULL); // "leps"
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int b = 0; b < draws; ++b)
            for (int i = 0; i < n; ++i) w(i, b) = normal(engine);
    }
    const Eigen::MatrixXd weighted = w.array().colwise() * ehat.array();
    const Eigen::MatrixXd numer =
        contrasts.transpose() * weighted / static_cast<double>(n); // pairs x draws

    auto& res = sel.result;
    res.method = "lepski";
    res.candidates = kn;
    res.criterion.assign(static_cast<std::size_t>(m), 0.0);
    std::vector<double> chat(static_cast<std::size_t>(m), 0.0);
    std::vector<bool> accepted(static_cast<std::size_t>(m), false);
    accepted[static_cast<std::size_t>(m - 1)] = true; // vacuous at k_max
    std::vector<double> draws_max(static_cast<std::size_t>(draws));
    for (int a = 0; a < m - 1; ++a) {
        double tmax = 0.0;
        std::fill(draws_max.begin(), draws_max.end(), 0.0);
        for (std::size_t r = 0; r < pairs.size(); ++r) {
            if (pairs[r].a != a) continue;
            const double scale = 1.0 / std::sqrt(pairs[r].phat);
            tmax = std::max(tmax, pairs[r].tstat * scale);
            for (int b = 0; b < draws; ++b)
                draws_max[static_cast<std::size_t>(b)] =
                    std::max(draws_max[static_cast<std::size_t>(b)],
                             std::fabs(numer(static_cast<Eigen::Index>(r), b)) * scale);
        }
        res.criterion[static_cast<std::size_t>(a)] = tmax;
        chat[static_cast<std::size_t>(a)] = empirical_quantile(draws_max, 1.0 - cfg.alpha);
        accepted[static_cast<std::size_t>(a)] = tmax <= cfg.beta + chat[static_cast<std::size_t>(a)];
    }

    int chosen = m - 1;
    for (int a = 0; a < m; ++a) {
        if (accepted[static_cast<std::size_t>(a)]) {
            chosen = a;
            break;
        }
    }
    res.chosen_k = kn[static_cast<std::size_t>(chosen)];
    for (int a = 0; a < m; ++a) {
        res.meta.emplace_back("chat_" + std::to_string(kn[static_cast<std::size_t>(a)]),
                              chat[static_cast<std::size_t>(a)]);
        res.meta.emplace_back("accepted_" + std::to_string(kn[static_cast<std::size_t>(a)]),
                              accepted[static_cast<std::size_t>(a)] ? 1.0 : 0.0);
    }
    res.meta.emplace_back("x0", cfg.x0);
    res.meta.emplace_back("alpha", cfg.alpha);
    res.meta.emplace_back("beta", cfg.beta);
    res.meta.emplace_back("bootstrap_draws", static_cast<double>(draws));
    res.meta.emplace_back("kbar", static_cast<double>(kbar));
    return sel;
}

AggregateSelection aggregate_predictor(const Dataset& d, BasisFamily family,
                                       const std::vector<int>& kn, int kbar) {
    check_candidates(kn);
    const Eigen::VectorXd xs = scalar_covariate(d);
    const double n = static_cast<double>(d.n());

    AggregateSelection sel;
    sel.fits = fit_all(xs, d.y, family, kn);
    const Eigen::VectorXd pilot = pilot_residuals(xs, d.y, family, kbar, kn, sel.fits);
    const Eigen::VectorXd pilot_sq = pilot.array().square();
    const double sigma2 = pilot_sq.mean();
    // degeneracy floor relative to the response scale, since an exact pilot
    // fit leaves rounding-level residuals rather than literal zeros
    if (sigma2 <= 1e-28 * std::max(1.0, d.y.squaredNorm() / n))
        throw std::runtime_error("aggregate_predictor: zero pilot residual variance");

    auto& res = sel.result;
    res.method = "aggregation";
    res.candidates = kn;
    std::vector<double> exponent(kn.size());
    for (std::size_t i = 0; i < kn.size(); ++i) {
        const auto& fit = sel.fits[i];
        const double mse = fit.residuals.squaredNorm() / n;
        const double ahat = fit.leverage.dot(pilot_sq);
        const double rhat = mse + 2.0 * ahat / n - sigma2;
        res.criterion.push_back(rhat);
        exponent[i] = -n * rhat / (4.0 * sigma2);
    }
    const double shift = *std::max_element(exponent.begin(), exponent.end());
    std::vector<double> weights(kn.size());
    double total = 0.0;
    for (std::size_t i = 0; i < kn.size(); ++i) {
        weights[i] = std::exp(exponent[i] - shift);
        total += weights[i];
    }
    for (auto& wk : weights) wk /= total;
    res.weights = std::move(weights);
    res.meta.emplace_back("sigma2_pilot", sigma2);
    res.meta.emplace_back("kbar", static_cast<double>(kbar));
    return sel;
}

double AggregateSelection::predict(double x) const {
    const auto& w = *result.weights;
    double acc = 0.0;
    for (std::size_t i = 0; i < fits.size(); ++i) acc += w[i] * fits[i].predict(x);
    return acc;
}

Eigen::VectorXd AggregateSelection::fitted() const {
    const auto& w = *result.weights;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(fits.front().fitted.size());
    for (std::size_t i = 0; i < fits.size(); ++i) acc += w[i] * fits[i].fitted;
    return acc;
}

std::vector<CandidateModel> ordered_models(BasisFamily family,
                                           const std::vector<int>& kn) {
    check_candidates(kn);
    std::vector<CandidateModel> models;
    models.reserve(kn.size());
    for (int k : kn) models.push_back(CandidateModel{BasisSpec{family, k}, {}});
    return models;
}

SelectorResult penalized_model_select(const Dataset& d,
                                      const std::vector<CandidateModel>& models,
                                      double sigma2,
                                      const std::vector<double>& size_counts) {
    if (models.empty()) throw std::invalid_argument("penalized_model_select: empty model list");
    if (sigma2 <= 0.0) throw std::invalid_argument("penalized_model_select: sigma2 must be positive");
    if (!size_counts.empty() && size_counts.size() != models.size())
        throw std::invalid_argument("penalized_model_select: size_counts length mismatch");
    const Eigen::VectorXd xs = scalar_covariate(d);
    const double n = static_cast<double>(d.n());

    // H_m defaults to the number of listed models with the same size
    std::vector<double> counts(models.size());
    if (!size_counts.empty()) {
        counts = size_counts;
    } else {
        for (std::size_t i = 0; i < models.size(); ++i) {
            int same = 0;
            for (const auto& other : models)
                if (other.size() == models[i].size()) ++same;
            counts[i] = static_cast<double>(same);
        }
    }

    SelectorResult res;
    res.method = "penalized";
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto& model = models[i];
        Eigen::MatrixXd design = design_matrix(model.spec, xs);
        if (!model.columns.empty()) {
            Eigen::MatrixXd sub(design.rows(), static_cast<Eigen::Index>(model.columns.size()));
            for (std::size_t j = 0; j < model.columns.size(); ++j) {
                if (model.columns[j] < 0 || model.columns[j] >= model.spec.k)
                    throw std::invalid_argument("penalized_model_select: column index out of range");
                sub.col(static_cast<Eigen::Index>(j)) = design.col(model.columns[j]);
            }
            design = std::move(sub);
        }
        Eigen::BDCSVD<Eigen::MatrixXd> svd(design,
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) <= 1e-10 * sv(0))
            throw std::runtime_error("penalized_model_select: rank-deficient model " +
                                     std::to_string(i));
        const Eigen::VectorXd beta = svd.solve(d.y);
        const double mse = (d.y - design * beta).squaredNorm() / n;
        const double size = static_cast<double>(model.size());
        if (counts[i] < 1.0)
            throw std::invalid_argument("penalized_model_select: H_m must be at least 1");
        const double ratio = std::log(counts[i]) / size;
        const double lambda = 2.0 * sigma2 * (1.0 + 2.0 * std::sqrt(ratio) + 2.0 * ratio);
        res.candidates.push_back(static_cast<int>(i));
        res.criterion.push_back(mse + lambda * size / n);
        res.meta.emplace_back("size_" + std::to_string(i), size);
        res.meta.emplace_back("lambda_" + std::to_string(i), lambda);
    }
    res.chosen_k = res.candidates[static_cast<std::size_t>(argmin_index(res.criterion))];
    res.meta.emplace_back("sigma2", sigma2);
    return res;
}

} // namespace tunesel
