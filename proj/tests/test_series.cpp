#include <doctest.h>

#include <random>

#include "tunesel/rng.hpp"
#include "tunesel/series.hpp"

using namespace tunesel;

namespace {

Dataset make_dataset(const Eigen::VectorXd& xs, const Eigen::VectorXd& y) {
    Dataset d;
    d.x = xs;
    d.y = y;
    d.col_names = {"x"};
    return d;
}

Eigen::VectorXd random_uniform(int n, std::uint64_t seed) {
    auto engine = make_engine(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd xs(n);
    for (int i = 0; i < n; ++i) xs(i) = unif(engine);
    return xs;
}

} // namespace

TEST_CASE("exact linear data is interpolated at k=2") {
    const Eigen::VectorXd xs = random_uniform(30, 11);
    const Eigen::VectorXd y = 2.0 * xs.array() + 1.0;
    const SeriesFit fit = fit_series(xs, y, {BasisFamily::Monomial, 2});
    CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(fit.beta(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.beta(1) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("intercept-only fit is the mean with leverage 1/n") {
    const int n = 17;
    const Eigen::VectorXd xs = random_uniform(n, 12);
    const Eigen::VectorXd y = random_uniform(n, 13);
    const SeriesFit fit = fit_series(xs, y, {BasisFamily::Monomial, 1});
    CHECK(fit.beta(0) == doctest::Approx(y.mean()).epsilon(1e-14));
    for (int i = 0; i < n; ++i)
        CHECK(fit.leverage(i) == doctest::Approx(1.0 / n).epsilon(1e-12));
}

TEST_CASE("coefficients match a normal-equations solve") {
    const int n = 20;
    const Eigen::VectorXd xs = random_uniform(n, 14);
    Eigen::VectorXd y = random_uniform(n, 15);
    const BasisSpec spec{BasisFamily::Monomial, 4};
    const SeriesFit fit = fit_series(xs, y, spec);
    // independent route: explicit normal equations
    const Eigen::MatrixXd design = design_matrix(spec, xs);
    const Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::VectorXd oracle = gram.fullPivLu().solve(design.transpose() * y);
    CHECK((fit.beta - oracle).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fit invariants: residual identity and leverage") {
    const int n = 40;
    const Eigen::VectorXd xs = random_uniform(n, 16);
    const Eigen::VectorXd y = random_uniform(n, 17);
    for (auto family : {BasisFamily::Monomial, BasisFamily::QuadraticSpline}) {
        const SeriesFit fit = fit_series(xs, y, {family, 5});
        CHECK((fit.fitted + fit.residuals - y).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(fit.leverage.minCoeff() >= -1e-12);
        CHECK(fit.leverage.maxCoeff() <= 1.0 + 1e-12);
        CHECK(fit.leverage.sum() == doctest::Approx(5.0).epsilon(1e-8));
    }
}

TEST_CASE("projection idempotence") {
    const int n = 35;
    const Eigen::VectorXd xs = random_uniform(n, 18);
    const Eigen::VectorXd y = random_uniform(n, 19);
    const SeriesFit fit = fit_series(xs, y, {BasisFamily::Monomial, 4});
    const SeriesFit refit = fit_series(xs, fit.fitted, {BasisFamily::Monomial, 4});
    CHECK((refit.fitted - fit.fitted).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("in-sample fit improves with nested monomials") {
    const int n = 60;
    const Eigen::VectorXd xs = random_uniform(n, 20);
    Eigen::VectorXd y(n);
    auto engine = make_engine(21);
    std::normal_distribution<double> normal;
    for (int i = 0; i < n; ++i) y(i) = std::sin(3.0 * xs(i)) + 0.2 * normal(engine);
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 6; ++k) {
        const SeriesFit fit = fit_series(xs, y, {BasisFamily::Monomial, k});
        const double mse = fit.residuals.squaredNorm() / n;
        CHECK(mse <= previous + 1e-12);
        previous = mse;
    }
}

TEST_CASE("rank-deficient design names the offending k") {
    Eigen::VectorXd xs = Eigen::VectorXd::Constant(10, 0.5);
    const Eigen::VectorXd y = random_uniform(10, 22);
    CHECK_THROWS_WITH_AS(fit_series(xs, y, {BasisFamily::Monomial, 2}),
                         doctest::Contains("k=2"), std::runtime_error);
    CHECK_THROWS_AS(fit_series(xs.head(2), y.head(2), {BasisFamily::Monomial, 3}),
                    std::invalid_argument); // n < k
}

TEST_CASE("hetero trace reduces to sigma2 * k under constant residuals") {
    const int n = 25;
    const Eigen::VectorXd xs = random_uniform(n, 23);
    CHECK(hetero_trace(xs, {BasisFamily::Monomial, 4}, Eigen::VectorXd::Ones(n)) ==
          doctest::Approx(4.0).epsilon(1e-10));
    CHECK(hetero_trace(xs, {BasisFamily::Monomial, 3},
                       Eigen::VectorXd::Constant(n, 2.0)) ==
          doctest::Approx(12.0).epsilon(1e-10));
}

TEST_CASE("hetero trace matches the brute-force matrix formula") {
    const int n = 30;
    const Eigen::VectorXd xs = random_uniform(n, 24);
    const Eigen::VectorXd resid = random_uniform(n, 25);
    const BasisSpec spec{BasisFamily::QuadraticSpline, 5};
    const double fast = hetero_trace(xs, spec, resid);
    // brute force: tr{(P^T P)^{-1} sum_i e_i^2 p_i p_i^T}
    const Eigen::MatrixXd design = design_matrix(spec, xs);
    Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(spec.k, spec.k);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd p = design.row(i).transpose();
        weighted += resid(i) * resid(i) * p * p.transpose();
    }
    const Eigen::MatrixXd gram = design.transpose() * design;
    const double oracle = (gram.inverse() * weighted).trace();
    CHECK(fast == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("error metrics on constructed cases") {
    auto f = [](double x) { return std::sin(2.0 * x) + x; };
    auto same = [&](double x) { return f(x); };
    Eigen::VectorXd xs(3);
    xs << 0.1, 0.5, 0.9;
    CHECK(l2_error(same, f) == 0.0);
    CHECK(prediction_error(same, f, xs) == 0.0);
    CHECK(uniform_error(same, f) == 0.0);
    CHECK(pointwise_error(same, f, 0.5) == 0.0);

    auto shifted = [&](double x) { return f(x) + 0.1; };
    CHECK(uniform_error(shifted, f) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(pointwise_error(shifted, f, 0.3) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(prediction_error(shifted, f, xs) == doctest::Approx(0.1).epsilon(1e-12));

    // closed-form integral: || x ||_{L2[0,1]} = sqrt(1/3)
    auto plus_x = [&](double x) { return f(x) + x; };
    CHECK(l2_error(plus_x, f) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-6));

    CHECK_THROWS_AS(prediction_error(same, f, Eigen::VectorXd()), std::invalid_argument);
}

TEST_CASE("metric dispatcher agrees with the direct functions") {
    auto f = [](double x) { return x * x; };
    auto g = [](double x) { return x; };
    Eigen::VectorXd xs(4);
    xs << 0.2, 0.4, 0.6, 0.8;
    CHECK(error_metric(ErrorMetric::L2, g, f, xs, 0.5) == l2_error(g, f));
    CHECK(error_metric(ErrorMetric::Prediction, g, f, xs, 0.5) ==
          prediction_error(g, f, xs));
    CHECK(error_metric(ErrorMetric::Uniform, g, f, xs, 0.5) == uniform_error(g, f));
    CHECK(error_metric(ErrorMetric::Pointwise, g, f, xs, 0.5) ==
          pointwise_error(g, f, 0.5));
}
