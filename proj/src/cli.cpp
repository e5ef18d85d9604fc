#include "tunesel/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>

#include "tunesel/mc.hpp"
#include "tunesel/report.hpp"
#include "tunesel/select_lambda.hpp"
#include "tunesel/select_series.hpp"

namespace tunesel {

namespace {

using KvPairs = std::vector<std::pair<std::string, std::string>>;

void emit(const KvPairs& pairs, const std::string& out_path) {
    if (out_path.empty()) {
        write_key_values(std::cout, pairs);
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open output file '" + out_path + "'");
    write_key_values(out, pairs);
    std::cout << "wrote " << out_path << "\n";
}

struct DataArgs {
    std::string path;
    TableSchema schema;

    Dataset load() const { return load_table(path, schema); }
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
    cmd->add_option("--data", args.path, "input CSV file")->required();
    cmd->add_option("--y", args.schema.y, "response column")->required();
    cmd->add_option("--x", args.schema.x, "covariate columns (default: all remaining)");
    cmd->add_option("--cluster", args.schema.cluster, "cluster label column");
    cmd->add_option("--unit", args.schema.unit, "panel unit column");
    cmd->add_option("--time", args.schema.time, "panel time column");
    cmd->add_flag("--normalize", args.schema.normalize_columns,
                  "divide each covariate by its root mean square");
}

double parse_alpha_flag(const std::string& text, const Dataset& d) {
    if (text == "auto") return default_alpha(d.n(), d.p());
    return std::stod(text);
}

int parse_k_flag(const std::string& text, int n) {
    if (text == "auto") return default_pilot_k(n);
    const int k = std::stoi(text);
    if (k < 1) throw std::runtime_error("term count must be positive");
    return k;
}

KvPairs selector_pairs(const SelectorResult& res, bool full) {
    KvPairs kv;
    kv.emplace_back("method", res.method);
    if (res.chosen_k) kv.emplace_back("chosen_k", std::to_string(*res.chosen_k));
    for (std::size_t i = 0; i < res.candidates.size(); ++i)
        kv.emplace_back("criterion_" + std::to_string(res.candidates[i]),
                        format_number(res.criterion[i], full));
    if (res.weights)
        for (std::size_t i = 0; i < res.candidates.size(); ++i)
            kv.emplace_back("weight_" + std::to_string(res.candidates[i]),
                            format_number((*res.weights)[i], full));
    for (const auto& [key, value] : res.meta)
        kv.emplace_back(key, format_number(value, full));
    return kv;
}

KvPairs lambda_pairs(const LambdaResult& res, bool full) {
    KvPairs kv;
    kv.emplace_back("rule", res.rule);
    kv.emplace_back("lambda", format_number(res.lambda, full));
    kv.emplace_back("alpha", format_number(res.alpha, full));
    kv.emplace_back("c", format_number(res.c, full));
    if (res.preliminary_lambda)
        kv.emplace_back("preliminary_lambda", format_number(*res.preliminary_lambda, full));
    if (!res.residual_source.empty())
        kv.emplace_back("residual_source", res.residual_source);
    if (res.quantile_draws)
        kv.emplace_back("quantile_draws", std::to_string(*res.quantile_draws));
    for (const auto& [key, value] : res.meta)
        kv.emplace_back(key, format_number(value, full));
    for (std::size_t i = 0; i < res.per_grid.size(); ++i) {
        kv.emplace_back("grid_" + std::to_string(i) + "_lambda",
                        format_number(res.per_grid[i].first, full));
        kv.emplace_back("grid_" + std::to_string(i) + "_criterion",
                        format_number(res.per_grid[i].second, full));
    }
    return kv;
}

KvPairs lasso_pairs(const LassoFit& fit, bool full) {
    KvPairs kv;
    kv.emplace_back("lambda", format_number(fit.lambda, full));
    kv.emplace_back("iterations", std::to_string(fit.iterations));
    kv.emplace_back("kkt_gap", format_number(fit.kkt_gap, full));
    kv.emplace_back("objective", format_number(fit.objective, full));
    kv.emplace_back("active_size", std::to_string(fit.active_set.size()));
    for (Eigen::Index j = 0; j < fit.beta.size(); ++j)
        kv.emplace_back("beta_" + std::to_string(j), format_number(fit.beta(j), full));
    return kv;
}

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"tuning-parameter selection for series regression and the Lasso"};
    app.require_subcommand(1);
    bool full_precision = false;
    app.add_flag("--full-precision", full_precision,
                 "emit shortest round-trip numbers instead of 6 significant digits");

    // ---- fit-series ----
    auto* fit_cmd = app.add_subcommand("fit-series", "series OLS fit at a fixed term count");
    DataArgs fit_data;
    add_data_options(fit_cmd, fit_data);
    std::string fit_basis = "monomial";
    int fit_k = 1;
    std::string fit_out;
    fit_cmd->add_option("--basis", fit_basis, "monomial or spline");
    fit_cmd->add_option("--k", fit_k, "term count")->required();
    fit_cmd->add_option("--out", fit_out, "report file (default: stdout)");

    // ---- select-k ----
    auto* selk_cmd = app.add_subcommand("select-k", "choose the number of series terms");
    DataArgs selk_data;
    add_data_options(selk_cmd, selk_data);
    std::string selk_method = "mallows";
    std::string selk_basis = "monomial";
    std::string selk_kmax = "auto";
    std::string selk_kbar = "auto";
    int selk_kmin = 1;
    double selk_x0 = 0.5, selk_alpha = 0.05, selk_beta = 1.0, selk_train_frac = 2.0 / 3.0;
    int selk_draws = 1000, selk_folds = 5;
    std::uint64_t selk_seed = 0;
    std::string selk_out;
    selk_cmd->add_option("--method", selk_method,
                         "mallows|stein|lepski|validation|vfold|loo|aggregation");
    selk_cmd->add_option("--basis", selk_basis, "monomial or spline");
    selk_cmd->add_option("--kmax", selk_kmax, "largest candidate (auto = ceil(n^(1/3)))");
    selk_cmd->add_option("--kmin", selk_kmin, "smallest candidate");
    selk_cmd->add_option("--kbar", selk_kbar, "pilot term count (auto = ceil(n^(1/3)))");
    selk_cmd->add_option("--x0", selk_x0, "evaluation point for lepski");
    selk_cmd->add_option("--alpha", selk_alpha, "lepski test size");
    selk_cmd->add_option("--beta", selk_beta, "lepski bias/sd ratio");
    selk_cmd->add_option("--B", selk_draws, "bootstrap draws for lepski");
    selk_cmd->add_option("--V", selk_folds, "folds for vfold");
    selk_cmd->add_option("--train-frac", selk_train_frac, "training fraction for validation");
    selk_cmd->add_option("--seed", selk_seed, "random seed");
    selk_cmd->add_option("--out", selk_out, "report file (default: stdout)");

    // ---- lasso ----
    auto* lasso_cmd = app.add_subcommand("lasso", "penalized fit at a fixed lambda");
    DataArgs lasso_data;
    add_data_options(lasso_cmd, lasso_data);
    double lasso_lambda = 0.0;
    bool lasso_logit = false;
    SolverConfig lasso_cfg;
    std::string lasso_out;
    lasso_cmd->add_option("--lambda", lasso_lambda, "penalty level")->required();
    lasso_cmd->add_flag("--logit", lasso_logit, "penalized logistic regression");
    lasso_cmd->add_option("--tol", lasso_cfg.tol, "KKT tolerance");
    lasso_cmd->add_option("--max-iter", lasso_cfg.max_iter, "iteration budget");
    lasso_cmd->add_option("--out", lasso_out, "report file (default: stdout)");

    // ---- select-lambda ----
    auto* sell_cmd = app.add_subcommand("select-lambda", "choose the Lasso penalty level");
    DataArgs sell_data;
    add_data_options(sell_cmd, sell_data);
    std::string sell_rule = "bcch";
    std::string sell_alpha = "auto";
    double sell_c = 1.1, sell_sigma = 1.0, sell_sigma2 = 0.0, sell_u = 0.5;
    int sell_draws = 1000, sell_sims = 10000, sell_folds = 5, sell_grid_size = 100;
    double sell_grid_min = 0.0, sell_grid_max = 0.0;
    std::uint64_t sell_seed = 0;
    SolverConfig sell_cfg;
    std::string sell_out;
    sell_cmd->add_option("--rule", sell_rule,
                         "brt|bcch|bootstrap|sure|cv|cluster-bcch|panel-bcch|quantile|"
                         "glm-cv-bootstrap");
    sell_cmd->add_option("--alpha", sell_alpha, "level (auto = 0.1/log(p v n))");
    sell_cmd->add_option("--c", sell_c, "slack constant");
    sell_cmd->add_option("--sigma", sell_sigma, "noise sd for brt");
    sell_cmd->add_option("--sigma2", sell_sigma2,
                         "noise variance for sure (0 = plug-in from the moment rule)");
    sell_cmd->add_option("--u", sell_u, "quantile index for the pivotal rule");
    sell_cmd->add_option("--B", sell_draws, "bootstrap draws");
    sell_cmd->add_option("--S", sell_sims, "simulation draws for the pivotal rule");
    sell_cmd->add_option("--V", sell_folds, "cross-validation folds");
    sell_cmd->add_option("--grid-min", sell_grid_min, "grid start (0 = 1/n)");
    sell_cmd->add_option("--grid-max", sell_grid_max, "grid end (0 = n)");
    sell_cmd->add_option("--grid-size", sell_grid_size, "grid size");
    sell_cmd->add_option("--seed", sell_seed, "random seed");
    sell_cmd->add_option("--tol", sell_cfg.tol, "solver KKT tolerance");
    sell_cmd->add_option("--max-iter", sell_cfg.max_iter, "solver iteration budget");
    sell_cmd->add_option("--out", sell_out, "report file (default: stdout)");

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study of the series selectors");
    bool sim_table1 = false;
    McConfig sim_cfg;
    std::string sim_out, sim_table_out;
    sim_cmd->add_flag("--table1", sim_table1, "run the full study layout");
    sim_cmd->add_option("--reps", sim_cfg.reps, "replications per cell");
    sim_cmd->add_option("--seed", sim_cfg.master_seed, "master seed");
    sim_cmd->add_option("--n", sim_cfg.sample_sizes, "sample sizes");
    sim_cmd->add_option("--B", sim_cfg.bootstrap_draws, "lepski bootstrap draws");
    sim_cmd->add_option("--jobs", sim_cfg.jobs, "worker threads (0 = hardware)");
    sim_cmd->add_option("--out", sim_out, "CSV report file")->required();
    sim_cmd->add_option("--table", sim_table_out, "aligned text table file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            app.exit(e);
            return 0;
        }
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (*fit_cmd) {
            const Dataset d = fit_data.load();
            const SeriesFit fit =
                fit_series(d, BasisSpec{basis_family_from_string(fit_basis), fit_k});
            KvPairs kv;
            kv.emplace_back("basis", fit_basis);
            kv.emplace_back("k", std::to_string(fit.k()));
            for (Eigen::Index j = 0; j < fit.beta.size(); ++j)
                kv.emplace_back("beta_" + std::to_string(j),
                                format_number(fit.beta(j), full_precision));
            kv.emplace_back("mse", format_number(fit.residuals.squaredNorm() / d.n(),
                                                 full_precision));
            emit(kv, fit_out);
        } else if (*selk_cmd) {
            const Dataset d = selk_data.load();
            const BasisFamily family = basis_family_from_string(selk_basis);
            const int kmax = parse_k_flag(selk_kmax, d.n());
            const int kbar = parse_k_flag(selk_kbar, d.n());
            if (selk_kmin < 1 || selk_kmin > kmax)
                throw std::runtime_error("select-k: invalid candidate range");
            std::vector<int> kn;
            for (int k = selk_kmin; k <= kmax; ++k) kn.push_back(k);

            SelectorResult res;
            if (selk_method == "mallows") {
                res = mallows_select(d, family, kn, kbar).result;
            } else if (selk_method == "stein") {
                res = stein_select(d, family, kn, kbar).result;
            } else if (selk_method == "loo") {
                res = loo_select(d, family, kn).result;
            } else if (selk_method == "validation") {
                res = validation_select(d, family, kn, selk_seed, selk_train_frac).result;
            } else if (selk_method == "vfold") {
                res = vfold_select(d, family, kn, selk_folds, selk_seed).result;
            } else if (selk_method == "lepski") {
                LepskiConfig lc;
                lc.x0 = selk_x0;
                lc.alpha = selk_alpha;
                lc.beta = selk_beta;
                lc.bootstrap_draws = selk_draws;
                lc.kbar = kbar;
                lc.seed = selk_seed;
                res = lepski_select(d, family, kn, lc).result;
            } else if (selk_method == "aggregation") {
                res = aggregate_predictor(d, family, kn, kbar).result;
            } else {
                throw std::runtime_error("select-k: unknown method '" + selk_method + "'");
            }
            emit(selector_pairs(res, full_precision), selk_out);
        } else if (*lasso_cmd) {
            const Dataset d = lasso_data.load();
            const LassoFit fit = lasso_logit
                                     ? logit_penalized_fit(d, lasso_lambda, lasso_cfg)
                                     : lasso_fit(d, lasso_lambda, lasso_cfg);
            emit(lasso_pairs(fit, full_precision), lasso_out);
        } else if (*sell_cmd) {
            const Dataset d = sell_data.load();
            const std::optional<double> alpha =
                sell_alpha == "auto" ? std::nullopt
                                     : std::optional<double>(std::stod(sell_alpha));
            const double grid_lo = sell_grid_min > 0.0 ? sell_grid_min : 1.0 / d.n();
            const double grid_hi =
                sell_grid_max > 0.0 ? sell_grid_max : static_cast<double>(d.n());
            const std::vector<double> grid =
                geometric_grid(grid_lo, grid_hi, sell_grid_size);

            LambdaResult res;
            if (sell_rule == "brt") {
                res = brt_lambda(d, sell_sigma, sell_c, alpha);
            } else if (sell_rule == "bcch") {
                res = bcch_lambda(d, sell_c, alpha, sell_cfg).result;
            } else if (sell_rule == "bootstrap") {
                res = bootstrap_lambda(d, sell_c, alpha, sell_draws, sell_seed, sell_cfg)
                          .result;
            } else if (sell_rule == "sure") {
                const double sigma2 = sell_sigma2 > 0.0
                                          ? sell_sigma2
                                          : bcch_noise_variance(d, sell_c, alpha, sell_cfg);
                res = sure_lambda(d, sigma2, grid, sell_cfg);
            } else if (sell_rule == "cv") {
                res = cv_lambda(d, sell_folds, grid, sell_seed, sell_cfg).result;
            } else if (sell_rule == "cluster-bcch") {
                res = cluster_bcch_lambda(d, sell_c, alpha, sell_cfg).result;
            } else if (sell_rule == "panel-bcch") {
                res = panel_bcch_lambda(d, sell_c, alpha, sell_cfg).result;
            } else if (sell_rule == "quantile") {
                res = quantile_pivotal_lambda(d, sell_u, sell_c, alpha, sell_sims,
                                              sell_seed);
            } else if (sell_rule == "glm-cv-bootstrap") {
                res = glm_bootstrap_after_cv_lambda(d, sell_folds, grid, sell_c, alpha,
                                                    sell_draws, sell_seed, sell_cfg)
                          .result;
            } else {
                throw std::runtime_error("select-lambda: unknown rule '" + sell_rule + "'");
            }
            emit(lambda_pairs(res, full_precision), sell_out);
        } else if (*sim_cmd) {
            (void)sim_table1; // the study layout is the default configuration
            const McReport report = run_table1(sim_cfg);
            std::ofstream out(sim_out);
            if (!out) throw std::runtime_error("cannot open output file '" + sim_out + "'");
            write_report_csv(report, out, full_precision);
            std::cout << "wrote " << sim_out << "\n";
            if (!sim_table_out.empty()) {
                std::ofstream table(sim_table_out);
                if (!table)
                    throw std::runtime_error("cannot open output file '" + sim_table_out + "'");
                write_report_table(report, table);
                std::cout << "wrote " << sim_table_out << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) { return dispatch(argc, argv); }

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("tunesel");
    for (const auto& arg : args) argv.push_back(arg.c_str());
    return dispatch(static_cast<int>(argv.size()), argv.data());
}

} // namespace tunesel
