#include "tunesel/mc.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tunesel/parallel.hpp"
#include "tunesel/report.hpp"
#include "tunesel/rng.hpp"

namespace tunesel {

std::string to_string(TestFunction f) {
    return f == TestFunction::ExpExp ? "expexp" : "sin2pi";
}

double eval_truth(TestFunction f, double x) {
    return f == TestFunction::ExpExp ? std::exp(std::exp(x))
                                     : std::sin(2.0 * M_PI * x);
}

std::string to_string(SeriesMethod method) {
    switch (method) {
        case SeriesMethod::Mallows: return "mallows";
        case SeriesMethod::Lepski: return "lepski";
        case SeriesMethod::Cv5: return "cv";
        case SeriesMethod::Aggregation: return "aggregation";
    }
    return "?";
}

Dataset simulate_dataset(const DgpSpec& spec, std::uint64_t seed) {
    if (spec.n < 10) throw std::invalid_argument("simulate_dataset: n must be at least 10");
    auto engine = make_engine(seed, 0x64617461ULL); // "data"
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset d;
    d.x.resize(spec.n, 1);
    d.y.resize(spec.n);
    d.col_names = {"x"};
    for (int i = 0; i < spec.n; ++i) d.x(i, 0) = unif(engine);
    for (int i = 0; i < spec.n; ++i) {
        const double x = d.x(i, 0);
        const double noise = normal(engine) / std::sqrt(1.0 + x * x);
        d.y(i) = eval_truth(spec.f, x) + noise;
    }
    return d;
}

namespace {

constexpr int kFineGrid = kL2GridPoints;      // 10001 points, x = i/10000
constexpr int kCoarseStride = 10;             // every 10th point = 1001-point grid

struct GridCache {
    // per (family, k): fine-grid design matrix
    std::map<std::pair<int, int>, Eigen::MatrixXd> designs;
    // per function: truth on the fine grid
    std::map<int, Eigen::VectorXd> truths;

    const Eigen::MatrixXd& design(BasisFamily family, int k) const {
        return designs.at({static_cast<int>(family), k});
    }
    const Eigen::VectorXd& truth(TestFunction f) const {
        return truths.at(static_cast<int>(f));
    }
};

GridCache build_grid_cache(const McConfig& cfg) {
    GridCache cache;
    Eigen::VectorXd grid(kFineGrid);
    for (int i = 0; i < kFineGrid; ++i)
        grid(i) = static_cast<double>(i) / (kFineGrid - 1);
    int kmax = 1;
    for (int n : cfg.sample_sizes) kmax = std::max(kmax, default_pilot_k(n));
    for (BasisFamily family : cfg.bases)
        for (int k = 1; k <= kmax; ++k)
            cache.designs.emplace(std::make_pair(static_cast<int>(family), k),
                                  design_matrix(BasisSpec{family, k}, grid));
    for (TestFunction f : cfg.functions) {
        Eigen::VectorXd truth(kFineGrid);
        for (int i = 0; i < kFineGrid; ++i) truth(i) = eval_truth(f, grid(i));
        cache.truths.emplace(static_cast<int>(f), std::move(truth));
    }
    return cache;
}

double l2_from_grid(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
    const double h = 1.0 / (kFineGrid - 1);
    double acc = 0.0;
    for (int i = 0; i < kFineGrid; ++i) {
        const double diff = pred(i) - truth(i);
        const double w = (i == 0 || i == kFineGrid - 1) ? 0.5 : 1.0;
        acc += w * diff * diff;
    }
    return std::sqrt(acc * h);
}

double uniform_from_grid(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
    double worst = 0.0;
    for (int i = 0; i < kFineGrid; i += kCoarseStride)
        worst = std::max(worst, std::fabs(pred(i) - truth(i)));
    return worst;
}

struct RepOutcome {
    std::array<double, 4> errors{};
    bool ok = false;
};

RepOutcome run_replication(const McConfig& cfg, const McCell& cell,
                           const GridCache& cache, std::uint64_t seed) {
    RepOutcome out;
    const Dataset d = simulate_dataset(DgpSpec{cell.f, cell.n}, seed);
    const std::vector<int> kn = default_candidate_set(cell.n);
    const int kbar = kn.back();

    Eigen::VectorXd grid_pred;
    Eigen::VectorXd fitted;
    double at_x0 = 0.0;
    switch (cell.method) {
        case SeriesMethod::Mallows: {
            const KSelection sel = mallows_select(d, cell.basis, kn, kbar);
            const SeriesFit& fit = sel.chosen_fit();
            grid_pred = cache.design(cell.basis, fit.k()) * fit.beta;
            fitted = fit.fitted;
            at_x0 = fit.predict(cfg.x0);
            break;
        }
        case SeriesMethod::Lepski: {
            LepskiConfig lc;
            lc.x0 = cfg.x0;
            lc.beta = cfg.lepski_beta;
            lc.alpha = cfg.lepski_alpha;
            lc.bootstrap_draws = cfg.bootstrap_draws;
            lc.kbar = kbar;
            lc.seed = seed;
            const KSelection sel = lepski_select(d, cell.basis, kn, lc);
            const SeriesFit& fit = sel.chosen_fit();
            grid_pred = cache.design(cell.basis, fit.k()) * fit.beta;
            fitted = fit.fitted;
            at_x0 = fit.predict(cfg.x0);
            break;
        }
        case SeriesMethod::Cv5: {
            const VfoldSelection sel = vfold_select(d, cell.basis, kn, cfg.folds, seed);
            const SeriesFit& fit = sel.full_fit;
            grid_pred = cache.design(cell.basis, fit.k()) * fit.beta;
            fitted = fit.fitted;
            at_x0 = fit.predict(cfg.x0);
            break;
        }
        case SeriesMethod::Aggregation: {
            const AggregateSelection sel =
                aggregate_predictor(d, cell.basis, kn, kbar);
            const auto& w = *sel.result.weights;
            grid_pred = Eigen::VectorXd::Zero(kFineGrid);
            for (std::size_t i = 0; i < sel.fits.size(); ++i)
                grid_pred += w[i] * (cache.design(cell.basis, sel.fits[i].k()) *
                                     sel.fits[i].beta);
            fitted = sel.fitted();
            at_x0 = sel.predict(cfg.x0);
            break;
        }
    }

    const Eigen::VectorXd& truth_grid = cache.truth(cell.f);
    out.errors[0] = l2_from_grid(grid_pred, truth_grid);
    double acc = 0.0;
    for (int i = 0; i < cell.n; ++i) {
        const double diff = fitted(i) - eval_truth(cell.f, d.x(i, 0));
        acc += diff * diff;
    }
    out.errors[1] = std::sqrt(acc / cell.n);
    out.errors[2] = uniform_from_grid(grid_pred, truth_grid);
    out.errors[3] = std::fabs(at_x0 - eval_truth(cell.f, cfg.x0));
    out.ok = true;
    return out;
}

} // namespace

const McCell& McReport::cell(SeriesMethod method, BasisFamily basis, int n,
                             TestFunction f) const {
    for (const auto& c : cells)
        if (c.method == method && c.basis == basis && c.n == n && c.f == f) return c;
    throw std::out_of_range("McReport: no such cell");
}

McReport run_table1(const McConfig& cfg) {
    if (cfg.reps < 1) throw std::invalid_argument("run_table1: reps must be positive");
    McReport report;
    report.config = cfg;
    for (SeriesMethod method : cfg.methods)
        for (BasisFamily basis : cfg.bases)
            for (int n : cfg.sample_sizes)
                for (TestFunction f : cfg.functions) {
                    McCell cell;
                    cell.method = method;
                    cell.basis = basis;
                    cell.n = n;
                    cell.f = f;
                    report.cells.push_back(cell);
                }

    const GridCache cache = build_grid_cache(cfg);
    const std::size_t num_cells = report.cells.size();
    const auto reps = static_cast<std::size_t>(cfg.reps);
    std::vector<RepOutcome> outcomes(num_cells * reps);
    parallel_for(num_cells * reps, cfg.jobs, [&](std::size_t t) {
        const std::size_t c = t / reps;
        const std::size_t r = t % reps;
        const std::uint64_t seed = derive_seed(cfg.master_seed, c, r);
        try {
            outcomes[t] = run_replication(cfg, report.cells[c], cache, seed);
        } catch (const std::exception&) {
            outcomes[t].ok = false; // recorded below, never silently dropped
        }
    });

    for (std::size_t c = 0; c < num_cells; ++c) {
        McCell& cell = report.cells[c];
        std::array<double, 4> sum{};
        std::array<double, 4> sumsq{};
        int used = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            const RepOutcome& out = outcomes[c * reps + r];
            if (!out.ok) {
                ++cell.failures;
                continue;
            }
            ++used;
            for (int m = 0; m < 4; ++m) {
                sum[static_cast<std::size_t>(m)] += out.errors[static_cast<std::size_t>(m)];
                sumsq[static_cast<std::size_t>(m)] +=
                    out.errors[static_cast<std::size_t>(m)] * out.errors[static_cast<std::size_t>(m)];
            }
        }
        cell.reps_used = used;
        cell.valid = used > 0 &&
                     cell.failures <= cfg.max_failure_frac * static_cast<double>(cfg.reps);
        for (int m = 0; m < 4; ++m) {
            const auto mi = static_cast<std::size_t>(m);
            cell.mean_error[mi] = used > 0 ? sum[mi] / used : 0.0;
            if (used > 1) {
                const double var =
                    (sumsq[mi] - used * cell.mean_error[mi] * cell.mean_error[mi]) /
                    (used - 1);
                cell.mc_se[mi] = std::sqrt(std::max(var, 0.0) / used);
            }
        }
    }
    return report;
}

void write_report_csv(const McReport& report, std::ostream& out, bool full_precision) {
    out << "method,basis,n,f,metric,mean_error,mc_se,reps_used,failures,valid\n";
    const char* metric_names[4] = {"l2", "prediction", "uniform", "pointwise"};
    for (const auto& cell : report.cells) {
        for (int m = 0; m < 4; ++m) {
            const auto mi = static_cast<std::size_t>(m);
            out << to_string(cell.method) << ',' << to_string(cell.basis) << ','
                << cell.n << ',' << to_string(cell.f) << ',' << metric_names[m] << ','
                << format_number(cell.mean_error[mi], full_precision) << ','
                << format_number(cell.mc_se[mi], full_precision) << ','
                << cell.reps_used << ',' << cell.failures << ','
                << (cell.valid ? 1 : 0) << '\n';
        }
    }
}

void write_report_table(const McReport& report, std::ostream& out) {
    const auto& cfg = report.config;
    const char* metric_names[4] = {"l2", "pred", "sup", "pw"};
    for (int n : cfg.sample_sizes) {
        for (TestFunction f : cfg.functions) {
            out << "n=" << n << "; f=" << to_string(f) << "\n";
            out << std::left << std::setw(14) << "method";
            for (BasisFamily basis : cfg.bases) {
                const std::string tag = basis == BasisFamily::Monomial ? "(M)" : "(S)";
                for (const char* metric : metric_names)
                    out << std::right << std::setw(10) << (std::string(metric) + tag);
            }
            out << "\n";
            for (SeriesMethod method : cfg.methods) {
                out << std::left << std::setw(14) << to_string(method);
                for (BasisFamily basis : cfg.bases) {
                    const McCell& cell = report.cell(method, basis, n, f);
                    for (int m = 0; m < 4; ++m) {
                        std::ostringstream val;
                        val << std::fixed << std::setprecision(3)
                            << cell.mean_error[static_cast<std::size_t>(m)];
                        out << std::right << std::setw(10)
                            << (cell.valid ? val.str() : "invalid");
                    }
                }
                out << "\n";
            }
            out << "\n";
        }
    }
}

} // namespace tunesel
