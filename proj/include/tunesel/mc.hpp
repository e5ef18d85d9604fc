#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tunesel/select_series.hpp"

namespace tunesel {

enum class TestFunction { ExpExp, Sin2Pi };

std::string to_string(TestFunction f);
double eval_truth(TestFunction f, double x);

// x ~ U[0,1], e = eps/sqrt(1+x^2) with eps ~ N(0,1), y = f(x) + e.
struct DgpSpec {
    TestFunction f = TestFunction::ExpExp;
    int n = 500;
};

Dataset simulate_dataset(const DgpSpec& spec, std::uint64_t seed);

enum class SeriesMethod { Mallows, Lepski, Cv5, Aggregation };

std::string to_string(SeriesMethod method);

struct McConfig {
    std::vector<int> sample_sizes{500, 1000};
    std::vector<TestFunction> functions{TestFunction::ExpExp, TestFunction::Sin2Pi};
    std::vector<SeriesMethod> methods{SeriesMethod::Mallows, SeriesMethod::Lepski,
                                      SeriesMethod::Cv5, SeriesMethod::Aggregation};
    std::vector<BasisFamily> bases{BasisFamily::Monomial, BasisFamily::QuadraticSpline};
    int reps = 1000;
    std::uint64_t master_seed = 1;
    double x0 = 0.5;
    int folds = 5;
    double lepski_alpha = 0.05;
    double lepski_beta = 1.0;
    int bootstrap_draws = 1000;
    int jobs = 0;                    // 0 = hardware concurrency
    double max_failure_frac = 0.01;  // beyond this the cell is marked invalid
};

// Mean error per (method, basis, n, f) cell in the four metrics
// (l2, prediction, uniform, pointwise), with Monte Carlo standard errors.
struct McCell {
    SeriesMethod method;
    BasisFamily basis;
    int n = 0;
    TestFunction f = TestFunction::ExpExp;
    std::array<double, 4> mean_error{};
    std::array<double, 4> mc_se{};
    int reps_used = 0;
    int failures = 0;
    bool valid = true;
};

struct McReport {
    McConfig config;
    std::vector<McCell> cells;

    const McCell& cell(SeriesMethod method, BasisFamily basis, int n,
                       TestFunction f) const;
};

// Runs every configured cell; replication r of cell c uses the seed derived
// from (master_seed, c, r), so the report does not depend on the worker
// count. A replication whose selector throws is excluded and counted.
McReport run_table1(const McConfig& cfg);

void write_report_csv(const McReport& report, std::ostream& out, bool full_precision);
// Aligned text table: one block per (n, f), methods as rows and
// metric x basis as columns.
void write_report_table(const McReport& report, std::ostream& out);

} // namespace tunesel
