#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tunesel/series.hpp"

namespace tunesel {

// Outcome of a term-count selector: a criterion value for every candidate,
// the chosen candidate (or aggregation weights), and selector-specific
// diagnostics in `meta`.
struct SelectorResult {
    std::string method;
    std::vector<int> candidates;
    std::vector<double> criterion;
    std::optional<int> chosen_k;
    std::optional<std::vector<double>> weights;
    std::vector<std::pair<std::string, double>> meta;

    int chosen_index() const; // position of chosen_k within candidates
};

// Smallest m with m^3 >= n, i.e. ceil(n^(1/3)). Default pilot term count
// and default upper end of the candidate set.
int default_pilot_k(int n);
std::vector<int> default_candidate_set(int n); // {1, ..., default_pilot_k(n)}

// Selector result plus the full-sample fit per candidate; chosen_fit() is
// the selected predictor.
struct KSelection {
    SelectorResult result;
    std::vector<SeriesFit> fits; // aligned with result.candidates
    const SeriesFit& chosen_fit() const;
};

// Minimizes in-sample MSE + 2*Ahat_k/n where Ahat_k is the
// heteroskedasticity trace built from pilot residuals at kbar. Ties go to
// the smallest candidate.
KSelection mallows_select(const Dataset& d, BasisFamily family,
                          const std::vector<int>& kn, int kbar);

// For series fits the unbiased-risk criterion coincides with the Mallows
// one, so this delegates and retags.
KSelection stein_select(const Dataset& d, BasisFamily family,
                        const std::vector<int>& kn, int kbar);

// Closed-form leave-one-out criterion n^{-1} sum_i (resid_i/(1-h_i))^2
// using per-observation leverage. Errors when some leverage reaches 1.
KSelection loo_select(const Dataset& d, BasisFamily family,
                      const std::vector<int>& kn);

// The (train, validation) index split used by validation_select for a
// given seed; both halves come back sorted.
std::pair<std::vector<int>, std::vector<int>> validation_split(int n, double train_frac,
                                                               std::uint64_t seed);

// Random train/validation split; the criterion is the mean squared
// out-of-sample error and the returned fits are the training-fold fits.
KSelection validation_select(const Dataset& d, BasisFamily family,
                             const std::vector<int>& kn, std::uint64_t seed,
                             double train_frac = 2.0 / 3.0);

struct VfoldSelection {
    SelectorResult result;
    SeriesFit full_fit;               // whole-sample refit at the chosen k
    std::vector<SeriesFit> fold_fits; // chosen-k fit per fold complement
    std::vector<int> fold_of;         // fold index per observation

    double predict_average(double x) const; // mean over fold fits
    Eigen::VectorXd fitted_average(const Eigen::VectorXd& xs) const;
};

// V-fold cross-validation; fold sizes differ by at most one. The criterion
// is n^{-1} sum_v sum_{i in I_v} (y_i - fhat_{k,v}(x_i))^2, which at V = n
// coincides with the leave-one-out closed form.
VfoldSelection vfold_select(const Dataset& d, BasisFamily family,
                            const std::vector<int>& kn, int folds,
                            std::uint64_t seed);

struct LepskiConfig {
    double x0 = 0.5;
    double beta = 1.0;
    double alpha = 0.05;
    int bootstrap_draws = 1000;
    int kbar = 0; // 0 = default_pilot_k(n)
    std::uint64_t seed = 0;
};

// Smallest k whose pairwise statistics max_{k'>k} T_{k,k'}/sqrt(phat_{k,k'})
// stay below beta + chat_k(alpha), with chat_k the (1-alpha) quantile of the
// Gaussian-multiplier bootstrap of the same maximum. The largest candidate
// is accepted vacuously. criterion holds the max statistic per k; meta holds
// chat_<k> and accepted_<k>.
KSelection lepski_select(const Dataset& d, BasisFamily family,
                         const std::vector<int>& kn, const LepskiConfig& cfg);

struct AggregateSelection {
    SelectorResult result; // weights plus per-candidate risk estimates
    std::vector<SeriesFit> fits;

    double predict(double x) const;
    Eigen::VectorXd fitted() const; // weighted in-sample predictions
};

// Exponential weights w_k proportional to exp(-n*rhat_k/(4*sigma2hat)) with
// rhat_k = MSE_k + 2*Ahat_k/n - sigma2hat and sigma2hat the mean squared
// pilot residual. criterion records rhat_k.
AggregateSelection aggregate_predictor(const Dataset& d, BasisFamily family,
                                       const std::vector<int>& kn, int kbar);

// ----- penalized model selection ----------------------------------------

// A candidate model: a subset of the columns of the design generated by
// `spec`. An empty `columns` means all k columns.
struct CandidateModel {
    BasisSpec spec;
    std::vector<int> columns;
    int size() const {
        return columns.empty() ? spec.k : static_cast<int>(columns.size());
    }
};

// Nested models of increasing size, one per candidate term count.
std::vector<CandidateModel> ordered_models(BasisFamily family,
                                           const std::vector<int>& kn);

// Minimizes MSE_m + lambda_m*|m|/n with
// lambda_m = 2*sigma2*(1 + 2*sqrt(log(H_m)/|m|) + 2*log(H_m)/|m|),
// H_m the number of candidate models sharing the size |m| (taken from
// `size_counts` per model when given, else counted from the list).
// candidates/chosen_k index into `models`.
SelectorResult penalized_model_select(const Dataset& d,
                                      const std::vector<CandidateModel>& models,
                                      double sigma2,
                                      const std::vector<double>& size_counts = {});

} // namespace tunesel
