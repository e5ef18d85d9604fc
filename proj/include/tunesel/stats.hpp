#pragma once

#include <vector>

namespace tunesel {

// Standard normal cdf.
double normal_cdf(double x);

// Inverse of the standard normal cdf (Wichura's PPND16 rational
// approximation, accurate to ~1e-15 over (0,1)). Throws std::domain_error
// outside (0,1).
double normal_quantile(double p);

// Empirical quantile at `level` as the order statistic with 1-based index
// ceil(level * m) over the m draws. `draws` is sorted in place.
double empirical_quantile(std::vector<double>& draws, double level);

} // namespace tunesel
