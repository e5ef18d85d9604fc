#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace tunesel {

// Regression sample with optional group structure. Immutable by convention
// once built: every transform returns a new Dataset, so instances can be
// shared freely across parallel workers.
struct Dataset {
    Eigen::MatrixXd x;                  // n x p covariates
    Eigen::VectorXd y;                  // n responses
    std::vector<std::string> col_names; // p covariate names

    // Optional per-row labels. Codes are dense 0-based indices in first
    // appearance order; the raw strings survive for serialization.
    std::vector<int> cluster;
    std::vector<std::string> cluster_labels;
    std::vector<int> unit;
    std::vector<std::string> unit_labels;
    std::vector<int> time;
    std::vector<std::string> time_labels;

    int n() const { return static_cast<int>(y.size()); }
    int p() const { return static_cast<int>(x.cols()); }
    bool has_cluster() const { return !cluster.empty(); }
    bool has_panel() const { return !unit.empty() && !time.empty(); }
    int num_clusters() const;
    int num_units() const;
    int num_periods() const;

    // Row indices per cluster group, ordered by cluster code.
    std::vector<std::vector<int>> cluster_groups() const;

    // Checks the structural invariants (matching sizes, finite values,
    // complete unit x time grid when panel labels are present). Throws
    // std::invalid_argument on violation.
    void validate() const;
};

struct TableSchema {
    std::string y;                      // response column (required)
    std::vector<std::string> x;         // covariates; empty = all remaining numeric columns
    std::string cluster;                // optional label columns
    std::string unit;
    std::string time;
    bool normalize_columns = false;     // divide each covariate by its root mean square
};

// Reads a CSV file with a header row. Rejects missing files, unknown
// schema columns, empty tables, and non-numeric cells (reported by row and
// column).
Dataset load_table(const std::string& path, const TableSchema& schema);

// Writes the dataset back to CSV. Numeric cells use shortest round-trip
// formatting, so load_table(save_table(d)) reproduces d bit-exactly.
void save_table(const Dataset& d, const std::string& path);

// Removes per-unit time means from y and every covariate column; cluster
// labels are replaced by the unit labels. Requires a complete unit x time
// grid with at least two periods.
Dataset within_transform(const Dataset& d);

// Divides each covariate column by its root mean square. Errors on
// zero-variance (all-zero) columns.
Dataset normalize_columns(const Dataset& d);

} // namespace tunesel
