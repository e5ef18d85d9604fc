#include "tunesel/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace tunesel {

namespace {

int count_codes(const std::vector<int>& codes) {
    int m = 0;
    for (int c : codes) m = std::max(m, c + 1);
    return m;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string()
                                               : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

// Encodes raw labels as dense codes in first appearance order.
void encode_labels(const std::vector<std::string>& raw, std::vector<int>& codes) {
    std::unordered_map<std::string, int> index;
    codes.clear();
    codes.reserve(raw.size());
    for (const auto& s : raw) {
        auto [it, inserted] = index.emplace(s, static_cast<int>(index.size()));
        codes.push_back(it->second);
    }
}

} // namespace

int Dataset::num_clusters() const { return count_codes(cluster); }
int Dataset::num_units() const { return count_codes(unit); }
int Dataset::num_periods() const { return count_codes(time); }

std::vector<std::vector<int>> Dataset::cluster_groups() const {
    std::vector<std::vector<int>> groups(num_clusters());
    for (int i = 0; i < n(); ++i) groups[static_cast<std::size_t>(cluster[i])].push_back(i);
    return groups;
}

void Dataset::validate() const {
    const auto rows = static_cast<std::size_t>(n());
    if (rows == 0) throw std::invalid_argument("dataset: empty");
    if (x.rows() != y.size()) throw std::invalid_argument("dataset: x/y row mismatch");
    if (static_cast<std::size_t>(x.cols()) != col_names.size())
        throw std::invalid_argument("dataset: column name count mismatch");
    for (const auto* labels : {&cluster, &unit, &time}) {
        if (!labels->empty() && labels->size() != rows)
            throw std::invalid_argument("dataset: label length mismatch");
    }
    if (!x.allFinite() || !y.allFinite())
        throw std::invalid_argument("dataset: non-finite value in x or y");
    if (unit.empty() != time.empty())
        throw std::invalid_argument("dataset: panel needs both unit and time labels");
    if (has_panel()) {
        // complete grid: every (unit, time) pair exactly once
        std::set<std::pair<int, int>> seen;
        for (std::size_t i = 0; i < rows; ++i) {
            if (!seen.emplace(unit[i], time[i]).second)
                throw std::invalid_argument("dataset: duplicate (unit,time) cell");
        }
        const std::size_t expect =
            static_cast<std::size_t>(num_units()) * static_cast<std::size_t>(num_periods());
        if (seen.size() != expect || rows != expect)
            throw std::invalid_argument("dataset: incomplete unit x time grid");
    }
}

Dataset load_table(const std::string& path, const TableSchema& schema) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_table: cannot open file '" + path + "'");
    if (schema.y.empty()) throw std::invalid_argument("load_table: schema needs a response column");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_table: empty table in '" + path + "'");
    const std::vector<std::string> header = split_csv_line(line);
    std::unordered_map<std::string, int> col_of;
    for (std::size_t j = 0; j < header.size(); ++j) col_of[header[j]] = static_cast<int>(j);

    auto require = [&](const std::string& name) {
        auto it = col_of.find(name);
        if (it == col_of.end())
            throw std::invalid_argument("load_table: unknown column '" + name + "'");
        return it->second;
    };

    const int y_col = require(schema.y);
    int cluster_col = -1, unit_col = -1, time_col = -1;
    if (!schema.cluster.empty()) cluster_col = require(schema.cluster);
    if (!schema.unit.empty()) unit_col = require(schema.unit);
    if (!schema.time.empty()) time_col = require(schema.time);

    std::vector<int> x_cols;
    std::vector<std::string> x_names;
    if (!schema.x.empty()) {
        for (const auto& name : schema.x) {
            x_cols.push_back(require(name));
            x_names.push_back(name);
        }
    } else {
        for (std::size_t j = 0; j < header.size(); ++j) {
            const int jj = static_cast<int>(j);
            if (jj == y_col || jj == cluster_col || jj == unit_col || jj == time_col) continue;
            x_cols.push_back(jj);
            x_names.push_back(header[j]);
        }
    }
    if (x_cols.empty()) throw std::invalid_argument("load_table: no covariate columns");

    std::vector<std::vector<double>> x_rows;
    std::vector<double> y_vals;
    std::vector<std::string> cluster_raw, unit_raw, time_raw;
    int row_index = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++row_index;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error("load_table: row " + std::to_string(row_index) +
                                     " has " + std::to_string(cells.size()) +
                                     " cells, expected " + std::to_string(header.size()));
        }
        auto numeric = [&](int col) {
            double v;
            if (!parse_double(cells[static_cast<std::size_t>(col)], v)) {
                throw std::runtime_error("load_table: non-numeric cell at (" +
                                         std::to_string(row_index) + "," +
                                         header[static_cast<std::size_t>(col)] + ")");
            }
            return v;
        };
        y_vals.push_back(numeric(y_col));
        std::vector<double> xr;
        xr.reserve(x_cols.size());
        for (int col : x_cols) xr.push_back(numeric(col));
        x_rows.push_back(std::move(xr));
        if (cluster_col >= 0) cluster_raw.push_back(cells[static_cast<std::size_t>(cluster_col)]);
        if (unit_col >= 0) unit_raw.push_back(cells[static_cast<std::size_t>(unit_col)]);
        if (time_col >= 0) time_raw.push_back(cells[static_cast<std::size_t>(time_col)]);
    }
    if (y_vals.empty()) throw std::runtime_error("load_table: empty table in '" + path + "'");

    Dataset d;
    const int n = static_cast<int>(y_vals.size());
    const int p = static_cast<int>(x_cols.size());
    d.x.resize(n, p);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        d.y(i) = y_vals[static_cast<std::size_t>(i)];
        for (int j = 0; j < p; ++j)
            d.x(i, j) = x_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    d.col_names = std::move(x_names);
    if (cluster_col >= 0) {
        d.cluster_labels = std::move(cluster_raw);
        encode_labels(d.cluster_labels, d.cluster);
    }
    if (unit_col >= 0) {
        d.unit_labels = std::move(unit_raw);
        encode_labels(d.unit_labels, d.unit);
    }
    if (time_col >= 0) {
        d.time_labels = std::move(time_raw);
        encode_labels(d.time_labels, d.time);
    }
    d.validate();
    return schema.normalize_columns ? normalize_columns(d) : d;
}

void save_table(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_table: cannot open file '" + path + "'");
    out << "y";
    for (const auto& name : d.col_names) out << ',' << name;
    if (d.has_cluster()) out << ",cluster";
    if (d.has_panel()) out << ",unit,time";
    out << '\n';
    for (int i = 0; i < d.n(); ++i) {
        out << format_double(d.y(i));
        for (int j = 0; j < d.p(); ++j) out << ',' << format_double(d.x(i, j));
        if (d.has_cluster()) out << ',' << d.cluster_labels[static_cast<std::size_t>(i)];
        if (d.has_panel())
            out << ',' << d.unit_labels[static_cast<std::size_t>(i)] << ','
                << d.time_labels[static_cast<std::size_t>(i)];
        out << '\n';
    }
}

Dataset within_transform(const Dataset& d) {
    d.validate();
    if (!d.has_panel()) throw std::invalid_argument("within_transform: panel labels required");
    const int periods = d.num_periods();
    if (periods < 2)
        throw std::invalid_argument(
            "within_transform: a single time period leaves no within-unit variation");
    const int units = d.num_units();
    const int n = d.n();
    const int p = d.p();

    Eigen::VectorXd y_mean = Eigen::VectorXd::Zero(units);
    Eigen::MatrixXd x_mean = Eigen::MatrixXd::Zero(units, p);
    Eigen::VectorXi count = Eigen::VectorXi::Zero(units);
    for (int i = 0; i < n; ++i) {
        const int u = d.unit[static_cast<std::size_t>(i)];
        y_mean(u) += d.y(i);
        x_mean.row(u) += d.x.row(i);
        count(u) += 1;
    }
    for (int u = 0; u < units; ++u) {
        if (count(u) != periods)
            throw std::invalid_argument("within_transform: incomplete unit x time grid");
        y_mean(u) /= periods;
        x_mean.row(u) /= periods;
    }

    Dataset out = d;
    for (int i = 0; i < n; ++i) {
        const int u = d.unit[static_cast<std::size_t>(i)];
        out.y(i) -= y_mean(u);
        out.x.row(i) -= x_mean.row(u);
    }
    out.cluster = d.unit;
    out.cluster_labels = d.unit_labels;
    return out;
}

Dataset normalize_columns(const Dataset& d) {
    Dataset out = d;
    for (int j = 0; j < d.p(); ++j) {
        const double rms = std::sqrt(d.x.col(j).squaredNorm() / d.n());
        if (rms <= 0.0)
            throw std::invalid_argument("normalize_columns: column '" +
                                        d.col_names[static_cast<std::size_t>(j)] +
                                        "' is identically zero");
        out.x.col(j) /= rms;
    }
    return out;
}

} // namespace tunesel
