#include "tunesel/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace tunesel {

std::string to_string(BasisFamily family) {
    return family == BasisFamily::Monomial ? "monomial" : "spline";
}

BasisFamily basis_family_from_string(const std::string& name) {
    if (name == "monomial") return BasisFamily::Monomial;
    if (name == "spline" || name == "quadratic-spline") return BasisFamily::QuadraticSpline;
    throw std::invalid_argument("unknown basis family '" + name + "'");
}

namespace {

void check_spec(const BasisSpec& spec) {
    if (spec.k < 1) throw std::invalid_argument("basis: k must be positive");
}

void check_domain(double x) {
    if (x < -1e-12 || x > 1.0 + 1e-12)
        throw std::domain_error("basis: x outside [0,1]");
}

} // namespace

Eigen::VectorXd eval_basis(const BasisSpec& spec, double x) {
    check_spec(spec);
    check_domain(x);
    Eigen::VectorXd v(spec.k);
    if (spec.family == BasisFamily::Monomial) {
        double pw = 1.0;
        for (int j = 0; j < spec.k; ++j) {
            v(j) = pw;
            pw *= x;
        }
        return v;
    }
    // quadratic regression spline
    v(0) = 1.0;
    if (spec.k >= 2) v(1) = x;
    if (spec.k >= 3) v(2) = x * x;
    for (int j = 4; j <= spec.k; ++j) {
        const double knot = static_cast<double>(j - 3) / static_cast<double>(spec.k - 2);
        const double t = std::max(x - knot, 0.0);
        v(j - 1) = t * t;
    }
    return v;
}

Eigen::MatrixXd design_matrix(const BasisSpec& spec, const Eigen::VectorXd& xs) {
    check_spec(spec);
    Eigen::MatrixXd design(xs.size(), spec.k);
    for (Eigen::Index i = 0; i < xs.size(); ++i)
        design.row(i) = eval_basis(spec, xs(i)).transpose();
    return design;
}

} // namespace tunesel
