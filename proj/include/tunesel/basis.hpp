#pragma once

#include <Eigen/Dense>
#include <string>

namespace tunesel {

enum class BasisFamily { Monomial, QuadraticSpline };

std::string to_string(BasisFamily family);
BasisFamily basis_family_from_string(const std::string& name);

// Basis on the [0,1] interval.
//   Monomial:        p_j(x) = x^(j-1), j = 1..k
//   QuadraticSpline: p_1 = 1, p_2 = x, p_3 = x^2,
//                    p_j(x) = ((x - (j-3)/(k-2)) v 0)^2, j = 4..k;
//                    k <= 3 reduces to the polynomial part.
struct BasisSpec {
    BasisFamily family = BasisFamily::Monomial;
    int k = 1;
};

// Evaluates all k basis functions at x. x must lie in [0,1] up to a 1e-12
// endpoint tolerance.
Eigen::VectorXd eval_basis(const BasisSpec& spec, double x);

// n x k matrix with row i = eval_basis(spec, xs[i]).
Eigen::MatrixXd design_matrix(const BasisSpec& spec, const Eigen::VectorXd& xs);

} // namespace tunesel
