#pragma once

#include <Eigen/Dense>
#include <vector>

namespace nowcast {

// Clamped cubic B-spline basis on [a, b] with n_interior equally spaced
// interior knots; basis dimension n_interior + 4. Each row of the result is
// the basis evaluated at one abscissa (rows sum to 1).
Eigen::MatrixXd cubic_bspline_basis(const std::vector<double>& x, double a, double b,
                                    int n_interior);

// Unpenalized least-squares fit of the 21-point rolling-average series on a
// cubic basis with 4 interior knots (dimension 8); returns fitted values.
std::vector<double> fit_cubic_spline(const std::vector<double>& y, int n_interior = 4);

}  // namespace nowcast
