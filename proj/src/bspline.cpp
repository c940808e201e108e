#include "bspline.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace nowcast {

namespace {

// Nonzero basis values N_{span-3..span} at u (The NURBS Book, A2.2).
void cubic_basis_at(double u, int span, const std::vector<double>& knots, double* n_out) {
  constexpr int p = 3;
  double left[p + 1], right[p + 1];
  n_out[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - knots[span + 1 - j];
    right[j] = knots[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      double temp = n_out[r] / (right[r + 1] + left[j - r]);
      n_out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n_out[j] = saved;
  }
}

}  // namespace

Eigen::MatrixXd cubic_bspline_basis(const std::vector<double>& x, double a, double b,
                                    int n_interior) {
  if (!(b > a)) throw InputError("spline interval must have positive length");
  if (n_interior < 0) throw InputError("negative interior knot count");
  constexpr int p = 3;
  const int dim = n_interior + p + 1;
  std::vector<double> knots;
  for (int j = 0; j <= p; ++j) knots.push_back(a);
  for (int k = 1; k <= n_interior; ++k)
    knots.push_back(a + (b - a) * k / (n_interior + 1));
  for (int j = 0; j <= p; ++j) knots.push_back(b);

  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.size()), dim);
  for (std::size_t row = 0; row < x.size(); ++row) {
    double u = std::clamp(x[row], a, b);
    // Knot span with t[span] <= u < t[span+1], clamped to the last interval
    // so the right endpoint evaluates to the final basis function.
    int span = static_cast<int>(std::upper_bound(knots.begin() + p, knots.end() - p - 1, u) -
                                knots.begin()) - 1;
    span = std::clamp(span, p, dim - 1);
    double vals[p + 1];
    cubic_basis_at(u, span, knots, vals);
    for (int j = 0; j <= p; ++j) basis(row, span - p + j) = vals[j];
  }
  return basis;
}

std::vector<double> fit_cubic_spline(const std::vector<double>& y, int n_interior) {
  const int n = static_cast<int>(y.size());
  if (n < n_interior + 4) throw InputError("too few points for the spline basis");
  std::vector<double> x(n);
  for (int j = 0; j < n; ++j) x[j] = j + 1;
  Eigen::MatrixXd basis = cubic_bspline_basis(x, 1.0, static_cast<double>(n), n_interior);
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(yv);
  Eigen::VectorXd fit = basis * coef;
  if (!fit.allFinite()) throw NumericError("spline fit produced non-finite values");
  return std::vector<double>(fit.data(), fit.data() + n);
}

}  // namespace nowcast
