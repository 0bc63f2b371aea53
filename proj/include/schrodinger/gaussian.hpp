#pragma once

// Closed-form Gaussian calculus for p(x, y) = n_c(y - x), mu = n_a, nu = n_b,
// where n_k is the centered normal density with precision matrix k.

#include <Eigen/Dense>
#include <cstddef>

#include "schrodinger/problem.hpp"

namespace schrodinger::gaussian {

struct GaussianProblem {
  Eigen::MatrixXd a;  // precision of mu
  Eigen::MatrixXd b;  // precision of nu
  Eigen::MatrixXd c;  // kernel precision

  std::size_t dim() const noexcept { return static_cast<std::size_t>(a.rows()); }

  /// Throws NotSPD or DimensionMismatch.
  void validate() const;

  static GaussianProblem scalar(double a, double b, double c);
  static GaussianProblem diagonal(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                  const Eigen::VectorXd& c);
};

/// Throws NotSPD unless m is symmetric to 1e-12 with a positive spectrum.
void require_spd(const Eigen::MatrixXd& m, const char* what);

/// sqrt(det kappa / (2 pi)^n) exp(-z . kappa z / 2)
double density(const Eigen::MatrixXd& kappa, const Eigen::VectorXd& z);
double log_density(const Eigen::MatrixXd& kappa, const Eigen::VectorXd& z);

/// Precision of the convolution n_c * n_alpha: (alpha^-1 + c^-1)^-1, which
/// is alpha c (alpha + c)^-1 when the two commute.
Eigen::MatrixXd convolve_precision(const Eigen::MatrixXd& c, const Eigen::MatrixXd& alpha);

struct MatrixCriterion {
  bool xy_holds = false;     // b - (a^-1 + c^-1)^-1 > 0
  bool yx_holds = false;     // a - (b^-1 + c^-1)^-1 > 0
  double xy_min_eig = 0.0;
  double yx_min_eig = 0.0;
};

MatrixCriterion matrix_criterion(const GaussianProblem& gp);

/// d^2 + [a + 2c - (r-1) c^2/b] d + c [a + c - r a c/b - (r-1) c^2/b]
double pr_polynomial(double a, double b, double c, double d, double r);
double pr_polynomial(const GaussianProblem& gp, double d, double r);

struct BoundaryIdentity {
  double d_bar = 0.0;  // -a + bc/(c-b)
  double lhs = 0.0;    // pr_polynomial at d_bar with r = 1
  double rhs = 0.0;    // c^3 (ab - ac + bc) / (b (c-b)^2)
};

/// Throws DegenerateBC when |b - c| < 1e-12.
BoundaryIdentity pr_boundary_identity(double a, double b, double c);
BoundaryIdentity pr_boundary_identity(const GaussianProblem& gp);

struct GridOptions {
  double half_width_sigmas = 6.0;
  std::size_t points_per_dim = 201;
  std::size_t max_points = 1000000;
};

/// Uniform tensor grids over +-half_width_sigmas marginal standard
/// deviations of mu and nu; marginal weights are density times cell volume,
/// renormalized; reference weights are the cell volumes; gaussian kernel c.
DiscreteProblem discretize(const GaussianProblem& gp, const GridOptions& options = {});

}  // namespace schrodinger::gaussian
