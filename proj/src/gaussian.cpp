#include "schrodinger/gaussian.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "schrodinger/error.hpp"

namespace schrodinger::gaussian {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m, const char* what) {
  const Eigen::MatrixXd s = 0.5 * (m + m.transpose());
  const double asym = (m - m.transpose()).norm();
  if (asym > 1e-10 * std::max(1.0, m.norm()))
    throw NotSPD(std::string(what) + ": product is not symmetric (asymmetry " +
                 std::to_string(asym) + ")");
  return s;
}

// x (x + y)^-1 y = (x^-1 + y^-1)^-1. For commuting x, y this is the
// product x y (x + y)^-1; unlike that product it is symmetric for every
// SPD pair, and it is the precision of n_x * n_y.
Eigen::MatrixXd parallel_sum(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  return x * (x + y).ldlt().solve(y);
}

double min_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void require_same_dim(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const char* what) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw DimensionMismatch(std::string(what) + ": matrices have different dimensions");
}

}  // namespace

void require_spd(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw NotSPD(std::string(what) + ": not a nonempty square matrix");
  if (!m.allFinite()) throw NotSPD(std::string(what) + ": non-finite entry");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw NotSPD(std::string(what) + ": not symmetric");
  if (!(min_eigenvalue(0.5 * (m + m.transpose())) > 0.0))
    throw NotSPD(std::string(what) + ": not positive definite");
}

void GaussianProblem::validate() const {
  require_spd(a, "a");
  require_spd(b, "b");
  require_spd(c, "c");
  require_same_dim(a, b, "GaussianProblem");
  require_same_dim(a, c, "GaussianProblem");
}

GaussianProblem GaussianProblem::scalar(double a, double b, double c) {
  GaussianProblem gp;
  gp.a = Eigen::MatrixXd::Constant(1, 1, a);
  gp.b = Eigen::MatrixXd::Constant(1, 1, b);
  gp.c = Eigen::MatrixXd::Constant(1, 1, c);
  return gp;
}

GaussianProblem GaussianProblem::diagonal(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                          const Eigen::VectorXd& c) {
  GaussianProblem gp;
  gp.a = a.asDiagonal();
  gp.b = b.asDiagonal();
  gp.c = c.asDiagonal();
  return gp;
}

double log_density(const Eigen::MatrixXd& kappa, const Eigen::VectorXd& z) {
  require_spd(kappa, "kappa");
  if (z.size() != kappa.rows()) throw DimensionMismatch("density: z has the wrong dimension");
  Eigen::LLT<Eigen::MatrixXd> llt(kappa);
  const Eigen::MatrixXd l = llt.matrixL();
  double logdet = 0.0;
  for (Eigen::Index k = 0; k < l.rows(); ++k) logdet += 2.0 * std::log(l(k, k));
  const double n = static_cast<double>(kappa.rows());
  return 0.5 * (logdet - n * std::log(2.0 * std::numbers::pi)) - 0.5 * z.dot(kappa * z);
}

double density(const Eigen::MatrixXd& kappa, const Eigen::VectorXd& z) {
  return std::exp(log_density(kappa, z));
}

Eigen::MatrixXd convolve_precision(const Eigen::MatrixXd& c, const Eigen::MatrixXd& alpha) {
  require_spd(c, "c");
  require_spd(alpha, "alpha");
  require_same_dim(c, alpha, "convolve_precision");
  Eigen::MatrixXd out = symmetrized(parallel_sum(alpha, c), "convolve_precision");
  require_spd(out, "convolve_precision result");
  return out;
}

MatrixCriterion matrix_criterion(const GaussianProblem& gp) {
  gp.validate();
  MatrixCriterion mc;
  const Eigen::MatrixXd beta = symmetrized(parallel_sum(gp.a, gp.c), "ac(a+c)^-1");
  const Eigen::MatrixXd alpha = symmetrized(parallel_sum(gp.b, gp.c), "bc(b+c)^-1");
  mc.xy_min_eig = min_eigenvalue(gp.b - beta);
  mc.yx_min_eig = min_eigenvalue(gp.a - alpha);
  mc.xy_holds = mc.xy_min_eig > 0.0;
  mc.yx_holds = mc.yx_min_eig > 0.0;
  return mc;
}

double pr_polynomial(double a, double b, double c, double d, double r) {
  const double lin = a + 2.0 * c - (r - 1.0) * c * c / b;
  const double cst = c * (a + c - r * a * c / b - (r - 1.0) * c * c / b);
  return d * d + lin * d + cst;
}

double pr_polynomial(const GaussianProblem& gp, double d, double r) {
  if (gp.dim() != 1) throw DimensionMismatch("pr_polynomial: scalar problem required");
  return pr_polynomial(gp.a(0, 0), gp.b(0, 0), gp.c(0, 0), d, r);
}

BoundaryIdentity pr_boundary_identity(double a, double b, double c) {
  if (std::abs(b - c) < 1e-12) throw DegenerateBC("pr_boundary_identity: b and c coincide");
  BoundaryIdentity bi;
  bi.d_bar = -a + b * c / (c - b);
  bi.lhs = pr_polynomial(a, b, c, bi.d_bar, 1.0);
  bi.rhs = c * c * c * (a * b - a * c + b * c) / (b * (c - b) * (c - b));
  return bi;
}

BoundaryIdentity pr_boundary_identity(const GaussianProblem& gp) {
  if (gp.dim() != 1) throw DimensionMismatch("pr_boundary_identity: scalar problem required");
  return pr_boundary_identity(gp.a(0, 0), gp.b(0, 0), gp.c(0, 0));
}

namespace {

DiscreteSpace tensor_grid(const Eigen::MatrixXd& precision, const GridOptions& opt,
                          std::vector<double>& marginal) {
  const std::size_t d = static_cast<std::size_t>(precision.rows());
  const std::size_t n = opt.points_per_dim;
  const Eigen::MatrixXd cov = precision.inverse();

  std::vector<std::vector<double>> axes(d);
  double volume = 1.0;
  for (std::size_t q = 0; q < d; ++q) {
    const double half = opt.half_width_sigmas * std::sqrt(cov(q, q));
    const double denom = static_cast<double>(n - 1);
    axes[q].resize(n);
    // Integer numerators keep the grid exactly symmetric about 0.
    for (std::size_t k = 0; k < n; ++k)
      axes[q][k] = half * (2.0 * static_cast<double>(k) - denom) / denom;
    volume *= 2.0 * half / denom;
  }

  std::size_t total = 1;
  for (std::size_t q = 0; q < d; ++q) total *= n;

  DiscreteSpace s;
  s.dim = d;
  s.coords.resize(total * d);
  s.weights.assign(total, volume);
  std::vector<double> logw(total);
  std::vector<std::size_t> idx(d, 0);
  Eigen::VectorXd x(d);
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < total; ++p) {
    for (std::size_t q = 0; q < d; ++q) {
      x(q) = axes[q][idx[q]];
      s.coords[p * d + q] = x(q);
    }
    logw[p] = log_density(precision, x);
    hi = std::max(hi, logw[p]);
    for (std::size_t q = d; q-- > 0;) {
      if (++idx[q] < n) break;
      idx[q] = 0;
    }
  }
  marginal.resize(total);
  double sum = 0.0;
  for (std::size_t p = 0; p < total; ++p) {
    marginal[p] = std::exp(logw[p] - hi);
    sum += marginal[p];
  }
  for (double& w : marginal) w /= sum;
  return s;
}

}  // namespace

DiscreteProblem discretize(const GaussianProblem& gp, const GridOptions& opt) {
  gp.validate();
  if (opt.points_per_dim < 3 || opt.points_per_dim % 2 == 0)
    throw DomainError("discretize: points_per_dim must be odd and >= 3");
  if (!(opt.half_width_sigmas > 0.0)) throw DomainError("discretize: half width must be positive");
  double total = 1.0;
  for (std::size_t q = 0; q < gp.dim(); ++q) total *= static_cast<double>(opt.points_per_dim);
  if (total > static_cast<double>(opt.max_points))
    throw GridTooLarge("discretize: " + std::to_string(static_cast<long long>(total)) +
                       " points exceed the cap of " + std::to_string(opt.max_points));

  DiscreteProblem p;
  p.x_space = tensor_grid(gp.a, opt, p.mu);
  p.y_space = tensor_grid(gp.b, opt, p.nu);
  DenseMatrix c(gp.dim(), gp.dim());
  for (std::size_t i = 0; i < gp.dim(); ++i)
    for (std::size_t j = 0; j < gp.dim(); ++j) c(i, j) = gp.c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  p.kernel = Kernel::gaussian(std::move(c));
  return p;
}

}  // namespace schrodinger::gaussian
