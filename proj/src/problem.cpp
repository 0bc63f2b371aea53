#include "schrodinger/problem.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "schrodinger/error.hpp"

namespace schrodinger {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMassTolerance = 1e-12;

double distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = y[k] - x[k];
    s += d * d;
  }
  return std::sqrt(s);
}

Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

void check_space(const DiscreteSpace& s, const char* name) {
  if (s.dim < 1) throw SchemaError(std::string(name) + ": dimension must be >= 1");
  if (s.size() < 1) throw SchemaError(std::string(name) + ": no points");
  if (s.coords.size() != s.size() * s.dim)
    throw SchemaError(std::string(name) + ": points and weights have different lengths");
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double w = s.weights[i];
    if (!std::isfinite(w) || !(w > 0.0))
      throw SchemaError(std::string(name) + ": weight " + std::to_string(i) +
                        " must be positive and finite");
  }
  for (double c : s.coords)
    if (!std::isfinite(c)) throw SchemaError(std::string(name) + ": non-finite coordinate");
}

void check_marginal(const std::vector<double>& w, std::size_t n, const char* name) {
  if (w.size() != n)
    throw SchemaError(std::string(name) + ": length " + std::to_string(w.size()) +
                      " does not match the space size " + std::to_string(n));
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0)
      throw SchemaError(std::string(name) + ": weight " + std::to_string(i) +
                        " must be nonnegative and finite");
    sum += w[i];
  }
  if (std::abs(sum - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << name << ": total mass " << sum << " differs from 1";
    throw SchemaError(os.str());
  }
}

/// log of the Gaussian density normalizing constant sqrt(det c / (2 pi)^d).
double gaussian_log_norm(const Eigen::LLT<Eigen::MatrixXd>& llt, std::size_t dim) {
  double logdet = 0.0;
  const Eigen::MatrixXd l = llt.matrixL();
  for (Eigen::Index k = 0; k < l.rows(); ++k) logdet += 2.0 * std::log(l(k, k));
  return 0.5 * (logdet - static_cast<double>(dim) * std::log(2.0 * std::numbers::pi));
}

std::vector<double> subset(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

DiscreteSpace subset(const DiscreteSpace& s, const std::vector<std::size_t>& idx) {
  DiscreteSpace out;
  out.dim = s.dim;
  for (std::size_t i : idx) {
    const auto p = s.point(i);
    out.coords.insert(out.coords.end(), p.begin(), p.end());
    out.weights.push_back(s.weights[i]);
  }
  return out;
}

void renormalize(std::vector<double>& w) {
  double sum = 0.0;
  for (double v : w) sum += v;
  for (double& v : w) v /= sum;
}

}  // namespace

DiscreteSpace DiscreteSpace::from_points(const std::vector<std::vector<double>>& points,
                                         std::vector<double> weights) {
  DiscreteSpace s;
  s.dim = points.empty() ? 1 : points.front().size();
  for (const auto& p : points) {
    if (p.size() != s.dim) throw SchemaError("points have inconsistent dimensions");
    s.coords.insert(s.coords.end(), p.begin(), p.end());
  }
  s.weights = std::move(weights);
  if (s.weights.size() != points.size())
    throw SchemaError("points and weights have different lengths");
  return s;
}

double RadialProfile::operator()(double r) const {
  switch (shape) {
    case Shape::gaussian:
      return std::exp(-r * r / (2.0 * scale * scale));
    case Shape::exponential:
      return std::exp(-r / scale);
    case Shape::table: {
      if (r <= t.front()) return theta.front();
      if (r >= t.back()) return theta.back();
      const auto it = std::upper_bound(t.begin(), t.end(), r);
      const std::size_t k = static_cast<std::size_t>(it - t.begin());
      const double w = (r - t[k - 1]) / (t[k] - t[k - 1]);
      return (1.0 - w) * theta[k - 1] + w * theta[k];
    }
    case Shape::custom:
      return fn(r);
  }
  return 0.0;
}

double RadialProfile::log_value(double r) const {
  switch (shape) {
    case Shape::gaussian:
      return -r * r / (2.0 * scale * scale);
    case Shape::exponential:
      return -r / scale;
    default:
      break;
  }
  const double v = (*this)(r);
  if (!std::isfinite(v) || v < 0.0) {
    std::ostringstream os;
    os << "radial profile returned " << v << " at t = " << r;
    throw EvaluationError(os.str());
  }
  return v > 0.0 ? std::log(v) : kNegInf;
}

RadialProfile RadialProfile::gaussian(double scale) {
  RadialProfile p;
  p.shape = Shape::gaussian;
  p.scale = scale;
  return p;
}

RadialProfile RadialProfile::exponential(double scale) {
  RadialProfile p;
  p.shape = Shape::exponential;
  p.scale = scale;
  return p;
}

RadialProfile RadialProfile::table(std::vector<double> t, std::vector<double> theta) {
  RadialProfile p;
  p.shape = Shape::table;
  p.t = std::move(t);
  p.theta = std::move(theta);
  return p;
}

RadialProfile RadialProfile::custom(std::function<double(double)> fn) {
  RadialProfile p;
  p.shape = Shape::custom;
  p.fn = std::move(fn);
  return p;
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::dense: return "dense";
    case KernelKind::radial: return "radial";
    case KernelKind::gaussian: return "gaussian";
  }
  return "?";
}

Kernel Kernel::dense(DenseMatrix entries) {
  Kernel k;
  k.kind = KernelKind::dense;
  k.entries = std::move(entries);
  return k;
}

Kernel Kernel::radial(RadialProfile profile, std::optional<double> cutoff) {
  Kernel k;
  k.kind = KernelKind::radial;
  k.profile = std::move(profile);
  k.cutoff = cutoff;
  return k;
}

Kernel Kernel::gaussian(DenseMatrix precision) {
  Kernel k;
  k.kind = KernelKind::gaussian;
  k.precision = std::move(precision);
  return k;
}

void check_schema(const DiscreteProblem& p) {
  check_space(p.x_space, "x_space");
  check_space(p.y_space, "y_space");
  check_marginal(p.mu, p.x_space.size(), "mu");
  check_marginal(p.nu, p.y_space.size(), "nu");

  const Kernel& k = p.kernel;
  switch (k.kind) {
    case KernelKind::dense:
      if (k.entries.rows() != p.x_space.size() || k.entries.cols() != p.y_space.size())
        throw SchemaError("kernel: dense entries must be |X| x |Y|");
      for (double v : k.entries.data())
        if (!std::isfinite(v) || v < 0.0)
          throw SchemaError("kernel: dense entries must be finite and nonnegative");
      break;
    case KernelKind::radial:
    case KernelKind::gaussian:
      if (p.x_space.dim != p.y_space.dim)
        throw SchemaError("kernel: radial and gaussian kernels need dim X == dim Y");
      break;
  }
  if (k.kind == KernelKind::radial) {
    const RadialProfile& rp = k.profile;
    using S = RadialProfile::Shape;
    if ((rp.shape == S::gaussian || rp.shape == S::exponential) &&
        !(rp.scale > 0.0 && std::isfinite(rp.scale)))
      throw SchemaError("kernel: radial scale must be positive");
    if (rp.shape == S::table) {
      if (rp.t.empty() || rp.t.size() != rp.theta.size())
        throw SchemaError("kernel: radial table needs matching nonempty t and theta");
      if (!std::is_sorted(rp.t.begin(), rp.t.end()) ||
          std::adjacent_find(rp.t.begin(), rp.t.end()) != rp.t.end())
        throw SchemaError("kernel: radial table knots must be strictly increasing");
    }
    if (rp.shape == S::custom && !rp.fn) throw SchemaError("kernel: empty custom profile");
  }
  if (k.kind == KernelKind::gaussian) {
    const std::size_t d = p.x_space.dim;
    if (k.precision.rows() != d || k.precision.cols() != d)
      throw SchemaError("kernel: gaussian precision must be dim x dim");
    const Eigen::MatrixXd c = to_eigen(k.precision);
    if ((c - c.transpose()).norm() > 1e-12 * std::max(1.0, c.norm()))
      throw NotSPD("kernel: gaussian precision is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) throw NotSPD("kernel: gaussian precision is not positive definite");
  }
}

DenseMatrix log_kernel_matrix(const DiscreteProblem& p) {
  const std::size_t nx = p.x_space.size();
  const std::size_t ny = p.y_space.size();
  DenseMatrix out(nx, ny);
  const Kernel& k = p.kernel;
  switch (k.kind) {
    case KernelKind::dense:
      for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) {
          const double v = k.entries(i, j);
          if (!std::isfinite(v) || v < 0.0) throw EvaluationError("dense kernel entry is negative or non-finite");
          out(i, j) = v > 0.0 ? std::log(v) : kNegInf;
        }
      break;
    case KernelKind::radial:
      for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j)
          out(i, j) = k.profile.log_value(distance(p.x_space.point(i), p.y_space.point(j)));
      break;
    case KernelKind::gaussian: {
      const std::size_t d = p.x_space.dim;
      const Eigen::MatrixXd c = to_eigen(k.precision);
      Eigen::LLT<Eigen::MatrixXd> llt(c);
      if (llt.info() != Eigen::Success) throw NotSPD("gaussian kernel precision is not SPD");
      const double log_norm = gaussian_log_norm(llt, d);
      Eigen::VectorXd z(d);
      for (std::size_t i = 0; i < nx; ++i) {
        const auto x = p.x_space.point(i);
        for (std::size_t j = 0; j < ny; ++j) {
          const auto y = p.y_space.point(j);
          for (std::size_t q = 0; q < d; ++q) z(q) = y[q] - x[q];
          out(i, j) = log_norm - 0.5 * z.dot(c * z);
        }
      }
      break;
    }
  }
  return out;
}

DenseMatrix kernel_matrix(const DiscreteProblem& p) {
  if (p.kernel.kind == KernelKind::dense) return p.kernel.entries;
  DenseMatrix m = log_kernel_matrix(p);
  for (double& v : m.data()) v = std::exp(v);
  return m;
}

KernelMatrix KernelMatrix::from_log(DenseMatrix log_values) {
  KernelMatrix k;
  const std::size_t nx = log_values.rows();
  const std::size_t ny = log_values.cols();
  double hi = kNegInf;
  double lo = std::numeric_limits<double>::infinity();
  bool positive = true;
  for (double v : log_values.data()) {
    if (v == kNegInf) {
      positive = false;
      continue;
    }
    hi = std::max(hi, v);
    lo = std::min(lo, v);
  }
  k.positive = positive;
  k.bounded = hi < std::numeric_limits<double>::infinity();
  k.max_value = hi == kNegInf ? 0.0 : std::exp(hi);
  k.rescaled = hi != kNegInf && (hi - lo) > std::log(kRescaleRatio);

  k.log_scale.assign(ny, 0.0);
  if (k.rescaled) {
    for (std::size_t j = 0; j < ny; ++j) {
      double m = kNegInf;
      for (std::size_t i = 0; i < nx; ++i) m = std::max(m, log_values(i, j));
      k.log_scale[j] = m == kNegInf ? 0.0 : m;
    }
  }
  k.scaled = DenseMatrix(nx, ny);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      k.scaled(i, j) = std::exp(log_values(i, j) - k.log_scale[j]);
  k.scaled_t = k.scaled.transposed();
  k.log_values = std::move(log_values);
  return k;
}

std::vector<bool> boundary_layer(const DiscreteSpace& s) {
  std::vector<bool> out(s.size(), false);
  for (std::size_t q = 0; q < s.dim; ++q) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < s.size(); ++i) {
      lo = std::min(lo, s.point(i)[q]);
      hi = std::max(hi, s.point(i)[q]);
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double c = s.point(i)[q];
      if (c == lo || c == hi) out[i] = true;
    }
  }
  return out;
}

ReducedProblem::ReducedProblem(DiscreteProblem problem, std::vector<std::size_t> x_index,
                               std::vector<std::size_t> y_index, KernelMatrix kernel,
                               std::size_t original_nx, std::size_t original_ny)
    : problem_(std::move(problem)),
      x_index_(std::move(x_index)),
      y_index_(std::move(y_index)),
      kernel_(std::move(kernel)),
      x_boundary_(boundary_layer(problem_.x_space)),
      y_boundary_(boundary_layer(problem_.y_space)),
      original_nx_(original_nx),
      original_ny_(original_ny) {}

ReducedProblem validate_reduction(const DiscreteProblem& p) {
  check_schema(p);

  std::vector<std::size_t> xi, yi;
  for (std::size_t i = 0; i < p.mu.size(); ++i)
    if (p.mu[i] > 0.0) xi.push_back(i);
  for (std::size_t j = 0; j < p.nu.size(); ++j)
    if (p.nu[j] > 0.0) yi.push_back(j);

  DiscreteProblem r;
  r.x_space = subset(p.x_space, xi);
  r.y_space = subset(p.y_space, yi);
  r.mu = subset(p.mu, xi);
  r.nu = subset(p.nu, yi);
  renormalize(r.mu);
  renormalize(r.nu);
  r.kernel = p.kernel;
  if (p.kernel.kind == KernelKind::dense) {
    DenseMatrix e(xi.size(), yi.size());
    for (std::size_t a = 0; a < xi.size(); ++a)
      for (std::size_t b = 0; b < yi.size(); ++b) e(a, b) = p.kernel.entries(xi[a], yi[b]);
    r.kernel.entries = std::move(e);
  }

  KernelMatrix k = KernelMatrix::from_log(log_kernel_matrix(r));

  std::vector<std::size_t> bad_rows, bad_cols;
  for (std::size_t a = 0; a < xi.size(); ++a) {
    const auto row = k.log_values.row(a);
    if (std::all_of(row.begin(), row.end(), [](double v) { return v == kNegInf; }))
      bad_rows.push_back(xi[a]);
  }
  for (std::size_t b = 0; b < yi.size(); ++b) {
    bool any = false;
    for (std::size_t a = 0; a < xi.size() && !any; ++a) any = k.log_values(a, b) != kNegInf;
    if (!any) bad_cols.push_back(yi[b]);
  }
  if (!bad_rows.empty() || !bad_cols.empty()) {
    std::ostringstream os;
    os << "irreducible problem:";
    if (!bad_rows.empty()) {
      os << " condition (i) fails at x index";
      for (std::size_t i : bad_rows) os << ' ' << i;
      os << " (no y with p > 0 and nu > 0)";
    }
    if (!bad_cols.empty()) {
      os << (bad_rows.empty() ? "" : ";") << " condition (ii) fails at y index";
      for (std::size_t j : bad_cols) os << ' ' << j;
      os << " (no x with p > 0 and mu > 0)";
    }
    throw IrreducibleProblem(os.str(), std::move(bad_rows), std::move(bad_cols));
  }
  return ReducedProblem(std::move(r), std::move(xi), std::move(yi), std::move(k), p.mu.size(),
                        p.nu.size());
}

DiscreteProblem transpose(const DiscreteProblem& p) {
  DiscreteProblem t;
  t.x_space = p.y_space;
  t.y_space = p.x_space;
  t.mu = p.nu;
  t.nu = p.mu;
  t.kernel = p.kernel;
  // Radial and gaussian kernels depend on |y - x| or on a symmetric
  // quadratic form of y - x, so only dense entries need transposing.
  if (p.kernel.kind == KernelKind::dense) t.kernel.entries = p.kernel.entries.transposed();
  return t;
}

}  // namespace schrodinger
