#pragma once

// Discretized Schrodinger problem: two weighted point sets, their marginals
// and a transition kernel p(x, y).

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "schrodinger/matrix.hpp"

namespace schrodinger {

/// Finite weighted point set. The weights are the quadrature weights of the
/// reference measure (m on X, n on Y).
struct DiscreteSpace {
  std::size_t dim = 1;
  std::vector<double> coords;  // size() * dim, row-major
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
  std::span<const double> point(std::size_t i) const noexcept {
    return {coords.data() + i * dim, dim};
  }

  static DiscreteSpace from_points(const std::vector<std::vector<double>>& points,
                                   std::vector<double> weights);

  friend bool operator==(const DiscreteSpace&, const DiscreteSpace&) = default;
};

/// Profile theta of a radial kernel p(x, y) = theta(|y - x|).
struct RadialProfile {
  enum class Shape { gaussian, exponential, table, custom };

  Shape shape = Shape::gaussian;
  /// gaussian: exp(-t^2 / (2 scale^2)); exponential: exp(-t / scale).
  double scale = 1.0;
  /// table: piecewise-linear interpolation, constant beyond the last knot.
  std::vector<double> t;
  std::vector<double> theta;
  /// custom: arbitrary callable, not serializable.
  std::function<double(double)> fn;

  /// Raw profile value; no sign checks.
  double operator()(double r) const;
  /// log theta(r); exact for the analytic shapes so wide grids do not
  /// underflow. Throws EvaluationError for negative or non-finite values.
  double log_value(double r) const;

  static RadialProfile gaussian(double scale = 1.0);
  static RadialProfile exponential(double scale = 1.0);
  static RadialProfile table(std::vector<double> t, std::vector<double> theta);
  static RadialProfile custom(std::function<double(double)> fn);
};

enum class KernelKind { dense, radial, gaussian };

std::string to_string(KernelKind kind);

struct Kernel {
  KernelKind kind = KernelKind::dense;
  DenseMatrix entries;              // dense: |X| x |Y|
  RadialProfile profile;            // radial
  std::optional<double> cutoff;     // radial: declared L
  DenseMatrix precision;            // gaussian: the matrix c

  static Kernel dense(DenseMatrix entries);
  static Kernel radial(RadialProfile profile, std::optional<double> cutoff = std::nullopt);
  static Kernel gaussian(DenseMatrix precision);

  /// Gaussian and radial kernels are discretizations of continuous
  /// kernels; sums over their grids are subject to the tail diagnostics.
  bool continuous() const noexcept { return kind != KernelKind::dense; }
};

struct DiscreteProblem {
  DiscreteSpace x_space;
  DiscreteSpace y_space;
  std::vector<double> mu;
  std::vector<double> nu;
  Kernel kernel;
};

/// Structural checks: sizes, positive finite space weights, marginals that
/// are nonnegative and sum to one within 1e-12, well-formed kernel data.
/// Throws SchemaError.
void check_schema(const DiscreteProblem& problem);

/// log p(x_i, y_j) for every grid pair, -inf for structural zeros.
/// Throws EvaluationError for negative or non-finite kernel values.
DenseMatrix log_kernel_matrix(const DiscreteProblem& problem);

/// P[i][j] = p(x_i, y_j). Entries below the double range underflow to 0;
/// the solvers work from log_kernel_matrix instead.
DenseMatrix kernel_matrix(const DiscreteProblem& problem);

/// Kernel materialized on the reduced grid.
///
/// `scaled(i, j) = P[i][j] / s_j` where `log_scale[j] = log s_j`. The column
/// scales are all 1 unless the ratio between the largest and the smallest
/// positive entry exceeds kRescaleRatio, in which case s_j is the column
/// maximum. Fortet's map is invariant under column scaling, so the solvers
/// never form s_j explicitly.
struct KernelMatrix {
  static constexpr double kRescaleRatio = 1e12;

  DenseMatrix log_values;
  DenseMatrix scaled;
  DenseMatrix scaled_t;
  std::vector<double> log_scale;
  bool rescaled = false;
  bool positive = false;   // every entry > 0
  bool bounded = false;    // every entry finite (always true once built)
  double max_value = 0.0;

  std::size_t rows() const noexcept { return scaled.rows(); }
  std::size_t cols() const noexcept { return scaled.cols(); }

  static KernelMatrix from_log(DenseMatrix log_values);
};

/// Validated problem with every marginal weight strictly positive and the
/// support conditions satisfied. Immutable.
class ReducedProblem {
 public:
  ReducedProblem(DiscreteProblem problem, std::vector<std::size_t> x_index,
                 std::vector<std::size_t> y_index, KernelMatrix kernel,
                 std::size_t original_nx, std::size_t original_ny);

  const DiscreteProblem& problem() const noexcept { return problem_; }
  const KernelMatrix& kernel() const noexcept { return kernel_; }

  std::size_t nx() const noexcept { return problem_.mu.size(); }
  std::size_t ny() const noexcept { return problem_.nu.size(); }

  std::span<const double> mu() const noexcept { return problem_.mu; }
  std::span<const double> nu() const noexcept { return problem_.nu; }
  std::span<const double> m() const noexcept { return problem_.x_space.weights; }
  std::span<const double> n() const noexcept { return problem_.y_space.weights; }

  /// Original index of every retained point.
  const std::vector<std::size_t>& x_index() const noexcept { return x_index_; }
  const std::vector<std::size_t>& y_index() const noexcept { return y_index_; }
  std::size_t original_nx() const noexcept { return original_nx_; }
  std::size_t original_ny() const noexcept { return original_ny_; }

  /// Points lying on the outer layer of the point cloud: some coordinate
  /// equals the minimum or maximum of that coordinate over the space.
  const std::vector<bool>& x_boundary() const noexcept { return x_boundary_; }
  const std::vector<bool>& y_boundary() const noexcept { return y_boundary_; }

 private:
  DiscreteProblem problem_;
  std::vector<std::size_t> x_index_;
  std::vector<std::size_t> y_index_;
  KernelMatrix kernel_;
  std::vector<bool> x_boundary_;
  std::vector<bool> y_boundary_;
  std::size_t original_nx_;
  std::size_t original_ny_;
};

/// Drops zero-mass points, renormalizes the marginals and checks that every
/// remaining x reaches some y with p > 0 (condition i) and conversely
/// (condition ii). Throws SchemaError, EvaluationError or IrreducibleProblem.
ReducedProblem validate_reduction(const DiscreteProblem& problem);

/// Exchanges the roles of X and Y.
DiscreteProblem transpose(const DiscreteProblem& problem);

std::vector<bool> boundary_layer(const DiscreteSpace& space);

}  // namespace schrodinger
