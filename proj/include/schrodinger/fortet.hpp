#pragma once

// Fortet's fixed-point approach to the Schrodinger system.
//
// For a potential u over X,
//
//   Psi[u](y) = sum_x p(x, y) u(x)^-1 mu(x)
//   Phi[u](x) = sum_y p(x, y) Psi[u](y)^-1 nu(y)
//
// and a positive fixed point u = Phi[u] yields the solution
// a = mu / u, b = nu / Psi[u], pi(x, y) = a(x) p(x, y) b(y).
//
// The truncated scheme u_{n+1} = U/(n+1) v Phi[u_n] ^ U started from
// u_1 = U decreases monotonically and stays inside [U/n, U].

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "schrodinger/error.hpp"
#include "schrodinger/extnum.hpp"
#include "schrodinger/matrix.hpp"
#include "schrodinger/problem.hpp"

namespace schrodinger {

std::vector<ExtReal> psi(const ReducedProblem& problem, std::span<const ExtReal> u);
std::vector<ExtReal> phi(const ReducedProblem& problem, std::span<const ExtReal> u);

/// sum_x Phi[u](x) / u(x) mu(x), which equals 1 for every positive finite u.
/// Throws NonFiniteIntermediate when some Phi[u](x) is infinite and
/// DomainError unless u is positive and finite.
double normalization_check(const ReducedProblem& problem, std::span<const double> u);

struct SupportIdentity {
  ExtReal lhs;   // sum over {Phi[u] > 0} of Phi[u] / u mu
  double rhs;    // nu-mass of {Psi[u] < inf}
};

/// Both sides of the generalized normalization identity, valid for
/// potentials with structural zeros.
SupportIdentity support_identity(const ReducedProblem& problem, std::span<const ExtReal> u);

struct SchemeState {
  std::size_t n = 1;
  std::vector<double> u;
  std::vector<double> ceiling;                    // U
  std::vector<double> phi_u;                      // Phi[u_{n-1}], empty at n = 1
  std::optional<std::size_t> early_exit_index;    // first n with Phi[u_n] <= U

  static SchemeState initial(std::vector<double> ceiling);
};

/// One step of the truncated scheme: n -> n + 1 and
/// u' = max(U / (n + 1), min(Phi[u], U)).
SchemeState iterate_truncated(const SchemeState& state, const ReducedProblem& problem);

enum class FixedPointStatus { converged_positive, degenerate_zero, max_iter, divergent };

std::string to_string(FixedPointStatus status);

struct TraceRow {
  std::size_t n = 0;
  double min_u = 0.0;
  double max_u = 0.0;
  double residual = 0.0;        // sup relative change of u
  double min_phi = 0.0;
  double normalization = 0.0;   // sum over {Phi > 0} of Phi / u mu
};

struct FixedPointResult {
  std::vector<double> u_star;
  std::size_t iterations = 0;
  double residual = 0.0;        // last sup relative change
  double limit_residual = 0.0;  // sup |u - min(Phi[u], U)| (untruncated: sup |u - Phi[u]|)
  FixedPointStatus status = FixedPointStatus::max_iter;
  std::optional<std::size_t> early_exit_index;
  std::vector<TraceRow> trace;
};

class MaxIterExceeded : public Error {
 public:
  explicit MaxIterExceeded(FixedPointResult result)
      : Error("fixed-point iteration did not converge in " +
              std::to_string(result.iterations) + " iterations"),
        result_(std::move(result)) {}
  explicit MaxIterExceeded(const std::string& what) : Error(what) {}

  const FixedPointResult& result() const noexcept { return result_; }

 private:
  FixedPointResult result_;
};

struct SolveOptions {
  std::vector<double> ceiling;         // U; empty means all ones
  double tol = 1e-10;
  std::size_t max_iter = 100000;
  double degenerate_threshold = 1e-13;
  bool record_trace = true;
  /// Called with every iterate, starting with the initial state.
  std::function<void(const SchemeState&)> observer;
};

/// Runs the truncated scheme until the sup relative change of u drops to
/// tol. Reports degenerate_zero when Phi collapses below
/// degenerate_threshold * U, or when some coordinates are provably pinned
/// to the floor U/n for all later iterations, so that the limit has zeros.
/// Never throws on non-convergence; see require_converged.
FixedPointResult solve_fortet(const ReducedProblem& problem, const SolveOptions& options = {});

/// Plain iteration u_{n+1} = Phi[u_n] from an arbitrary start in [0, inf].
FixedPointResult solve_untruncated(const ReducedProblem& problem, std::span<const ExtReal> u1,
                                   const SolveOptions& options = {});

/// Throws MaxIterExceeded (carrying the result and trace) unless the status
/// is converged_positive.
const FixedPointResult& require_converged(const FixedPointResult& result);

struct SchrodingerSolution {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> u;    // mu / a, normalized with the a-weights summing to 1
  DenseMatrix pi;
  double marginal_err_x = 0.0;
  double marginal_err_y = 0.0;
  double rel_entropy = 0.0;
};

/// a = mu / u, b = nu / Psi[u], pi = a p b, scaled so that sum a = 1.
/// Throws DegeneratePotential if u or Psi[u] has a zero or infinite entry.
SchrodingerSolution extract_solution(const ReducedProblem& problem, std::span<const double> u_star);

/// Relative entropy of a coupling with respect to p(x, y) m(x) n(y),
/// summed over the support of pi. INF (as +infinity) when pi charges a
/// structural zero of the reference.
double relative_entropy(const ReducedProblem& problem, const DenseMatrix& pi);

struct SinkhornOptions {
  double tol = 1e-12;            // sup-norm marginal error
  std::size_t max_iter = 100000;
};

/// Alternating scalings b <- nu / (P^T a), a <- mu / (P b). Independent of
/// the Psi/Phi code path. Throws MaxIterExceeded, or DegeneratePotential
/// when the marginals are met only in the limit of vanishing or infinite
/// scalings.
SchrodingerSolution sinkhorn_baseline(const ReducedProblem& problem,
                                      const SinkhornOptions& options = {});

/// Problem with kernel alpha(x) beta(y) p(x, y) on the reduced grid.
DiscreteProblem twist(const ReducedProblem& problem, std::span<const double> alpha,
                      std::span<const double> beta);

/// Maps a solution of the twisted problem back: a = alpha a~, b = beta b~.
/// The coupling is unchanged; the entropy is re-referenced to p.
SchrodingerSolution untwist_solution(const SchrodingerSolution& twisted,
                                     std::span<const double> alpha,
                                     std::span<const double> beta);

}  // namespace schrodinger
