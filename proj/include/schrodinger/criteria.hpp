#pragma once

// Checkable sufficient conditions for existence of a solution.
//
// Every verdict carries either a witness or a violating index. The check_*
// functions work in the indexing of the reduced problem; check_all maps
// indices back to the original problem.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "schrodinger/extnum.hpp"
#include "schrodinger/gaussian.hpp"
#include "schrodinger/problem.hpp"

namespace schrodinger {

/// How a grid sum was classified.
///
/// On a finite grid every sum of finite terms is finite, so divergence of
/// the underlying continuous quantity has to be read off the grid. For
/// gaussian and radial kernels a sum whose largest term sits on the outer
/// layer of the grid is reported as tail_dominated: the terms grow towards
/// the edge and refining or widening the grid makes the sum larger.
enum class Finiteness { finite, structural_inf, overflow, tail_dominated };

std::string to_string(Finiteness f);

struct SumVerdict {
  bool finite = false;
  Finiteness status = Finiteness::finite;
  ExtReal value;                               // grid value, INF unless representable
  double log_value = 0.0;                      // +inf for INF
  std::optional<std::size_t> violating_index;  // offending term
};

struct ReciprocalVerdict {
  SumVerdict xy;  // sum_y nu(y) / sum_x p(x, y) mu(x)
  SumVerdict yx;  // sum_x mu(x) / sum_y p(x, y) nu(y)
};

ReciprocalVerdict check_reciprocal(const ReducedProblem& problem);

enum class Continuity { declared_by_kernel_kind, asserted_not_checked };

std::string to_string(Continuity c);

struct DominationWitness {
  std::vector<std::size_t> k_indices;
  std::vector<std::size_t> anchor_indices;
  std::vector<double> coefficients;
};

struct DominationVerdict {
  bool holds = false;
  DominationWitness witness;
  std::optional<std::size_t> violating_y;
  /// min over y of log(sum_k c_k p(x_k, y)) - log(max_{x in K} p(x, y)).
  double log_margin = 0.0;
  Continuity continuity = Continuity::asserted_not_checked;
};

/// Indices refer to the reduced problem. Checks, for every grid y,
///   max_{x in K} p(x, y) <= sum_k c_k p(x_k, y)
/// up to a relative rounding slack of 1e-12. Throws DomainError on empty or
/// mismatched lists, out-of-range indices or non-positive coefficients.
DominationVerdict check_domination(const ReducedProblem& problem,
                                   std::span<const std::size_t> k_indices,
                                   std::span<const std::size_t> anchor_indices,
                                   std::span<const double> coefficients);

/// Points of K that are extreme in one of a set of directions: both axis
/// directions per coordinate plus random unit vectors drawn from `seed`.
std::vector<std::size_t> domination_anchors(const ReducedProblem& problem,
                                            std::span<const std::size_t> k_indices,
                                            std::uint64_t seed, std::size_t random_directions = 16);

/// Best-effort coefficients for fixed anchors: start from a feasible point
/// and shrink one coordinate at a time (order shuffled by `seed`) as far as
/// feasibility allows. No completeness guarantee.
std::vector<double> build_domination_coefficients(const ReducedProblem& problem,
                                                  std::span<const std::size_t> k_indices,
                                                  std::span<const std::size_t> anchor_indices,
                                                  std::uint64_t seed);

struct RatioMomentVerdict {
  bool holds = false;
  double r = 2.0;
  std::size_t x_o = 0;
  Finiteness status = Finiteness::finite;
  ExtReal c;
  double log_c = 0.0;
  std::optional<std::size_t> argmax;           // witness for the supremum
  std::optional<std::size_t> violating_index;
};

/// c = max_x sum_y (p(x,y)/p(x_o,y))^r p(x_o,y) Psi[U](y)^-1 nu(y) / U(x)^r
/// on the reduced problem. Throws PreconditionFailed("psi-finite", j) when U is not
/// positive finite or Psi[U](y_j) is not finite, PreconditionFailed("phi-finite", i)
/// when Phi[U](x_i) is not finite, DomainError for r <= 1 or a bad x_o.
RatioMomentVerdict check_ratio_moment(const ReducedProblem& problem,
                                      std::span<const ExtReal> ceiling, double r = 2.0,
                                      std::size_t x_o = 0);

struct RadialVerdict {
  bool holds = false;
  std::optional<double> l_found;
  std::optional<std::size_t> violating_sample;  // start of the last increasing pair
};

/// Smallest candidate L such that the samples with t >= L are non-increasing
/// (increase tolerance 1e-12). Samples must be sorted by t.
RadialVerdict check_radial(std::span<const double> t, std::span<const double> theta,
                           std::span<const double> l_grid);

/// Samples the profile on an equispaced grid of [0, t_max].
RadialVerdict check_radial(const RadialProfile& profile, double t_max, std::size_t samples,
                           std::span<const double> l_grid);

struct CriteriaOptions {
  std::vector<ExtReal> ratio_moment_ceiling;  // reduced indexing; empty means all ones
  double ratio_moment_r = 2.0;
  std::size_t ratio_moment_x_o = 0;
  std::optional<DominationWitness> domination;  // reduced indexing
  std::vector<double> radial_l_grid;            // empty means 65 points over the grid diameter
  std::optional<gaussian::GaussianProblem> gaussian;
};

struct CriteriaReport {
  ReciprocalVerdict reciprocal;
  std::optional<DominationVerdict> domination;
  std::optional<RatioMomentVerdict> ratio_moment;
  std::optional<std::string> ratio_moment_precondition;  // set when Psi[U] or Phi[U] was not finite
  std::vector<double> ratio_moment_ceiling;
  std::optional<RadialVerdict> radial;
  std::optional<gaussian::MatrixCriterion> matrix;
  bool positivity = false;
  bool boundedness = false;
  /// Names of the sufficient conditions that hold.
  std::vector<std::string> sufficient;

  bool existence_certified() const noexcept { return !sufficient.empty(); }
};

/// Runs every applicable check. Indices in the returned verdicts are mapped
/// back to the original problem.
CriteriaReport check_all(const ReducedProblem& problem, const CriteriaOptions& options = {});

}  // namespace schrodinger
