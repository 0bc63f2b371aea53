#pragma once

// Arithmetic on the extended half-line [0, inf].
//
//   inv(0) = inf, inv(inf) = 0, inv(s) = 1/s otherwise
//   f * g  = 0 whenever the finite factor f is 0, even if g = inf
//
// INF is a tagged state reachable only through ExtReal::infinity() or the
// operations above. Finite values above kOverflowGuard are rejected with
// OverflowError so numeric blowup never masquerades as a structural infinity.

#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace schrodinger {

inline constexpr double kOverflowGuard = 1e300;

class ExtReal {
 public:
  constexpr ExtReal() noexcept = default;

  /// Throws DomainError for negative, NaN or IEEE-infinite input and
  /// OverflowError when v exceeds kOverflowGuard.
  explicit ExtReal(double v);

  static constexpr ExtReal infinity() noexcept {
    ExtReal r;
    r.v_ = std::numeric_limits<double>::infinity();
    return r;
  }
  static constexpr ExtReal zero() noexcept { return ExtReal(); }

  constexpr bool is_inf() const noexcept {
    return v_ == std::numeric_limits<double>::infinity();
  }
  constexpr bool is_zero() const noexcept { return v_ == 0.0; }
  constexpr bool is_finite() const noexcept { return !is_inf(); }

  /// Finite value; throws NonFiniteIntermediate when called on INF.
  double value() const;

  /// The value as an IEEE double with INF mapped to +infinity. Only for
  /// display and comparisons outside the library.
  constexpr double to_double() const noexcept { return v_; }

  friend constexpr auto operator<=>(ExtReal a, ExtReal b) noexcept {
    return a.v_ <=> b.v_;
  }
  friend constexpr bool operator==(ExtReal a, ExtReal b) noexcept {
    return a.v_ == b.v_;
  }

 private:
  double v_ = 0.0;
};

/// s^-1 with 0^-1 = inf and inf^-1 = 0.
ExtReal inv_ext(ExtReal s);

/// f * g for a finite f >= 0; zero whenever f is zero.
ExtReal mul_ext(double f, ExtReal g);

/// INF if any term is INF, otherwise the compensated (Neumaier) finite sum.
ExtReal sum_ext(std::span<const ExtReal> terms);

/// Neumaier accumulator shared by the finite summation paths.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// "inf" for INF, shortest round-trip decimal otherwise.
std::string to_string(ExtReal s);

/// Accepts "inf" or a nonnegative decimal.
ExtReal parse_ext(std::string_view text);

std::vector<ExtReal> to_ext(std::span<const double> values);

}  // namespace schrodinger
