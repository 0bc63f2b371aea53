#include "schrodinger/extnum.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "schrodinger/error.hpp"

namespace schrodinger {

ExtReal::ExtReal(double v) : v_(v) {
  if (std::isnan(v)) throw DomainError("ExtReal: NaN is not representable");
  if (std::isinf(v))
    throw DomainError("ExtReal: IEEE infinity must go through ExtReal::infinity()");
  if (v < 0.0) throw DomainError("ExtReal: negative value " + std::to_string(v));
  if (v > kOverflowGuard)
    throw OverflowError("ExtReal: finite value exceeds overflow guard");
}

double ExtReal::value() const {
  if (is_inf()) throw NonFiniteIntermediate("ExtReal::value() called on inf");
  return v_;
}

ExtReal inv_ext(ExtReal s) {
  if (s.is_zero()) return ExtReal::infinity();
  if (s.is_inf()) return ExtReal::zero();
  return ExtReal(1.0 / s.value());
}

ExtReal mul_ext(double f, ExtReal g) {
  if (!(f >= 0.0) || std::isinf(f))
    throw DomainError("mul_ext: first factor must be finite and nonnegative");
  if (f == 0.0) return ExtReal::zero();
  if (g.is_inf()) return ExtReal::infinity();
  const double v = f * g.value();
  if (!(v <= kOverflowGuard)) throw OverflowError("mul_ext: product exceeds the overflow guard");
  return ExtReal(v);
}

ExtReal sum_ext(std::span<const ExtReal> terms) {
  CompensatedSum acc;
  for (const ExtReal t : terms) {
    if (t.is_inf()) return ExtReal::infinity();
    acc.add(t.value());
  }
  const double v = acc.value();
  if (!(v <= kOverflowGuard)) throw OverflowError("sum_ext: sum exceeds the overflow guard");
  return ExtReal(v);
}

std::string to_string(ExtReal s) {
  if (s.is_inf()) return "inf";
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, s.value());
  return std::string(buf, end);
}

ExtReal parse_ext(std::string_view text) {
  if (text == "inf") return ExtReal::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw DomainError("parse_ext: not a number: '" + std::string(text) + "'");
  return ExtReal(v);
}

std::vector<ExtReal> to_ext(std::span<const double> values) {
  std::vector<ExtReal> out;
  out.reserve(values.size());
  for (double v : values) out.emplace_back(v);
  return out;
}

}  // namespace schrodinger
