#include "schrodinger/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "schrodinger/error.hpp"

namespace schrodinger {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogGuard = std::log(kOverflowGuard);

// Shell used for the RatioMoment supremum: outer quarter of each coordinate range.
constexpr double kShellFraction = 0.25;

double log_sum_exp(std::span<const double> terms) {
  double hi = -kInf;
  for (double t : terms) hi = std::max(hi, t);
  if (hi == -kInf || hi == kInf) return hi;
  CompensatedSum s;
  for (double t : terms)
    if (t != -kInf) s.add(std::exp(t - hi));
  return hi + std::log(s.value());
}

SumVerdict classify(std::span<const double> log_terms, const std::vector<bool>* layer) {
  SumVerdict v;
  for (std::size_t k = 0; k < log_terms.size(); ++k) {
    if (log_terms[k] == kInf) {
      v.status = Finiteness::structural_inf;
      v.value = ExtReal::infinity();
      v.log_value = kInf;
      v.violating_index = k;
      return v;
    }
  }
  std::size_t arg = 0;
  for (std::size_t k = 1; k < log_terms.size(); ++k)
    if (log_terms[k] > log_terms[arg]) arg = k;
  v.log_value = log_sum_exp(log_terms);
  if (v.log_value > kLogGuard) {
    v.status = Finiteness::overflow;
    v.value = ExtReal::infinity();
    v.violating_index = arg;
    return v;
  }
  v.value = v.log_value == -kInf ? ExtReal::zero() : ExtReal(std::exp(v.log_value));
  if (layer != nullptr && !log_terms.empty() && (*layer)[arg]) {
    v.status = Finiteness::tail_dominated;
    v.violating_index = arg;
    return v;
  }
  v.finite = true;
  return v;
}

std::vector<bool> outer_shell(const DiscreteSpace& s, double fraction) {
  std::vector<bool> out(s.size(), false);
  for (std::size_t q = 0; q < s.dim; ++q) {
    double lo = kInf, hi = -kInf;
    for (std::size_t i = 0; i < s.size(); ++i) {
      lo = std::min(lo, s.point(i)[q]);
      hi = std::max(hi, s.point(i)[q]);
    }
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    if (!(half > 0.0)) continue;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (std::abs(s.point(i)[q] - mid) >= (1.0 - fraction) * half) out[i] = true;
  }
  return out;
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : -kInf; }

}  // namespace

std::string to_string(Finiteness f) {
  switch (f) {
    case Finiteness::finite: return "finite";
    case Finiteness::structural_inf: return "structural-inf";
    case Finiteness::overflow: return "overflow";
    case Finiteness::tail_dominated: return "tail-dominated";
  }
  return "unknown";
}

std::string to_string(Continuity c) {
  return c == Continuity::declared_by_kernel_kind ? "declared-by-kernel-kind"
                                                  : "asserted-not-checked";
}

ReciprocalVerdict check_reciprocal(const ReducedProblem& pb) {
  const auto& lp = pb.kernel().log_values;
  const std::size_t nx = pb.nx(), ny = pb.ny();
  const bool continuous = pb.problem().kernel.continuous();
  std::vector<double> log_mu(nx), log_nu(ny);
  for (std::size_t i = 0; i < nx; ++i) log_mu[i] = safe_log(pb.mu()[i]);
  for (std::size_t j = 0; j < ny; ++j) log_nu[j] = safe_log(pb.nu()[j]);

  ReciprocalVerdict out;
  {
    std::vector<double> terms(ny), col(nx);
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) col[i] = lp(i, j) + log_mu[i];
      const double inner = log_sum_exp(col);
      terms[j] = inner == -kInf ? kInf : log_nu[j] - inner;
    }
    out.xy = classify(terms, continuous ? &pb.y_boundary() : nullptr);
  }
  {
    std::vector<double> terms(nx), row(ny);
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < ny; ++j) row[j] = lp(i, j) + log_nu[j];
      const double inner = log_sum_exp(row);
      terms[i] = inner == -kInf ? kInf : log_mu[i] - inner;
    }
    out.yx = classify(terms, continuous ? &pb.x_boundary() : nullptr);
  }
  return out;
}

namespace {

void check_witness_lists(const ReducedProblem& pb, std::span<const std::size_t> k,
                         std::span<const std::size_t> anchors) {
  if (k.empty()) throw DomainError("domination: K is empty");
  if (anchors.empty()) throw DomainError("domination: no anchor points");
  for (std::size_t i : k)
    if (i >= pb.nx()) throw DomainError("domination: K index out of range");
  for (std::size_t i : anchors)
    if (i >= pb.nx()) throw DomainError("domination: anchor index out of range");
}

}  // namespace

DominationVerdict check_domination(const ReducedProblem& pb, std::span<const std::size_t> k,
                                   std::span<const std::size_t> anchors,
                                   std::span<const double> coef) {
  check_witness_lists(pb, k, anchors);
  if (coef.size() != anchors.size())
    throw DomainError("domination: anchors and coefficients differ in length");
  for (double c : coef)
    if (!(c > 0.0) || !std::isfinite(c))
      throw DomainError("domination: coefficients must be positive");

  const auto& lp = pb.kernel().log_values;
  DominationVerdict v;
  v.witness.k_indices.assign(k.begin(), k.end());
  v.witness.anchor_indices.assign(anchors.begin(), anchors.end());
  v.witness.coefficients.assign(coef.begin(), coef.end());
  v.continuity = pb.problem().kernel.continuous() ? Continuity::declared_by_kernel_kind
                                                  : Continuity::asserted_not_checked;
  v.log_margin = kInf;
  std::vector<double> rhs_terms(anchors.size());
  for (std::size_t j = 0; j < pb.ny(); ++j) {
    double lhs = -kInf;
    for (std::size_t i : k) lhs = std::max(lhs, lp(i, j));
    if (lhs == -kInf) continue;
    for (std::size_t q = 0; q < anchors.size(); ++q)
      rhs_terms[q] = std::log(coef[q]) + lp(anchors[q], j);
    const double margin = log_sum_exp(rhs_terms) - lhs;
    v.log_margin = std::min(v.log_margin, margin);
    if (margin < -1e-12 && !v.violating_y) v.violating_y = j;
  }
  v.holds = !v.violating_y.has_value();
  return v;
}

std::vector<std::size_t> domination_anchors(const ReducedProblem& pb,
                                            std::span<const std::size_t> k, std::uint64_t seed,
                                            std::size_t random_directions) {
  if (k.empty()) throw DomainError("domination: K is empty");
  const DiscreteSpace& s = pb.problem().x_space;
  const std::size_t d = s.dim;
  std::vector<std::vector<double>> dirs;
  for (std::size_t q = 0; q < d; ++q) {
    for (double sign : {1.0, -1.0}) {
      std::vector<double> u(d, 0.0);
      u[q] = sign;
      dirs.push_back(std::move(u));
    }
  }
  if (d >= 2) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (std::size_t r = 0; r < random_directions; ++r) {
      std::vector<double> u(d);
      double norm = 0.0;
      for (double& x : u) {
        x = normal(rng);
        norm += x * x;
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) continue;
      for (double& x : u) x /= norm;
      dirs.push_back(std::move(u));
    }
  }
  std::vector<std::size_t> out;
  for (const auto& u : dirs) {
    std::size_t best = k.front();
    double best_val = -kInf;
    for (std::size_t i : k) {
      const auto x = s.point(i);
      double val = 0.0;
      for (std::size_t q = 0; q < d; ++q) val += u[q] * x[q];
      if (val > best_val) {
        best_val = val;
        best = i;
      }
    }
    out.push_back(best);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> build_domination_coefficients(const ReducedProblem& pb,
                                                  std::span<const std::size_t> k,
                                                  std::span<const std::size_t> anchors,
                                                  std::uint64_t seed) {
  check_witness_lists(pb, k, anchors);
  const auto& lp = pb.kernel().log_values;
  const std::size_t na = anchors.size(), ny = pb.ny();

  // Per-column scaling leaves every inequality unchanged.
  DenseMatrix a(ny, na);
  std::vector<double> target(ny, 0.0);
  for (std::size_t j = 0; j < ny; ++j) {
    double lhs = -kInf;
    for (std::size_t i : k) lhs = std::max(lhs, lp(i, j));
    double scale = lhs;
    for (std::size_t q = 0; q < na; ++q) scale = std::max(scale, lp(anchors[q], j));
    if (scale == -kInf) continue;
    target[j] = std::exp(lhs - scale);
    for (std::size_t q = 0; q < na; ++q) a(j, q) = std::exp(lp(anchors[q], j) - scale);
  }

  std::vector<double> c(na, 1.0);
  for (std::size_t q = 0; q < na; ++q) {
    double need = 0.0;
    for (std::size_t j = 0; j < ny; ++j)
      if (a(j, q) > 0.0) need = std::max(need, target[j] / a(j, q));
    c[q] = need > 0.0 ? need : 1.0;
  }

  std::vector<std::size_t> order(na);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::vector<double> total(ny);
  for (int sweep = 0; sweep < 200; ++sweep) {
    std::shuffle(order.begin(), order.end(), rng);
    double change = 0.0;
    for (std::size_t q : order) {
      for (std::size_t j = 0; j < ny; ++j) {
        CompensatedSum s;
        for (std::size_t p = 0; p < na; ++p) s.add(c[p] * a(j, p));
        total[j] = s.value();
      }
      double room = kInf;
      for (std::size_t j = 0; j < ny; ++j)
        if (a(j, q) > 0.0) room = std::min(room, (total[j] - target[j]) / a(j, q));
      if (!(room > 0.0)) continue;
      const double next = std::max(c[q] - room, c[q] * 1e-12);
      change = std::max(change, (c[q] - next) / c[q]);
      c[q] = next;
    }
    if (change < 1e-12) break;
  }
  for (double& x : c) x *= 1.0 + 1e-9;
  return c;
}

RatioMomentVerdict check_ratio_moment(const ReducedProblem& pb, std::span<const ExtReal> ceiling,
                                      double r, std::size_t x_o) {
  const std::size_t nx = pb.nx(), ny = pb.ny();
  if (!(r > 1.0) || !std::isfinite(r))
    throw DomainError("ratio_moment: r must be a real number > 1");
  if (x_o >= nx) throw DomainError("ratio_moment: x_o out of range");
  if (ceiling.size() != nx) throw DimensionMismatch("ratio_moment: U has the wrong length");
  std::vector<double> log_u(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    if (!ceiling[i].is_finite() || ceiling[i].is_zero())
      throw PreconditionFailed("psi-finite", i, "ratio moment: U(x_" + std::to_string(i) +
                                           ") must be positive and finite");
    log_u[i] = std::log(ceiling[i].value());
  }
  const auto& lp = pb.kernel().log_values;

  std::vector<double> log_psi(ny), buf(std::max(nx, ny));
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) buf[i] = lp(i, j) + std::log(pb.mu()[i]) - log_u[i];
    log_psi[j] = log_sum_exp(std::span<const double>(buf.data(), nx));
    if (!(log_psi[j] <= kLogGuard))
      throw PreconditionFailed("psi-finite", j, "ratio moment: Psi[U](y_" + std::to_string(j) +
                                           ") is not finite");
  }
  std::vector<double> log_nu_psi(ny);
  for (std::size_t j = 0; j < ny; ++j) log_nu_psi[j] = std::log(pb.nu()[j]) - log_psi[j];
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) buf[j] = lp(i, j) + log_nu_psi[j];
    if (!(log_sum_exp(std::span<const double>(buf.data(), ny)) <= kLogGuard))
      throw PreconditionFailed("phi-finite", i, "ratio moment: Phi[U](x_" + std::to_string(i) +
                                           ") is not finite");
  }

  RatioMomentVerdict v;
  v.r = r;
  v.x_o = x_o;
  DenseMatrix terms(nx, ny);
  std::vector<double> log_s(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double lo = lp(x_o, j), li = lp(i, j);
      double t;
      if (li == -kInf)
        t = -kInf;  // 0^r p_o^(1-r) = 0, also when p_o = 0
      else if (lo == -kInf)
        t = kInf;
      else
        t = r * li + (1.0 - r) * lo + log_nu_psi[j];
      terms(i, j) = t;
    }
    log_s[i] = log_sum_exp(terms.row(i));
    if (log_s[i] == kInf) {
      v.status = Finiteness::structural_inf;
      v.c = ExtReal::infinity();
      v.log_c = kInf;
      v.violating_index = i;
      return v;
    }
  }
  std::size_t arg = 0;
  double best = -kInf;
  for (std::size_t i = 0; i < nx; ++i) {
    const double val = log_s[i] - r * log_u[i];
    if (val > best) {
      best = val;
      arg = i;
    }
  }
  v.log_c = best;
  v.argmax = arg;
  if (best > kLogGuard) {
    v.status = Finiteness::overflow;
    v.c = ExtReal::infinity();
    v.violating_index = arg;
    return v;
  }
  v.c = best == -kInf ? ExtReal::zero() : ExtReal(std::exp(best));
  if (pb.problem().kernel.continuous()) {
    // The supremum escapes to infinity when it is attained near the edge of
    // the x grid, or when the y sum at the maximizer lives near the edge of
    // the y grid.
    const auto x_shell = outer_shell(pb.problem().x_space, kShellFraction);
    const auto y_shell = outer_shell(pb.problem().y_space, kShellFraction);
    std::vector<double> outer;
    for (std::size_t j = 0; j < ny; ++j)
      if (y_shell[j]) outer.push_back(terms(arg, j));
    const double share = outer.empty() ? 0.0 : std::exp(log_sum_exp(outer) - log_s[arg]);
    if (x_shell[arg] || share > 0.5) {
      v.status = Finiteness::tail_dominated;
      v.violating_index = arg;
      return v;
    }
  }
  v.holds = true;
  return v;
}

RadialVerdict check_radial(std::span<const double> t, std::span<const double> theta,
                           std::span<const double> l_grid) {
  if (t.size() != theta.size()) throw DimensionMismatch("check_radial: t and theta differ");
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < 0.0 || !std::isfinite(t[k])) throw DomainError("check_radial: bad sample point");
    if (k > 0 && t[k] < t[k - 1]) throw DomainError("check_radial: samples must be sorted");
    if (!(theta[k] > 0.0) || !std::isfinite(theta[k]))
      throw DomainError("check_radial: profile must be positive and bounded");
  }
  RadialVerdict v;
  for (std::size_t k = 0; k + 1 < t.size(); ++k)
    if (theta[k + 1] > theta[k] + 1e-12) v.violating_sample = k;
  std::vector<double> grid(l_grid.begin(), l_grid.end());
  std::sort(grid.begin(), grid.end());
  for (double l : grid) {
    if (!v.violating_sample || l > t[*v.violating_sample]) {
      v.l_found = l;
      v.holds = true;
      break;
    }
  }
  return v;
}

RadialVerdict check_radial(const RadialProfile& profile, double t_max, std::size_t samples,
                           std::span<const double> l_grid) {
  if (samples < 2 || !(t_max > 0.0)) throw DomainError("check_radial: need samples over (0, t_max]");
  std::vector<double> t(samples), theta(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    t[k] = t_max * static_cast<double>(k) / static_cast<double>(samples - 1);
    theta[k] = profile(t[k]);
  }
  return check_radial(t, theta, l_grid);
}

namespace {

double bounding_diameter(const DiscreteSpace& x, const DiscreteSpace& y) {
  double sq = 0.0;
  for (std::size_t q = 0; q < x.dim; ++q) {
    double lo = kInf, hi = -kInf;
    for (const DiscreteSpace* s : {&x, &y})
      for (std::size_t i = 0; i < s->size(); ++i) {
        lo = std::min(lo, s->point(i)[q]);
        hi = std::max(hi, s->point(i)[q]);
      }
    sq += (hi - lo) * (hi - lo);
  }
  return std::sqrt(sq);
}

}  // namespace

CriteriaReport check_all(const ReducedProblem& pb, const CriteriaOptions& opt) {
  CriteriaReport rep;
  const auto& xi = pb.x_index();
  const auto& yi = pb.y_index();
  rep.positivity = pb.kernel().positive;
  rep.boundedness = pb.kernel().bounded;

  rep.reciprocal = check_reciprocal(pb);
  if (rep.reciprocal.xy.violating_index)
    rep.reciprocal.xy.violating_index = yi[*rep.reciprocal.xy.violating_index];
  if (rep.reciprocal.yx.violating_index)
    rep.reciprocal.yx.violating_index = xi[*rep.reciprocal.yx.violating_index];

  if (opt.domination) {
    auto v = check_domination(pb, opt.domination->k_indices, opt.domination->anchor_indices,
                              opt.domination->coefficients);
    for (auto& i : v.witness.k_indices) i = xi[i];
    for (auto& i : v.witness.anchor_indices) i = xi[i];
    if (v.violating_y) v.violating_y = yi[*v.violating_y];
    rep.domination = std::move(v);
  }

  std::vector<ExtReal> ceiling = opt.ratio_moment_ceiling;
  if (ceiling.empty()) ceiling.assign(pb.nx(), ExtReal(1.0));
  for (const auto& u : ceiling) rep.ratio_moment_ceiling.push_back(u.to_double());
  try {
    auto v = check_ratio_moment(pb, ceiling, opt.ratio_moment_r, opt.ratio_moment_x_o);
    v.x_o = xi[v.x_o];
    if (v.argmax) v.argmax = xi[*v.argmax];
    if (v.violating_index) v.violating_index = xi[*v.violating_index];
    rep.ratio_moment = v;
  } catch (const PreconditionFailed& e) {
    rep.ratio_moment_precondition = "(" + e.condition() + ") " + e.what();
  }

  if (pb.problem().kernel.kind == KernelKind::radial) {
    const double t_max = bounding_diameter(pb.problem().x_space, pb.problem().y_space);
    std::vector<double> grid = opt.radial_l_grid;
    if (grid.empty())
      for (int k = 0; k <= 64; ++k) grid.push_back(t_max * k / 64.0);
    if (t_max > 0.0) {
      try {
        rep.radial = check_radial(pb.problem().kernel.profile, t_max, 4097, grid);
      } catch (const DomainError&) {
        rep.radial = RadialVerdict{};
      }
    }
  }

  if (opt.gaussian) rep.matrix = gaussian::matrix_criterion(*opt.gaussian);

  if (rep.positivity && rep.boundedness && (rep.reciprocal.xy.finite || rep.reciprocal.yx.finite))
    rep.sufficient.push_back("reciprocal");
  if (rep.positivity && rep.boundedness && rep.domination && rep.domination->holds)
    rep.sufficient.push_back("domination");
  if (rep.positivity && rep.ratio_moment && rep.ratio_moment->holds)
    rep.sufficient.push_back("ratio-moment");
  if (rep.radial && rep.radial->holds) rep.sufficient.push_back("radial");
  if (rep.matrix && (rep.matrix->xy_holds || rep.matrix->yx_holds))
    rep.sufficient.push_back("gaussian-matrix");
  return rep;
}

}  // namespace schrodinger
