#include "schrodinger/fortet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace schrodinger {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const double> row, std::span<const double> w) {
  CompensatedSum acc;
  for (std::size_t k = 0; k < row.size(); ++k) acc.add(row[k] * w[k]);
  return acc.value();
}

void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    std::ostringstream os;
    os << what << ": expected " << want << " entries, got " << got;
    throw DimensionMismatch(os.str());
  }
}

void require_positive_finite(std::span<const double> u, const char* what) {
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!std::isfinite(u[i]) || !(u[i] > 0.0)) {
      std::ostringstream os;
      os << what << ": entry " << i << " = " << u[i] << " is not positive and finite";
      throw DomainError(os.str());
    }
}

// Psi up to the column scales: psi_hat[j] = Psi[u](y_j) / s_j, with the
// extended-real conventions for zero and infinite entries of u.
std::vector<ExtReal> scaled_psi_ext(const ReducedProblem& pb, std::span<const ExtReal> u) {
  const auto& k = pb.kernel();
  const auto mu = pb.mu();
  std::vector<ExtReal> inv_u(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) inv_u[i] = inv_ext(u[i]);

  std::vector<ExtReal> out(pb.ny());
  std::vector<ExtReal> terms(pb.nx());
  for (std::size_t j = 0; j < pb.ny(); ++j) {
    const auto col = k.scaled_t.row(j);
    for (std::size_t i = 0; i < pb.nx(); ++i) terms[i] = mul_ext(col[i] * mu[i], inv_u[i]);
    out[j] = sum_ext(terms);
  }
  return out;
}

std::vector<ExtReal> phi_from_scaled_ext(const ReducedProblem& pb,
                                         std::span<const ExtReal> psi_hat) {
  const auto& k = pb.kernel();
  const auto nu = pb.nu();
  std::vector<ExtReal> inv_psi(psi_hat.size());
  for (std::size_t j = 0; j < psi_hat.size(); ++j) inv_psi[j] = inv_ext(psi_hat[j]);

  std::vector<ExtReal> out(pb.nx());
  std::vector<ExtReal> terms(pb.ny());
  for (std::size_t i = 0; i < pb.nx(); ++i) {
    const auto row = k.scaled.row(i);
    for (std::size_t j = 0; j < pb.ny(); ++j) terms[j] = mul_ext(row[j] * nu[j], inv_psi[j]);
    out[i] = sum_ext(terms);
  }
  return out;
}

// Fast path for positive finite u.
std::vector<double> scaled_psi_fast(const ReducedProblem& pb, std::span<const double> u) {
  const auto mu = pb.mu();
  std::vector<double> w(pb.nx());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = mu[i] / u[i];
  std::vector<double> out(pb.ny());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = dot(pb.kernel().scaled_t.row(j), w);
  return out;
}

std::vector<double> phi_fast(const ReducedProblem& pb, std::span<const double> psi_hat) {
  const auto nu = pb.nu();
  std::vector<double> w(pb.ny());
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (!(psi_hat[j] > 0.0)) throw OverflowError("Psi underflowed to zero");
    w[j] = nu[j] / psi_hat[j];
  }
  std::vector<double> out(pb.nx());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = dot(pb.kernel().scaled.row(i), w);
    if (!(out[i] <= kOverflowGuard)) throw OverflowError("Phi exceeds the overflow guard");
  }
  return out;
}

std::vector<double> phi_fast_of(const ReducedProblem& pb, std::span<const double> u) {
  return phi_fast(pb, scaled_psi_fast(pb, u));
}

double sup_relative_change(std::span<const double> next, std::span<const double> prev) {
  double r = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i)
    r = std::max(r, std::abs(next[i] - prev[i]) / prev[i]);
  return r;
}

double normalization_value(std::span<const double> phi_u, std::span<const double> u,
                           std::span<const double> mu) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (phi_u[i] > 0.0) acc.add(phi_u[i] / u[i] * mu[i]);
  return acc.value();
}

// Coordinates held at the floor U/n stay there for good when
//   C_i = sum_j P_ij nu_j / sum_{k in S} P_kj mu_k / U_k <= U_i n / (n + 1)
// for every i in the floor set S: the S-part of Psi alone bounds
// Phi[u_m]_i by C_i / m, and u only decreases off S. The limit then
// vanishes on S.
bool floor_locked(const ReducedProblem& pb, const SchemeState& s) {
  const double n = static_cast<double>(s.n);
  std::vector<std::size_t> floor_set;
  for (std::size_t i = 0; i < s.u.size(); ++i)
    if (s.phi_u[i] <= s.ceiling[i] / n) floor_set.push_back(i);
  if (floor_set.empty() || floor_set.size() == s.u.size()) return false;
  const auto& p = pb.kernel().scaled;
  const auto mu = pb.mu(), nu = pb.nu();
  std::vector<double> mass(pb.ny(), 0.0);
  for (std::size_t k : floor_set)
    for (std::size_t j = 0; j < pb.ny(); ++j) mass[j] += p(k, j) * mu[k] / s.ceiling[k];
  for (std::size_t i : floor_set) {
    CompensatedSum c;
    for (std::size_t j = 0; j < pb.ny(); ++j)
      if (p(i, j) > 0.0) c.add(p(i, j) * nu[j] / mass[j]);
    if (!(c.value() <= s.ceiling[i] * n / (n + 1.0) * (1.0 - 1e-12))) return false;
  }
  return true;
}

}  // namespace

std::vector<ExtReal> psi(const ReducedProblem& pb, std::span<const ExtReal> u) {
  require_size(u.size(), pb.nx(), "psi: potential");
  std::vector<ExtReal> hat = scaled_psi_ext(pb, u);
  const auto& k = pb.kernel();
  const bool finite_u = std::all_of(u.begin(), u.end(), [](ExtReal v) { return v.is_finite(); });
  for (std::size_t j = 0; j < hat.size(); ++j) {
    if (finite_u && hat[j].is_zero())
      throw Error("psi: vanishing Psi for a finite potential contradicts the support reduction");
    if (k.rescaled && !hat[j].is_inf() && !hat[j].is_zero()) {
      const double v = std::exp(k.log_scale[j] + std::log(hat[j].value()));
      if (v == 0.0) throw OverflowError("psi: value underflows the double range");
      hat[j] = ExtReal(v);
    }
  }
  return hat;
}

std::vector<ExtReal> phi(const ReducedProblem& pb, std::span<const ExtReal> u) {
  require_size(u.size(), pb.nx(), "phi: potential");
  return phi_from_scaled_ext(pb, scaled_psi_ext(pb, u));
}

double normalization_check(const ReducedProblem& pb, std::span<const double> u) {
  require_size(u.size(), pb.nx(), "normalization_check: potential");
  require_positive_finite(u, "normalization_check");
  const std::vector<ExtReal> ph = phi_from_scaled_ext(pb, to_ext(scaled_psi_fast(pb, u)));
  const auto mu = pb.mu();
  CompensatedSum acc;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (ph[i].is_inf()) throw NonFiniteIntermediate("normalization_check: Phi[u] is infinite");
    acc.add(ph[i].value() / u[i] * mu[i]);
  }
  return acc.value();
}

SupportIdentity support_identity(const ReducedProblem& pb, std::span<const ExtReal> u) {
  require_size(u.size(), pb.nx(), "support_identity: potential");
  for (ExtReal v : u)
    if (v.is_inf()) throw DomainError("support_identity: potential must be finite");
  const std::vector<ExtReal> hat = scaled_psi_ext(pb, u);
  const std::vector<ExtReal> ph = phi_from_scaled_ext(pb, hat);
  const auto mu = pb.mu();

  std::vector<ExtReal> terms;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (ph[i].is_zero()) continue;
    if (ph[i].is_inf())
      terms.push_back(ExtReal::infinity());
    else
      terms.push_back(mul_ext(ph[i].value() * mu[i], inv_ext(u[i])));
  }
  CompensatedSum rhs;
  for (std::size_t j = 0; j < hat.size(); ++j)
    if (hat[j].is_finite()) rhs.add(pb.nu()[j]);
  return {sum_ext(terms), rhs.value()};
}

SchemeState SchemeState::initial(std::vector<double> ceiling) {
  SchemeState s;
  s.n = 1;
  s.u = ceiling;
  s.ceiling = std::move(ceiling);
  return s;
}

SchemeState iterate_truncated(const SchemeState& state, const ReducedProblem& pb) {
  require_size(state.u.size(), pb.nx(), "iterate_truncated: potential");
  require_size(state.ceiling.size(), pb.nx(), "iterate_truncated: ceiling");
  if (state.n < 1) throw DomainError("iterate_truncated: iteration index must be >= 1");
  require_positive_finite(state.u, "iterate_truncated: u");

  SchemeState next;
  next.n = state.n + 1;
  next.ceiling = state.ceiling;
  next.phi_u = phi_fast_of(pb, state.u);
  next.early_exit_index = state.early_exit_index;

  const double floor_div = static_cast<double>(next.n);
  bool below_ceiling = true;
  next.u.resize(state.u.size());
  for (std::size_t i = 0; i < state.u.size(); ++i) {
    const double cap = state.ceiling[i];
    const double ph = next.phi_u[i];
    if (ph > cap) below_ceiling = false;
    next.u[i] = std::max(cap / floor_div, std::min(ph, cap));
  }
  if (below_ceiling && !next.early_exit_index) next.early_exit_index = state.n;
  return next;
}

std::string to_string(FixedPointStatus status) {
  switch (status) {
    case FixedPointStatus::converged_positive: return "converged-positive";
    case FixedPointStatus::degenerate_zero: return "degenerate-zero";
    case FixedPointStatus::max_iter: return "max-iter";
    case FixedPointStatus::divergent: return "divergent";
  }
  return "?";
}

FixedPointResult solve_fortet(const ReducedProblem& pb, const SolveOptions& opt) {
  std::vector<double> ceiling = opt.ceiling.empty() ? std::vector<double>(pb.nx(), 1.0) : opt.ceiling;
  require_size(ceiling.size(), pb.nx(), "solve_fortet: ceiling");
  require_positive_finite(ceiling, "solve_fortet: ceiling");
  if (!(opt.tol > 0.0)) throw DomainError("solve_fortet: tol must be positive");
  if (opt.max_iter < 1) throw DomainError("solve_fortet: max_iter must be >= 1");

  const auto mu = pb.mu();
  FixedPointResult res;
  SchemeState state = SchemeState::initial(ceiling);
  if (opt.observer) opt.observer(state);

  double prev_collapse = kInf;
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    SchemeState next = iterate_truncated(state, pb);
    const double change = sup_relative_change(next.u, state.u);

    double min_phi = kInf, collapse = 0.0;
    for (std::size_t i = 0; i < next.phi_u.size(); ++i) {
      min_phi = std::min(min_phi, next.phi_u[i]);
      collapse = std::max(collapse, next.phi_u[i] / ceiling[i]);
    }
    if (opt.record_trace) {
      TraceRow row;
      row.n = next.n;
      row.min_u = *std::min_element(next.u.begin(), next.u.end());
      row.max_u = *std::max_element(next.u.begin(), next.u.end());
      row.residual = change;
      row.min_phi = min_phi;
      row.normalization = normalization_value(next.phi_u, state.u, mu);
      res.trace.push_back(row);
    }
    res.iterations = it;
    res.residual = change;
    state = std::move(next);
    if (opt.observer) opt.observer(state);

    // Phi is either identically zero or everywhere positive for positive
    // kernels, so the collapse is measured on the largest entry.
    if ((collapse < opt.degenerate_threshold && collapse <= prev_collapse) ||
        floor_locked(pb, state)) {
      res.status = FixedPointStatus::degenerate_zero;
      break;
    }
    prev_collapse = collapse;
    if (change <= opt.tol) {
      res.status = FixedPointStatus::converged_positive;
      break;
    }
  }

  res.early_exit_index = state.early_exit_index;
  const std::vector<double> final_phi = phi_fast_of(pb, state.u);
  for (std::size_t i = 0; i < state.u.size(); ++i)
    res.limit_residual =
        std::max(res.limit_residual, std::abs(state.u[i] - std::min(final_phi[i], ceiling[i])));
  res.u_star = std::move(state.u);
  return res;
}

FixedPointResult solve_untruncated(const ReducedProblem& pb, std::span<const ExtReal> u1,
                                   const SolveOptions& opt) {
  require_size(u1.size(), pb.nx(), "solve_untruncated: start");
  if (!(opt.tol > 0.0)) throw DomainError("solve_untruncated: tol must be positive");
  if (opt.max_iter < 1) throw DomainError("solve_untruncated: max_iter must be >= 1");

  const auto mu = pb.mu();
  double scale = 0.0;
  for (ExtReal v : u1)
    if (v.is_finite()) scale = std::max(scale, v.value());

  auto as_doubles = [](std::span<const ExtReal> v) {
    std::vector<double> d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = v[i].to_double();
    return d;
  };

  FixedPointResult res;
  std::vector<ExtReal> u(u1.begin(), u1.end());
  SchemeState view;
  view.n = 1;
  view.u = as_doubles(u);
  if (opt.observer) opt.observer(view);

  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    std::vector<ExtReal> next;
    try {
      next = phi_from_scaled_ext(pb, scaled_psi_ext(pb, u));
    } catch (const OverflowError&) {
      res.status = FixedPointStatus::divergent;
      res.iterations = it;
      break;
    }
    res.iterations = it;

    double change = 0.0, min_phi = kInf, max_phi = 0.0;
    bool any_inf = false;
    CompensatedSum norm;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const ExtReal a = u[i], b = next[i];
      min_phi = std::min(min_phi, b.to_double());
      max_phi = std::max(max_phi, b.to_double());
      any_inf = any_inf || b.is_inf();
      if (a.is_finite() && !a.is_zero() && b.is_finite())
        change = std::max(change, std::abs(b.value() - a.value()) / a.value());
      else if (a != b)
        change = kInf;
      if (b > ExtReal::zero()) {
        if (b.is_inf() || a.is_zero())
          norm.add(kInf);
        else if (!a.is_inf())
          norm.add(b.value() / a.value() * mu[i]);
      }
    }
    if (opt.record_trace) {
      TraceRow row;
      row.n = it + 1;
      const auto d = as_doubles(next);
      row.min_u = *std::min_element(d.begin(), d.end());
      row.max_u = *std::max_element(d.begin(), d.end());
      row.residual = change;
      row.min_phi = min_phi;
      row.normalization = norm.value();
      res.trace.push_back(row);
    }
    res.residual = change;
    u = std::move(next);
    view.n = it + 1;
    view.u = as_doubles(u);
    if (opt.observer) opt.observer(view);

    if (any_inf) {
      res.status = FixedPointStatus::divergent;
      break;
    }
    if (max_phi == 0.0 || (scale > 0.0 && max_phi < opt.degenerate_threshold * scale)) {
      res.status = FixedPointStatus::degenerate_zero;
      break;
    }
    if (change <= opt.tol) {
      res.status = FixedPointStatus::converged_positive;
      break;
    }
  }

  res.u_star = as_doubles(u);
  if (res.status == FixedPointStatus::converged_positive) {
    const std::vector<double> final_phi = phi_fast_of(pb, res.u_star);
    for (std::size_t i = 0; i < u.size(); ++i)
      res.limit_residual = std::max(res.limit_residual, std::abs(res.u_star[i] - final_phi[i]));
  } else {
    res.limit_residual = kInf;
  }
  return res;
}

const FixedPointResult& require_converged(const FixedPointResult& result) {
  if (result.status != FixedPointStatus::converged_positive) throw MaxIterExceeded(result);
  return result;
}

SchrodingerSolution extract_solution(const ReducedProblem& pb, std::span<const double> u_star) {
  require_size(u_star.size(), pb.nx(), "extract_solution: potential");
  for (std::size_t i = 0; i < u_star.size(); ++i)
    if (!std::isfinite(u_star[i]) || !(u_star[i] > 0.0))
      throw DegeneratePotential("extract_solution: u(x_" + std::to_string(i) +
                                ") is zero or infinite");
  const std::vector<double> hat = scaled_psi_fast(pb, u_star);
  for (std::size_t j = 0; j < hat.size(); ++j)
    if (!std::isfinite(hat[j]) || !(hat[j] > 0.0))
      throw DegeneratePotential("extract_solution: Psi[u](y_" + std::to_string(j) +
                                ") is zero or infinite");

  const auto mu = pb.mu();
  const auto nu = pb.nu();
  const auto& k = pb.kernel();
  const std::size_t nx = pb.nx(), ny = pb.ny();

  SchrodingerSolution s;
  s.a.resize(nx);
  CompensatedSum mass;
  for (std::size_t i = 0; i < nx; ++i) {
    s.a[i] = mu[i] / u_star[i];
    mass.add(s.a[i]);
  }
  const double kappa = mass.value();

  s.pi = DenseMatrix(nx, ny);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) s.pi(i, j) = s.a[i] * k.scaled(i, j) * (nu[j] / hat[j]);

  s.u.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    s.a[i] /= kappa;
    s.u[i] = u_star[i] * kappa;
  }
  s.b.resize(ny);
  for (std::size_t j = 0; j < ny; ++j) {
    const double log_b = std::log(kappa) + std::log(nu[j]) - k.log_scale[j] - std::log(hat[j]);
    if (log_b > std::log(kOverflowGuard)) throw OverflowError("extract_solution: b exceeds the overflow guard");
    s.b[j] = std::exp(log_b);
  }

  std::vector<CompensatedSum> cols(ny);
  for (std::size_t i = 0; i < nx; ++i) {
    CompensatedSum row;
    for (std::size_t j = 0; j < ny; ++j) {
      row.add(s.pi(i, j));
      cols[j].add(s.pi(i, j));
    }
    s.marginal_err_x = std::max(s.marginal_err_x, std::abs(row.value() - mu[i]));
  }
  for (std::size_t j = 0; j < ny; ++j)
    s.marginal_err_y = std::max(s.marginal_err_y, std::abs(cols[j].value() - nu[j]));

  const auto m = pb.m();
  const auto n = pb.n();
  CompensatedSum h;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      if (s.pi(i, j) > 0.0)
        h.add(s.pi(i, j) *
              (std::log(s.a[i]) + std::log(s.b[j]) - std::log(m[i]) - std::log(n[j])));
  s.rel_entropy = h.value();
  return s;
}

double relative_entropy(const ReducedProblem& pb, const DenseMatrix& pi) {
  if (pi.rows() != pb.nx() || pi.cols() != pb.ny())
    throw DimensionMismatch("relative_entropy: coupling has the wrong shape");
  const auto& lp = pb.kernel().log_values;
  const auto m = pb.m();
  const auto n = pb.n();
  CompensatedSum h;
  for (std::size_t i = 0; i < pi.rows(); ++i)
    for (std::size_t j = 0; j < pi.cols(); ++j) {
      const double v = pi(i, j);
      if (v < 0.0 || !std::isfinite(v)) throw DomainError("relative_entropy: invalid coupling entry");
      if (v == 0.0) continue;
      if (lp(i, j) == kNegInf) return kInf;
      h.add(v * (std::log(v) - lp(i, j) - std::log(m[i]) - std::log(n[j])));
    }
  return h.value();
}

SchrodingerSolution sinkhorn_baseline(const ReducedProblem& pb, const SinkhornOptions& opt) {
  const auto mu = pb.mu();
  const auto nu = pb.nu();
  const auto& k = pb.kernel();
  const std::size_t nx = pb.nx(), ny = pb.ny();

  std::vector<double> a(nx, 1.0), bh(ny, 1.0);
  bool done = false;
  std::size_t it = 0;
  double err = kInf;
  for (it = 1; it <= opt.max_iter && !done; ++it) {
    for (std::size_t j = 0; j < ny; ++j) bh[j] = nu[j] / dot(k.scaled_t.row(j), a);
    for (std::size_t i = 0; i < nx; ++i) a[i] = mu[i] / dot(k.scaled.row(i), bh);
    err = 0.0;
    for (std::size_t j = 0; j < ny; ++j)
      err = std::max(err, std::abs(bh[j] * dot(k.scaled_t.row(j), a) - nu[j]));
    if (!std::isfinite(err)) break;
    done = err <= opt.tol;
  }
  if (!done) {
    std::ostringstream os;
    os << "sinkhorn_baseline: marginal error " << err << " after " << (it - 1) << " iterations";
    throw MaxIterExceeded(os.str());
  }

  for (double v : a)
    if (!(v > 0.0) || !std::isfinite(v))
      throw DegeneratePotential("sinkhorn_baseline: scaling of x left (0, inf)");
  for (double v : bh)
    if (!(v > 0.0) || !std::isfinite(v))
      throw DegeneratePotential("sinkhorn_baseline: scaling of y left (0, inf)");
  CompensatedSum mass;
  for (double v : a) mass.add(v);
  const double kappa = mass.value();
  SchrodingerSolution s;
  s.a.resize(nx);
  s.u.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    s.a[i] = a[i] / kappa;
    s.u[i] = mu[i] / s.a[i];
  }
  s.b.resize(ny);
  for (std::size_t j = 0; j < ny; ++j) s.b[j] = std::exp(std::log(bh[j] * kappa) - k.log_scale[j]);

  s.pi = DenseMatrix(nx, ny);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) s.pi(i, j) = a[i] * k.scaled(i, j) * bh[j];

  std::vector<CompensatedSum> cols(ny);
  for (std::size_t i = 0; i < nx; ++i) {
    CompensatedSum row;
    for (std::size_t j = 0; j < ny; ++j) {
      row.add(s.pi(i, j));
      cols[j].add(s.pi(i, j));
    }
    s.marginal_err_x = std::max(s.marginal_err_x, std::abs(row.value() - mu[i]));
  }
  for (std::size_t j = 0; j < ny; ++j)
    s.marginal_err_y = std::max(s.marginal_err_y, std::abs(cols[j].value() - nu[j]));
  s.rel_entropy = relative_entropy(pb, s.pi);
  return s;
}

DiscreteProblem twist(const ReducedProblem& pb, std::span<const double> alpha,
                      std::span<const double> beta) {
  require_size(alpha.size(), pb.nx(), "twist: alpha");
  require_size(beta.size(), pb.ny(), "twist: beta");
  require_positive_finite(alpha, "twist: alpha");
  require_positive_finite(beta, "twist: beta");

  DiscreteProblem out;
  out.x_space = pb.problem().x_space;
  out.y_space = pb.problem().y_space;
  out.mu = pb.problem().mu;
  out.nu = pb.problem().nu;
  const auto& lp = pb.kernel().log_values;
  DenseMatrix e(pb.nx(), pb.ny());
  for (std::size_t i = 0; i < pb.nx(); ++i)
    for (std::size_t j = 0; j < pb.ny(); ++j)
      e(i, j) = lp(i, j) == kNegInf ? 0.0 : std::exp(std::log(alpha[i]) + std::log(beta[j]) + lp(i, j));
  out.kernel = Kernel::dense(std::move(e));
  return out;
}

SchrodingerSolution untwist_solution(const SchrodingerSolution& twisted,
                                     std::span<const double> alpha,
                                     std::span<const double> beta) {
  require_size(alpha.size(), twisted.a.size(), "untwist_solution: alpha");
  require_size(beta.size(), twisted.b.size(), "untwist_solution: beta");
  require_positive_finite(alpha, "untwist_solution: alpha");
  require_positive_finite(beta, "untwist_solution: beta");

  SchrodingerSolution s = twisted;
  CompensatedSum mass;
  for (std::size_t i = 0; i < s.a.size(); ++i) {
    s.a[i] *= alpha[i];
    mass.add(s.a[i]);
  }
  const double kappa = mass.value();
  for (std::size_t i = 0; i < s.a.size(); ++i) {
    s.a[i] /= kappa;
    s.u[i] = twisted.u[i] / alpha[i] * kappa;
  }
  for (std::size_t j = 0; j < s.b.size(); ++j) s.b[j] *= beta[j] * kappa;

  // H(pi | p m n) = H(pi | p~ m n) + sum pi (log alpha + log beta).
  CompensatedSum shift;
  for (std::size_t i = 0; i < s.pi.rows(); ++i)
    for (std::size_t j = 0; j < s.pi.cols(); ++j)
      if (s.pi(i, j) > 0.0) shift.add(s.pi(i, j) * (std::log(alpha[i]) + std::log(beta[j])));
  s.rel_entropy = twisted.rel_entropy + shift.value();
  return s;
}

}  // namespace schrodinger
