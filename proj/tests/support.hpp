#pragma once

// Test-only helpers: random problem generators and independent reference
// computations. The oracles use long double and plain loops and share no
// code with the library's Psi/Phi paths.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "schrodinger/problem.hpp"

namespace testing_support {

using Rng = std::mt19937_64;
using LMatrix = std::vector<std::vector<long double>>;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

inline std::size_t size_in(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline std::vector<double> probability(Rng& rng, std::size_t n, double lo = 0.05) {
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& v : w) s += (v = uniform(rng, lo, 1.0));
  for (auto& v : w) v /= s;
  return w;
}

inline schrodinger::DiscreteSpace line_space(std::size_t n, double weight = 1.0) {
  std::vector<std::vector<double>> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({static_cast<double>(i)});
  return schrodinger::DiscreteSpace::from_points(pts, std::vector<double>(n, weight));
}

inline schrodinger::DiscreteProblem dense_problem(const std::vector<std::vector<double>>& p,
                                                  std::vector<double> mu, std::vector<double> nu) {
  schrodinger::DiscreteProblem pb;
  pb.x_space = line_space(p.size());
  pb.y_space = line_space(p.front().size());
  schrodinger::DenseMatrix m(p.size(), p.front().size());
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p[i].size(); ++j) m(i, j) = p[i][j];
  pb.kernel = schrodinger::Kernel::dense(std::move(m));
  pb.mu = std::move(mu);
  pb.nu = std::move(nu);
  return pb;
}

/// Strictly positive dense problem with entries log-uniform in [lo, hi].
inline schrodinger::DiscreteProblem random_positive(Rng& rng, std::size_t nx, std::size_t ny,
                                                    double lo = 0.1, double hi = 10.0) {
  std::vector<std::vector<double>> p(nx, std::vector<double>(ny));
  for (auto& row : p)
    for (auto& v : row) v = log_uniform(rng, lo, hi);
  auto pb = dense_problem(p, probability(rng, nx), probability(rng, ny));
  for (auto& w : pb.x_space.weights) w = uniform(rng, 0.5, 2.0);
  for (auto& w : pb.y_space.weights) w = uniform(rng, 0.5, 2.0);
  return pb;
}

inline schrodinger::DiscreteProblem two_by_two() {
  return dense_problem({{1, 2}, {3, 4}}, {0.5, 0.5}, {0.5, 0.5});
}

// --- oracles ----------------------------------------------------------------

inline LMatrix to_long(const schrodinger::DenseMatrix& m) {
  LMatrix out(m.rows(), std::vector<long double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

/// Psi[u]_j = sum_i P_ij mu_i / u_i for positive finite u.
inline std::vector<long double> psi_direct(const LMatrix& p, const std::vector<double>& mu,
                                           const std::vector<double>& u) {
  std::vector<long double> out(p.front().size(), 0.0L);
  for (std::size_t j = 0; j < out.size(); ++j)
    for (std::size_t i = 0; i < p.size(); ++i) out[j] += p[i][j] * mu[i] / u[i];
  return out;
}

inline std::vector<long double> phi_direct(const LMatrix& p, const std::vector<double>& mu,
                                           const std::vector<double>& nu,
                                           const std::vector<double>& u) {
  const auto ps = psi_direct(p, mu, u);
  std::vector<long double> out(p.size(), 0.0L);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < ps.size(); ++j) out[i] += p[i][j] * nu[j] / ps[j];
  return out;
}

struct Scaling {
  std::vector<long double> a, b;
};

/// Plain alternating scaling in long double, fixed iteration count.
inline Scaling ipf(const LMatrix& p, const std::vector<double>& mu, const std::vector<double>& nu,
                   int iterations) {
  const std::size_t nx = p.size(), ny = p.front().size();
  Scaling s{std::vector<long double>(nx, 1.0L), std::vector<long double>(ny, 1.0L)};
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t j = 0; j < ny; ++j) {
      long double t = 0;
      for (std::size_t i = 0; i < nx; ++i) t += p[i][j] * s.a[i];
      s.b[j] = nu[j] / t;
    }
    for (std::size_t i = 0; i < nx; ++i) {
      long double t = 0;
      for (std::size_t j = 0; j < ny; ++j) t += p[i][j] * s.b[j];
      s.a[i] = mu[i] / t;
    }
  }
  return s;
}

/// sum_j nu_j / sum_i P_ij mu_i
inline long double reciprocal_direct(const LMatrix& p, const std::vector<double>& mu,
                                     const std::vector<double>& nu) {
  long double total = 0;
  for (std::size_t j = 0; j < nu.size(); ++j) {
    long double inner = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) inner += p[i][j] * mu[i];
    total += nu[j] / inner;
  }
  return total;
}

/// max_i sum_j (P_ij/P_oj)^r P_oj nu_j / Psi[U]_j / U_i^r for positive P.
inline long double ratio_moment_direct(const LMatrix& p, const std::vector<double>& mu,
                                       const std::vector<double>& nu, const std::vector<double>& u,
                                       double r, std::size_t xo) {
  const auto ps = psi_direct(p, mu, u);
  long double best = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    long double s = 0;
    for (std::size_t j = 0; j < nu.size(); ++j)
      s += std::pow(p[i][j] / p[xo][j], (long double)r) * p[xo][j] * nu[j] / ps[j];
    best = std::max(best, s / std::pow((long double)u[i], (long double)r));
  }
  return best;
}

/// Whether a P b has marginals mu, nu for some positive a, b. For every row
/// set A with neighbourhood N(A) one needs mu(A) <= nu(N(A)), and equality
/// only when no row outside A reaches N(A). Exponential in the row count.
inline bool positive_scaling_exists(const schrodinger::DenseMatrix& p, const std::vector<double>& mu,
                                    const std::vector<double>& nu) {
  const std::size_t nx = mu.size(), ny = nu.size();
  for (std::size_t mask = 1; mask < (std::size_t{1} << nx); ++mask) {
    std::vector<bool> reach(ny, false);
    long double ma = 0, nb = 0;
    for (std::size_t i = 0; i < nx; ++i)
      if (mask >> i & 1) {
        ma += mu[i];
        for (std::size_t j = 0; j < ny; ++j)
          if (p(i, j) > 0) reach[j] = true;
      }
    for (std::size_t j = 0; j < ny; ++j)
      if (reach[j]) nb += nu[j];
    if (ma > nb + 1e-12L) return false;
    if (ma >= nb - 1e-12L) {
      for (std::size_t i = 0; i < nx; ++i)
        if (!(mask >> i & 1))
          for (std::size_t j = 0; j < ny; ++j)
            if (reach[j] && p(i, j) > 0) return false;
    }
  }
  return true;
}

/// Relative entropy of a coupling against P_ij m_i n_j.
inline long double entropy_direct(const std::vector<std::vector<long double>>& pi, const LMatrix& p,
                                  const std::vector<double>& m, const std::vector<double>& n) {
  long double h = 0;
  for (std::size_t i = 0; i < pi.size(); ++i)
    for (std::size_t j = 0; j < pi[i].size(); ++j)
      if (pi[i][j] > 0) h += pi[i][j] * std::log(pi[i][j] / (p[i][j] * m[i] * n[j]));
  return h;
}

/// Minimizes the relative entropy over the transport polytope by gradient
/// steps projected onto the zero-marginal subspace, with backtracking to
/// stay in the interior. Starts from the product coupling.
inline long double entropy_minimum(const LMatrix& p, const std::vector<double>& mu,
                                   const std::vector<double>& nu, const std::vector<double>& m,
                                   const std::vector<double>& n, int steps) {
  const std::size_t nx = mu.size(), ny = nu.size();
  std::vector<std::vector<long double>> pi(nx, std::vector<long double>(ny));
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) pi[i][j] = (long double)mu[i] * nu[j];
  long double step = 0.1L;
  long double h = entropy_direct(pi, p, m, n);
  std::vector<std::vector<long double>> g(nx, std::vector<long double>(ny)), trial = pi;
  for (int it = 0; it < steps; ++it) {
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j)
        g[i][j] = std::log(pi[i][j] / (p[i][j] * m[i] * n[j])) + 1.0L;
    std::vector<long double> rm(nx, 0), cm(ny, 0);
    long double all = 0;
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) {
        rm[i] += g[i][j] / ny;
        cm[j] += g[i][j] / nx;
        all += g[i][j] / (nx * ny);
      }
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) g[i][j] = g[i][j] - rm[i] - cm[j] + all;
    long double t = step * 2;
    while (true) {
      bool interior = true;
      for (std::size_t i = 0; i < nx && interior; ++i)
        for (std::size_t j = 0; j < ny; ++j) {
          trial[i][j] = pi[i][j] - t * g[i][j];
          if (!(trial[i][j] > 0)) {
            interior = false;
            break;
          }
        }
      if (interior) {
        const long double ht = entropy_direct(trial, p, m, n);
        if (ht <= h) {
          pi = trial;
          h = ht;
          step = t;
          break;
        }
      }
      t /= 2;
      if (t < 1e-30L) return h;
    }
  }
  return h;
}

}  // namespace testing_support
