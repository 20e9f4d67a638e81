#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "rng.hpp"
#include "spectra.hpp"

namespace tgprior {

struct PosteriorSummary {
  Vector mean;
  Vector cov_diag;  // diagonal mode
  Matrix cov;       // dense mode, empty otherwise
  long long k = 0;
  bool dense = false;
};

// Diagonal prior variances c_1..c_k (entries past k are ignored).
inline PosteriorSummary posterior_direct(const Vector& c, long long k, double n, const Vector& Y) {
  if (!(n > 0.0)) throw DomainError("posterior_direct: n must be positive");
  if (k < 0 || k > c.size() || k > Y.size()) throw DomainError("posterior_direct: k out of range");
  PosteriorSummary p;
  p.k = k;
  p.mean = Vector::Zero(Y.size());
  p.cov_diag = Vector::Zero(Y.size());
  const double h = 1.0 / n;
  for (long long j = 0; j < k; ++j) {
    p.mean(j) = c(j) * Y(j) / (c(j) + h);
    p.cov_diag(j) = h * c(j) / (c(j) + h);
  }
  return p;
}

// Dense prior covariance C_k of rank <= k.
inline PosteriorSummary posterior_direct_dense(const Matrix& Ck, long long k, double n, const Vector& Y) {
  if (!(n > 0.0)) throw DomainError("posterior_direct: n must be positive");
  const long long N = Ck.rows();
  const Matrix Mreg = Ck + Matrix::Identity(N, N) / n;
  const Eigen::LDLT<Matrix> solver(Mreg);
  PosteriorSummary p;
  p.k = k;
  p.dense = true;
  p.mean = solver.solve(Ck * Y);
  p.cov = solver.solve(Ck) / n;
  p.cov = 0.5 * (p.cov + p.cov.transpose());
  return p;
}

struct SpcReport {
  double bias_sq = 0.0;
  double variance = 0.0;
  double spread = 0.0;
  double total = 0.0;
  std::optional<double> mc_estimate;
  std::optional<double> mc_stderr;
};

// Closed form in a basis where the prior is diagonal: c_j prior variances,
// g0 truth coordinates (full length).
inline SpcReport spc_exact_diagonal(const Vector& c, const Vector& g0, long long k, double n) {
  if (k < 0 || k > g0.size() || k > c.size()) throw DomainError("spc_exact: k out of range");
  if (!(n > 0.0)) throw DomainError("spc_exact: n must be positive");
  const double h = 1.0 / n;
  SpcReport r;
  for (long long j = 0; j < g0.size(); ++j) {
    if (j < k) {
      const double d = c(j) + h;
      const double b = h * g0(j) / d;
      r.bias_sq += b * b;
      r.variance += h * c(j) * c(j) / (d * d);
      r.spread += h * c(j) / d;
    } else {
      r.bias_sq += g0(j) * g0(j);
    }
  }
  r.total = r.bias_sq + r.variance + r.spread;
  return r;
}

inline SpcReport spc_exact(const SequenceProblem& sp, long long k) {
  sp.validate();
  if (k > sp.N) throw DomainError("spc_exact: k exceeds N");
  return spc_exact_diagonal(sp.sLg_vec(), sp.g0(), k, sp.n);
}

// Truncated prior on g: C_k = P_k Lambda^g P_k with P_k the top-k eigenspace.
inline Matrix truncated_prior_dense(const MatrixProblem& mp, long long k) {
  const SymEig e = sym_eig_desc(mp.LambdaG());
  const Matrix V = e.vectors.leftCols(k);
  return V * e.values.head(k).asDiagonal() * V.transpose();
}

// Matrix formulas: bias (1/n)(C_k+1/n)^{-1} g0, variance (1/n) tr((C_k+1/n)^{-2} C_k^2),
// spread (1/n) tr((C_k+1/n)^{-1} C_k).
inline SpcReport spc_exact(const MatrixProblem& mp, long long k) {
  if (k < 0 || k > mp.N) throw DomainError("spc_exact: k out of range");
  const Matrix Ck = truncated_prior_dense(mp, k);
  const double h = 1.0 / mp.n;
  const Matrix Mreg = Ck + h * Matrix::Identity(mp.N, mp.N);
  const Eigen::LDLT<Matrix> solver(Mreg);
  const Matrix MinvC = solver.solve(Ck);
  SpcReport r;
  r.bias_sq = (h * solver.solve(mp.g0())).squaredNorm();
  r.variance = h * (MinvC * MinvC.transpose()).trace();
  r.spread = h * MinvC.trace();
  r.total = r.bias_sq + r.variance + r.spread;
  return r;
}

struct McEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

// Outer expectation over Y = g0 + xi/sqrt(n); the inner posterior expectation
// is ||g0 - mean||^2 + tr C_post in closed form. Coordinates past k carry no
// randomness and contribute their squared truth.
inline McEstimate spc_monte_carlo_diagonal(const Vector& c, const Vector& g0, long long k, double n,
                                           long long reps, std::uint64_t seed) {
  if (reps < 100) throw DomainError("spc_monte_carlo: reps must be >= 100");
  if (k < 0 || k > g0.size() || k > c.size()) throw DomainError("spc_monte_carlo: k out of range");
  const double h = 1.0 / n, sd = std::sqrt(h);
  double tail = 0.0, spread = 0.0;
  for (long long j = 0; j < g0.size(); ++j) {
    if (j < k) spread += h * c(j) / (c(j) + h);
    else tail += g0(j) * g0(j);
  }
  std::vector<double> vals(reps);
  parallel_for(reps, [&](long long r) {
    auto rng = stream_rng(seed, static_cast<std::uint64_t>(r));
    std::normal_distribution<double> nd;
    double err = 0.0;
    for (long long j = 0; j < k; ++j) {
      const double y = g0(j) + sd * nd(rng);
      const double m = c(j) * y / (c(j) + h);
      err += (g0(j) - m) * (g0(j) - m);
    }
    vals[r] = err + tail + spread;
  });
  double sum = 0.0;
  for (double v : vals) sum += v;
  const double mean = sum / static_cast<double>(reps);
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps))};
}

inline McEstimate spc_monte_carlo(const SequenceProblem& sp, long long k, long long reps, std::uint64_t seed) {
  sp.validate();
  return spc_monte_carlo_diagonal(sp.sLg_vec(), sp.g0(), k, sp.n, reps, seed);
}

// Dense case: rotate into the eigenbasis of Lambda^g, where C_k is diagonal.
inline McEstimate spc_monte_carlo(const MatrixProblem& mp, long long k, long long reps, std::uint64_t seed) {
  const SymEig e = sym_eig_desc(mp.LambdaG());
  return spc_monte_carlo_diagonal(e.values, e.vectors.transpose() * mp.g0(), k, mp.n, reps, seed);
}

// E_0 Pi(||f - f0|| > M eps_n | Y) by nested Monte Carlo. Posterior on f is
// coordinatewise Normal(l a Y/(a^2 l + 1/n), (l/n)/(a^2 l + 1/n)) for j <= k and
// the point mass 0 beyond.
inline double contraction_probability(const SequenceProblem& sp, long long k, double eps_n, double M,
                                      long long reps_outer, long long reps_inner, std::uint64_t seed) {
  sp.validate();
  if (k < 0 || k > sp.N) throw DomainError("contraction_probability: k out of range");
  if (reps_outer < 1 || reps_inner < 1) throw DomainError("contraction_probability: reps must be positive");
  const Vector sH = sp.sH_vec(), lam = sp.sLf_vec();
  const double h = 1.0 / sp.n, radius_sq = (M * eps_n) * (M * eps_n);
  double tail = 0.0;
  for (long long j = k; j < sp.N; ++j) tail += sp.f0(j) * sp.f0(j);
  std::vector<double> mass(reps_outer);
  parallel_for(reps_outer, [&](long long r) {
    auto rng = stream_rng(seed, static_cast<std::uint64_t>(r));
    std::normal_distribution<double> nd;
    std::vector<double> mean(k), sd(k);
    for (long long j = 0; j < k; ++j) {
      const double a = std::sqrt(sH(j)), l = lam(j);
      const double y = a * sp.f0(j) + std::sqrt(h) * nd(rng);
      const double d = a * a * l + h;
      mean[j] = l * a * y / d;
      sd[j] = std::sqrt(l * h / d);
    }
    long long outside = 0;
    for (long long i = 0; i < reps_inner; ++i) {
      double e = tail;
      for (long long j = 0; j < k; ++j) {
        const double f = mean[j] + sd[j] * nd(rng);
        e += (f - sp.f0(j)) * (f - sp.f0(j));
      }
      if (e > radius_sq) ++outside;
    }
    mass[r] = static_cast<double>(outside) / static_cast<double>(reps_inner);
  });
  double sum = 0.0;
  for (double m : mass) sum += m;
  return sum / static_cast<double>(reps_outer);
}

}  // namespace tgprior
