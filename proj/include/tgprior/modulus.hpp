#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "indexfn.hpp"
#include "linalg.hpp"
#include "spectra.hpp"
#include "truncation.hpp"

namespace tgprior {

struct SubspaceSpec {
  enum class Mode { singular, explicit_ } mode = Mode::singular;
  long long k = 0;
  Matrix basis;  // explicit mode only, N x k orthonormal columns

  static SubspaceSpec singular(long long k) {
    if (k < 0) throw DomainError("SubspaceSpec: k must be >= 0");
    return {Mode::singular, k, {}};
  }
  static SubspaceSpec explicit_basis(Matrix B) {
    const Matrix gram = B.transpose() * B;
    if ((gram - Matrix::Identity(B.cols(), B.cols())).cwiseAbs().maxCoeff() > 1e-10) {
      throw DomainError("SubspaceSpec: basis columns must be orthonormal");
    }
    const long long k = B.cols();
    return {Mode::explicit_, k, std::move(B)};
  }
};

// Basis of the subspace; singular mode takes the top-k eigenvectors of `ref`.
inline Matrix resolve_basis(const SubspaceSpec& sub, const Matrix& ref) {
  if (sub.mode == SubspaceSpec::Mode::explicit_) return sub.basis;
  if (sub.k > ref.rows()) throw DomainError("SubspaceSpec: k exceeds dimension");
  return sym_eig_desc(ref).vectors.leftCols(sub.k);
}

// First k unit vectors: the singular subspace of a diagonal operator with
// non-increasing diagonal.
inline Matrix unit_basis(long long N, long long k) { return Matrix::Identity(N, N).leftCols(k); }

struct ModulusResult {
  double value = 0.0;
  bool feasible = false;
  std::optional<Vector> maximizer;
  long long k = 0;
  double delta = 0.0;
};

// Diagonal H = diag(s), singular X_k. With T^2 = sum_{j>k} s_j f0_j^2:
// value^2 = sum_{j>k} f0_j^2 + (delta^2 - T^2)/s_k when delta^2 >= T^2.
inline ModulusResult modulus_exact_diagonal(const Vector& s, const Vector& f0, long long k, double delta) {
  const long long N = f0.size();
  if (k < 0 || k > N || s.size() < N) throw DomainError("modulus_exact_diagonal: k out of range");
  if (delta < 0.0) throw DomainError("modulus_exact_diagonal: delta must be >= 0");
  ModulusResult r;
  r.k = k;
  r.delta = delta;
  double T2 = 0.0, tail = 0.0;
  for (long long j = k; j < N; ++j) {
    T2 += s(j) * f0(j) * f0(j);
    tail += f0(j) * f0(j);
  }
  const double d2 = delta * delta;
  if (d2 < T2) return r;
  r.feasible = true;
  const double budget = k > 0 ? (d2 - T2) / s(k - 1) : 0.0;
  r.value = std::sqrt(tail + budget);
  Vector f = Vector::Zero(N);
  f.head(k) = f0.head(k);
  if (k > 0) f(k - 1) += std::sqrt(budget);
  r.maximizer = f;
  return r;
}

inline ModulusResult modulus_exact_diagonal(const SpectrumModel& sH, const Vector& f0, long long k, double delta) {
  return modulus_exact_diagonal(spectrum_vector(sH, f0.size()), f0, k, delta);
}

// max ||f - f0|| over f in span(B) with ||H^{1/2}(f - f0)|| <= delta.
//
// Write f0 = B c0 + r with r orthogonal to span(B) and f = B(c0 + d). The
// constraint is the ellipsoid (d - d*)' G (d - d*) <= rho^2 with G = B'HB,
// d* = G^{-1} B'Hr, rho^2 = delta^2 - r'Hr + b'G^{-1}b, and the objective is
// ||d||^2 + ||r||^2. In the eigenbasis of G the maximizer is
// y_i = nu l_i e_i / (nu l_i - 1) with nu > 1/l_min solving the secular
// equation sum l_i e_i^2 / (nu l_i - 1)^2 = rho^2; if the l_min component of
// e vanishes and the secular sum stays below rho^2 at nu = 1/l_min (hard
// case) the leftover budget goes to the l_min direction.
inline ModulusResult modulus_numeric(const Matrix& H, const Matrix& B, const Vector& f0, double delta) {
  if (delta < 0.0) throw DomainError("modulus_numeric: delta must be >= 0");
  const long long k = B.cols();
  ModulusResult res;
  res.k = k;
  res.delta = delta;
  const Vector c0 = B.transpose() * f0;
  const Vector r = f0 - B * c0;
  const double gamma0 = r.dot(H * r);
  const double d2 = delta * delta;
  if (k == 0) {
    if (d2 < gamma0) return res;
    res.feasible = true;
    res.value = f0.norm();
    res.maximizer = Vector::Zero(f0.size());
    return res;
  }
  const Matrix G = B.transpose() * H * B;
  const Vector b = B.transpose() * (H * r);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (G + G.transpose()));
  const Vector lam = es.eigenvalues();  // ascending
  const Matrix Q = es.eigenvectors();
  if (lam(0) <= 0.0) throw DomainError("modulus_numeric: H is singular on the subspace");
  const Vector qb = Q.transpose() * b;
  const Vector e = qb.cwiseQuotient(lam);
  const double rho2 = d2 - gamma0 + qb.dot(e);
  const double scale = std::max({d2, gamma0, 1e-300});
  if (rho2 < -1e-12 * scale) return res;

  Vector y = e;
  if (rho2 > 0.0) {
    const double lmin = lam(0);
    long long g = 1;
    while (g < k && lam(g) <= lmin * (1.0 + 1e-10)) ++g;
    double eg2 = 0.0;
    for (long long i = 0; i < g; ++i) eg2 += e(i) * e(i);
    // u = nu*lmin - 1 > 0
    auto denom = [&](long long i, double u) { return (1.0 + u) * lam(i) / lmin - 1.0; };
    auto h = [&](double u) {
      double s = 0.0;
      for (long long i = 0; i < k; ++i) {
        const double dn = i < g ? u : denom(i, u);
        s += lam(i) * e(i) * e(i) / (dn * dn);
      }
      return s;
    };
    double h_rest = 0.0;
    for (long long i = g; i < k; ++i) {
      const double dn = denom(i, 0.0);
      h_rest += lam(i) * e(i) * e(i) / (dn * dn);
    }
    const bool hard = eg2 <= 1e-28 * (e.squaredNorm() + rho2 / lmin) && h_rest <= rho2;
    if (hard) {
      for (long long i = g; i < k; ++i) y(i) = lam(i) / lmin * e(i) / denom(i, 0.0);
      for (long long i = 0; i < g; ++i) y(i) = e(i);
      y(0) += std::sqrt(std::max(rho2 - h_rest, 0.0) / lmin);
    } else {
      double lo = 1.0, hi = 1.0;
      while (h(hi) > rho2) hi *= 2.0;
      while (h(lo) < rho2 && lo > 1e-300) lo *= 0.5;
      double a = std::log(lo), bb = std::log(hi);
      double u = hi;
      for (int it = 0; it < 300; ++it) {
        const double m = 0.5 * (a + bb);
        u = std::exp(m);
        const double hv = h(u);
        if (std::abs(hv - rho2) <= 1e-13 * rho2) break;
        if (hv > rho2) a = m; else bb = m;
        if (bb - a < 1e-16) break;
      }
      for (long long i = 0; i < k; ++i) {
        const double nl = (1.0 + u) * lam(i) / lmin;
        y(i) = nl * e(i) / (i < g ? u : denom(i, u));
      }
    }
  }
  res.feasible = true;
  res.value = std::sqrt(y.squaredNorm() + r.squaredNorm());
  res.maximizer = Vector(B * (c0 + Q * y));
  return res;
}

// Dense problem; singular subspaces are eigenspaces of Lambda^f.
inline ModulusResult modulus_numeric(const MatrixProblem& mp, const SubspaceSpec& sub, const Vector& f0,
                                     double delta) {
  return modulus_numeric(mp.H, resolve_basis(sub, mp.LambdaF), f0, delta);
}

inline ModulusResult modulus_numeric(const SequenceProblem& sp, const SubspaceSpec& sub, const Vector& f0,
                                     double delta) {
  const Matrix H = sp.sH_vec().asDiagonal();
  const Matrix B = sub.mode == SubspaceSpec::Mode::singular ? unit_basis(sp.N, sub.k) : sub.basis;
  return modulus_numeric(H, B, f0, delta);
}

// ||H^{1/2}(I - P_k)||
inline double degree_of_approximation(const Vector& s, long long k) {
  if (k < 0) throw DomainError("degree_of_approximation: k must be >= 0");
  return k >= s.size() ? 0.0 : std::sqrt(s(k));
}

inline double degree_of_approximation(const Matrix& H, const Matrix& B) {
  const long long N = H.rows();
  if (B.cols() >= N) return 0.0;
  const Matrix Q = Matrix::Identity(N, N) - B * B.transpose();
  return std::sqrt(std::max(sym_eig_desc(Q * H * Q).values(0), 0.0));
}

// Smallest singular value of H^{1/2} restricted to X_k.
inline double modulus_of_injectivity(const Vector& s, long long k) {
  if (k < 1 || k > s.size()) throw DomainError("modulus_of_injectivity: k must lie in [1, N]");
  return std::sqrt(s(k - 1));
}

inline double modulus_of_injectivity(const Matrix& H, const Matrix& B) {
  if (B.cols() < 1) throw DomainError("modulus_of_injectivity: zero-dimensional subspace");
  const Vector ev = sym_eig_desc(B.transpose() * H * B).values;
  return std::sqrt(std::max(ev(ev.size() - 1), 0.0));
}

struct JacksonBernstein {
  double C_P = 0.0;
  double C_B = 0.0;
  double M = 0.0;
  bool C_P_bounded = true;
  bool C_B_bounded = true;
  bool M_bounded = true;
  std::vector<double> rP, rB, rM;  // per-k ratios
};

namespace detail {
// Ratio sequence still rising over the upper half of the scan.
inline bool rising_tail(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n < 6) return false;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = n / 2; i < n; ++i, ++m) {
    const double x = std::log(static_cast<double>(i + 1)), yv = std::log(std::max(v[i], 1e-300));
    sx += x; sy += yv; sxx += x * x; sxy += x * yv;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx) > 0.1;
}
}  // namespace detail

// Smallest constants over k = 1..K with rho_k <= C_P s_{k+1}^{1/2},
// j_k >= s_k^{1/2}/C_B and ||(I - P_k) f0|| <= M phi(s_{k+1}); s_j are the
// eigenvalues of H. A constant whose ratio is still growing at the end of the
// scan is reported as unbounded.
inline JacksonBernstein jackson_bernstein_check(const Matrix& H, const std::function<Matrix(long long)>& basis,
                                                long long K, const IndexFunction& phi, const Vector& f0) {
  const Vector s = sym_eig_desc(H).values;
  if (K < 1 || K >= s.size()) throw DomainError("jackson_bernstein_check: K must lie in [1, N)");
  JacksonBernstein jb;
  for (long long k = 1; k <= K; ++k) {
    const Matrix B = basis(k);
    const double rho = degree_of_approximation(H, B);
    const double jk = modulus_of_injectivity(H, B);
    const double res = (f0 - B * (B.transpose() * f0)).norm();
    jb.rP.push_back(rho / std::sqrt(s(k)));
    jb.rB.push_back(std::sqrt(s(k - 1)) / jk);
    jb.rM.push_back(res / phi.eval(s(k)));
  }
  auto mx = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };
  jb.C_P = mx(jb.rP);
  jb.C_B = mx(jb.rB);
  jb.M = mx(jb.rM);
  jb.C_P_bounded = !detail::rising_tail(jb.rP);
  jb.C_B_bounded = !detail::rising_tail(jb.rB);
  jb.M_bounded = !detail::rising_tail(jb.rM);
  return jb;
}

// M(1 + C_P C_B) phi(s_{k+1}) + C_B delta / sqrt(s_k)
inline double modulus_bound(const IndexFunction& phi, double s_k, double s_k1, double delta,
                            const BoundConstants& c) {
  return c.M * (1.0 + c.C_P * c.C_B) * phi.eval(s_k1) + c.C_B * delta / std::sqrt(s_k);
}

inline double modulus_bound(const IndexFunction& phi, const SpectrumModel& sH, long long k, double delta,
                            const BoundConstants& c) {
  if (k < 1) throw DomainError("modulus_bound: k must be >= 1");
  return modulus_bound(phi, sH.singular_value(k), sH.singular_value(k + 1), delta, c);
}

struct OptimizedBound {
  long long k_delta = 0;
  double bound = 0.0;
  bool degenerate = false;
};

// c7 phi(Theta_phi^{-1}(delta)) at k_delta, c7 = 2 max{M(1 + C_P C_B), C_B}.
inline OptimizedBound modulus_bound_optimized(const IndexFunction& phi, const SpectrumModel& sH, double delta,
                                              const BoundConstants& c, long long Jmax = 0) {
  const IndexFunction theta = companion_theta(phi);
  OptimizedBound ob;
  ob.k_delta = select_kdelta(theta, sH, delta, Jmax > 0 ? Jmax : default_jmax(sH));
  ob.degenerate = ob.k_delta == 0;
  ob.bound = c.derived_c7() * phi.eval(invert(theta, delta));
  return ob;
}

// rho_{k_delta} + optimized bound, rho given as a function of k.
inline double modulus_bound_enriched(const IndexFunction& phi, const SpectrumModel& sH, double delta,
                                     const std::function<double(long long)>& rho, const BoundConstants& c,
                                     long long Jmax = 0) {
  const auto ob = modulus_bound_optimized(phi, sH, delta, c, Jmax);
  return rho(ob.k_delta) + ob.bound;
}

struct EnrichedSweep {
  std::vector<double> bounds;
  std::vector<double> rho_ratio;  // rho_{k_delta} / phi(Theta_phi^{-1}(delta))
  bool rho_controlled = true;     // ratio bounded and not growing as delta -> 0
};

// deltas in decreasing order (delta -> 0).
inline EnrichedSweep modulus_bound_enriched_sweep(const IndexFunction& phi, const SpectrumModel& sH,
                                                  const std::vector<double>& deltas,
                                                  const std::function<double(long long)>& rho,
                                                  const BoundConstants& c, long long Jmax = 0) {
  const IndexFunction theta = companion_theta(phi);
  EnrichedSweep sw;
  for (double d : deltas) {
    const auto ob = modulus_bound_optimized(phi, sH, d, c, Jmax);
    const double rk = rho(ob.k_delta);
    sw.bounds.push_back(rk + ob.bound);
    sw.rho_ratio.push_back(rk / phi.eval(invert(theta, d)));
  }
  if (sw.rho_ratio.size() >= 2) {
    const double first = sw.rho_ratio.front(), last = sw.rho_ratio.back();
    sw.rho_controlled = last <= 2.0 * std::max(first, 1.0);
  }
  return sw;
}

}  // namespace tgprior
