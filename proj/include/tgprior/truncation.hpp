#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "indexfn.hpp"
#include "spectra.hpp"

namespace tgprior {

struct BoundConstants {
  double c_a = 2.0;
  double c3 = 4.0;
  double c4 = 1.0;
  double c9 = 2.0;
  double M = 1.0;
  double C_P = 1.0;
  double C_B = 1.0;
  double c7 = 4.0;  // 2 max{M(1 + C_P C_B), C_B}
  double c8 = 1.0;

  double derived_c7() const { return 2.0 * std::max(M * (1.0 + C_P * C_B), C_B); }

  void validate() const {
    auto need = [](bool ok, const char* key, const char* msg) {
      if (!ok) throw ConfigError(std::string("constants.") + key, msg);
    };
    need(c_a >= 2.0, "c_a", "must be >= 2");
    need(c3 > 1.0, "c3", "must be > 1");
    need(c4 >= 1.0, "c4", "must be >= 1");
    need(c9 >= 2.0, "c9", "must be >= 2");
    need(M >= 1.0, "M", "must be >= 1");
    need(C_P >= 1.0, "C_P", "must be >= 1");
    need(C_B >= 1.0, "C_B", "must be >= 1");
    need(std::isfinite(c7), "c7", "must be finite");
    need(std::isfinite(c8), "c8", "must be finite");
  }
};

enum class Dominance { regularization_bias, variance_term };

inline const char* dominance_name(Dominance d) {
  return d == Dominance::regularization_bias ? "regularization_bias" : "variance_term";
}

struct TruncationDecision {
  long long k_n = 0;
  Dominance dominant = Dominance::variance_term;
  double kernel = 0.0;     // max{psi^2(1/n), k_n/n}
  double spc_bound = 0.0;  // 4 c_a kernel
  double delta_n = 0.0;    // sqrt(spc_bound)
  bool degenerate = false; // empty selector set
};

// psi^2 with psi(0) = 0 for spectra that terminate.
inline double psi_sq(const IndexFunction& psi, double s) {
  if (s <= 0.0) return 0.0;
  const double v = psi.raw(s);
  return v * v;
}

inline long long default_jmax(const SpectrumModel& sH) {
  switch (sH.family()) {
    case SpectrumFamily::exponential:
    case SpectrumFamily::analytic: return 10000;
    case SpectrumFamily::explicit_: return static_cast<long long>(sH.explicit_length()) + 1;
    default: return 10000000;
  }
}

// Largest j <= jmax with pred(j), for a predicate that holds on a prefix.
// Gallops then bisects. Returns 0 when pred(1) fails; throws when pred(jmax)
// still holds.
inline long long largest_prefix_index(const std::function<bool(long long)>& pred, long long jmax,
                                      const char* what) {
  if (jmax < 1 || !pred(1)) return 0;
  long long lo = 1, hi = 2;
  while (hi <= jmax && pred(hi)) {
    lo = hi;
    hi *= 2;
  }
  if (hi > jmax) {
    if (pred(jmax)) {
      throw ScanExhausted(std::string(what) + ": condition still holds at Jmax=" +
                          std::to_string(jmax));
    }
    hi = jmax;
  }
  while (hi - lo > 1) {
    const long long m = lo + (hi - lo) / 2;
    if (pred(m)) lo = m; else hi = m;
  }
  return lo;
}

// k_n = max{j : psi^2(s_j(Lambda^g)) > max{psi^2(1/n), j/n}}
inline TruncationDecision select_kn(const IndexFunction& psi, const SpectrumModel& sLg, double n,
                                    long long Jmax, const BoundConstants& consts = {}) {
  if (!(n > 0.0)) throw DomainError("select_kn: n must be positive");
  const double reg = psi_sq(psi, 1.0 / n);
  auto pred = [&](long long j) {
    return psi_sq(psi, sLg.singular_value(j)) > std::max(reg, static_cast<double>(j) / n);
  };
  TruncationDecision d;
  d.k_n = largest_prefix_index(pred, Jmax, "select_kn");
  d.degenerate = d.k_n == 0;
  const double var = static_cast<double>(d.k_n) / n;
  d.dominant = reg > var ? Dominance::regularization_bias : Dominance::variance_term;
  d.kernel = std::max(reg, var);
  d.spc_bound = 4.0 * consts.c_a * d.kernel;
  d.delta_n = std::sqrt(d.spc_bound);
  return d;
}

// 4 c_a max{psi^2(1/n), k_n/n}
inline double spc_bound_optimized(const TruncationDecision& dec, const IndexFunction& psi, double n,
                                  const BoundConstants& consts) {
  return 4.0 * consts.c_a * std::max(psi_sq(psi, 1.0 / n), static_cast<double>(dec.k_n) / n);
}

// Per-n dominance. When the Lambda^g spectrum has bounded decay ratios the
// verdict follows psi^2(s_j) <= c4 j s_j; otherwise psi^2(1/n) is compared
// with k_n/n directly.
inline std::vector<Dominance> classify_dominance(const IndexFunction& psi, const SpectrumModel& sLg,
                                                 const std::vector<double>& n_grid, long long Jmax,
                                                 std::optional<bool> alphabeta_analytic = std::nullopt,
                                                 long long scan = 2000) {
  std::vector<Dominance> out;
  const auto decay = decay_ratio_check(sLg, std::min<long long>(scan, 200));
  if (decay.holds) {
    const auto ab = condition_alphabeta(psi, sLg, scan, alphabeta_analytic);
    out.assign(n_grid.size(), ab.holds ? Dominance::variance_term : Dominance::regularization_bias);
    return out;
  }
  for (double n : n_grid) out.push_back(select_kn(psi, sLg, n, Jmax).dominant);
  return out;
}

struct MinimaxResult {
  long long k_star = 0;
  double R_T = 0.0;
  bool at_boundary = false;  // minimizer hit the scan ceiling
};

// R_T(n) = inf_k (psi^2(s_{k+1}) + k/n), ties to the smaller k.
inline MinimaxResult truncated_series_minimax(const IndexFunction& psi, const SpectrumModel& sLg, double n,
                                              long long Jmax) {
  if (!(n > 0.0)) throw DomainError("truncated_series_minimax: n must be positive");
  MinimaxResult r;
  r.R_T = psi_sq(psi, sLg.singular_value(1));
  long long k = 1;
  for (; k <= Jmax; ++k) {
    const double var = static_cast<double>(k) / n;
    if (var >= r.R_T) break;  // later terms cannot improve
    const double v = psi_sq(psi, sLg.singular_value(k + 1)) + var;
    if (v < r.R_T) {
      r.R_T = v;
      r.k_star = k;
    }
  }
  r.at_boundary = k > Jmax || r.k_star == Jmax;
  return r;
}

// k_delta = max{j : Theta_phi(s_j) > delta}
inline long long select_kdelta(const IndexFunction& theta_phi, const SpectrumModel& sH, double delta,
                               long long Jmax) {
  if (!(delta > 0.0)) throw DomainError("select_kdelta: delta must be positive");
  auto pred = [&](long long j) {
    const double s = sH.singular_value(j);
    return s > 0.0 && theta_phi.raw(s) > delta;
  };
  return largest_prefix_index(pred, Jmax, "select_kdelta");
}

// phi(Theta_phi^{-1}(delta))
inline double inverse_rate(const IndexFunction& phi, double delta_n) {
  const IndexFunction theta = companion_theta(phi);
  return phi.eval(invert(theta, delta_n));
}

}  // namespace tgprior
