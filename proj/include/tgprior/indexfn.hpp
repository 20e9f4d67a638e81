#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace tgprior {

enum class Family { power, power_log, log_only, exp_decay, composite };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::power: return "power";
    case Family::power_log: return "power_log";
    case Family::log_only: return "log_only";
    case Family::exp_decay: return "exp_decay";
    case Family::composite: return "composite";
  }
  return "?";
}

// Continuous non-decreasing function on (0, upper] vanishing at 0+.
//
// Value type: the callable lives behind a shared_ptr so copies are cheap and
// instances may be shared read-only between threads.
class IndexFunction {
 public:
  using Fn = std::function<double(double)>;

  static constexpr double kLower = 1e-300;

  IndexFunction(Family family, std::vector<double> params, double upper, Fn fn,
                std::string description)
      : family_(family),
        params_(std::move(params)),
        upper_(upper),
        fn_(std::make_shared<const Fn>(std::move(fn))),
        description_(std::move(description)) {
    if (!(upper_ > 0.0)) throw DomainError("domain_upper must be positive");
  }

  // t^q
  static IndexFunction power(double q, double upper = 1.0) {
    if (!(q > 0.0)) throw DomainError("power: q must be positive");
    return {Family::power, {q}, upper, [q](double t) { return std::pow(t, q); },
            "t^" + num(q)};
  }

  // t^q log^{-mu}(1/t). mu may be negative; the default upper edge keeps the
  // function increasing and log(1/t) positive.
  static IndexFunction power_log(double q, double mu, double upper = 0.0) {
    if (!(q > 0.0)) throw DomainError("power_log: q must be positive");
    if (upper <= 0.0) {
      upper = mu > 0.0 ? 0.5 : (mu == 0.0 ? 1.0 : std::min(0.5, std::exp(mu / q)));
    }
    if (mu != 0.0 && upper >= 1.0) throw DomainError("power_log: upper must be < 1");
    return {Family::power_log, {q, mu}, upper,
            [q, mu](double t) {
              return mu == 0.0 ? std::pow(t, q)
                               : std::pow(t, q) * std::pow(std::log(1.0 / t), -mu);
            },
            "t^" + num(q) + "*log^-" + num(mu) + "(1/t)"};
  }

  // log^{-mu}(1/t)
  static IndexFunction log_only(double mu, double upper = 0.5) {
    if (!(mu > 0.0)) throw DomainError("log_only: mu must be positive");
    if (upper >= 1.0) throw DomainError("log_only: upper must be < 1");
    return {Family::log_only, {mu}, upper,
            [mu](double t) { return std::pow(std::log(1.0 / t), -mu); },
            "log^-" + num(mu) + "(1/t)"};
  }

  // exp(-c t^{-r})
  static IndexFunction exp_decay(double c, double r, double upper = 1.0) {
    if (!(c > 0.0) || !(r > 0.0)) throw DomainError("exp_decay: c, r must be positive");
    return {Family::exp_decay, {c, r}, upper,
            [c, r](double t) { return std::exp(-c * std::pow(t, -r)); },
            "exp(-" + num(c) + "*t^-" + num(r) + ")"};
  }

  static IndexFunction composite(Fn fn, double upper, std::string description) {
    return {Family::composite, {}, upper, std::move(fn), std::move(description)};
  }

  double operator()(double t) const { return eval(t); }

  double eval(double t) const {
    if (!(t > 0.0) || t > upper_ * (1.0 + 1e-12)) {
      throw DomainError(description_ + ": argument " + num(t) + " outside (0, " +
                        num(upper_) + "]");
    }
    return (*fn_)(std::min(t, upper_));
  }

  // Evaluation without the domain check, for inner loops of solvers.
  double raw(double t) const { return (*fn_)(t); }

  Family family() const { return family_; }
  const std::vector<double>& params() const { return params_; }
  double domain_upper() const { return upper_; }
  double domain_lower() const { return kLower; }
  const std::string& description() const { return description_; }

  static std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
  }

 private:
  Family family_;
  std::vector<double> params_;
  double upper_;
  std::shared_ptr<const Fn> fn_;
  std::string description_;
};

// Theta(t) = sqrt(t) rho(t). Powers stay powers.
inline IndexFunction companion_theta(const IndexFunction& fn) {
  if (fn.family() == Family::power) {
    return IndexFunction::power(fn.params()[0] + 0.5, fn.domain_upper());
  }
  if (fn.family() == Family::power_log) {
    return IndexFunction::power_log(fn.params()[0] + 0.5, fn.params()[1], fn.domain_upper());
  }
  return IndexFunction::composite([fn](double t) { return std::sqrt(t) * fn.raw(t); },
                                  fn.domain_upper(), "sqrt(t)*[" + fn.description() + "]");
}

// Bisection in log t on [lower, upper]. Stops once |fn(t) - s| <= tol*min(1, s)
// or the bracket has collapsed to machine precision.
inline double invert(const IndexFunction& fn, double s, double tol = 1e-12) {
  if (!(tol > 0.0)) throw DomainError("invert: tol must be positive");
  const double lo_t = fn.domain_lower();
  const double hi_t = fn.domain_upper();
  const double f_lo = fn.raw(lo_t);
  const double f_hi = fn.raw(hi_t);
  if (!(s >= f_lo) || !(s <= f_hi * (1.0 + 1e-14))) {
    throw OutOfRangeError(fn.description() + ": value " + IndexFunction::num(s) +
                          " outside attainable range [" + IndexFunction::num(f_lo) + ", " +
                          IndexFunction::num(f_hi) + "]");
  }
  if (s >= f_hi) return hi_t;
  const double thresh = tol * std::min(1.0, s);
  double a = std::log(lo_t);
  double b = std::log(hi_t);
  for (int it = 0; it < 400; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = fn.raw(std::exp(m));
    if (std::abs(fm - s) <= thresh) return std::exp(m);
    if (fm < s) {
      a = m;
    } else {
      b = m;
    }
    if (b - a <= 2e-16 * std::max(1.0, std::abs(m))) break;
  }
  // Pick the bracket end closer in value.
  const double ta = std::exp(a), tb = std::exp(b);
  return std::abs(fn.raw(ta) - s) <= std::abs(fn.raw(tb) - s) ? ta : tb;
}

// psi = Theta_phi o (Theta_chi^2)^{-1}; closed form when both are powers.
inline IndexFunction compose_psi(const IndexFunction& phi, const IndexFunction& chi) {
  const double t_max = std::min(phi.domain_upper(), chi.domain_upper());
  if (phi.family() == Family::power && chi.family() == Family::power) {
    const double mu = phi.params()[0];
    const double a = chi.params()[0];
    const double upper = std::pow(t_max, 2.0 * a + 1.0);
    return IndexFunction::power((mu + 0.5) / (2.0 * a + 1.0), upper);
  }
  auto theta_chi_sq = IndexFunction::composite(
      [chi](double t) {
        const double c = chi.raw(t);
        return t * c * c;
      },
      t_max, "t*[" + chi.description() + "]^2");
  auto theta_phi = companion_theta(phi);
  const double upper = theta_chi_sq.raw(t_max);
  return IndexFunction::composite(
      [theta_phi, theta_chi_sq](double s) {
        return theta_phi.raw(invert(theta_chi_sq, s, 1e-15));
      },
      upper, "psi{" + phi.description() + " | " + chi.description() + "}");
}

// s^{1/q} log^{mu/q}(1/s^{1/q}): asymptotic inverse of t^q log^{-mu}(1/t).
inline double asymptotic_inverse_power_log(double q, double mu, double s) {
  if (!(q > 0.0)) throw DomainError("asymptotic_inverse_power_log: q must be positive");
  if (!(s > 0.0) || !(s < 1.0)) {
    throw DomainError("asymptotic_inverse_power_log: s must lie in (0, 1)");
  }
  const double r = std::pow(s, 1.0 / q);
  return r * std::pow(std::log(1.0 / r), mu / q);
}

// Smoothness of the truth: phi(t) = t^mu if mu is given, otherwise the
// Sobolev order beta is converted through the forward spectrum.
struct SmoothnessSpec {
  double beta = 1.0;
  double mu = 0.0;  // 0 means "derive from beta"
  double R = 1.0;

  void validate() const {
    if (!(beta > 0.0)) throw DomainError("smoothness: beta must be positive");
    if (mu < 0.0) throw DomainError("smoothness: mu must be positive");
    if (!(R > 0.0)) throw DomainError("smoothness: R must be positive");
  }
};

}  // namespace tgprior
