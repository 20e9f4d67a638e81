#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "indexfn.hpp"
#include "linalg.hpp"

namespace tgprior {

enum class SpectrumFamily { power, exponential, logarithmic, alpha_regular, analytic, explicit_, product };

inline const char* spectrum_family_name(SpectrumFamily f) {
  switch (f) {
    case SpectrumFamily::power: return "power";
    case SpectrumFamily::exponential: return "exponential";
    case SpectrumFamily::logarithmic: return "logarithmic";
    case SpectrumFamily::alpha_regular: return "alpha_regular";
    case SpectrumFamily::analytic: return "analytic";
    case SpectrumFamily::explicit_: return "explicit";
    case SpectrumFamily::product: return "product";
  }
  return "?";
}

// Positive non-increasing sequence s_j, j >= 1, with a continuous extension
// at(x) for real x > 0 used to build spectral links.
class SpectrumModel {
 public:
  SpectrumModel() : SpectrumModel(SpectrumFamily::power, {1.0}, 1.0) {}

  static SpectrumModel power(double p, double scale = 1.0) {
    require(p > 0.0, "power: p must be positive");
    return SpectrumModel(SpectrumFamily::power, {p}, scale);
  }
  static SpectrumModel exponential(double gamma, double p, double scale = 1.0) {
    require(gamma > 0.0 && p > 0.0, "exponential: gamma, p must be positive");
    return SpectrumModel(SpectrumFamily::exponential, {gamma, p}, scale);
  }
  static SpectrumModel logarithmic(double p, double scale = 1.0) {
    require(p > 0.0, "logarithmic: p must be positive");
    return SpectrumModel(SpectrumFamily::logarithmic, {p}, scale);
  }
  static SpectrumModel alpha_regular(double alpha, double scale = 1.0) {
    require(alpha > 0.0, "alpha_regular: alpha must be positive");
    return SpectrumModel(SpectrumFamily::alpha_regular, {alpha}, scale);
  }
  static SpectrumModel analytic(double alpha, double xi_prior, double p, double scale = 1.0) {
    require(alpha > 0.0 && xi_prior > 0.0 && p > 0.0, "analytic: parameters must be positive");
    return SpectrumModel(SpectrumFamily::analytic, {alpha, xi_prior, p}, scale);
  }
  // Values beyond the list are zero.
  static SpectrumModel explicit_values(std::vector<double> values, double scale = 1.0) {
    require(!values.empty(), "explicit: empty list");
    for (std::size_t i = 0; i < values.size(); ++i) {
      require(values[i] > 0.0, "explicit: values must be positive");
      require(i == 0 || values[i] <= values[i - 1], "explicit: values must be non-increasing");
    }
    SpectrumModel m(SpectrumFamily::explicit_, {}, scale);
    m.values_ = std::make_shared<const std::vector<double>>(std::move(values));
    return m;
  }
  // Lazy termwise product a_j * b_j.
  static SpectrumModel product(const SpectrumModel& a, const SpectrumModel& b) {
    SpectrumModel m(SpectrumFamily::product, {}, 1.0);
    m.lhs_ = std::make_shared<const SpectrumModel>(a);
    m.rhs_ = std::make_shared<const SpectrumModel>(b);
    return m;
  }

  SpectrumFamily family() const { return family_; }
  const std::vector<double>& params() const { return params_; }
  double scale() const { return scale_; }
  const SpectrumModel& lhs() const { return *lhs_; }
  const SpectrumModel& rhs() const { return *rhs_; }
  std::size_t explicit_length() const { return values_ ? values_->size() : 0; }

  double singular_value(long long j) const {
    if (j < 1) throw DomainError("singular_value: index must be >= 1");
    if (family_ == SpectrumFamily::explicit_) {
      return static_cast<std::size_t>(j) <= values_->size() ? scale_ * (*values_)[j - 1] : 0.0;
    }
    return at(static_cast<double>(j));
  }
  double operator[](long long j) const { return singular_value(j); }

  // Continuous extension in the index.
  double at(double x) const {
    const auto& q = params_;
    switch (family_) {
      case SpectrumFamily::power: return scale_ * std::pow(x, -2.0 * q[0]);
      case SpectrumFamily::exponential: return scale_ * std::exp(-2.0 * q[0] * std::pow(x, q[1]));
      case SpectrumFamily::logarithmic: return scale_ * std::pow(std::log1p(x), -2.0 * q[0]);
      case SpectrumFamily::alpha_regular: return scale_ * std::pow(x, -(1.0 + 2.0 * q[0]));
      case SpectrumFamily::analytic:
        return scale_ * std::pow(x, -q[0]) * std::exp(-q[1] * std::pow(x, q[2]));
      case SpectrumFamily::explicit_: {
        const double j = std::ceil(x);
        return j <= static_cast<double>(values_->size())
                   ? scale_ * (*values_)[static_cast<std::size_t>(std::max(j, 1.0)) - 1]
                   : 0.0;
      }
      case SpectrumFamily::product: return lhs_->at(x) * rhs_->at(x);
    }
    return 0.0;
  }

  // Continuous inverse of at(): x with at(x) = t. May return +inf when the
  // index overflows (logarithmic family at tiny t).
  double index_of(double t) const {
    if (!(t > 0.0)) throw DomainError("index_of: t must be positive");
    const auto& q = params_;
    const double u = t / scale_;
    switch (family_) {
      case SpectrumFamily::power: return std::pow(u, -1.0 / (2.0 * q[0]));
      case SpectrumFamily::exponential:
        return std::pow(std::log(1.0 / u) / (2.0 * q[0]), 1.0 / q[1]);
      case SpectrumFamily::logarithmic: return std::expm1(std::pow(u, -1.0 / (2.0 * q[0])));
      case SpectrumFamily::alpha_regular: return std::pow(u, -1.0 / (1.0 + 2.0 * q[0]));
      case SpectrumFamily::explicit_:
        throw DomainError("index_of: explicit spectra have no continuous inverse");
      default: break;
    }
    // Bisection in log x on the decreasing continuous extension.
    double a = std::log(1e-12), b = std::log(1e300);
    for (int it = 0; it < 300 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
      const double m = 0.5 * (a + b);
      if (at(std::exp(m)) > t) a = m; else b = m;
    }
    return std::exp(0.5 * (a + b));
  }

  // Analytic classification of sup_j s_j/s_{j+1} < inf; empty when unknown.
  std::optional<bool> decay_ratio_bounded_analytic() const {
    switch (family_) {
      case SpectrumFamily::power:
      case SpectrumFamily::logarithmic:
      case SpectrumFamily::alpha_regular: return true;
      case SpectrumFamily::exponential: return params_[1] <= 1.0;
      case SpectrumFamily::analytic: return params_[2] <= 1.0;
      case SpectrumFamily::product: {
        const auto a = lhs_->decay_ratio_bounded_analytic();
        const auto b = rhs_->decay_ratio_bounded_analytic();
        if (a && b) {
          if (*a && *b) return true;
          if (*a != *b) return false;  // bounded times unbounded ratio
        }
        return std::nullopt;
      }
      case SpectrumFamily::explicit_: return std::nullopt;
    }
    return std::nullopt;
  }

  std::string describe() const {
    std::string s = spectrum_family_name(family_);
    if (family_ == SpectrumFamily::product) return lhs_->describe() + "*" + rhs_->describe();
    s += "(";
    for (std::size_t i = 0; i < params_.size(); ++i) {
      s += (i ? "," : "") + IndexFunction::num(params_[i]);
    }
    return s + ")";
  }

 private:
  SpectrumModel(SpectrumFamily f, std::vector<double> params, double scale)
      : family_(f), params_(std::move(params)), scale_(scale) {
    require(scale > 0.0, "spectrum scale must be positive");
  }
  static void require(bool ok, const char* msg) {
    if (!ok) throw DomainError(msg);
  }

  SpectrumFamily family_;
  std::vector<double> params_;
  double scale_ = 1.0;
  std::shared_ptr<const std::vector<double>> values_;
  std::shared_ptr<const SpectrumModel> lhs_, rhs_;
};

inline Vector spectrum_vector(const SpectrumModel& m, long long N) {
  Vector v(N);
  for (long long j = 1; j <= N; ++j) v(j - 1) = m.singular_value(j);
  return v;
}

struct DecayCheck {
  bool holds;
  double c3;  // max_{j<J} s_j / s_{j+1}
};

inline DecayCheck decay_ratio_check(const SpectrumModel& m, long long J) {
  if (J < 2) throw DomainError("decay_ratio_check: J must be >= 2");
  double c3 = 0.0;
  double prev = m.singular_value(1);
  std::vector<double> ratios;
  for (long long j = 2; j <= J; ++j) {
    const double cur = m.singular_value(j);
    if (cur == 0.0) return {false, std::numeric_limits<double>::infinity()};
    ratios.push_back(prev / cur);
    c3 = std::max(c3, prev / cur);
    prev = cur;
  }
  if (auto a = m.decay_ratio_bounded_analytic()) return {*a, c3};
  // Unknown family: bounded unless the ratio is still growing at the end.
  const std::size_t h = ratios.size() / 2;
  const bool growing = ratios.size() >= 4 && ratios.back() > ratios[h] * (1.0 + 1e-6) &&
                       ratios.back() >= c3 * (1.0 - 1e-12);
  return {!growing, c3};
}

inline SpectrumModel commuting_product_spectrum(const SpectrumModel& sH, const SpectrumModel& sLf) {
  return SpectrumModel::product(sH, sLf);
}

// chi with s_j(Lambda^f) = chi^2(s_j(H)). Pure powers stay powers.
inline IndexFunction spectral_link_chi(const SpectrumModel& sH, const SpectrumModel& sLf) {
  const double upper = std::max(1.0, sH.singular_value(1));
  if (sH.family() == SpectrumFamily::power && sH.scale() == 1.0 && sLf.scale() == 1.0) {
    const double p = sH.params()[0];
    if (sLf.family() == SpectrumFamily::alpha_regular) {
      return IndexFunction::power((1.0 + 2.0 * sLf.params()[0]) / (4.0 * p), upper);
    }
    if (sLf.family() == SpectrumFamily::power) {
      return IndexFunction::power(sLf.params()[0] / (2.0 * p), upper);
    }
  }
  return IndexFunction::composite(
      [sH, sLf](double t) {
        const double x = sH.index_of(t);
        return std::isfinite(x) ? std::sqrt(sLf.at(x)) : 0.0;
      },
      upper, "chi{" + sH.describe() + "," + sLf.describe() + "}");
}

// phi with phi(s_j(H)) proportional to j^{-beta} (Sobolev smoothness of order
// beta), or t^mu when mu is given explicitly.
inline IndexFunction natural_phi(const SpectrumModel& sH, const SmoothnessSpec& sm) {
  const double upper = std::max(1.0, sH.singular_value(1));
  if (sm.mu > 0.0) return IndexFunction::power(sm.mu, upper);
  const double beta = sm.beta;
  if (sH.scale() == 1.0) {
    switch (sH.family()) {
      case SpectrumFamily::power: return IndexFunction::power(beta / (2.0 * sH.params()[0]), upper);
      case SpectrumFamily::exponential: return IndexFunction::log_only(beta / sH.params()[1]);
      case SpectrumFamily::logarithmic:
        return IndexFunction::exp_decay(beta, 1.0 / (2.0 * sH.params()[0]), upper);
      default: break;
    }
  }
  return IndexFunction::composite(
      [sH, beta](double t) {
        const double x = sH.index_of(t);
        return std::isfinite(x) ? std::pow(x, -beta) : 0.0;
      },
      upper, "phi{" + sH.describe() + ",beta=" + IndexFunction::num(beta) + "}");
}

// Truth f0 = phi(H) v with v_j = R (sqrt 6 / pi) / j, so ||v|| < R.
inline Vector default_truth(const IndexFunction& phi, const SpectrumModel& sH, long long N, double R) {
  Vector f0(N);
  const double c = R * std::sqrt(6.0) / std::numbers::pi;
  for (long long j = 1; j <= N; ++j) {
    const double s = sH.singular_value(j);
    f0(j - 1) = s > 0.0 ? phi.eval(s) * c / static_cast<double>(j) : 0.0;
  }
  return f0;
}

struct SequenceProblem {
  long long N = 0;
  SpectrumModel sH;
  SpectrumModel sLf;
  Vector f0;
  double n = 1.0;

  void validate() const {
    if (N < 1) throw DomainError("SequenceProblem: N must be >= 1");
    if (!(n > 0.0)) throw DomainError("SequenceProblem: n must be positive");
    if (f0.size() != N) throw DomainError("SequenceProblem: truth length must equal N");
  }
  Vector sH_vec() const { return spectrum_vector(sH, N); }
  Vector sLf_vec() const { return spectrum_vector(sLf, N); }
  Vector sLg_vec() const { return spectrum_vector(commuting_product_spectrum(sH, sLf), N); }
  // g0_j = s_j(H)^{1/2} f0_j
  Vector g0() const { return sH_vec().cwiseSqrt().cwiseProduct(f0); }
};

// Tail energy sum_{j>N} Theta_phi^2(s_j) against a target value; the tail is
// summed numerically up to `horizon` indices.
inline double tail_fraction(const IndexFunction& theta_phi, const SpectrumModel& sH, long long N,
                            double target, long long horizon = 1000000) {
  double tail = 0.0;
  for (long long j = N + 1; j <= N + horizon; ++j) {
    const double s = sH.singular_value(j);
    if (s == 0.0) break;
    const double v = theta_phi.raw(s);
    tail += v * v;
    if (v * v < 1e-18 * tail) break;
  }
  return tail / target;
}

struct MatrixProblem {
  long long N = 0;
  Matrix H;
  Matrix LambdaF;
  double a = 0.5;
  double eps = 0.0;
  Vector f0;
  double n = 1.0;

  void validate() const {
    if (N < 2) throw DomainError("MatrixProblem: N must be >= 2");
    if (!is_symmetric(H) || !is_symmetric(LambdaF)) {
      throw DomainError("MatrixProblem: operators must be symmetric");
    }
    if (sym_eig_desc(H).values.minCoeff() <= 0.0 || sym_eig_desc(LambdaF).values.minCoeff() <= 0.0) {
      throw DomainError("MatrixProblem: operators must be positive definite");
    }
  }
  // A = H^{1/2}; Lambda^g = A Lambda^f A.
  Matrix A() const { return sym_power(H, 0.5); }
  Matrix LambdaG() const {
    const Matrix a_ = A();
    Matrix g = a_ * LambdaF * a_;
    return 0.5 * (g + g.transpose());
  }
  Vector g0() const { return A() * f0; }
};

// Lambda^f = H^a (I + eps S) H^a with S symmetric, ||S|| = 1, H = diag(s_j).
inline MatrixProblem build_noncommuting(long long N, const SpectrumModel& sH, double a, double eps,
                                        std::uint64_t seed) {
  if (N < 2) throw DomainError("build_noncommuting: N must be >= 2");
  if (a < 0.5) throw DomainError("build_noncommuting: link exponent a must be >= 1/2");
  if (!(eps >= 0.0) || eps >= 1.0) throw DomainError("build_noncommuting: eps must lie in [0, 1)");
  MatrixProblem mp;
  mp.N = N;
  mp.a = a;
  mp.eps = eps;
  const Vector s = spectrum_vector(sH, N);
  mp.H = s.asDiagonal();
  Matrix B = Matrix::Identity(N, N);
  if (eps > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Matrix S(N, N);
    for (long long i = 0; i < N; ++i)
      for (long long j = 0; j <= i; ++j) S(i, j) = S(j, i) = nd(rng);
    const Vector ev = sym_eig_desc(S).values;
    S /= std::max(std::abs(ev(0)), std::abs(ev(N - 1)));
    B += eps * S;
  }
  const Vector ha = s.array().pow(a);
  mp.LambdaF = ha.asDiagonal() * B * ha.asDiagonal();
  mp.LambdaF = 0.5 * (mp.LambdaF + mp.LambdaF.transpose());
  mp.f0 = Vector::Zero(N);
  return mp;
}

struct WeylCheck {
  std::vector<double> ratios;
  bool within = true;
};

// r_j = s_j(Lambda^g)^{1/2} / s_j(H)^{a+1/2}, compared with [(1-eps)^{1/2}, (1+eps)^{1/2}].
inline WeylCheck check_weyl_link(const MatrixProblem& mp, long long J) {
  if (J > mp.N) throw DomainError("check_weyl_link: J exceeds N");
  const Vector lg = sym_eig_desc(mp.LambdaG()).values;
  const Vector h = sym_eig_desc(mp.H).values;
  const double lo = std::sqrt(1.0 - mp.eps) * (1.0 - 1e-8);
  const double hi = std::sqrt(1.0 + mp.eps) * (1.0 + 1e-8);
  WeylCheck out;
  for (long long j = 0; j < J; ++j) {
    const double r = std::sqrt(std::max(lg(j), 0.0)) / std::pow(h(j), mp.a + 0.5);
    out.ratios.push_back(r);
    if (!(r >= lo && r <= hi)) out.within = false;
  }
  return out;
}

struct NormRatioRange {
  double min = std::numeric_limits<double>::infinity();
  double max = 0.0;
};

// Range of ||(Lambda^f)^{power/2} f||^2 / ||H^{a power} f||^2 over random f.
// power = 1 is the link of the construction; power = 3 is the strengthened link.
inline NormRatioRange link_norm_ratios(const MatrixProblem& mp, double power, int reps,
                                       std::uint64_t seed) {
  const Matrix L = sym_power(mp.LambdaF, power / 2.0);
  const Matrix Hp = sym_power(mp.H, mp.a * power);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  NormRatioRange r;
  for (int i = 0; i < reps; ++i) {
    Vector f(mp.N);
    for (long long j = 0; j < mp.N; ++j) f(j) = nd(rng);
    const double q = (L * f).squaredNorm() / (Hp * f).squaredNorm();
    r.min = std::min(r.min, q);
    r.max = std::max(r.max, q);
  }
  return r;
}

struct AlphaBetaCheck {
  bool holds;
  double c4;  // max_{j<=J} psi^2(s_j(Lambda^g)) / (j s_j(Lambda^g))
};

// psi^2(s_j) <= c4 j s_j. The verdict is the analytic one when supplied,
// otherwise a tail trend test: the log-ratio must not keep rising.
inline AlphaBetaCheck condition_alphabeta(const IndexFunction& psi, const SpectrumModel& sLg, long long J,
                                          std::optional<bool> analytic = std::nullopt) {
  if (J < 1) throw DomainError("condition_alphabeta: J must be >= 1");
  double c4 = 0.0;
  std::vector<double> lr;
  for (long long j = 1; j <= J; ++j) {
    const double s = sLg.singular_value(j);
    if (s == 0.0) break;
    double p = 0.0;
    try {
      p = psi.raw(s);
    } catch (const OutOfRangeError&) {
      break;  // below the numeric range of psi
    }
    const double r = p * p / (static_cast<double>(j) * s);
    c4 = std::max(c4, r);
    lr.push_back(std::log(r));
  }
  if (analytic) return {*analytic, c4};
  // Slope of log ratio vs log j over the upper half of the scan.
  const std::size_t n = lr.size();
  if (n < 8) return {true, c4};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = n / 2; i < n; ++i, ++m) {
    const double x = std::log(static_cast<double>(i + 1));
    sx += x; sy += lr[i]; sxx += x * x; sxy += x * lr[i];
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return {slope <= 1e-3, c4};
}

}  // namespace tgprior
