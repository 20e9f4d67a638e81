#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include <tgprior/indexfn.hpp>

using namespace tgprior;

namespace {

// Root of t = s log^{mu/q}(1/t)^{...}: solves t^q log^{-mu}(1/t) = s by the
// fixed-point map t <- (s log^mu(1/t))^{1/q}, which contracts for small s.
double fixed_point_inverse(double q, double mu, double s) {
  double t = std::pow(s, 1.0 / q);
  for (int i = 0; i < 500; ++i) t = std::pow(s * std::pow(std::log(1.0 / t), mu), 1.0 / q);
  return t;
}

std::vector<IndexFunction> sample_families() {
  return {IndexFunction::power(0.5),
          IndexFunction::power(2.0),
          IndexFunction::power_log(1.0, 1.0),
          IndexFunction::power_log(0.5, -0.5),
          IndexFunction::log_only(1.0),
          IndexFunction::exp_decay(1.0, 0.5),
          IndexFunction::composite([](double t) { return t / (1.0 + t); }, 1.0, "t/(1+t)")};
}

}  // namespace

TEST(IndexFunctionEval, TextbookValues) {
  EXPECT_DOUBLE_EQ(IndexFunction::power(0.5)(0.25), 0.5);
  EXPECT_NEAR(IndexFunction::power_log(1.0, 1.0)(std::exp(-1.0)), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(IndexFunction::log_only(1.0)(std::exp(-4.0)), 0.25, 1e-15);
}

TEST(IndexFunctionEval, RejectsArgumentsOutsideDomain) {
  const auto f = IndexFunction::power(1.0);
  EXPECT_THROW(f(0.0), DomainError);
  EXPECT_THROW(f(-1.0), DomainError);
  EXPECT_THROW(f(1.5), DomainError);
  EXPECT_THROW(IndexFunction::log_only(1.0)(0.9), DomainError);
  EXPECT_THROW(IndexFunction::power(-1.0), DomainError);
}

TEST(IndexFunctionEval, PositiveMonotoneVanishingOnGrids) {
  for (const auto& f : sample_families()) {
    double prev = 0.0;
    for (int e = -300; e <= 0; ++e) {
      const double t = std::min(std::pow(10.0, e / 10.0), f.domain_upper());
      const double v = f(t);
      EXPECT_GE(v, prev) << f.description() << " at t=" << t;
      if (t >= 1e-3) EXPECT_GT(v, 0.0) << f.description();
      prev = v;
    }
    EXPECT_LT(f(1e-300), 0.01 * f(f.domain_upper())) << f.description();
  }
}

TEST(CompanionTheta, TextbookValues) {
  EXPECT_NEAR(companion_theta(IndexFunction::power(0.5))(0.25), 0.25, 1e-15);
  EXPECT_NEAR(companion_theta(IndexFunction::log_only(1.0))(std::exp(-4.0)), std::exp(-2.0) / 4.0, 1e-15);
  EXPECT_DOUBLE_EQ(companion_theta(IndexFunction::power(1.0))(1.0), 1.0);
}

TEST(CompanionTheta, StrictlyIncreasingWithSqrtGap) {
  for (const auto& f : sample_families()) {
    const auto th = companion_theta(f);
    for (int e = -200; e < 0; ++e) {
      const double t1 = std::min(std::pow(10.0, e / 10.0), f.domain_upper());
      const double t2 = std::min(std::pow(10.0, (e + 1) / 10.0), f.domain_upper());
      if (t2 <= t1 || th(t1) == 0.0) continue;  // exp_decay underflows at tiny t
      EXPECT_GE(th(t2) / th(t1), std::sqrt(t2 / t1) * (1.0 - 1e-12)) << th.description();
    }
  }
}

TEST(Invert, TextbookValues) {
  const auto theta = companion_theta(IndexFunction::power(1.0));
  EXPECT_NEAR(invert(theta, 0.125), 0.25, 1e-12);
  EXPECT_NEAR(invert(IndexFunction::power(1.0), 1.0), 1.0, 1e-15);
}

TEST(Invert, PowerLogAgainstFixedPointOracle) {
  const double s = 1e-6;
  const double t = invert(IndexFunction::power_log(1.0, 1.0), s, 1e-12);
  const double oracle = fixed_point_inverse(1.0, 1.0, s);
  EXPECT_NEAR(t, oracle, 1e-9 * oracle);
  EXPECT_NEAR(t, 1.1383e-5, 1e-8);
  // The closed-form asymptotic value 1.3816e-5 overshoots at this s.
  const double ratio = asymptotic_inverse_power_log(1.0, 1.0, s) / t;
  EXPECT_GT(ratio, 1.1);
  EXPECT_LT(ratio, 1.3);
}

TEST(Invert, OutOfRange) {
  EXPECT_THROW(invert(IndexFunction::power(1.0), 2.0), OutOfRangeError);
  EXPECT_THROW(invert(IndexFunction::log_only(1.0), 10.0), OutOfRangeError);
}

TEST(Invert, RoundTripRandomTargets) {
  std::mt19937_64 rng(2024);
  for (const auto& f : sample_families()) {
    const double lo = std::log(std::max(f(1e-200), 1e-250)), hi = std::log(f(f.domain_upper()));
    std::uniform_real_distribution<double> u(lo, hi);
    for (int i = 0; i < 100; ++i) {
      const double s = std::exp(u(rng));
      const double t = invert(f, s, 1e-12);
      EXPECT_LE(std::abs(f(t) - s), 1e-12) << f.description() << " s=" << s;
    }
  }
}

TEST(ComposePsi, PowerExamples) {
  const auto psi = compose_psi(IndexFunction::power(0.5), IndexFunction::power(0.75));
  EXPECT_EQ(psi.family(), Family::power);
  EXPECT_NEAR(psi(1e-5), 1e-2, 1e-15);
  const auto psi2 = compose_psi(IndexFunction::power(0.5), IndexFunction::power(0.5));
  EXPECT_NEAR(psi2(0.36), 0.6, 1e-15);
}

TEST(ComposePsi, NumericPathMatchesClosedFormExponent) {
  for (double mu : {0.25, 0.5, 1.0, 2.0}) {
    for (double a : {0.5, 0.75, 1.5}) {
      // Wrapping as composites forces the inversion path.
      const auto phi = IndexFunction::composite([mu](double t) { return std::pow(t, mu); }, 1.0, "phi");
      const auto chi = IndexFunction::composite([a](double t) { return std::pow(t, a); }, 1.0, "chi");
      const auto psi = compose_psi(phi, chi);
      const auto closed = compose_psi(IndexFunction::power(mu), IndexFunction::power(a));
      const double expo = (mu + 0.5) / (2.0 * a + 1.0);
      for (double s : {1e-2, 1e-5, 1e-9, 1e-20}) {
        EXPECT_DOUBLE_EQ(closed(s), std::pow(s, expo));
        EXPECT_NEAR(psi(s), std::pow(s, expo), 1e-12 * std::pow(s, expo) + 1e-12);
      }
    }
  }
}

TEST(ComposePsi, SevereExampleRatioSettles) {
  // phi = log^-1(1/t), chi = log^-3/2(1/t): psi(t) ~ t^{1/2} log^{1/2}(1/t).
  const auto psi = compose_psi(IndexFunction::log_only(1.0), IndexFunction::log_only(1.5));
  std::vector<double> r;
  for (double e : {10.0, 40.0, 100.0, 280.0}) {
    const double t = std::pow(10.0, -e);
    r.push_back(psi(t) / (std::sqrt(t) * std::sqrt(std::log(1.0 / t))));
  }
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LT(std::abs(r[i] - 1.0), std::abs(r[i - 1] - 1.0));
  EXPECT_NEAR(r.back(), 1.0, 0.05);
}

TEST(AsymptoticInverse, TextbookValues) {
  EXPECT_NEAR(asymptotic_inverse_power_log(1.0, 0.0, 0.3), 0.3, 1e-15);
  EXPECT_NEAR(asymptotic_inverse_power_log(1.0, 1.0, 1e-6), 1e-6 * std::log(1e6), 1e-18);
  EXPECT_NEAR(asymptotic_inverse_power_log(1.0, 1.0, 1e-6), 1.3816e-5, 1e-9);
  EXPECT_THROW(asymptotic_inverse_power_log(1.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(asymptotic_inverse_power_log(1.0, 1.0, 2.0), DomainError);
}

TEST(AsymptoticInverse, RatioConvergesToOne) {
  // The relative gap closes like log log(1/s) / log(1/s); within 5% it is
  // reached only at extreme s, so the check runs at s = 1e-300.
  for (auto [q, mu] : std::vector<std::pair<double, double>>{{1, 1}, {2, 2}, {1, 2}}) {
    const auto f = IndexFunction::power_log(q, mu);
    double prev_gap = 1.0;
    for (double e : {8.0, 30.0, 100.0, 300.0}) {
      const double s = std::pow(10.0, -e);
      const double t = invert(f, s, 1e-14);
      EXPECT_NEAR(t, fixed_point_inverse(q, mu, s), 1e-9 * t);
      const double gap = std::abs(t / asymptotic_inverse_power_log(q, mu, s) - 1.0);
      EXPECT_LT(gap, prev_gap) << "q=" << q << " mu=" << mu << " s=1e-" << e;
      prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 0.05) << "q=" << q << " mu=" << mu;
  }
}

TEST(SmoothnessSpec, Validation) {
  EXPECT_NO_THROW((SmoothnessSpec{1.0, 0.0, 1.0}.validate()));
  EXPECT_THROW((SmoothnessSpec{0.0, 0.0, 1.0}.validate()), DomainError);
  EXPECT_THROW((SmoothnessSpec{1.0, -1.0, 1.0}.validate()), DomainError);
  EXPECT_THROW((SmoothnessSpec{1.0, 0.0, 0.0}.validate()), DomainError);
}
