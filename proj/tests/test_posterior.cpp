#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <tgprior/harness.hpp>
#include <tgprior/posterior.hpp>

using namespace tgprior;

namespace {

Vector unit(long long N, long long i) {
  Vector v = Vector::Zero(N);
  v(i) = 1.0;
  return v;
}

// Independent per-coordinate SPC formula used as the oracle.
double oracle_total(const Vector& c, const Vector& g0, long long k, double n) {
  double t = 0.0;
  for (long long j = 0; j < g0.size(); ++j) {
    if (j >= k) {
      t += g0(j) * g0(j);
      continue;
    }
    const double w = c(j) / (c(j) + 1.0 / n);  // shrinkage weight
    t += std::pow((1.0 - w) * g0(j), 2) + w * w / n + w / n;
  }
  return t;
}

}  // namespace

TEST(PosteriorDirect, Examples) {
  Vector c(3), Y(3);
  c << 1.0, 0.5, 0.25;
  Y << 2.0, 1.0, -1.0;
  const auto p = posterior_direct(c, 1, 1.0, Y);
  EXPECT_DOUBLE_EQ(p.mean(0), 1.0);
  EXPECT_DOUBLE_EQ(p.cov_diag(0), 0.5);
  EXPECT_EQ(p.mean(1), 0.0);
  const auto z = posterior_direct(c, 0, 1.0, Y);
  EXPECT_EQ(z.mean.norm(), 0.0);
  EXPECT_EQ(z.cov_diag.norm(), 0.0);
  EXPECT_THROW(posterior_direct(c, 1, 0.0, Y), DomainError);
  EXPECT_THROW(posterior_direct(c, 4, 1.0, Y), DomainError);
}

TEST(PosteriorDirect, ShrinkageKeepsSign) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  const Vector c = spectrum_vector(SpectrumModel::alpha_regular(1.0), 100);
  Vector Y(100);
  for (auto& y : Y) y = nd(rng);
  for (double n : {1.0, 1e3, 1e6}) {
    const auto p = posterior_direct(c, 60, n, Y);
    for (long long j = 0; j < 100; ++j) {
      EXPECT_LE(std::abs(p.mean(j)), std::abs(Y(j)));
      EXPECT_TRUE(p.mean(j) == 0.0 || std::signbit(p.mean(j)) == std::signbit(Y(j)));
    }
  }
}

TEST(PosteriorDirect, DenseMatchesDiagonalWhenCommuting) {
  auto mp = build_noncommuting(60, SpectrumModel::power(1.0), 0.75, 0.0, 1);
  mp.n = 1e4;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  Vector Y(60);
  for (auto& y : Y) y = nd(rng);
  const long long k = 20;
  const auto dense = posterior_direct_dense(truncated_prior_dense(mp, k), k, mp.n, Y);
  const Vector c = mp.LambdaG().diagonal();
  const auto diag = posterior_direct(c, k, mp.n, Y);
  EXPECT_LE((dense.mean - diag.mean).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((dense.cov.diagonal() - diag.cov_diag).cwiseAbs().maxCoeff(), 1e-10);
  Matrix off = dense.cov;
  off.diagonal().setZero();
  EXPECT_LE(off.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SpcExact, SingleCoordinateExamples) {
  Vector c(1), g(1);
  c << 1.0;
  g << 0.0;
  const auto r = spc_exact_diagonal(c, g, 1, 1.0);
  EXPECT_DOUBLE_EQ(r.bias_sq, 0.0);
  EXPECT_DOUBLE_EQ(r.variance, 0.25);
  EXPECT_DOUBLE_EQ(r.spread, 0.5);
  EXPECT_DOUBLE_EQ(r.total, 0.75);

  g << 1.0;
  const auto e = spc_exact_diagonal(c, g, 1, 100.0);
  EXPECT_NEAR(e.bias_sq, 1.0 / (101.0 * 101.0), 1e-18);
  EXPECT_NEAR(e.bias_sq, 9.803e-5, 1e-8);
  EXPECT_NEAR(e.variance, 9.803e-3, 1e-6);
  EXPECT_NEAR(e.spread, 9.901e-3, 1e-6);
  EXPECT_NEAR(e.total, 1.9802e-2, 1e-6);
}

TEST(SpcExact, MonteCarloReproducesExamples) {
  Vector c(1), g(1);
  c << 1.0;
  g << 0.0;
  const auto m0 = spc_monte_carlo_diagonal(c, g, 1, 1.0, 100000, 3);
  EXPECT_LE(std::abs(m0.estimate - 0.75), 3.0 * m0.stderr_);
  g << 1.0;
  const auto m1 = spc_monte_carlo_diagonal(c, g, 1, 100.0, 100000, 4);
  EXPECT_LE(std::abs(m1.estimate - 1.9802e-2), 3.0 * m1.stderr_ + 1e-6);
}

TEST(SpcExact, LargeSampleLimitIsTruncationBias) {
  const auto sc = *find_preset("moderate");
  const auto ctx = build_context(sc);
  SequenceProblem sp{sc.N, ctx.sH, ctx.sLf, default_truth(ctx.phi, ctx.sH, sc.N, 1.0), 1e8};
  const long long k = 10;
  const Vector g0 = sp.g0();
  const double tail = g0.tail(sc.N - k).squaredNorm();
  EXPECT_NEAR(spc_exact(sp, k).total, tail, 1e-6);
  EXPECT_THROW(spc_exact(sp, sc.N + 1), DomainError);
}

TEST(SpcExact, MatchesIndependentFormula) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  const Vector c = spectrum_vector(SpectrumModel::alpha_regular(1.0), 500);
  Vector g(500);
  for (auto& x : g) x = nd(rng) / 500.0;
  for (long long k : {0, 1, 17, 250, 500}) {
    for (double n : {1.0, 1e3, 1e7}) {
      EXPECT_NEAR(spc_exact_diagonal(c, g, k, n).total, oracle_total(c, g, k, n), 1e-12);
    }
  }
}

TEST(SpcExact, VarianceAndSpreadBounds) {
  const Vector c = spectrum_vector(SpectrumModel::alpha_regular(1.0), 300);
  const Vector g = Vector::Constant(300, 0.01);
  for (long long k : {1, 5, 50, 300}) {
    for (double n : {1.0, 1e2, 1e5, 1e9}) {
      const auto r = spc_exact_diagonal(c, g, k, n);
      EXPECT_LE(r.spread, k / n * (1 + 1e-12));
      EXPECT_LE(r.variance, k / n * (1 + 1e-12));
    }
  }
}

TEST(SpcExact, BiasBoundUnderSourceCondition) {
  const long long N = 400;
  const Vector c = spectrum_vector(SpectrumModel::alpha_regular(1.0), N);
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd;
  for (double expo : {0.25, 0.5, 1.0}) {
    Vector w(N);
    for (auto& x : w) x = nd(rng);
    w /= w.norm();
    const Vector g = c.array().pow(expo).matrix().cwiseProduct(w);
    for (long long k : {3, 30, 300}) {
      for (double n : {1e2, 1e5, 1e8}) {
        const double bias = std::sqrt(spc_exact_diagonal(c, g, k, n).bias_sq);
        EXPECT_LE(bias, std::pow(1.0 / n, expo) + std::pow(c(k), expo) + 1e-15) << expo << " " << k << " " << n;
      }
    }
  }
}

TEST(SpcExact, DenseMatchesDiagonalWhenCommuting) {
  auto mp = build_noncommuting(80, SpectrumModel::power(1.0), 0.75, 0.0, 1);
  mp.f0 = default_truth(IndexFunction::power(0.5), SpectrumModel::power(1.0), 80, 1.0);
  mp.n = 1e5;
  SequenceProblem sp{80, SpectrumModel::power(1.0), SpectrumModel::alpha_regular(1.0), mp.f0, 1e5};
  for (long long k : {0, 5, 40, 80}) {
    const auto a = spc_exact(mp, k), b = spc_exact(sp, k);
    EXPECT_NEAR(a.bias_sq, b.bias_sq, 1e-10);
    EXPECT_NEAR(a.variance, b.variance, 1e-10);
    EXPECT_NEAR(a.spread, b.spread, 1e-10);
  }
}

TEST(SpcMonteCarlo, RandomScenariosAgreeWithinThreeSigma) {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 20; ++s) {
    const double alpha = 0.5 + 2.0 * u(rng), beta = 0.5 + 2.0 * u(rng);
    const double n = std::pow(10.0, 2.0 + 5.0 * u(rng));
    const long long k = 1 + static_cast<long long>(60 * u(rng));
    const auto sH = SpectrumModel::power(1.0);
    const auto phi = natural_phi(sH, {beta, 0.0, 1.0});
    SequenceProblem sp{2000, sH, SpectrumModel::alpha_regular(alpha), default_truth(phi, sH, 2000, 1.0), n};
    const auto ex = spc_exact(sp, k);
    const auto mc = spc_monte_carlo(sp, k, 10000, 100 + s);
    EXPECT_LE(std::abs(mc.estimate - ex.total), 3.0 * mc.stderr_) << "scenario " << s;
  }
}

TEST(SpcMonteCarlo, DenseAgreesWithExact) {
  const auto ctx = build_context(*find_preset("noncommuting"));
  auto mp = *ctx.dense;
  mp.n = 1e4;
  const auto ex = spc_exact(mp, 12);
  const auto mc = spc_monte_carlo(mp, 12, 10000, 5);
  EXPECT_LE(std::abs(mc.estimate - ex.total), 3.0 * mc.stderr_);
}

TEST(SpcMonteCarlo, DeterministicAndCltScaling) {
  const auto sH = SpectrumModel::power(1.0);
  SequenceProblem sp{500, sH, SpectrumModel::alpha_regular(1.0),
                     default_truth(natural_phi(sH, {1.0, 0.0, 1.0}), sH, 500, 1.0), 1e3};
  const auto a = spc_monte_carlo(sp, 8, 1000, 77);
  const auto b = spc_monte_carlo(sp, 8, 1000, 77);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.stderr_, b.stderr_);
  const auto q = spc_monte_carlo(sp, 8, 4000, 78);
  EXPECT_NEAR(a.stderr_ / q.stderr_, 2.0, 0.4);
  EXPECT_THROW(spc_monte_carlo(sp, 8, 99, 1), DomainError);
}

TEST(Contraction, EdgeCases) {
  const auto sH = SpectrumModel::power(1.0);
  SequenceProblem sp{300, sH, SpectrumModel::alpha_regular(1.0),
                     default_truth(natural_phi(sH, {1.0, 0.0, 1.0}), sH, 300, 1.0), 1e4};
  EXPECT_EQ(contraction_probability(sp, 10, 1.0, 1e6, 50, 50, 1), 0.0);
  EXPECT_EQ(contraction_probability(sp, 10, 0.0, 5.0, 50, 50, 1), 1.0);
  const double p = contraction_probability(sp, 10, 0.05, 1.0, 50, 50, 1);
  EXPECT_GE(p, 0.0);
  EXPECT_LE(p, 1.0);
  EXPECT_EQ(p, contraction_probability(sp, 10, 0.05, 1.0, 50, 50, 1));
}

TEST(Contraction, NonIncreasingInSampleSize) {
  const auto sc = *find_preset("moderate");
  const auto rows = run_simulation_study(sc, {1e3, 1e5, 1e7}, 5.0, 200, 200, 42);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(rows[i].probability, rows[i - 1].probability);
}
