#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "marcz/norms.hpp"

using namespace marcz;

namespace {

// {1, sqrt2 cos} on the uniform 8-point grid.
OrthonormalSystem cosine_pair(std::size_t M = 8) {
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(M), 2);
  for (std::size_t i = 0; i < M; ++i) {
    const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(M);
    phi(static_cast<Eigen::Index>(i), 0) = 1.0;
    phi(static_cast<Eigen::Index>(i), 1) = std::sqrt(2.0) * std::cos(x);
  }
  return build_system(family::Explicit{phi}, build_domain(GridSpec{M}));
}

IndexSet all_of(std::size_t M) {
  IndexSet s(M);
  for (std::size_t i = 0; i < M; ++i) s[i] = i;
  return s;
}

}  // namespace

TEST(DiscreteNorm, Examples) {
  const std::vector<double> ones{1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(discrete_norm(ones, {0, 1}, 1.0, Normalization::mean), 1.0);
  const std::vector<double> v{3, 0, 0, 0};
  EXPECT_NEAR(discrete_norm(v, {0, 1}, 2.0, Normalization::mean), std::sqrt(4.5), 1e-15);
  const std::vector<double> w{1, -2, 3};
  EXPECT_DOUBLE_EQ(discrete_norm(w, {0, 1, 2}, std::numeric_limits<double>::infinity(),
                                 Normalization::mean),
                   3.0);
  EXPECT_THROW(discrete_norm(w, {}, 1.0, Normalization::sum), DomainError);
}

TEST(DiscreteNorm, OnesHaveUnitMeanNorm) {
  const std::vector<double> ones(9, 1.0);
  for (double p : {1.0, 1.5, 2.0, 7.0})
    EXPECT_NEAR(discrete_norm(ones, {0, 3, 3, 8}, p, Normalization::mean), 1.0, 1e-15);
}

TEST(RatioL2, FullDomainWithMeasureWeights) {
  const auto sys = build_system(family::RandomOrthonormal{3, 2}, build_domain({1, 2, 3, 4, 5}));
  const auto w = sys.domain().weights();
  const auto ext = ratio_extremes_l2(sys, all_of(5), w);
  EXPECT_NEAR(ext.lower, 1.0, 1e-12);
  EXPECT_NEAR(ext.upper, 1.0, 1e-12);
}

TEST(RatioL2, ConstantSystem) {
  const auto sys =
      build_system(family::Explicit{Eigen::MatrixXd::Ones(7, 1)}, build_domain(GridSpec{7}));
  const auto ext = ratio_extremes_l2(sys, {2, 2, 5});
  EXPECT_NEAR(ext.lower, 1.0, 1e-15);
  EXPECT_NEAR(ext.upper, 1.0, 1e-15);
}

TEST(RatioL2, EvenSubgridIsExact) {
  const auto sys = build_system(family::Trigonometric{1}, build_domain(GridSpec{8}));
  const auto ext = ratio_extremes_l2(sys, {0, 2, 4, 6});
  EXPECT_NEAR(ext.lower, 1.0, 1e-12);
  EXPECT_NEAR(ext.upper, 1.0, 1e-12);
}

TEST(RatioLp, ConstantSystemAndFullDomain) {
  const auto one =
      build_system(family::Explicit{Eigen::MatrixXd::Ones(6, 1)}, build_domain(GridSpec{6}));
  for (double p : {1.0, 1.3, 1.5}) {
    const auto e = ratio_extremes_lp(one, {1, 4}, p, 4, 1);
    EXPECT_NEAR(e.lower, 1.0, 1e-14);
    EXPECT_NEAR(e.upper, 1.0, 1e-14);
  }
  const auto sys = build_system(family::Trigonometric{2}, build_domain(GridSpec{32}));
  const auto e = ratio_extremes_lp(sys, all_of(32), 1.0, 8, 3);
  EXPECT_NEAR(e.lower, 1.0, 1e-12);
  EXPECT_NEAR(e.upper, 1.0, 1e-12);
  EXPECT_THROW(ratio_extremes_lp(sys, {1}, 1.0, 0, 3), DomainError);
}

// Golden values from a dense numpy sweep (tests/oracles/fixtures.py).
TEST(BruteForce, FrozenFixtures) {
  const auto sys = cosine_pair();
  auto e = brute_force_extremes(sys, {0, 1, 2, 3}, 1.0, 100000);
  EXPECT_NEAR(e.lower, 0.7500028006864167, 1e-12);
  EXPECT_NEAR(e.upper, 1.2499971993135832, 1e-12);
  e = brute_force_extremes(sys, {0, 1, 2, 3}, 1.5, 100000);
  EXPECT_NEAR(e.lower, 0.6976000730812403, 1e-12);
  EXPECT_NEAR(e.upper, 1.3023999269187598, 1e-12);
  e = brute_force_extremes(sys, {0, 2, 4, 6}, 1.0, 100000);
  EXPECT_NEAR(e.lower, 0.8284271247461902, 1e-12);
  EXPECT_NEAR(e.upper, 1.0938363213560545, 1e-12);
}

TEST(BruteForce, SmallCases) {
  const auto sys = cosine_pair();
  auto e = brute_force_extremes(sys, all_of(8), 1.0, 1000);
  EXPECT_NEAR(e.lower, 1.0, 1e-12);
  EXPECT_NEAR(e.upper, 1.0, 1e-12);
  const auto one =
      build_system(family::Explicit{Eigen::MatrixXd::Ones(3, 1)}, build_domain({1.0, 1.0, 2.0}));
  e = brute_force_extremes(one, {0}, 1.5, 10);
  EXPECT_DOUBLE_EQ(e.lower, e.upper);
  EXPECT_NEAR(e.lower, 1.0, 1e-15);
  const auto big = build_system(family::Trigonometric{2}, build_domain(GridSpec{16}));
  EXPECT_THROW(brute_force_extremes(big, {0}, 1.0, 10), DomainError);
}

TEST(BruteForce, ThreeDimensionalSweepBracketsProbes) {
  const auto sys = build_system(family::Trigonometric{1}, build_domain(GridSpec{12}));
  const IndexSet sub{0, 1, 5, 7, 8};
  const auto bf = brute_force_extremes(sys, sub, 1.0, 600);
  const auto pr = ratio_extremes_lp(sys, sub, 1.0, 64, 5);
  EXPECT_NEAR(pr.lower, bf.lower, 1e-3 * bf.lower);
  EXPECT_NEAR(pr.upper, bf.upper, 1e-3 * bf.upper);
}

TEST(RatioLp, MatchesBruteForceOnEvenSubset) {
  const auto sys = cosine_pair();
  const auto bf = brute_force_extremes(sys, {0, 2, 4, 6}, 1.0, 100000);
  const auto pr = ratio_extremes_lp(sys, {0, 2, 4, 6}, 1.0, 64, 1);
  EXPECT_NEAR(pr.lower, bf.lower, 1e-4 * bf.lower);
  EXPECT_NEAR(pr.upper, bf.upper, 1e-4 * bf.upper);
}

TEST(RatioProperty, ScalingInvariance) {
  const auto sys = build_system(family::RandomOrthonormal{4, 8}, build_domain(GridSpec{40}));
  const auto prob = certification_problem(sys, {1, 5, 9, 9, 30}, 1.5);
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd c(4);
    for (auto& x : c) x = rng.normal();
    const double r = ratio_value(prob, c);
    EXPECT_NEAR(ratio_value(prob, -3.7 * c), r, 1e-12 * r);
    EXPECT_NEAR(ratio_value(prob, 1e-5 * c), r, 1e-12 * r);
  }
}

TEST(RatioProperty, ProbeRouteAgreesWithSpectralAtPTwo) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto sys = build_system(family::RandomOrthonormal{4, seed}, build_domain(GridSpec{60}));
    Rng rng(seed);
    IndexSet sub(20);
    for (auto& i : sub) i = rng.below(60);
    const auto spec = ratio_extremes_l2(sys, sub);
    const auto prob = ratio_extremes_probe(certification_problem(sys, sub, 2.0), {500, seed});
    EXPECT_GE(prob.lower, spec.lower - 1e-12);
    EXPECT_LE(prob.upper, spec.upper + 1e-12);
    EXPECT_LT(prob.lower - spec.lower, 1e-3);
    EXPECT_LT(spec.upper - prob.upper, 1e-3);
  }
}

TEST(RatioProperty, NestedSubsetsHaveSmallerSums) {
  const auto sys = build_system(family::Trigonometric{3}, build_domain(GridSpec{20}));
  const IndexSet J{0, 2, 3, 3, 7, 11, 12, 19};
  const IndexSet I{2, 3, 11};
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd c(7);
    for (auto& x : c) x = rng.normal();
    const Eigen::VectorXd f = sys.evaluate(c);
    const std::span<const double> v(f.data(), static_cast<std::size_t>(f.size()));
    for (double p : {1.0, 1.5, 2.0})
      EXPECT_LE(std::pow(discrete_norm(v, I, p, Normalization::sum), p),
                std::pow(discrete_norm(v, J, p, Normalization::sum), p) * (1 + 1e-14));
  }
}

TEST(Certify, FullSupportPassesAtEveryEpsilon) {
  const auto sys = build_system(family::RandomOrthonormal{3, 9}, build_domain({3, 1, 4, 1, 5, 9}));
  CertifyOptions opt;
  opt.weights = sys.domain().weights();
  for (double eps : {0.5, 1e-3, 1e-9}) {
    const auto c = certify(sys, all_of(6), 2.0, eps, opt);
    EXPECT_TRUE(*c.passed);
    EXPECT_EQ(c.exactness, Exactness::spectral_exact);
  }
}

TEST(Certify, SinglePointFails) {
  const auto sys = build_system(family::RandomOrthonormal{3, 9}, build_domain(GridSpec{10}));
  const auto c = certify(sys, {4}, 2.0, 0.1);
  EXPECT_FALSE(*c.passed);
  EXPECT_NEAR(c.lower_A, 0.0, 1e-12);
  EXPECT_LE(c.lower_A, c.upper_B);
}

TEST(Certify, ModesAndInvariants) {
  const auto sys = cosine_pair(16);
  CertifyOptions oracle;
  oracle.mode = CertifyMode::oracle;
  oracle.resolution = 20000;
  const auto o = certify(sys, {0, 3, 5, 8, 11}, 1.0, 0.5, oracle);
  EXPECT_EQ(o.exactness, Exactness::oracle_exact);
  const auto p = certify(sys, {0, 3, 5, 8, 11}, 1.0, 0.5);
  EXPECT_EQ(p.exactness, Exactness::probe_estimate);
  EXPECT_GE(p.lower_A, o.lower_A - 1e-6);
  EXPECT_LE(p.upper_B, o.upper_B + 1e-6);
  EXPECT_EQ(*p.passed, p.lower_A >= 0.5 && p.upper_B <= 1.5);
  EXPECT_THROW(certify(sys, {0}, 1.0, 1.0), DomainError);
  EXPECT_THROW(certify(sys, {0}, 3.0, 0.5), DomainError);
}

TEST(Certify, WeightedL1OnFullDomain) {
  const auto sys = build_system(family::Trigonometric{1}, build_domain(GridSpec{16}));
  CertifyOptions opt;
  opt.weights = sys.domain().weights();
  const auto c = certify(sys, all_of(16), 1.0, 0.01, opt);
  EXPECT_NEAR(c.lower_A, 1.0, 1e-12);
  EXPECT_NEAR(c.upper_B, 1.0, 1e-12);
  EXPECT_TRUE(*c.passed);
  opt.weights = std::vector<double>(16, -1.0);
  EXPECT_THROW(certify(sys, all_of(16), 1.0, 0.01, opt), DomainError);
}

TEST(Certificate, RecordRoundTrip) {
  const auto sys = cosine_pair(16);
  CertifyOptions opt;
  opt.seed = 42;
  const auto c = certify(sys, {0, 3, 5, 8, 11}, 1.5, 0.3, opt);
  std::size_t m = 0;
  const auto back = parse_record(to_record(c), &m);
  EXPECT_EQ(m, 5u);
  EXPECT_EQ(back.p, c.p);
  EXPECT_EQ(back.lower_A, c.lower_A);
  EXPECT_EQ(back.upper_B, c.upper_B);
  EXPECT_EQ(back.exactness, c.exactness);
  EXPECT_EQ(back.probe_budget, c.probe_budget);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(*back.passed, *c.passed);
  EXPECT_EQ(*back.epsilon_target, 0.3);
}
