#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "marcz/domain.hpp"

using namespace marcz;

TEST(Domain, UniformGridWeights) {
  const auto d = build_domain(GridSpec{4});
  ASSERT_EQ(d.size(), 4u);
  for (double w : d.weights()) EXPECT_DOUBLE_EQ(w, 0.25);
  EXPECT_TRUE(d.is_uniform());
}

TEST(Domain, ExplicitWeightsRenormalize) {
  const auto d = build_domain({2.0, 2.0});
  EXPECT_DOUBLE_EQ(d.weight(0), 0.5);
  EXPECT_DOUBLE_EQ(d.weight(1), 0.5);
}

TEST(Domain, RejectsDegenerateInput) {
  EXPECT_THROW(build_domain({0.0, 0.0}), DomainError);
  EXPECT_THROW(build_domain(std::vector<double>{}), DomainError);
  EXPECT_THROW(build_domain({1.0, -0.5}), DomainError);
  EXPECT_THROW(build_domain(GridSpec{0}), DomainError);
}

TEST(Domain, ZeroAtomsAreKeptAndCounted) {
  const auto d = build_domain({1.0, 0.0, 3.0});
  EXPECT_EQ(d.size(), 3u);
  EXPECT_EQ(d.null_atoms(), 1u);
  EXPECT_DOUBLE_EQ(d.weight(2), 0.75);
}

TEST(System, TrigonometricDegreeOne) {
  const auto sys = build_system(family::Trigonometric{1}, build_domain(GridSpec{8}));
  ASSERT_EQ(sys.dim(), 3u);
  EXPECT_LT(sys.orthonormality_defect(), 1e-10);
  for (std::size_t i = 0; i < 8; ++i) {
    const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / 8.0;
    const auto r = static_cast<Eigen::Index>(i);
    EXPECT_NEAR(sys.eval()(r, 0), 1.0, 1e-12);
    EXPECT_NEAR(sys.eval()(r, 1), std::sqrt(2.0) * std::cos(x), 1e-12);
    EXPECT_NEAR(sys.eval()(r, 2), std::sqrt(2.0) * std::sin(x), 1e-12);
  }
}

TEST(System, TrigonometricNeedsEnoughPoints) {
  EXPECT_THROW(build_system(family::Trigonometric{4}, build_domain(GridSpec{8})), DomainError);
}

TEST(System, ConstantColumnUnchanged) {
  const auto sys =
      build_system(family::Explicit{Eigen::MatrixXd::Ones(6, 1)}, build_domain(GridSpec{6}));
  EXPECT_EQ(sys.eval(), Eigen::MatrixXd::Ones(6, 1));
}

TEST(System, RandomOrthonormalGram) {
  const auto sys = build_system(family::RandomOrthonormal{4, 7}, build_domain(GridSpec{16}));
  EXPECT_LT(sys.orthonormality_defect(), 1e-10);
}

TEST(System, Errors) {
  EXPECT_THROW(build_system(family::RandomOrthonormal{5, 1}, build_domain(GridSpec{4})), DomainError);
  Eigen::MatrixXd m(4, 2);
  m << 1, 2, 1, 2, 1, 2, 1, 2;
  EXPECT_THROW(build_system(family::Explicit{m}, build_domain(GridSpec{4})), RankError);
}

TEST(System, ReorthonormalizationIsIdempotent) {
  const auto sys = build_system(family::Legendre{6}, build_domain(GridSpec{200, -1.0, 1.0}));
  const auto again = build_system(family::Explicit{sys.eval()}, sys.domain());
  EXPECT_LE((again.eval() - sys.eval()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(System, TextRoundTrip) {
  const auto sys = build_system(family::Chebyshev{3},
                                build_domain(GridSpec{10, -1.0, 1.0, GridSpec::Kind::chebyshev_gauss}));
  std::stringstream ss;
  write_system(ss, sys);
  const auto back = read_system(ss);
  EXPECT_LE((back.eval() - sys.eval()).cwiseAbs().maxCoeff(), 1e-14);
  std::stringstream bad("3 2\n0.5 1 2\n");
  EXPECT_THROW(read_system(bad), DomainError);
}

TEST(Christoffel, ConstantSystem) {
  const auto sys =
      build_system(family::Explicit{Eigen::MatrixXd::Ones(5, 1)}, build_domain(GridSpec{5}));
  const auto prof = christoffel(sys);
  for (double v : prof.values) EXPECT_NEAR(v, 1.0, 1e-15);
  EXPECT_NEAR(prof.nikolskii_K, 1.0, 1e-15);
}

TEST(Christoffel, TrigonometricIsFlat) {
  const auto sys = build_system(family::Trigonometric{2}, build_domain(GridSpec{64}));
  const auto prof = christoffel(sys);
  for (double v : prof.values) EXPECT_NEAR(v, 5.0, 1e-12);
  EXPECT_NEAR(prof.nikolskii_K, 1.0, 1e-12);
}

TEST(Christoffel, RandomSystemAgainstProbeMaximum) {
  const auto sys = build_system(family::RandomOrthonormal{4, 7}, build_domain(GridSpec{16}));
  const auto prof = christoffel(sys);
  double row_max = 0.0;
  for (Eigen::Index i = 0; i < 16; ++i) row_max = std::max(row_max, sys.eval().row(i).squaredNorm());
  EXPECT_DOUBLE_EQ(prof.nikolskii_K, row_max / 4.0);
  // sup |f(x_i)|^2 / |f|_2^2 over random unit coefficient vectors.
  Rng rng(99);
  double best = 0.0;
  for (int t = 0; t < 100000; ++t) {
    Eigen::VectorXd c(4);
    for (int j = 0; j < 4; ++j) c(j) = rng.normal();
    c.normalize();
    best = std::max(best, (sys.eval() * c).cwiseAbs2().maxCoeff());
  }
  EXPECT_LE(best, prof.nikolskii_K * 4.0 + 1e-9);
  EXPECT_GT(best, 0.9 * prof.nikolskii_K * 4.0);
}

namespace {
std::vector<OrthonormalSystem> assorted_systems() {
  std::vector<OrthonormalSystem> v;
  v.push_back(build_system(family::Trigonometric{3}, build_domain(GridSpec{31})));
  v.push_back(build_system(family::Chebyshev{5},
                           build_domain(GridSpec{40, -1.0, 1.0, GridSpec::Kind::chebyshev_gauss})));
  v.push_back(build_system(family::Legendre{4}, build_domain(GridSpec{50, -1.0, 1.0})));
  v.push_back(build_system(family::RandomOrthonormal{6, 3}, build_domain(GridSpec{25})));
  Rng rng(5);
  std::vector<double> w(30);
  for (auto& x : w) x = 0.1 + rng.uniform();
  Eigen::MatrixXd raw(30, 3);
  for (Eigen::Index i = 0; i < 30; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) raw(i, j) = rng.normal();
  v.push_back(build_system(family::Explicit{raw}, build_domain(w)));
  return v;
}
}  // namespace

TEST(ChristoffelProperty, TraceIdentityAndNikolskii) {
  Rng rng(11);
  for (const auto& sys : assorted_systems()) {
    const auto prof = christoffel(sys);
    const double n = static_cast<double>(sys.dim());
    double trace = 0.0;
    for (std::size_t i = 0; i < sys.size(); ++i) trace += sys.domain().weight(i) * prof.values[i];
    EXPECT_NEAR(trace, n, 1e-8 * n);
    EXPECT_GE(prof.nikolskii_K * n, 1.0 - 1e-12);
    for (int t = 0; t < 200; ++t) {
      Eigen::VectorXd c(sys.dim());
      for (auto& x : c) x = rng.normal();
      const Eigen::VectorXd f = sys.evaluate(c);
      double l2 = 0.0;
      for (std::size_t i = 0; i < sys.size(); ++i)
        l2 += sys.domain().weight(i) * f(static_cast<Eigen::Index>(i)) * f(static_cast<Eigen::Index>(i));
      const double bound = std::sqrt(prof.nikolskii_K * n * l2);
      EXPECT_LE(f.cwiseAbs().maxCoeff(), bound * (1.0 + 1e-9));
    }
  }
}
