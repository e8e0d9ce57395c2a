#include "cladp/analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "cladp/basis.hpp"
#include "cladp/identifier.hpp"
#include "cladp/plant.hpp"
#include "test_support.hpp"

namespace cladp {
namespace {

using testing::Scalar;
using testing::Vec;

struct ScalarFixture {
  PlantModel plant = testing::ScalarPlant();
  CostSpec cost{Scalar(1.0), Scalar(1.0)};
  ValueBasis basis = MakePolynomialBasis(1, {2});
  Problem problem() const { return {plant, cost, basis}; }
};

GainInputs BaseInputs() {
  GainInputs in;
  in.W_bar = 1.0;
  in.Z_bar = 2.0;
  in.Gamma_under = 1.0;
  in.nu = 1.0;
  in.eta_c1 = 1.0;
  in.eta_c2 = 1.0;
  in.eta_a1 = 1.0;
  in.eta_a2 = 1.0;
  in.k_theta = 1.0;
  in.q_under = 1.0;
  in.y_under = 1.0;
  in.c_under = 1.0;
  return in;
}

TEST(BallGrid, PointsLieInBallAndGridsNest) {
  for (int level = 0; level < 5; ++level) {
    auto coarse = BallGrid(2, 1.5, level);
    auto fine = BallGrid(2, 1.5, level + 1);
    for (const auto& x : coarse) {
      EXPECT_LE(x.norm(), 1.5 + 1e-12);
      bool found = false;
      for (const auto& y : fine) found |= (x - y).norm() < 1e-12;
      EXPECT_TRUE(found);
    }
  }
  EXPECT_EQ(BallGrid(1, 1.0, 3).size(), 9u);
}

TEST(EstimateLipschitz, ScalarStableDrift) {
  LipschitzEstimate l = EstimateLipschitz(testing::ScalarPlant(), 2.0, 4);
  EXPECT_NEAR(l.L_f, 1.1, 1e-12);
  EXPECT_NEAR(l.L_Y, 1.1, 1e-12);
}

TEST(EstimateLipschitz, LinearDriftApproachesSpectralNorm) {
  MatrixXd A(2, 2);
  A << 0.5, 2.0, -1.0, 0.3;
  PlantModel plant = MakeLinearPlant(A, testing::DoubleIntegratorB());
  const double smax = SpectralNorm(A);
  LipschitzEstimate l = EstimateLipschitz(plant, 1.0, 7);
  EXPECT_LE(l.L_f, 1.1 * smax + 1e-12);
  EXPECT_GE(l.L_f, 1.1 * smax * 0.995);
  EXPECT_NEAR(l.L_Y, 1.1, 1e-12);
}

TEST(EstimateSups, RefinementNeverDecreasesEstimates) {
  PlantModel plant = MakePolynomialPlant();
  CostSpec cost(MatrixXd::Identity(2, 2), Scalar(1.0));
  ValueBasis basis = MakePolynomialBasis(2, {2, 3});
  Problem problem{plant, cost, basis};
  SupEstimates prev = EstimateSups(problem, 1.5, 1);
  LipschitzEstimate prev_l = EstimateLipschitz(plant, 1.5, 1);
  for (int level = 2; level <= 6; ++level) {
    SupEstimates s = EstimateSups(problem, 1.5, level);
    LipschitzEstimate l = EstimateLipschitz(plant, 1.5, level);
    EXPECT_GE(s.sigma_grad, prev.sigma_grad);
    EXPECT_GE(s.G_sigma, prev.G_sigma);
    EXPECT_GE(s.G, prev.G);
    EXPECT_GE(l.L_f, prev_l.L_f);
    EXPECT_GE(l.L_Y, prev_l.L_Y);
    prev = s;
    prev_l = l;
  }
}

TEST(EstimateSups, ScalarQuadraticClosedForm) {
  ScalarFixture f;
  SupEstimates s = EstimateSups(f.problem(), 2.0, 3);
  // sigma' = 2x, G_sigma = 4x^2, G = 1, all maximal at |x| = 2.
  EXPECT_NEAR(s.sigma_grad, 1.1 * 4.0, 1e-12);
  EXPECT_NEAR(s.G_sigma, 1.1 * 16.0, 1e-12);
  EXPECT_NEAR(s.G, 1.1, 1e-12);
}

TEST(ComputeVarthetas, ExactBasisZeroesEpsilonTerms) {
  ScalarFixture f;
  SamplePointSet samples(f.problem(), MakeSamplePoints(Vec({1.0}), 5), 1.0);
  GainInputs in = BaseInputs();
  in.L_f = 1.1;
  in.L_Y = 1.1;
  SupEstimates sups = EstimateSups(f.problem(), in.Z_bar, 4);
  Varthetas t = ComputeVarthetas(in, sups, f.problem(), samples);
  EXPECT_EQ(t[0], 0.0);
  EXPECT_EQ(t[3], 0.0);
  EXPECT_EQ(t[4], 0.0);
  // Only the epsilon-free part of the sixth constant remains.
  EXPECT_NEAR(t[5],
              0.5 * in.W_bar * sups.G_sigma + t[6] * in.W_bar * in.W_bar +
                  in.eta_a2 * in.W_bar,
              1e-12);
}

TEST(ComputeVarthetas, SeventhConstantSinglePoint) {
  ScalarFixture f;
  SamplePointSet samples(f.problem(), {Vec({1.0})}, 1.0);
  GainInputs in = BaseInputs();
  in.eta_c1 = 0.0;
  in.eta_c2 = 1.0;
  Varthetas t = ComputeVarthetas(in, SupEstimates{}, f.problem(), samples);
  EXPECT_NEAR(t[6], 0.5, 1e-15);
}

TEST(ComputeVarthetas, SecondConstantSinglePoint) {
  ScalarFixture f;
  SamplePointSet samples(f.problem(), {Vec({1.0})}, 1.0);
  GainInputs in = BaseInputs();
  in.W_bar = 1.0;
  in.eta_c2 = 1.0;
  Varthetas t = ComputeVarthetas(in, SupEstimates{}, f.problem(), samples);
  EXPECT_NEAR(t[1], 0.5, 1e-15);
}

TEST(ComputeVarthetas, FirstThirdAndFourthFromDefinitions) {
  ScalarFixture f;
  SamplePointSet samples(f.problem(), {Vec({0.5})}, 1.0);
  GainInputs in = BaseInputs();
  in.eta_c1 = 2.0;
  in.L_f = 3.0;
  in.L_Y = 1.5;
  in.eps_prime_bar = 0.2;
  in.nu = 4.0;
  in.Gamma_under = 0.25;  // sqrt(nu Gamma_under) = 1
  SupEstimates sups{5.0, 7.0, 0.5};
  Varthetas t = ComputeVarthetas(in, sups, f.problem(), samples);
  EXPECT_NEAR(t[0], 2.0 * 3.0 * 0.2 / 4.0, 1e-15);
  EXPECT_NEAR(t[2], 1.5 * 2.0 * 1.0 * 5.0 / 4.0, 1e-15);
  EXPECT_NEAR(t[3], 0.25 * 0.5 * 0.04, 1e-15);
}

TEST(ComputeVarthetas, NonnegativeAndMonotoneInGainsAndBounds) {
  ScalarFixture f;
  SamplePointSet samples(f.problem(), MakeSamplePoints(Vec({1.0}), 5), 1.0);
  SupEstimates sups = EstimateSups(f.problem(), 2.0, 4);
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> pos(0.01, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    GainInputs in = BaseInputs();
    in.eta_c1 = pos(rng);
    in.eta_c2 = pos(rng);
    in.W_bar = pos(rng);
    in.eps_prime_bar = pos(rng);
    in.eps_bar = pos(rng);
    in.L_f = pos(rng);
    in.L_Y = pos(rng);
    Varthetas base = ComputeVarthetas(in, sups, f.problem(), samples);
    for (double v : base) EXPECT_GE(v, 0.0);
    for (double GainInputs::*field :
         {&GainInputs::eta_c1, &GainInputs::eta_c2, &GainInputs::W_bar,
          &GainInputs::eps_prime_bar}) {
      GainInputs bumped = in;
      bumped.*field += pos(rng);
      Varthetas t = ComputeVarthetas(bumped, sups, f.problem(), samples);
      for (int i = 0; i < 7; ++i) EXPECT_GE(t[i], base[i]);
    }
  }
}

TEST(CheckGainConditions, AllConstantsZeroPasses) {
  GainInputs in = BaseInputs();
  in.eta_a1 = 1.0;
  in.eta_a2 = 0.2;
  in.eta_c2 = 0.8;
  in.c_under = 1.0;
  in.k_theta = 0.3;
  in.q_under = 0.7;
  Varthetas zero{};
  GainReport r = CheckGainConditions(in, zero);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.margins[0], 0.2 + 0.5, 1e-12);
  EXPECT_NEAR(r.margins[1], 0.3, 1e-12);
  EXPECT_NEAR(r.margins[2], 0.7, 1e-12);
  EXPECT_NEAR(r.margins[3], 0.8 - 0.5, 1e-12);
}

TEST(CheckGainConditions, StateCostBoundaryFails) {
  GainInputs in = BaseInputs();
  Varthetas t{};
  t[0] = in.q_under;
  in.eta_c2 = 100.0;
  GainReport r = CheckGainConditions(in, t);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.margins[static_cast<int>(GainCondition::kQUnder)], 0.0);
}

TEST(CheckGainConditions, ParameterGainMargin) {
  GainInputs in = BaseInputs();
  in.zeta1 = 1.0;
  in.Z_bar = 2.0;
  in.y_under = 2.0;
  in.k_theta = 0.4;
  Varthetas t{};
  t[1] = 0.5;
  t[2] = 0.1;
  GainReport r = CheckGainConditions(in, t);
  EXPECT_NEAR(r.margins[static_cast<int>(GainCondition::kKTheta)], 0.05, 1e-12);
}

TEST(CheckGainConditions, CriticAndActorMarginsFromDefinitions) {
  GainInputs in = BaseInputs();
  in.zeta1 = 0.5;
  in.zeta2 = 2.0;
  in.W_bar = 1.5;
  in.Z_bar = 3.0;
  in.eta_a1 = 2.0;
  in.eta_a2 = 0.4;
  in.eta_c2 = 10.0;
  in.c_under = 0.25;
  Varthetas t = {0.1, 0.2, 0.3, 0.0, 0.0, 0.0, 0.4};
  GainReport r = CheckGainConditions(in, t);
  EXPECT_NEAR(r.margins[0], 0.4 - (-1.0 + 0.4 * 1.5 * 5.0 / 4.0), 1e-12);
  EXPECT_NEAR(r.margins[3],
              10.0 - (2.0 * 0.4 * 1.5 + 2.0 + 2.0 * (0.1 + 0.5 * 0.2 + 0.3 * 3.0)) /
                         0.5,
              1e-12);
}

TEST(CheckGainConditions, MissingCertificatesFail) {
  GainInputs in = BaseInputs();
  in.y_under = 0.0;
  in.c_under = 0.0;
  GainReport r = CheckGainConditions(in, Varthetas{});
  EXPECT_FALSE(r.pass);
  EXPECT_TRUE(r.missing_stack_certificate);
  EXPECT_TRUE(r.missing_sample_certificate);
  EXPECT_EQ(r.margins[1], -std::numeric_limits<double>::infinity());
  EXPECT_EQ(r.margins[3], -std::numeric_limits<double>::infinity());
}

TEST(CheckGainConditions, IncreasingGainsNeverBreaksPass) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(0.0, 2.0);
  int passing = 0;
  for (int trial = 0; trial < 200; ++trial) {
    GainInputs in = BaseInputs();
    in.eta_a1 = pos(rng);
    in.eta_a2 = pos(rng);
    in.eta_c2 = 5.0 * pos(rng);
    in.k_theta = pos(rng);
    in.q_under = pos(rng);
    in.c_under = 0.5 + pos(rng);
    in.y_under = 0.5 + pos(rng);
    Varthetas t;
    for (double& v : t) v = 0.2 * pos(rng);
    GainReport base = CheckGainConditions(in, t);
    if (!base.pass) continue;
    ++passing;
    for (double GainInputs::*field : {&GainInputs::eta_a2, &GainInputs::k_theta,
                                      &GainInputs::eta_c2, &GainInputs::q_under}) {
      GainInputs bumped = in;
      bumped.*field += pos(rng);
      GainReport r = CheckGainConditions(bumped, t);
      EXPECT_TRUE(r.pass);
      for (int i = 0; i < 4; ++i) EXPECT_GE(r.margins[i], base.margins[i]);
    }
  }
  EXPECT_GE(passing, 50);
}

TEST(DecayCertificate, RateFromGains) {
  IdentifierGains gains(Vec({2.0}), Scalar(1.0), 0.5);
  std::vector<double> t = {0.0, 1.0};
  std::vector<double> V0 = {1.0, std::exp(-2.0)};
  std::vector<double> y = {2.0, 2.0};
  DecayCertificate c = IdentifierDecayCertificate(t, V0, y, gains, 1e-6);
  EXPECT_TRUE(c.rank_reached);
  EXPECT_DOUBLE_EQ(c.rate, 2.0);
  EXPECT_TRUE(c.pass);
}

TEST(DecayCertificate, RateUsesLargestInverseGainEigenvalue) {
  // v = min(3, 1 * 1) = 1, v_bar = 0.5 * max(1, 1/0.25) = 2.
  IdentifierGains gains(Vec({3.0, 4.0}), Vec({0.25, 2.0}).asDiagonal(), 1.0);
  std::vector<double> t = {0.0}, V0 = {1.0}, y = {1.0};
  EXPECT_DOUBLE_EQ(IdentifierDecayCertificate(t, V0, y, gains, 1e-6).rate, 0.5);
}

TEST(DecayCertificate, ZeroLyapunovTriviallyPasses) {
  IdentifierGains gains(Vec({2.0}), Scalar(1.0), 0.5);
  std::vector<double> t = {0.0, 0.5, 1.0}, V0 = {0, 0, 0}, y = {1, 1, 1};
  EXPECT_TRUE(IdentifierDecayCertificate(t, V0, y, gains, 1e-6).pass);
}

TEST(DecayCertificate, PlateauFails) {
  IdentifierGains gains(Vec({2.0}), Scalar(1.0), 0.5);
  std::vector<double> t = {0.0, 0.5, 1.0}, V0 = {1.0, 0.6, 0.6}, y = {2, 2, 2};
  DecayCertificate c = IdentifierDecayCertificate(t, V0, y, gains, 1e-6);
  EXPECT_FALSE(c.pass);
  EXPECT_GT(c.worst_ratio, 1.0);
}

TEST(DecayCertificate, StartsAtFirstRankPass) {
  IdentifierGains gains(Vec({2.0}), Scalar(1.0), 0.5);
  // Growth before the rank pass is not checked.
  std::vector<double> t = {0.0, 1.0, 2.0};
  std::vector<double> V0 = {0.1, 1.0, std::exp(-2.0)};
  std::vector<double> y = {0.0, 2.0, 2.0};
  DecayCertificate c = IdentifierDecayCertificate(t, V0, y, gains, 1e-6);
  EXPECT_DOUBLE_EQ(c.start_time, 1.0);
  EXPECT_TRUE(c.pass);
}

TEST(DecayCertificate, NoRankPassMeansNothingCertified) {
  IdentifierGains gains(Vec({2.0}), Scalar(1.0), 0.5);
  std::vector<double> t = {0.0, 1.0}, V0 = {1.0, 2.0}, y = {0.0, 0.0};
  DecayCertificate c = IdentifierDecayCertificate(t, V0, y, gains, 1e-6);
  EXPECT_FALSE(c.rank_reached);
}

TEST(GainInputs, RejectsInvalidValues) {
  GainInputs in = BaseInputs();
  in.zeta1 = 0.0;
  EXPECT_THROW(in.Validate(), ContractViolation);
  in = BaseInputs();
  in.W_bar = -1.0;
  EXPECT_THROW(in.Validate(), ContractViolation);
  in = BaseInputs();
  in.Z_bar = 0.0;
  EXPECT_THROW(in.Validate(), ContractViolation);
}

}  // namespace
}  // namespace cladp
