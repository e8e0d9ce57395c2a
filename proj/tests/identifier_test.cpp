#include "cladp/identifier.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <vector>

#include "cladp/plant.hpp"
#include "test_support.hpp"

namespace cladp {
namespace {

using testing::Scalar;
using testing::ScalarPlant;
using testing::Vec;

IdentifierGains ScalarGains(double k_x, double gamma, double k_theta) {
  return IdentifierGains(Vec({k_x}), Scalar(gamma), k_theta);
}

StackRecord ExactRecord(const PlantModel& plant, const VectorXd& x,
                        const VectorXd& u) {
  return MakeStackRecord(plant, x, u, Dynamics(plant, x, u));
}

StackRecord RegressorOnly(const MatrixXd& Y) {
  const int n = static_cast<int>(Y.rows());
  return StackRecord{VectorXd::Zero(n), VectorXd::Zero(1), VectorXd::Zero(n), Y,
                     MatrixXd::Zero(n, 1)};
}

double MinEig(const MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(m).eigenvalues().minCoeff();
}

TEST(ObserverDerivative, MatchesPlantWithoutEstimationError) {
  PlantModel plant = MakePolynomialPlant();
  IdentifierGains gains(Vec({2.0, 3.0}), MatrixXd::Identity(5, 5), 1.0);
  VectorXd x = Vec({0.4, -0.8});
  VectorXd u = Vec({0.3});
  IdentifierState state{x, plant.theta_star()};
  EXPECT_TRUE(ObserverDerivative(state, gains, plant, x, u)
                  .isApprox(Dynamics(plant, x, u), 1e-14));
}

TEST(ObserverDerivative, ScalarExamples) {
  PlantModel plant = ScalarPlant();
  IdentifierGains gains = ScalarGains(2.0, 1.0, 1.0);
  IdentifierState state{Vec({0.5}), Vec({-1.0})};
  EXPECT_DOUBLE_EQ(
      ObserverDerivative(state, gains, plant, Vec({1.0}), Vec({0.0}))(0), 0.0);
  EXPECT_DOUBLE_EQ(
      ObserverDerivative(state, gains, plant, Vec({1.0}), Vec({1.0}))(0), 1.0);
}

TEST(ObserverDerivative, RejectsWrongDimensions) {
  PlantModel plant = ScalarPlant();
  IdentifierGains gains = ScalarGains(2.0, 1.0, 1.0);
  IdentifierState state{Vec({0.5, 0.1}), Vec({-1.0})};
  EXPECT_THROW(ObserverDerivative(state, gains, plant, Vec({1.0}), Vec({0.0})),
               ContractViolation);
}

TEST(IdentifierGains, RejectsInvalidGains) {
  EXPECT_THROW(ScalarGains(0.0, 1.0, 1.0), ContractViolation);
  EXPECT_THROW(ScalarGains(1.0, -1.0, 1.0), ContractViolation);
  EXPECT_THROW(ScalarGains(1.0, 1.0, -0.1), ContractViolation);
}

TEST(ThetaUpdate, ZeroAtTrueParametersWithExactData) {
  PlantModel plant = MakePolynomialPlant();
  IdentifierGains gains(Vec({1.0, 1.0}), MatrixXd::Identity(5, 5), 2.0);
  HistoryStack stack(10, 5);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k)
    stack.Insert(ExactRecord(plant, testing::RandomVector(rng, 2, 1.0),
                             testing::RandomVector(rng, 1, 1.0)));
  IdentifierState state{Vec({0.2, 0.1}), plant.theta_star()};
  VectorXd dot = ThetaUpdateDerivative(state, gains, stack, plant,
                                       Vec({0.2, 0.1}), VectorXd::Zero(2));
  EXPECT_LE(dot.norm(), 1e-12);
}

TEST(ThetaUpdate, ScalarHistoryTerm) {
  PlantModel plant = ScalarPlant();
  IdentifierGains gains = ScalarGains(1.0, 1.0, 0.5);
  HistoryStack stack(2, 1);
  stack.Insert(ExactRecord(plant, Vec({1.0}), Vec({0.0})));
  stack.Insert(ExactRecord(plant, Vec({-1.0}), Vec({0.0})));
  IdentifierState state{Vec({0.0}), Vec({-2.0})};
  EXPECT_NEAR(ThetaUpdateDerivative(state, gains, stack, plant, Vec({0.0}),
                                    Vec({0.0}))(0),
              1.0, 1e-14);
  EXPECT_NEAR(ThetaUpdateDerivative(state, gains, stack, plant, Vec({2.0}),
                                    Vec({0.3}))(0),
              1.6, 1e-14);
}

TEST(ThetaUpdate, EmptyStackIsUnusable) {
  PlantModel plant = ScalarPlant();
  HistoryStack stack(2, 1);
  IdentifierState state{Vec({0.0}), Vec({0.0})};
  EXPECT_THROW(ThetaUpdateDerivative(state, ScalarGains(1, 1, 1), stack, plant,
                                     Vec({1.0}), Vec({0.0})),
               std::logic_error);
}

TEST(ThetaUpdate, EqualsClosedFormWithExactDerivatives) {
  // With exact derivatives the history term is k_theta (sum Y'Y) theta~.
  std::mt19937_64 rng(17);
  PlantModel plant = MakePolynomialPlant();
  MatrixXd M = MatrixXd::Random(5, 5);
  MatrixXd Gamma = M * M.transpose() + MatrixXd::Identity(5, 5);
  IdentifierGains gains(Vec({1.5, 0.5}), Gamma, 0.7);
  HistoryStack stack(10, 5);
  for (int trial = 0; trial < 50; ++trial) {
    stack.Insert(ExactRecord(plant, testing::RandomVector(rng, 2, 1.0),
                             testing::RandomVector(rng, 1, 2.0)));
    VectorXd x = testing::RandomVector(rng, 2, 1.0);
    VectorXd xtilde = testing::RandomVector(rng, 2, 0.5);
    VectorXd thetahat = testing::RandomVector(rng, 5, 2.0);
    VectorXd theta_tilde = plant.theta_star() - thetahat;
    VectorXd closed = Gamma * (plant.Regressor(x).transpose() * xtilde +
                               gains.k_theta * stack.RecomputeGram() * theta_tilde);
    IdentifierState state{x - xtilde, thetahat};
    VectorXd law = ThetaUpdateDerivative(state, gains, stack, plant, x, xtilde);
    EXPECT_LE((law - closed).norm(), 1e-10);
  }
}

TEST(HistoryStack, InsertsBelowCapacity) {
  HistoryStack stack(3, 1);
  EXPECT_TRUE(stack.Insert(RegressorOnly(Scalar(0.5))));
  EXPECT_EQ(stack.size(), 1);
  EXPECT_DOUBLE_EQ(stack.y_under(), 0.25);
}

TEST(HistoryStack, RejectsCandidateThatCannotRaiseMinimumEigenvalue) {
  HistoryStack stack(2, 1);
  stack.Insert(RegressorOnly(Scalar(1.0)));
  stack.Insert(RegressorOnly(Scalar(-1.0)));
  EXPECT_FALSE(stack.Insert(RegressorOnly(Scalar(0.0))));
  EXPECT_DOUBLE_EQ(stack.y_under(), 2.0);
}

TEST(HistoryStack, ReplacesWeakestEntry) {
  HistoryStack stack(2, 1);
  stack.Insert(RegressorOnly(Scalar(1.0)));
  stack.Insert(RegressorOnly(Scalar(0.1)));
  EXPECT_NEAR(stack.y_under(), 1.01, 1e-14);
  EXPECT_TRUE(stack.Insert(RegressorOnly(Scalar(-1.0))));
  EXPECT_NEAR(stack.y_under(), 2.0, 1e-14);
  EXPECT_DOUBLE_EQ(stack.entries()[1].Y(0, 0), -1.0);
}

TEST(HistoryStack, RejectsRegressorOfWrongWidth) {
  HistoryStack stack(2, 2);
  EXPECT_THROW(stack.Insert(RegressorOnly(Scalar(1.0))), ContractViolation);
}

TEST(HistoryStack, MinimumEigenvalueNeverDecreases) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> capacity_dist(1, 6);
  for (int seq = 0; seq < 1000; ++seq) {
    const int p = 1 + seq % 3;
    const int n = 2;
    HistoryStack stack(capacity_dist(rng) + p - 1, p);
    double previous = stack.y_under();
    for (int k = 0; k < 20; ++k) {
      stack.Insert(RegressorOnly(testing::RandomVector(rng, n * p, 1.0)
                                     .reshaped(n, p)));
      ASSERT_GE(stack.y_under(), previous) << "sequence " << seq;
      previous = stack.y_under();
    }
    EXPECT_LE(stack.size(), stack.capacity());
    EXPECT_LE((stack.gram() - stack.RecomputeGram()).cwiseAbs().maxCoeff(),
              1e-10);
    EXPECT_NEAR(stack.y_under(), std::max(0.0, MinEig(stack.RecomputeGram())),
                1e-10);
  }
}

TEST(HistoryStack, GreedyChoiceMatchesBruteForce) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    HistoryStack stack(3, 2);
    for (int k = 0; k < 3; ++k)
      stack.Insert(RegressorOnly(testing::RandomVector(rng, 4, 1.0).reshaped(2, 2)));
    MatrixXd Yc = testing::RandomVector(rng, 4, 1.0).reshaped(2, 2);
    double best = stack.y_under();
    for (int j = 0; j < 3; ++j) {
      MatrixXd gram = Yc.transpose() * Yc;
      for (int i = 0; i < 3; ++i)
        if (i != j) gram += stack.entries()[i].Y.transpose() * stack.entries()[i].Y;
      best = std::max(best, std::max(0.0, MinEig(gram)));
    }
    const double before = stack.y_under();
    const bool accepted = stack.Insert(RegressorOnly(Yc));
    EXPECT_NEAR(stack.y_under(), accepted ? best : before, 1e-10);
    EXPECT_EQ(accepted, best > before + 1e-12);
  }
}

TEST(CheckRank, Examples) {
  HistoryStack zero(1, 1);
  zero.Insert(RegressorOnly(Scalar(0.0)));
  RankCertificate c0 = CheckRank(zero, 1e-6);
  EXPECT_FALSE(c0.pass);
  EXPECT_EQ(c0.y_under, 0.0);

  HistoryStack pair(2, 1);
  pair.Insert(RegressorOnly(Scalar(1.0)));
  pair.Insert(RegressorOnly(Scalar(-1.0)));
  RankCertificate c1 = CheckRank(pair, 1e-6);
  EXPECT_TRUE(c1.pass);
  EXPECT_DOUBLE_EQ(c1.y_under, 2.0);

  HistoryStack planar(2, 2);
  MatrixXd Y1 = MatrixXd::Zero(2, 2);
  MatrixXd Y2 = MatrixXd::Zero(2, 2);
  Y1(0, 0) = 1.0;
  Y2(1, 1) = 1.0;
  planar.Insert(RegressorOnly(Y1));
  planar.Insert(RegressorOnly(Y2));
  RankCertificate c2 = CheckRank(planar, 1e-6);
  EXPECT_TRUE(c2.pass);
  EXPECT_NEAR(c2.y_under, 1.0, 1e-14);
}

TEST(CheckRank, StrictThreshold) {
  HistoryStack stack(1, 1);
  stack.Insert(RegressorOnly(Scalar(1.0)));
  EXPECT_FALSE(CheckRank(stack, 1.0).pass);
  EXPECT_TRUE(CheckRank(stack, 0.999).pass);
}

std::vector<VectorXd> Sampled(double (*f)(double), double t0, double dt,
                              int count) {
  std::vector<VectorXd> out;
  for (int k = 0; k < count; ++k) out.push_back(Vec({f(t0 + k * dt)}));
  return out;
}

TEST(SmoothDerivative, Examples) {
  const double dt = 0.1;
  auto constant = Sampled([](double) { return 4.2; }, 0.9, dt, 3);
  EXPECT_EQ(SmoothDerivative(constant, dt, 1)(0), 0.0);
  auto square = Sampled([](double t) { return t * t; }, 0.9, dt, 3);
  EXPECT_NEAR(SmoothDerivative(square, dt, 1)(0), 2.0, 1e-13);
  auto cube = Sampled([](double t) { return t * t * t; }, 0.9, dt, 3);
  EXPECT_NEAR(SmoothDerivative(cube, dt, 1)(0), 3.01, 1e-13);
}

TEST(SmoothDerivative, RejectsBoundaryIndices) {
  auto samples = Sampled([](double t) { return t; }, 0.0, 0.1, 3);
  EXPECT_THROW(SmoothDerivative(samples, 0.1, 0), std::out_of_range);
  EXPECT_THROW(SmoothDerivative(samples, 0.1, 2), std::out_of_range);
  EXPECT_THROW(SmoothDerivative(samples, 0.1, 7), std::out_of_range);
}

TEST(IdentifierLyapunov, WeightsParameterErrorByInverseGain) {
  MatrixXd Gamma = Vec({2.0, 0.5}).asDiagonal();
  IdentifierGains gains(Vec({1.0}), Gamma, 1.0);
  // 0.5*0.09 + 0.5*(1/2 + 4/0.5)
  EXPECT_NEAR(IdentifierLyapunov(Vec({0.3}), Vec({1.0, 2.0}), gains),
              0.045 + 0.5 * (0.5 + 8.0), 1e-14);
}

}  // namespace
}  // namespace cladp
