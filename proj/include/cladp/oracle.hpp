#pragma once

#include <optional>

#include "cladp/basis.hpp"
#include "cladp/plant.hpp"
#include "cladp/types.hpp"

namespace cladp {

/// Solves A' P + P A + C = 0 through the n^2 x n^2 Kronecker system.
/// Throws std::runtime_error if the system is singular.
MatrixXd SolveLyapunov(const MatrixXd& A, const MatrixXd& C);

/// ||A'P + PA - P B R^-1 B' P + Q|| (max-abs entry).
double CareResidual(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                    const MatrixXd& R, const MatrixXd& P);

/// A gain K with A - B K Hurwitz, via Bass' method: solve
/// (A + a I) Z + Z (A + a I)' = 2 B B' with a > max Re(lambda(A)) and take
/// K = B' Z^-1. Throws std::runtime_error when (A, B) is not controllable
/// enough for Z to be invertible or the result is not stabilizing.
MatrixXd StabilizingGain(const MatrixXd& A, const MatrixXd& B);

bool IsHurwitz(const MatrixXd& A);

struct CareOptions {
  double tolerance = 1e-12;
  int max_iterations = 100;
};

/// Continuous algebraic Riccati equation by Newton-Kleinman iteration
/// started from `K0` (computed with StabilizingGain when absent).
/// Throws std::runtime_error if the initial gain does not stabilize or the
/// residual fails to reach 1e-10 within the iteration budget.
MatrixXd SolveCare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                   const MatrixXd& R, const std::optional<MatrixXd>& K0 = std::nullopt,
                   const CareOptions& options = {});

/// Coefficients of x'Px on the degree-2 monomial basis: P_ii on x_i^2 and
/// 2 P_ij on x_i x_j (i < j). Throws ContractViolation if `basis` is not
/// exactly the degree-2 monomial set.
VectorXd IdealWeights(const MatrixXd& P, const ValueBasis& basis);

struct LqrOracle {
  MatrixXd A;
  MatrixXd B;
  MatrixXd P;
  MatrixXd K;
  VectorXd W_star;
};

/// Oracle for a catalog plant with a linearization; throws ContractViolation
/// when the plant has none.
LqrOracle MakeLqrOracle(const PlantModel& model, const CostSpec& cost,
                        const ValueBasis& basis);

}  // namespace cladp
