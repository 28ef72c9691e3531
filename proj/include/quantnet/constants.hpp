#pragma once

#include <vector>

#include "quantnet/distributed_qp.hpp"

namespace quantnet {

struct ProblemConstants {
  double sigma_f = 0.0;  // lambda_min of the global Hessian
  double L = 0.0;        // lambda_max of the global Hessian
  std::vector<double> L_local;  // spectral norm of 2 H_i
  double L_max = 0.0;
  double gamma = 0.0;  // sigma_f / L
  double tau = 0.0;    // step size, tau_fraction / L
};

inline constexpr double kDefaultTauFraction = 1.0;

// Throws kNotStronglyConvex when lambda_min <= 1e-10 * lambda_max and
// kInvalidStepSize when tau_fraction is outside (0, 1].
ProblemConstants compute_constants(const DistributedQP& qp, double tau_fraction = kDefaultTauFraction);

}  // namespace quantnet
