#include "quantnet/constants.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "quantnet/error.hpp"

namespace quantnet {

ProblemConstants compute_constants(const DistributedQP& qp, double tau_fraction) {
  if (!(tau_fraction > 0.0 && tau_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidStepSize, "tau fraction must lie in (0, 1], got " + std::to_string(tau_fraction));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> global(qp.global_hessian(), Eigen::EigenvaluesOnly);
  if (global.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotStronglyConvex, "eigensolver did not converge on the global Hessian");
  }
  ProblemConstants c;
  c.sigma_f = global.eigenvalues().minCoeff();
  c.L = global.eigenvalues().maxCoeff();
  if (!(c.L > 0.0) || c.sigma_f <= 1e-10 * c.L) {
    throw Error(ErrorCode::kNotStronglyConvex,
                "lambda_min(H_g) = " + std::to_string(c.sigma_f) + ", lambda_max = " + std::to_string(c.L));
  }
  c.gamma = std::min(1.0, c.sigma_f / c.L);
  c.tau = tau_fraction / c.L;

  c.L_local.resize(qp.num_subsystems());
  for (int i = 0; i < qp.num_subsystems(); ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> local(2.0 * qp.cost(i).H, Eigen::EigenvaluesOnly);
    c.L_local[i] = local.eigenvalues().cwiseAbs().maxCoeff();
  }
  c.L_max = *std::max_element(c.L_local.begin(), c.L_local.end());
  return c;
}

}  // namespace quantnet
