#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "quantnet/distributed_qp.hpp"
#include "quantnet/topology.hpp"

namespace quantnet {

// z_i(t+1) = A_i z_i(t) + sum_{j in N_i} B_ij u_j(t), u_i(t) in [u_lower, u_upper],
// cost sum_t z_i' Q_i z_i + u_i' R_i u_i over t < N plus z_i(N)' P_i z_i(N).
struct MpcSubsystem {
  Eigen::MatrixXd A;
  std::vector<std::pair<int, Eigen::MatrixXd>> B;  // (j, B_ij), ascending j, includes i
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::MatrixXd P;
  Eigen::VectorXd z0;
  Eigen::VectorXd u_lower;
  Eigen::VectorXd u_upper;

  int states() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(u_lower.size()); }
  const Eigen::MatrixXd& input_matrix(int j) const;  // throws kInvalidArgument if j is not a neighbor
};

struct MpcInstance {
  Topology topology;
  int horizon = 1;
  std::vector<MpcSubsystem> subsystems;

  int num_subsystems() const { return static_cast<int>(subsystems.size()); }
  // Throws kDimensionMismatch / kInvalidArgument on inconsistent data.
  void validate() const;
};

struct GeneratorOptions {
  std::uint64_t seed = 0;
  int num_subsystems = 6;
  int states = 3;
  int inputs = 2;
  int horizon = 11;
  double edge_density = 0.3;  // probability of each non-tree edge
  double coupling_scale = 0.5;  // magnitude of B_ij, j != i, relative to B_ii
  double input_lower = -0.4;
  double input_upper = 0.3;
  // Initial states are scaled until more than this fraction of the optimal
  // inputs sit on a bound; 0 keeps the raw draw.
  double target_active_fraction = 0.5;
  int max_scale_trials = 25;
  int max_resamples = 100;
};

// Throws kInvalidArgument for M < 2 or horizon < 1 and kGenerationFailed when
// no controllable draw is found within the resample budget.
MpcInstance random_instance(const GeneratorOptions& options);

// rank [B, AB, ..., A^{n-1}B] == n
bool controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

struct CondensedQP {
  DistributedQP qp;
  double constant_offset = 0.0;
};

// Eliminates the states: x_i = u_i stacked time-major, C_i = U_i^N.
CondensedQP condense(const MpcInstance& mpc);

// Share of coordinates of x within tol of a bound of the global box.
double active_fraction(const DistributedQP& qp, const Eigen::VectorXd& x, double tol = 1e-9);

}  // namespace quantnet
