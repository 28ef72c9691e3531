#pragma once

#include <vector>

#include <Eigen/Dense>

#include "quantnet/box.hpp"
#include "quantnet/topology.hpp"

namespace quantnet {

// Index bookkeeping for the selection operators. E_i gathers the
// neighborhood vector x_{N_i} out of the global x; the block of subsystem j
// inside x_{N_i} starts at offset_in_neighborhood(i, j).
class SelectionMaps {
 public:
  SelectionMaps() = default;
  SelectionMaps(const Topology& topology, std::vector<int> local_dims);

  int num_subsystems() const { return static_cast<int>(dims_.size()); }
  int total_dim() const { return total_; }
  int local_dim(int i) const { return dims_.at(i); }
  int max_local_dim() const { return max_dim_; }
  int global_offset(int i) const { return offsets_.at(i); }
  int neighborhood_dim(int i) const { return nbr_dims_.at(i); }
  int offset_in_neighborhood(int owner, int member) const;

  Eigen::VectorXd gather(int i, const Eigen::VectorXd& x) const;
  // out += E_i^T v
  void scatter_add(int i, const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
  Eigen::VectorXd local_block(int i, const Eigen::VectorXd& x) const;
  // Block of `member` inside a neighborhood vector owned by `owner`.
  Eigen::VectorXd member_block(int owner, int member, const Eigen::VectorXd& v_nbr) const;

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  std::vector<int> nbr_dims_;
  // per owner: (member, offset) in neighborhood order
  std::vector<std::vector<std::pair<int, int>>> layout_;
  int total_ = 0;
  int max_dim_ = 0;
};

struct SubsystemCost {
  Eigen::MatrixXd H;  // over x_{N_i}
  Eigen::VectorXd h;  // linear term h_i^T x_{N_i}
};

// Sum of local quadratics f_i(x_{N_i}) = x_{N_i}^T H_i x_{N_i} + h_i^T x_{N_i}
// with a box constraint on every local block x_i.
class DistributedQP {
 public:
  // H_i is symmetrized on construction. Throws kDimensionMismatch if any
  // block disagrees with the neighborhood layout implied by the boxes.
  static DistributedQP create(Topology topology, std::vector<SubsystemCost> costs,
                              std::vector<BoxSet> boxes);

  const Topology& topology() const { return topology_; }
  const SelectionMaps& maps() const { return maps_; }
  int num_subsystems() const { return topology_.num_subsystems(); }
  int dimension() const { return maps_.total_dim(); }

  const SubsystemCost& cost(int i) const { return costs_.at(i); }
  const BoxSet& box(int i) const { return boxes_.at(i); }
  const BoxSet& neighborhood_box(int i) const { return nbr_boxes_.at(i); }
  const BoxSet& global_box() const { return global_box_; }

  double local_objective(int i, const Eigen::VectorXd& x_nbr) const;
  double objective(const Eigen::VectorXd& x) const;

  // Sum_i E_i^T (2 H_i) E_i
  Eigen::MatrixXd global_hessian() const;
  // Sum_i E_i^T h_i
  Eigen::VectorXd global_linear_term() const;

 private:
  DistributedQP(Topology topology, SelectionMaps maps, std::vector<SubsystemCost> costs,
                std::vector<BoxSet> boxes, std::vector<BoxSet> nbr_boxes, BoxSet global_box);

  Topology topology_;
  SelectionMaps maps_;
  std::vector<SubsystemCost> costs_;
  std::vector<BoxSet> boxes_;
  std::vector<BoxSet> nbr_boxes_;
  BoxSet global_box_;
};

// 2 H_i x_{N_i} + h_i
Eigen::VectorXd local_gradient(const DistributedQP& qp, int i, const Eigen::VectorXd& x_nbr);
// Sum_i E_i^T grad f_i(E_i x)
Eigen::VectorXd global_gradient(const DistributedQP& qp, const Eigen::VectorXd& x);

}  // namespace quantnet
