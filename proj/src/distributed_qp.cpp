#include "quantnet/distributed_qp.hpp"

#include <algorithm>
#include <string>

#include "quantnet/error.hpp"

namespace quantnet {

SelectionMaps::SelectionMaps(const Topology& topology, std::vector<int> local_dims)
    : dims_(std::move(local_dims)) {
  const int m = topology.num_subsystems();
  if (static_cast<int>(dims_.size()) != m) {
    throw Error(ErrorCode::kDimensionMismatch, "one local dimension per subsystem required");
  }
  offsets_.resize(m);
  for (int i = 0; i < m; ++i) {
    if (dims_[i] < 1) throw Error(ErrorCode::kDimensionMismatch, "local dimension must be positive");
    offsets_[i] = total_;
    total_ += dims_[i];
    max_dim_ = std::max(max_dim_, dims_[i]);
  }
  layout_.resize(m);
  nbr_dims_.resize(m);
  for (int i = 0; i < m; ++i) {
    int off = 0;
    for (int j : topology.neighbors(i)) {
      layout_[i].emplace_back(j, off);
      off += dims_[j];
    }
    nbr_dims_[i] = off;
  }
}

int SelectionMaps::offset_in_neighborhood(int owner, int member) const {
  for (const auto& [j, off] : layout_.at(owner)) {
    if (j == member) return off;
  }
  throw Error(ErrorCode::kInvalidArgument, "subsystem " + std::to_string(member) +
                                               " is not a neighbor of " + std::to_string(owner));
}

Eigen::VectorXd SelectionMaps::gather(int i, const Eigen::VectorXd& x) const {
  if (x.size() != total_) throw Error(ErrorCode::kDimensionMismatch, "gather: wrong global size");
  Eigen::VectorXd out(nbr_dims_.at(i));
  for (const auto& [j, off] : layout_[i]) out.segment(off, dims_[j]) = x.segment(offsets_[j], dims_[j]);
  return out;
}

void SelectionMaps::scatter_add(int i, const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  if (v.size() != nbr_dims_.at(i) || out.size() != total_) {
    throw Error(ErrorCode::kDimensionMismatch, "scatter: wrong size");
  }
  for (const auto& [j, off] : layout_[i]) out.segment(offsets_[j], dims_[j]) += v.segment(off, dims_[j]);
}

Eigen::VectorXd SelectionMaps::local_block(int i, const Eigen::VectorXd& x) const {
  if (x.size() != total_) throw Error(ErrorCode::kDimensionMismatch, "local_block: wrong global size");
  return x.segment(offsets_.at(i), dims_[i]);
}

Eigen::VectorXd SelectionMaps::member_block(int owner, int member, const Eigen::VectorXd& v_nbr) const {
  if (v_nbr.size() != nbr_dims_.at(owner)) {
    throw Error(ErrorCode::kDimensionMismatch, "member_block: wrong neighborhood size");
  }
  return v_nbr.segment(offset_in_neighborhood(owner, member), dims_.at(member));
}

DistributedQP::DistributedQP(Topology topology, SelectionMaps maps, std::vector<SubsystemCost> costs,
                             std::vector<BoxSet> boxes, std::vector<BoxSet> nbr_boxes, BoxSet global_box)
    : topology_(std::move(topology)),
      maps_(std::move(maps)),
      costs_(std::move(costs)),
      boxes_(std::move(boxes)),
      nbr_boxes_(std::move(nbr_boxes)),
      global_box_(std::move(global_box)) {}

DistributedQP DistributedQP::create(Topology topology, std::vector<SubsystemCost> costs,
                                    std::vector<BoxSet> boxes) {
  const int m = topology.num_subsystems();
  if (static_cast<int>(costs.size()) != m || static_cast<int>(boxes.size()) != m) {
    throw Error(ErrorCode::kDimensionMismatch, "need one cost and one box per subsystem");
  }
  std::vector<int> dims(m);
  for (int i = 0; i < m; ++i) dims[i] = static_cast<int>(boxes[i].dim());
  SelectionMaps maps(topology, dims);

  for (int i = 0; i < m; ++i) {
    const int n = maps.neighborhood_dim(i);
    auto& c = costs[i];
    if (c.H.rows() != n || c.H.cols() != n || c.h.size() != n) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "subsystem " + std::to_string(i) + ": cost must act on a neighborhood of size " +
                      std::to_string(n));
    }
    if (!c.H.allFinite() || !c.h.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, "subsystem " + std::to_string(i) + ": non-finite cost");
    }
    c.H = (0.5 * (c.H + c.H.transpose())).eval();
  }

  std::vector<BoxSet> nbr_boxes;
  nbr_boxes.reserve(m);
  std::vector<const BoxSet*> all;
  for (int i = 0; i < m; ++i) {
    std::vector<const BoxSet*> parts;
    for (int j : topology.neighbors(i)) parts.push_back(&boxes[j]);
    nbr_boxes.push_back(concat_boxes(parts));
    all.push_back(&boxes[i]);
  }
  BoxSet global = concat_boxes(all);
  return DistributedQP(std::move(topology), std::move(maps), std::move(costs), std::move(boxes),
                       std::move(nbr_boxes), std::move(global));
}

double DistributedQP::local_objective(int i, const Eigen::VectorXd& x_nbr) const {
  const auto& c = costs_.at(i);
  if (x_nbr.size() != c.h.size()) throw Error(ErrorCode::kDimensionMismatch, "local_objective");
  return x_nbr.dot(c.H * x_nbr) + c.h.dot(x_nbr);
}

double DistributedQP::objective(const Eigen::VectorXd& x) const {
  double total = 0.0;
  for (int i = 0; i < num_subsystems(); ++i) total += local_objective(i, maps_.gather(i, x));
  return total;
}

Eigen::MatrixXd DistributedQP::global_hessian() const {
  const int n = dimension();
  Eigen::MatrixXd hg = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < num_subsystems(); ++i) {
    const auto& nbrs = topology_.neighbors(i);
    for (int a : nbrs) {
      for (int b : nbrs) {
        hg.block(maps_.global_offset(a), maps_.global_offset(b), maps_.local_dim(a), maps_.local_dim(b)) +=
            2.0 * costs_[i].H.block(maps_.offset_in_neighborhood(i, a), maps_.offset_in_neighborhood(i, b),
                                    maps_.local_dim(a), maps_.local_dim(b));
      }
    }
  }
  return hg;
}

Eigen::VectorXd DistributedQP::global_linear_term() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dimension());
  for (int i = 0; i < num_subsystems(); ++i) maps_.scatter_add(i, costs_[i].h, c);
  return c;
}

Eigen::VectorXd local_gradient(const DistributedQP& qp, int i, const Eigen::VectorXd& x_nbr) {
  const auto& c = qp.cost(i);
  if (x_nbr.size() != c.h.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "local_gradient: subsystem " + std::to_string(i) +
                                                   " expects " + std::to_string(c.h.size()) + " entries");
  }
  return 2.0 * (c.H * x_nbr) + c.h;
}

Eigen::VectorXd global_gradient(const DistributedQP& qp, const Eigen::VectorXd& x) {
  if (x.size() != qp.dimension()) throw Error(ErrorCode::kDimensionMismatch, "global_gradient");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(qp.dimension());
  for (int i = 0; i < qp.num_subsystems(); ++i) {
    qp.maps().scatter_add(i, local_gradient(qp, i, qp.maps().gather(i, x)), g);
  }
  return g;
}

}  // namespace quantnet
