#pragma once

#include <vector>

#include <Eigen/Dense>

namespace quantnet {

// Coordinate-wise interval constraint. Projection onto it is the prox of its
// indicator function.
struct BoxSet {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  // Throws kDimensionMismatch / kInvalidArgument if lower > upper anywhere.
  BoxSet(Eigen::VectorXd lo, Eigen::VectorXd hi);
  static BoxSet uniform(Eigen::Index dim, double lo, double hi);

  Eigen::Index dim() const { return lower.size(); }
  bool contains(const Eigen::VectorXd& v, double tol = 0.0) const;
};

// Euclidean projection (coordinate-wise clamp).
Eigen::VectorXd project_box(const BoxSet& box, const Eigen::VectorXd& v);

// Product of boxes, in the given order.
BoxSet concat_boxes(const std::vector<const BoxSet*>& parts);

}  // namespace quantnet
