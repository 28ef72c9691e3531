#include "quantnet/box.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "quantnet/error.hpp"

namespace quantnet {

BoxSet::BoxSet(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "box bounds have different lengths");
  }
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    if (!(lower[k] <= upper[k])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "empty box: lower > upper at coordinate " + std::to_string(k));
    }
  }
}

BoxSet BoxSet::uniform(Eigen::Index dim, double lo, double hi) {
  return BoxSet(Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi));
}

bool BoxSet::contains(const Eigen::VectorXd& v, double tol) const {
  if (v.size() != dim()) return false;
  return ((v.array() >= lower.array() - tol) && (v.array() <= upper.array() + tol)).all();
}

Eigen::VectorXd project_box(const BoxSet& box, const Eigen::VectorXd& v) {
  if (v.size() != box.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "projection: vector has " + std::to_string(v.size()) +
                                                   " entries, box has " + std::to_string(box.dim()));
  }
  return v.cwiseMax(box.lower).cwiseMin(box.upper);
}

BoxSet concat_boxes(const std::vector<const BoxSet*>& parts) {
  Eigen::Index total = 0;
  for (const auto* p : parts) total += p->dim();
  Eigen::VectorXd lo(total), hi(total);
  Eigen::Index off = 0;
  for (const auto* p : parts) {
    lo.segment(off, p->dim()) = p->lower;
    hi.segment(off, p->dim()) = p->upper;
    off += p->dim();
  }
  return BoxSet(std::move(lo), std::move(hi));
}

}  // namespace quantnet
