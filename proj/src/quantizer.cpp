#include "quantnet/quantizer.hpp"

#include <cmath>
#include <string>

#include "quantnet/error.hpp"

namespace quantnet {

UniformQuantizer::UniformQuantizer(int bits, double interval, Eigen::VectorXd mid)
    : bits_(bits), interval_(interval), mid_(std::move(mid)) {
  if (bits < 1 || bits > kMaxBits) {
    throw Error(ErrorCode::kInvalidArgument,
                "quantizer bits must be in [1, " + std::to_string(kMaxBits) + "], got " + std::to_string(bits));
  }
  if (!(interval > 0.0) || !std::isfinite(interval)) {
    throw Error(ErrorCode::kNonpositiveInterval, "quantization interval " + std::to_string(interval));
  }
  step_ = std::ldexp(interval, -bits);
  if (!(step_ > 0.0)) throw Error(ErrorCode::kNonpositiveInterval, "quantization step underflows");
}

Eigen::VectorXd UniformQuantizer::reconstruct(const std::vector<std::int64_t>& indices) const {
  if (static_cast<Eigen::Index>(indices.size()) != mid_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "index count does not match quantizer dimension");
  }
  Eigen::VectorXd out(mid_.size());
  for (Eigen::Index k = 0; k < mid_.size(); ++k) {
    out[k] = mid_[k] + static_cast<double>(indices[k]) * step_;
  }
  return out;
}

void QuantizerSchedule::validate() const {
  if (!(initial_interval > 0.0) || !std::isfinite(initial_interval)) {
    throw Error(ErrorCode::kNonpositiveInterval, "initial interval must be positive");
  }
  if (!(kappa > 0.0 && kappa < 1.0)) {
    throw Error(ErrorCode::kInadmissibleKappa, "kappa must lie strictly inside (0, 1)");
  }
}

double refine(const QuantizerSchedule& schedule, int k) {
  if (k < 0) throw Error(ErrorCode::kInvalidArgument, "iteration must be non-negative");
  return schedule.initial_interval * std::pow(schedule.kappa, k);
}

QuantizedMessage quantize(const UniformQuantizer& q, const Eigen::VectorXd& v, int sender, MessageKind kind,
                          std::uint32_t iteration) {
  if (v.size() != q.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "quantize: input has " + std::to_string(v.size()) +
                                                   " entries, quantizer has " + std::to_string(q.dim()));
  }
  QuantizedMessage msg;
  msg.sender = sender;
  msg.kind = kind;
  msg.iteration = iteration;
  msg.bits = q.bits();
  msg.indices.resize(v.size());

  const double half = 0.5 * q.interval();
  const std::int64_t cap = q.max_index();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double diff = v[k] - q.mid()[k];
    const double dist = std::abs(diff);
    std::int64_t level = 0;
    if (!(dist <= half)) {
      msg.saturated = true;
      level = cap;
    } else {
      const double steps = std::floor(dist / q.step() + 0.5);
      level = std::min(static_cast<std::int64_t>(steps), cap);
    }
    msg.indices[k] = diff < 0.0 ? -level : level;
  }
  msg.reconstructed = q.reconstruct(msg.indices);
  return msg;
}

}  // namespace quantnet
