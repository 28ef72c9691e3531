#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace quantnet {

// Vector uniform quantizer: every coordinate uses the same interval length l
// around its own mid-value, with 2^n steps of size l / 2^n across the interval.
class UniformQuantizer {
 public:
  static constexpr int kMaxBits = 62;  // indices must fit an int64 with room for the sign

  // Throws kNonpositiveInterval for l <= 0 (or non-finite), kInvalidArgument
  // for bits outside [1, kMaxBits].
  UniformQuantizer(int bits, double interval, Eigen::VectorXd mid);

  int bits() const { return bits_; }
  double interval() const { return interval_; }
  double step() const { return step_; }
  const Eigen::VectorXd& mid() const { return mid_; }
  Eigen::Index dim() const { return mid_.size(); }
  // 2^(n-1): the largest level index reachable from inside the interval.
  std::int64_t max_index() const { return std::int64_t{1} << (bits_ - 1); }

  Eigen::VectorXd reconstruct(const std::vector<std::int64_t>& indices) const;

 private:
  int bits_;
  double interval_;
  double step_;
  Eigen::VectorXd mid_;
};

// Geometric interval refinement l^k = C kappa^k.
struct QuantizerSchedule {
  double initial_interval = 1.0;
  double kappa = 0.5;

  // Throws kNonpositiveInterval / kInadmissibleKappa.
  void validate() const;
};

double refine(const QuantizerSchedule& schedule, int k);

enum class MessageKind : std::uint8_t { kVariable = 0, kGradient = 1 };

struct QuantizedMessage {
  int sender = 0;
  MessageKind kind = MessageKind::kVariable;
  std::uint32_t iteration = 0;
  int bits = 1;
  std::vector<std::int64_t> indices;
  Eigen::VectorXd reconstructed;
  // Some coordinate lay outside [mid - l/2, mid + l/2] and was clamped.
  bool saturated = false;
};

// index = sgn(v - mid) * floor(|v - mid| / step + 1/2), clamped to
// +-2^(n-1) with the saturated flag raised when v leaves the interval.
QuantizedMessage quantize(const UniformQuantizer& q, const Eigen::VectorXd& v, int sender = 0,
                          MessageKind kind = MessageKind::kVariable, std::uint32_t iteration = 0);

}  // namespace quantnet
