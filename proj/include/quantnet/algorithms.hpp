#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "quantnet/bit_ledger.hpp"
#include "quantnet/constants.hpp"
#include "quantnet/design.hpp"
#include "quantnet/distributed_qp.hpp"

namespace quantnet {

enum class Algorithm { kExactPgm, kExactApgm, kInexactPgm, kInexactApgm, kQuantizedPgm, kQuantizedApgm };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);  // throws kInvalidArgument
Variant variant_of(Algorithm a);
bool is_quantized(Algorithm a);

// (1 - sqrt(gamma)) / (1 + sqrt(gamma))
double momentum(double gamma);

struct RunConfig {
  Algorithm algorithm = Algorithm::kQuantizedPgm;
  double kappa = 0.0;
  int bits = 0;
  double C_alpha = 0.0;
  double C_beta = 0.0;
  int max_iterations = 100;
  std::uint64_t seed = 0;
  int threads = 1;

  // Quantized variants need an admissible kappa (kInadmissibleKappa), bits in
  // the quantizer range and positive intervals.
  void validate(double gamma) const;
};

// High-accuracy optimum used to measure ||x^k - x*||.
struct Reference {
  Eigen::VectorXd x_star;
  double objective = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;  // ||x - Proj(x - grad f(x))||
};

// Exact APGM from Proj_C(0) until ||x^{k+1} - x^k|| <= tol or max_iterations,
// followed by an active-set polish of the free coordinates.
Reference solve_reference(const DistributedQP& qp, const ProblemConstants& constants, double tol = 1e-13,
                          int max_iterations = 100000);

double kkt_residual(const DistributedQP& qp, const Eigen::VectorXd& x);

// Proj_C(0); equals 0 whenever every box contains the origin.
Eigen::VectorXd initial_point(const DistributedQP& qp);

// One row per iterate x^k, k = 0..iterations. Step quantities (errors, bits,
// saturation) describe the step from x^k to x^{k+1}; the final row carries
// only err and its bound.
struct IterationRecord {
  int k = 0;
  double err = 0.0;            // ||x^k - x*||
  double theorem_bound = 0.0;  // envelope on err for this row
  double e_norm = 0.0;         // ||e^k||
  double e_bound_lemma = 0.0;  // right-hand side built from ||alpha||, ||beta||
  double eps_sqrt = 0.0;       // sqrt(eps^k)
  double eps_bound_lemma = 0.0;
  double e_bound_geometric = 0.0;    // C1 kappa^k (PGM) / C3 kappa^k (APGM)
  double eps_bound_geometric = 0.0;  // C2 kappa^k / C4 kappa^k
  double proposition_bound = 0.0;    // proposition envelope on err from realized errors
  std::int64_t bits = 0;
  std::int64_t bits_cum = 0;
  bool saturated = false;
};

struct RunTrace {
  Algorithm algorithm = Algorithm::kExactPgm;
  std::vector<IterationRecord> records;
  Eigen::VectorXd x_final;
  BitLedger ledger;
  // Receivers reconstructed every message with the sender's own mid-value.
  bool mids_consistent = true;
  std::vector<std::string> notes;

  int saturation_count() const;
  // Rows with err > theorem_bound * (1 + rel_tol).
  int envelope_violations(double rel_tol = 0.0) const;
  std::vector<double> errors() const;
};

RunTrace run_exact(const DistributedQP& qp, const ProblemConstants& constants, Variant variant,
                   const Eigen::VectorXd& x0, int iterations, const Reference& ref);

struct Injection {
  Eigen::VectorXd e;  // gradient error e^k
  double eps = 0.0;   // allowed prox objective excess eps^k
};
using ErrorInjector = std::function<Injection(int k, const Eigen::VectorXd& point)>;

// Inexact PGM/APGM: the gradient is perturbed by e^k and the projection is
// replaced by a feasible point whose prox objective exceeds the minimum by at
// most eps^k (a seeded random chord step away from the exact projection).
RunTrace run_inexact(const DistributedQP& qp, const ProblemConstants& constants, Variant variant,
                     const ErrorInjector& injector, int iterations, const Reference& ref,
                     std::uint64_t seed = 0, std::optional<Eigen::VectorXd> x0 = std::nullopt);

// Per-subsystem memory of the quantized algorithms.
struct SubsystemState {
  Eigen::VectorXd x;            // x_i^k
  Eigen::VectorXd x_prev;       // x_i^{k-1}
  Eigen::VectorXd xhat_prev;    // mid of the variable quantizer
  Eigen::VectorXd ghat_prev;    // mid of the gradient quantizer (neighborhood sized)
  Eigen::VectorXd xtilde_prev;  // re-projected neighborhood vector of the previous round
  Eigen::VectorXd alpha_prev;   // alpha_i^{k-1}
  // Receiver-side copies of each neighbor's quantizer mids, in N_i order.
  std::vector<Eigen::VectorXd> mirror_xhat;
  std::vector<Eigen::VectorXd> mirror_ghat;
};

struct QuantizedState {
  int k = 0;
  std::vector<SubsystemState> nodes;
};

// Algorithm initialization: x^0 = xhat^{-1} = Proj_C(0), ghat^{-1}_i = grad f_i(Proj_{C_{N_i}}(0)),
// x^{-1} = x^0 and xtilde^{-1}_{N_i} = x^0_{N_i}.
QuantizedState initial_quantized_state(const DistributedQP& qp);

// Everything measured during one synchronous round k.
struct StepSnapshot {
  int k = 0;
  Variant variant = Variant::kPgm;
  Eigen::VectorXd x;       // x^k
  Eigen::VectorXd x_prev;  // x^{k-1}
  Eigen::VectorXd xhat;    // quantized x^k as broadcast
  Eigen::VectorXd xtilde;  // Proj_C(xhat)
  std::vector<Eigen::VectorXd> eval_points;  // xtilde_{N_i} (PGM) or ytilde_{N_i} (APGM)
  std::vector<Eigen::VectorXd> alpha;
  std::vector<Eigen::VectorXd> alpha_prev;
  std::vector<Eigen::VectorXd> beta;
  Eigen::VectorXd aggregated_gradient;  // sum_i E_i^T ghat_i
  bool saturated = false;
  bool eval_points_feasible = true;
  std::int64_t bits = 0;
};

StepSnapshot step_quantized_pgm(const DistributedQP& qp, const ProblemConstants& constants,
                                const RunConfig& config, QuantizedState& state, BitLedger& ledger,
                                bool& mids_consistent);
StepSnapshot step_quantized_apgm(const DistributedQP& qp, const ProblemConstants& constants,
                                 const RunConfig& config, QuantizedState& state, BitLedger& ledger,
                                 bool& mids_consistent);

struct ErrorMeasurement {
  Eigen::VectorXd e;
  double eps = 0.0;
  double e_bound = 0.0;    // bound from ||alpha||, ||beta||
  double eps_bound = 0.0;  // bound on sqrt(eps)
};

// Realized inexact-method errors of a quantized round:
//   e^k = sum_i E_i^T (grad f_i(eval_i) + beta_i) - grad f(y^k),  eps^k = ||x^k - xtilde^k||^2 / 2
// where y^k = x^k for PGM and x^k + c (x^k - x^{k-1}) for APGM.
ErrorMeasurement measure_errors(const DistributedQP& qp, const ProblemConstants& constants,
                                const StepSnapshot& snap);

// Runs the quantized algorithm selected by config for config.max_iterations.
RunTrace run_quantized(const DistributedQP& qp, const ProblemConstants& constants, const RunConfig& config,
                       const Reference& ref);

// Dispatches on config.algorithm (inexact variants run with zero injected error).
RunTrace run(const DistributedQP& qp, const ProblemConstants& constants, const RunConfig& config,
             const Reference& ref);

}  // namespace quantnet
