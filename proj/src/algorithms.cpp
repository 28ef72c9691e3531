#include "quantnet/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <spdlog/spdlog.h>

#include "parallel.hpp"
#include "quantnet/box.hpp"
#include "quantnet/codec.hpp"
#include "quantnet/error.hpp"
#include "quantnet/quantizer.hpp"

namespace quantnet {
namespace {

using Eigen::VectorXd;

void require_step_size(const ProblemConstants& c) {
  // tau = 1/L is accepted: the convergence statements used here hold at 1/L.
  if (!(c.tau > 0.0) || c.tau * c.L > 1.0 + 1e-12) {
    throw Error(ErrorCode::kInvalidStepSize, "need 0 < tau <= 1/L, got tau = " + std::to_string(c.tau));
  }
}

double initial_gap(const DistributedQP& qp, const VectorXd& x0, const VectorXd& x_star) {
  const VectorXd d = x0 - x_star;
  const double linear = std::max(0.0, global_gradient(qp, x_star).dot(d));
  return std::max(linear + 0.5 * d.dot(qp.global_hessian() * d), 1e-12);
}

// Envelope on ||x^k - x*|| for row k given the realized step errors of rows 0..k-1.
double proposition_row(Variant variant, const ProblemConstants& c, double initial, const std::vector<double>& e,
                       const std::vector<double>& se, int k) {
  if (k == 0) {
    return variant == Variant::kPgm ? initial : 2.0 * std::sqrt(initial) / std::sqrt(c.sigma_f);
  }
  return proposition_envelope(variant, c, initial, e, se, k - 1);
}

void fill_cumulative(RunTrace& trace) {
  std::int64_t cum = 0;
  for (auto& r : trace.records) {
    cum += r.bits;
    r.bits_cum = cum;
  }
}

// Largest t in [0, 1] whose chord point p + t d has prox objective excess <= eps.
// The excess over the exact projection p of v is t <d, p - v> + t^2 ||d||^2 / 2.
double chord_length(const VectorXd& p, const VectorXd& v, const VectorXd& d, double eps) {
  const double lin = d.dot(p - v);
  const double quad = 0.5 * d.squaredNorm();
  auto excess = [&](double t) { return t * lin + t * t * quad; };
  if (excess(1.0) <= eps) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) <= eps ? lo : hi) = mid;
  }
  return lo;
}

RunTrace run_inexact_impl(const DistributedQP& qp, const ProblemConstants& constants, Variant variant,
                          const ErrorInjector* injector, int iterations, const Reference& ref, std::uint64_t seed,
                          const VectorXd& x0) {
  require_step_size(constants);
  if (iterations < 0) throw Error(ErrorCode::kInvalidArgument, "iterations must be non-negative");
  if (x0.size() != qp.dimension() || ref.x_star.size() != qp.dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "start point or reference has the wrong dimension");
  }
  const BoxSet& box = qp.global_box();
  if (!box.contains(x0, 1e-12)) throw Error(ErrorCode::kInvalidArgument, "x0 must lie in C");

  RunTrace trace;
  trace.algorithm = variant == Variant::kPgm ? (injector ? Algorithm::kInexactPgm : Algorithm::kExactPgm)
                                             : (injector ? Algorithm::kInexactApgm : Algorithm::kExactApgm);
  const double c = momentum(constants.gamma);
  const double tau = constants.tau;
  const double initial =
      variant == Variant::kPgm ? std::max((x0 - ref.x_star).norm(), 1e-12) : initial_gap(qp, x0, ref.x_star);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  VectorXd x = x0;
  VectorXd y = x0;
  std::vector<double> e_hist;
  std::vector<double> se_hist;
  trace.records.reserve(iterations + 1);

  for (int k = 0; k <= iterations; ++k) {
    IterationRecord rec;
    rec.k = k;
    rec.err = (x - ref.x_star).norm();
    rec.proposition_bound = proposition_row(variant, constants, initial, e_hist, se_hist, k);
    rec.theorem_bound = rec.proposition_bound;
    if (k == iterations) {
      trace.records.push_back(rec);
      break;
    }
    const VectorXd& base = variant == Variant::kPgm ? x : y;
    VectorXd v;
    double eps = 0.0;
    if (injector) {
      Injection inj = (*injector)(k, base);
      if (inj.eps < 0.0 || std::isnan(inj.eps)) {
        throw Error(ErrorCode::kNegativeEpsilon, "iteration " + std::to_string(k) + " supplied a negative epsilon");
      }
      if (inj.e.size() != base.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "injected gradient error has the wrong dimension");
      }
      v = base - tau * (global_gradient(qp, base) + inj.e);
      eps = inj.eps;
      rec.e_norm = inj.e.norm();
    } else {
      v = base - tau * global_gradient(qp, base);
    }
    VectorXd next = project_box(box, v);
    if (eps > 0.0) {
      VectorXd q(next.size());
      for (Eigen::Index j = 0; j < q.size(); ++j) {
        q[j] = box.lower[j] + unit(rng) * (box.upper[j] - box.lower[j]);
      }
      const VectorXd d = q - next;
      const double t = chord_length(next, v, d, eps);
      next = project_box(box, next + t * d);
    }
    rec.eps_sqrt = std::sqrt(eps);
    e_hist.push_back(rec.e_norm);
    se_hist.push_back(rec.eps_sqrt);
    trace.records.push_back(rec);

    const VectorXd prev = x;
    x = std::move(next);
    if (variant == Variant::kApgm) y = x + c * (x - prev);
  }
  trace.x_final = x;
  return trace;
}

StepSnapshot step_quantized(const DistributedQP& qp, const ProblemConstants& constants, const RunConfig& config,
                            Variant variant, QuantizedState& state, BitLedger& ledger, bool& mids_consistent) {
  const int M = qp.num_subsystems();
  const auto& maps = qp.maps();
  const auto& topo = qp.topology();
  if (static_cast<int>(state.nodes.size()) != M) {
    throw Error(ErrorCode::kDimensionMismatch, "quantized state has the wrong number of subsystems");
  }
  const int k = state.k;
  const int n = config.bits;
  const double scale = std::pow(config.kappa, k);
  const double l_alpha = config.C_alpha * scale;
  const double l_beta = config.C_beta * scale;
  const double c = variant == Variant::kApgm ? momentum(constants.gamma) : 0.0;
  const auto iteration = static_cast<std::uint32_t>(k);

  StepSnapshot snap;
  snap.k = k;
  snap.variant = variant;
  snap.x = VectorXd::Zero(maps.total_dim());
  snap.x_prev = VectorXd::Zero(maps.total_dim());
  snap.xhat = VectorXd::Zero(maps.total_dim());
  snap.eval_points.resize(M);
  snap.alpha.resize(M);
  snap.alpha_prev.resize(M);
  snap.beta.resize(M);

  // Quantize local variables against x̂^{k-1}.
  std::vector<std::vector<std::uint8_t>> x_wire(M);
  std::vector<VectorXd> xhat(M);
  std::vector<char> sat_x(M, 0);
  detail::parallel_for(M, config.threads, [&](int i) {
    const auto& node = state.nodes[i];
    const UniformQuantizer q(n, l_alpha, node.xhat_prev);
    QuantizedMessage msg = quantize(q, node.x, i, MessageKind::kVariable, iteration);
    sat_x[i] = msg.saturated;
    xhat[i] = msg.reconstructed;
    snap.alpha[i] = msg.reconstructed - node.x;
    x_wire[i] = encode(msg);
  });

  // Receiving side: rebuild x̂_{N_i} from
  // decoded messages, re-project and evaluate the local gradient.
  std::vector<std::vector<VectorXd>> received_x(M);
  std::vector<VectorXd> xtilde(M);
  std::vector<VectorXd> grad(M);
  std::vector<char> mirror_ok(M, 1);
  std::vector<char> feasible(M, 1);
  detail::parallel_for(M, config.threads, [&](int i) {
    const auto& nbrs = topo.neighbors(i);
    auto& node = state.nodes[i];
    VectorXd xhat_n(maps.neighborhood_dim(i));
    received_x[i].resize(nbrs.size());
    for (std::size_t p = 0; p < nbrs.size(); ++p) {
      const int j = nbrs[p];
      VectorXd value;
      if (j == i) {
        value = xhat[i];
      } else {
        if (node.mirror_xhat[p] != state.nodes[j].xhat_prev) mirror_ok[i] = 0;
        const UniformQuantizer mirror(n, l_alpha, node.mirror_xhat[p]);
        value = decode(x_wire[j], mirror).reconstructed;
        if (value != xhat[j]) mirror_ok[i] = 0;
      }
      xhat_n.segment(maps.offset_in_neighborhood(i, j), value.size()) = value;
      received_x[i][p] = std::move(value);
    }
    xtilde[i] = project_box(qp.neighborhood_box(i), xhat_n);
    VectorXd eval = xtilde[i];
    if (variant == Variant::kApgm) {
      eval = xtilde[i] + c * (xtilde[i] - node.xtilde_prev);
      if (!qp.neighborhood_box(i).contains(eval, 1e-12)) feasible[i] = 0;
    }
    grad[i] = local_gradient(qp, i, eval);
    snap.eval_points[i] = std::move(eval);
  });

  // Quantize gradients against ∇̂f^{k-1} and broadcast.
  std::vector<std::vector<std::uint8_t>> g_wire(M);
  std::vector<VectorXd> ghat(M);
  std::vector<char> sat_g(M, 0);
  detail::parallel_for(M, config.threads, [&](int i) {
    const UniformQuantizer q(n, l_beta, state.nodes[i].ghat_prev);
    QuantizedMessage msg = quantize(q, grad[i], i, MessageKind::kGradient, iteration);
    sat_g[i] = msg.saturated;
    ghat[i] = msg.reconstructed;
    snap.beta[i] = msg.reconstructed - grad[i];
    g_wire[i] = encode(msg);
  });

  // Each subsystem aggregates the decoded gradient blocks that
  // concern it, in ascending neighbor order.
  std::vector<VectorXd> x_next(M);
  std::vector<std::vector<VectorXd>> received_g(M);
  detail::parallel_for(M, config.threads, [&](int i) {
    const auto& nbrs = topo.neighbors(i);
    auto& node = state.nodes[i];
    VectorXd agg = VectorXd::Zero(maps.local_dim(i));
    received_g[i].resize(nbrs.size());
    for (std::size_t p = 0; p < nbrs.size(); ++p) {
      const int j = nbrs[p];
      VectorXd value;
      if (j == i) {
        value = ghat[i];
      } else {
        if (node.mirror_ghat[p] != state.nodes[j].ghat_prev) mirror_ok[i] = 0;
        const UniformQuantizer mirror(n, l_beta, node.mirror_ghat[p]);
        value = decode(g_wire[j], mirror).reconstructed;
        if (value != ghat[j]) mirror_ok[i] = 0;
      }
      agg += maps.member_block(j, i, value);
      received_g[i][p] = std::move(value);
    }
    const VectorXd base = variant == Variant::kApgm ? VectorXd(node.x + c * (node.x - node.x_prev)) : node.x;
    x_next[i] = project_box(qp.box(i), base - constants.tau * agg);
  });

  // Bookkeeping is serial so the ledger and snapshot do not depend on threads.
  snap.aggregated_gradient = VectorXd::Zero(maps.total_dim());
  for (int i = 0; i < M; ++i) {
    auto& node = state.nodes[i];
    const int off = maps.global_offset(i);
    const int m = maps.local_dim(i);
    snap.x.segment(off, m) = node.x;
    snap.x_prev.segment(off, m) = node.x_prev;
    snap.xhat.segment(off, m) = xhat[i];
    snap.alpha_prev[i] = node.alpha_prev;
    maps.scatter_add(i, ghat[i], snap.aggregated_gradient);
    snap.saturated = snap.saturated || sat_x[i] || sat_g[i];
    snap.eval_points_feasible = snap.eval_points_feasible && feasible[i];
    mids_consistent = mids_consistent && mirror_ok[i];
    for (int j : topo.neighbors(i)) {
      if (j == i) continue;
      // i -> j carries x̂_i (m_i scalars) and ∇̂f_i (|x_{N_i}| scalars).
      const std::int64_t scalars = m + maps.neighborhood_dim(i);
      ledger.record({i, j}, k, scalars, n);
      ledger.record_wire({i, j}, k, static_cast<std::int64_t>(x_wire[i].size() + g_wire[i].size()));
      snap.bits += scalars * n;
    }
  }
  snap.xtilde = project_box(qp.global_box(), snap.xhat);

  for (int i = 0; i < M; ++i) {
    auto& node = state.nodes[i];
    node.x_prev = node.x;
    node.x = std::move(x_next[i]);
    node.xhat_prev = xhat[i];
    node.ghat_prev = ghat[i];
    node.xtilde_prev = std::move(xtilde[i]);
    node.alpha_prev = snap.alpha[i];
    const auto& nbrs = topo.neighbors(i);
    for (std::size_t p = 0; p < nbrs.size(); ++p) {
      node.mirror_xhat[p] = std::move(received_x[i][p]);
      node.mirror_ghat[p] = std::move(received_g[i][p]);
    }
  }
  ++state.k;
  return snap;
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kExactPgm: return "exact-pgm";
    case Algorithm::kExactApgm: return "exact-apgm";
    case Algorithm::kInexactPgm: return "inexact-pgm";
    case Algorithm::kInexactApgm: return "inexact-apgm";
    case Algorithm::kQuantizedPgm: return "pgm";
    case Algorithm::kQuantizedApgm: return "apgm";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (auto a : {Algorithm::kExactPgm, Algorithm::kExactApgm, Algorithm::kInexactPgm, Algorithm::kInexactApgm,
                 Algorithm::kQuantizedPgm, Algorithm::kQuantizedApgm}) {
    if (to_string(a) == name) return a;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown variant '" + std::string(name) + "'");
}

Variant variant_of(Algorithm a) {
  switch (a) {
    case Algorithm::kExactPgm:
    case Algorithm::kInexactPgm:
    case Algorithm::kQuantizedPgm: return Variant::kPgm;
    default: return Variant::kApgm;
  }
}

bool is_quantized(Algorithm a) { return a == Algorithm::kQuantizedPgm || a == Algorithm::kQuantizedApgm; }

double momentum(double gamma) {
  const double s = std::sqrt(std::clamp(gamma, 0.0, 1.0));
  return (1.0 - s) / (1.0 + s);
}

void RunConfig::validate(double gamma) const {
  if (max_iterations < 0) throw Error(ErrorCode::kInvalidArgument, "max_iterations must be non-negative");
  if (threads < 1) throw Error(ErrorCode::kInvalidArgument, "threads must be at least 1");
  if (!is_quantized(algorithm)) return;
  if (!kappa_admissible(variant_of(algorithm), gamma, kappa)) {
    throw Error(ErrorCode::kInadmissibleKappa, "kappa " + std::to_string(kappa) + " is not admissible for " +
                                                   std::string(to_string(algorithm)));
  }
  if (bits < 1 || bits > UniformQuantizer::kMaxBits) {
    throw Error(ErrorCode::kInvalidArgument, "bits must be in [1, " + std::to_string(UniformQuantizer::kMaxBits) + "]");
  }
  if (!(C_alpha > 0.0) || !(C_beta > 0.0) || !std::isfinite(C_alpha) || !std::isfinite(C_beta)) {
    throw Error(ErrorCode::kNonpositiveInterval, "initial intervals must be positive and finite");
  }
}

VectorXd initial_point(const DistributedQP& qp) {
  return project_box(qp.global_box(), VectorXd::Zero(qp.dimension()));
}

double kkt_residual(const DistributedQP& qp, const VectorXd& x) {
  return (x - project_box(qp.global_box(), x - global_gradient(qp, x))).norm();
}

Reference solve_reference(const DistributedQP& qp, const ProblemConstants& constants, double tol, int max_iterations) {
  const BoxSet& box = qp.global_box();
  const Eigen::MatrixXd H = qp.global_hessian();
  const VectorXd lin = qp.global_linear_term();
  const double tau = 1.0 / constants.L;
  const double c = momentum(constants.gamma);

  VectorXd x = initial_point(qp);
  VectorXd y = x;
  int it = 0;
  for (; it < max_iterations; ++it) {
    const VectorXd next = project_box(box, y - tau * (H * y + lin));
    const double step = (next - x).norm();
    y = next + c * (next - x);
    x = next;
    if (step <= tol) break;
  }

  // Polish: fix the coordinates whose projected step lands on a bound and
  // solve the remaining equality-constrained system exactly.
  Reference ref;
  ref.iterations = it;
  ref.x_star = x;
  ref.kkt_residual = kkt_residual(qp, x);
  for (int round = 0; round < 3; ++round) {
    const VectorXd trial = x - tau * (H * x + lin);
    std::vector<int> free_idx;
    VectorXd fixed = VectorXd::Zero(x.size());
    std::vector<char> is_free(x.size(), 0);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      if (trial[j] <= box.lower[j]) {
        fixed[j] = box.lower[j];
      } else if (trial[j] >= box.upper[j]) {
        fixed[j] = box.upper[j];
      } else {
        free_idx.push_back(static_cast<int>(j));
        is_free[j] = 1;
      }
    }
    VectorXd candidate = fixed;
    if (!free_idx.empty()) {
      const auto nf = static_cast<Eigen::Index>(free_idx.size());
      Eigen::MatrixXd Hff(nf, nf);
      VectorXd rhs(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        double r = -lin[free_idx[a]];
        for (Eigen::Index j = 0; j < x.size(); ++j) {
          if (!is_free[j]) r -= H(free_idx[a], j) * fixed[j];
        }
        rhs[a] = r;
        for (Eigen::Index b = 0; b < nf; ++b) Hff(a, b) = H(free_idx[a], free_idx[b]);
      }
      const VectorXd sol = Hff.ldlt().solve(rhs);
      for (Eigen::Index a = 0; a < nf; ++a) candidate[free_idx[a]] = sol[a];
    }
    candidate = project_box(box, candidate);
    const double res = kkt_residual(qp, candidate);
    if (!(res < ref.kkt_residual)) break;
    ref.x_star = candidate;
    ref.kkt_residual = res;
    x = candidate;
  }
  ref.objective = qp.objective(ref.x_star);
  spdlog::debug("reference: {} iterations, kkt residual {:.3e}", ref.iterations, ref.kkt_residual);
  return ref;
}

int RunTrace::saturation_count() const {
  return static_cast<int>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.saturated; }));
}

int RunTrace::envelope_violations(double rel_tol) const {
  return static_cast<int>(std::count_if(records.begin(), records.end(), [rel_tol](const auto& r) {
    return r.err > r.theorem_bound * (1.0 + rel_tol);
  }));
}

std::vector<double> RunTrace::errors() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.err);
  return out;
}

RunTrace run_exact(const DistributedQP& qp, const ProblemConstants& constants, Variant variant, const VectorXd& x0,
                   int iterations, const Reference& ref) {
  return run_inexact_impl(qp, constants, variant, nullptr, iterations, ref, 0, x0);
}

RunTrace run_inexact(const DistributedQP& qp, const ProblemConstants& constants, Variant variant,
                     const ErrorInjector& injector, int iterations, const Reference& ref, std::uint64_t seed,
                     std::optional<VectorXd> x0) {
  if (!injector) throw Error(ErrorCode::kInvalidArgument, "error injector is empty");
  return run_inexact_impl(qp, constants, variant, &injector, iterations, ref, seed, x0 ? *x0 : initial_point(qp));
}

QuantizedState initial_quantized_state(const DistributedQP& qp) {
  const auto& maps = qp.maps();
  const auto& topo = qp.topology();
  const VectorXd x0 = initial_point(qp);
  QuantizedState state;
  state.nodes.resize(qp.num_subsystems());
  for (int i = 0; i < qp.num_subsystems(); ++i) {
    auto& node = state.nodes[i];
    node.x = maps.local_block(i, x0);
    node.x_prev = node.x;
    node.xhat_prev = node.x;
    node.xtilde_prev = maps.gather(i, x0);
    node.alpha_prev = VectorXd::Zero(node.x.size());
    const VectorXd origin = project_box(qp.neighborhood_box(i), VectorXd::Zero(maps.neighborhood_dim(i)));
    node.ghat_prev = local_gradient(qp, i, origin);
  }
  // Every receiver starts from the same initial values its neighbors hold.
  for (int i = 0; i < qp.num_subsystems(); ++i) {
    for (int j : topo.neighbors(i)) {
      state.nodes[i].mirror_xhat.push_back(state.nodes[j].xhat_prev);
      state.nodes[i].mirror_ghat.push_back(state.nodes[j].ghat_prev);
    }
  }
  return state;
}

StepSnapshot step_quantized_pgm(const DistributedQP& qp, const ProblemConstants& constants, const RunConfig& config,
                                QuantizedState& state, BitLedger& ledger, bool& mids_consistent) {
  return step_quantized(qp, constants, config, Variant::kPgm, state, ledger, mids_consistent);
}

StepSnapshot step_quantized_apgm(const DistributedQP& qp, const ProblemConstants& constants, const RunConfig& config,
                                 QuantizedState& state, BitLedger& ledger, bool& mids_consistent) {
  return step_quantized(qp, constants, config, Variant::kApgm, state, ledger, mids_consistent);
}

ErrorMeasurement measure_errors(const DistributedQP& qp, const ProblemConstants& constants, const StepSnapshot& snap) {
  const auto& maps = qp.maps();
  const auto& topo = qp.topology();
  const int M = qp.num_subsystems();
  const double c = snap.variant == Variant::kApgm ? momentum(constants.gamma) : 0.0;
  const VectorXd y = snap.variant == Variant::kApgm ? VectorXd(snap.x + c * (snap.x - snap.x_prev)) : snap.x;

  ErrorMeasurement out;
  out.e = VectorXd::Zero(maps.total_dim());
  for (int i = 0; i < M; ++i) {
    maps.scatter_add(i, local_gradient(qp, i, snap.eval_points[i]) + snap.beta[i], out.e);
  }
  out.e -= global_gradient(qp, y);
  out.eps = 0.5 * (snap.x - snap.xtilde).squaredNorm();

  const double now = snap.variant == Variant::kApgm ? 2.0 / (1.0 + std::sqrt(constants.gamma)) : 1.0;
  double alpha_sum = 0.0;
  for (int i = 0; i < M; ++i) {
    double inner = 0.0;
    for (int j : topo.neighbors(i)) {
      inner += now * snap.alpha[j].norm();
      if (snap.variant == Variant::kApgm) inner += c * snap.alpha_prev[j].norm();
    }
    out.e_bound += constants.L_local[i] * inner + snap.beta[i].norm();
    alpha_sum += snap.alpha[i].norm();
  }
  out.eps_bound = std::sqrt(2.0) / 2.0 * alpha_sum;
  return out;
}

RunTrace run_quantized(const DistributedQP& qp, const ProblemConstants& constants, const RunConfig& config,
                       const Reference& ref) {
  if (!is_quantized(config.algorithm)) {
    throw Error(ErrorCode::kInvalidArgument, "run_quantized needs the pgm or apgm variant");
  }
  require_step_size(constants);
  config.validate(constants.gamma);
  const Variant variant = variant_of(config.algorithm);

  const VectorXd x0 = initial_point(qp);
  const DesignInputs in = make_design_inputs(qp, constants, config.kappa, x0, ref.x_star);
  const BoundConstants bc = bound_constants(in, {config.C_alpha, config.C_beta}, config.bits);
  const double e_geo = variant == Variant::kPgm ? bc.C1 : bc.C3;
  const double eps_geo = variant == Variant::kPgm ? bc.C2 : bc.C4;
  const double initial = variant == Variant::kPgm ? in.R : in.phi_gap;

  RunTrace trace;
  trace.algorithm = config.algorithm;
  if (!qp.global_box().contains(VectorXd::Zero(qp.dimension()))) {
    trace.notes.push_back("0 is not in C; started from Proj_C(0)");
  }
  const bool degenerate = rate_constant(variant, constants.gamma) <= 0.0;
  if (degenerate) trace.notes.push_back("gamma = 1: theorem envelope undefined, bound left at +inf");
  QuantizedState state = initial_quantized_state(qp);
  std::vector<double> e_hist;
  std::vector<double> se_hist;
  trace.records.reserve(config.max_iterations + 1);

  for (int k = 0; k <= config.max_iterations; ++k) {
    IterationRecord rec;
    rec.k = k;
    VectorXd x(qp.dimension());
    for (int i = 0; i < qp.num_subsystems(); ++i) {
      x.segment(qp.maps().global_offset(i), qp.maps().local_dim(i)) = state.nodes[i].x;
    }
    rec.err = (x - ref.x_star).norm();
    rec.theorem_bound =
        degenerate ? std::numeric_limits<double>::infinity() : theorem_envelope(variant, in, bc, k - 1);
    rec.proposition_bound = proposition_row(variant, constants, initial, e_hist, se_hist, k);
    if (k == config.max_iterations) {
      trace.records.push_back(rec);
      trace.x_final = std::move(x);
      break;
    }
    const StepSnapshot snap = variant == Variant::kPgm
                                  ? step_quantized_pgm(qp, constants, config, state, trace.ledger, trace.mids_consistent)
                                  : step_quantized_apgm(qp, constants, config, state, trace.ledger, trace.mids_consistent);
    if (k == 0 && !snap.eval_points_feasible) trace.notes.push_back("ytilde^0 left C_{N_i} for some i");
    const ErrorMeasurement m = measure_errors(qp, constants, snap);
    rec.e_norm = m.e.norm();
    rec.eps_sqrt = std::sqrt(m.eps);
    rec.e_bound_lemma = m.e_bound;
    rec.eps_bound_lemma = m.eps_bound;
    const double scale = std::pow(config.kappa, k);
    rec.e_bound_geometric = e_geo * scale;
    rec.eps_bound_geometric = eps_geo * scale;
    rec.bits = snap.bits;
    rec.saturated = snap.saturated;
    if (snap.saturated) spdlog::info("{}: quantizer saturated at k = {}", to_string(config.algorithm), k);
    e_hist.push_back(rec.e_norm);
    se_hist.push_back(rec.eps_sqrt);
    trace.records.push_back(rec);
  }
  fill_cumulative(trace);
  return trace;
}

RunTrace run(const DistributedQP& qp, const ProblemConstants& constants, const RunConfig& config,
             const Reference& ref) {
  config.validate(constants.gamma);
  const Variant variant = variant_of(config.algorithm);
  switch (config.algorithm) {
    case Algorithm::kExactPgm:
    case Algorithm::kExactApgm:
      return run_exact(qp, constants, variant, initial_point(qp), config.max_iterations, ref);
    case Algorithm::kInexactPgm:
    case Algorithm::kInexactApgm: {
      const ErrorInjector zero = [&qp](int, const VectorXd&) {
        return Injection{VectorXd::Zero(qp.dimension()), 0.0};
      };
      return run_inexact(qp, constants, variant, zero, config.max_iterations, ref, config.seed);
    }
    default: return run_quantized(qp, constants, config, ref);
  }
}

}  // namespace quantnet
