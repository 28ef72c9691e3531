#include "quantnet/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

#include "quantnet/algorithms.hpp"
#include "quantnet/box.hpp"
#include "quantnet/constants.hpp"
#include "quantnet/error.hpp"

namespace quantnet {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = normal(rng);
  }
  return m;
}

double spectral_radius(const MatrixXd& A) {
  return Eigen::EigenSolver<MatrixXd>(A, false).eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<Edge> random_edges(std::mt19937_64& rng, int M, double density) {
  std::vector<int> order(M);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Edge> edges;
  std::vector<std::vector<char>> present(M, std::vector<char>(M, 0));
  for (int t = 1; t < M; ++t) {
    std::uniform_int_distribution<int> pick(0, t - 1);
    const int a = order[t];
    const int b = order[pick(rng)];
    edges.emplace_back(std::min(a, b), std::max(a, b));
    present[a][b] = present[b][a] = 1;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int a = 0; a < M; ++a) {
    for (int b = a + 1; b < M; ++b) {
      if (present[a][b]) continue;
      if (unit(rng) < density) edges.emplace_back(a, b);
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

void scale_initial_states(MpcInstance& mpc, const std::vector<VectorXd>& base, double s) {
  for (int i = 0; i < mpc.num_subsystems(); ++i) mpc.subsystems[i].z0 = s * base[i];
}

double optimal_active_fraction(const MpcInstance& mpc) {
  const CondensedQP c = condense(mpc);
  const ProblemConstants k = compute_constants(c.qp);
  const Reference ref = solve_reference(c.qp, k, 1e-10, 20000);
  return active_fraction(c.qp, ref.x_star, 1e-7);
}

// Doubles the scale until the target is exceeded, then bisects back toward
// the smallest scale that still exceeds it.
void tune_initial_states(MpcInstance& mpc, const GeneratorOptions& opt) {
  std::vector<VectorXd> base;
  for (const auto& s : mpc.subsystems) base.push_back(s.z0);
  int trials = 0;
  double lo = 0.0;
  double hi = 1.0;
  double best_scale = 1.0;
  double best_fraction = -1.0;
  auto evaluate = [&](double s) {
    scale_initial_states(mpc, base, s);
    ++trials;
    const double f = optimal_active_fraction(mpc);
    spdlog::debug("initial-state scale {:.4g}: active fraction {:.3f}", s, f);
    return f;
  };
  double f = evaluate(hi);
  best_fraction = f;
  while (f <= opt.target_active_fraction && trials < opt.max_scale_trials) {
    lo = hi;
    hi *= 2.0;
    f = evaluate(hi);
    best_scale = hi;
    best_fraction = f;
  }
  if (f > opt.target_active_fraction) {
    best_scale = hi;
    best_fraction = f;
    while (trials < opt.max_scale_trials && hi - lo > 1e-3 * hi) {
      const double mid = 0.5 * (lo + hi);
      const double fm = evaluate(mid);
      if (fm > opt.target_active_fraction) {
        hi = mid;
        best_scale = mid;
        best_fraction = fm;
      } else {
        lo = mid;
      }
    }
  }
  scale_initial_states(mpc, base, best_scale);
  spdlog::info("initial states scaled by {:.4g}; active fraction at optimum {:.3f}", best_scale, best_fraction);
}

}  // namespace

const MatrixXd& MpcSubsystem::input_matrix(int j) const {
  for (const auto& [idx, m] : B) {
    if (idx == j) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "no input matrix for neighbor " + std::to_string(j));
}

void MpcInstance::validate() const {
  if (horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be at least 1");
  if (num_subsystems() != topology.num_subsystems()) {
    throw Error(ErrorCode::kDimensionMismatch, "subsystem count differs from the topology");
  }
  for (int i = 0; i < num_subsystems(); ++i) {
    const auto& s = subsystems[i];
    const int nz = s.states();
    const int nu = s.inputs();
    auto fail = [i](const std::string& what) {
      throw Error(ErrorCode::kDimensionMismatch, "subsystem " + std::to_string(i) + ": " + what);
    };
    if (s.A.cols() != nz) fail("A must be square");
    if (s.Q.rows() != nz || s.Q.cols() != nz || s.P.rows() != nz || s.P.cols() != nz) fail("Q/P size");
    if (s.R.rows() != nu || s.R.cols() != nu) fail("R size");
    if (s.z0.size() != nz) fail("z0 size");
    if (s.u_upper.size() != nu) fail("input bound size");
    const auto& nbrs = topology.neighbors(i);
    if (s.B.size() != nbrs.size()) fail("need one B_ij per neighbor");
    for (std::size_t p = 0; p < nbrs.size(); ++p) {
      if (s.B[p].first != nbrs[p]) fail("B_ij neighbors out of order");
      if (s.B[p].second.rows() != nz || s.B[p].second.cols() != subsystems[nbrs[p]].inputs()) fail("B_ij size");
    }
    if ((s.u_lower.array() > s.u_upper.array()).any()) {
      throw Error(ErrorCode::kInvalidArgument, "subsystem " + std::to_string(i) + ": u_lower > u_upper");
    }
  }
}

bool controllable(const MatrixXd& A, const MatrixXd& B) {
  const auto n = A.rows();
  MatrixXd ctrb(n, n * B.cols());
  MatrixXd block = B;
  for (Eigen::Index t = 0; t < n; ++t) {
    ctrb.middleCols(t * B.cols(), B.cols()) = block;
    block = A * block;
  }
  Eigen::FullPivLU<MatrixXd> lu(ctrb);
  lu.setThreshold(1e-10);
  return lu.rank() == n;
}

MpcInstance random_instance(const GeneratorOptions& opt) {
  if (opt.num_subsystems < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 subsystems");
  if (opt.horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be at least 1");
  if (opt.states < 1 || opt.inputs < 1) throw Error(ErrorCode::kInvalidArgument, "states and inputs must be positive");
  if (opt.edge_density < 0.0 || opt.edge_density > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "edge density must be in [0, 1]");
  }
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> radius(1.0, 1.1);

  MpcInstance mpc;
  mpc.horizon = opt.horizon;
  const auto edges = random_edges(rng, opt.num_subsystems, opt.edge_density);
  mpc.topology = Topology::build(opt.num_subsystems, edges);

  const int nz = opt.states;
  const int nu = opt.inputs;
  for (int i = 0; i < opt.num_subsystems; ++i) {
    MpcSubsystem s;
    bool ok = false;
    for (int attempt = 0; attempt < opt.max_resamples && !ok; ++attempt) {
      s.A = random_matrix(rng, nz, nz);
      const double rho = spectral_radius(s.A);
      if (rho < 1e-8) continue;
      // (1, 1.1]: the uniform draw is on [1, 1.1), so flip it.
      s.A *= (2.1 - radius(rng)) / rho;
      s.B.clear();
      for (int j : mpc.topology.neighbors(i)) {
        MatrixXd b = random_matrix(rng, nz, nu);
        if (j != i) b *= opt.coupling_scale;
        s.B.emplace_back(j, std::move(b));
      }
      ok = controllable(s.A, s.input_matrix(i));
    }
    if (!ok) {
      throw Error(ErrorCode::kGenerationFailed,
                  "no controllable draw for subsystem " + std::to_string(i) + " after " +
                      std::to_string(opt.max_resamples) + " attempts");
    }
    s.Q = MatrixXd::Identity(nz, nz);
    s.R = MatrixXd::Identity(nu, nu);
    s.P = MatrixXd::Identity(nz, nz);
    s.z0 = random_matrix(rng, nz, 1).col(0);
    s.u_lower = VectorXd::Constant(nu, opt.input_lower);
    s.u_upper = VectorXd::Constant(nu, opt.input_upper);
    mpc.subsystems.push_back(std::move(s));
  }
  if (opt.target_active_fraction > 0.0) tune_initial_states(mpc, opt);
  return mpc;
}

CondensedQP condense(const MpcInstance& mpc) {
  mpc.validate();
  const int M = mpc.num_subsystems();
  const int N = mpc.horizon;
  const auto& topo = mpc.topology;

  std::vector<int> dims(M);
  for (int i = 0; i < M; ++i) dims[i] = N * mpc.subsystems[i].inputs();
  const SelectionMaps maps(topo, dims);

  std::vector<SubsystemCost> costs;
  std::vector<BoxSet> boxes;
  double constant = 0.0;
  for (int i = 0; i < M; ++i) {
    const auto& s = mpc.subsystems[i];
    const int nz = s.states();
    const int nbr_dim = maps.neighborhood_dim(i);

    // Stacked prediction z(1..N) = Phi z0 + G u_{N_i}.
    VectorXd free_response(N * nz);
    MatrixXd G = MatrixXd::Zero(N * nz, nbr_dim);
    std::vector<MatrixXd> powers{MatrixXd::Identity(nz, nz)};
    for (int t = 1; t <= N; ++t) powers.push_back(s.A * powers.back());
    for (int t = 1; t <= N; ++t) {
      free_response.segment((t - 1) * nz, nz) = powers[t] * s.z0;
      for (const auto& [j, Bij] : s.B) {
        const int nu_j = static_cast<int>(Bij.cols());
        const int col0 = maps.offset_in_neighborhood(i, j);
        for (int tau = 0; tau < t; ++tau) {
          G.block((t - 1) * nz, col0 + tau * nu_j, nz, nu_j) = powers[t - 1 - tau] * Bij;
        }
      }
    }
    MatrixXd Qbar = MatrixXd::Zero(N * nz, N * nz);
    for (int t = 0; t < N; ++t) Qbar.block(t * nz, t * nz, nz, nz) = (t == N - 1) ? s.P : s.Q;

    const int nu = s.inputs();
    const int own = maps.offset_in_neighborhood(i, i);
    SubsystemCost cost;
    cost.H = G.transpose() * Qbar * G;
    for (int t = 0; t < N; ++t) cost.H.block(own + t * nu, own + t * nu, nu, nu) += s.R;
    cost.h = 2.0 * G.transpose() * (Qbar * free_response);
    costs.push_back(std::move(cost));
    constant += s.z0.dot(s.Q * s.z0) + free_response.dot(Qbar * free_response);

    VectorXd lo(N * nu);
    VectorXd hi(N * nu);
    for (int t = 0; t < N; ++t) {
      lo.segment(t * nu, nu) = s.u_lower;
      hi.segment(t * nu, nu) = s.u_upper;
    }
    boxes.emplace_back(std::move(lo), std::move(hi));
  }
  return {DistributedQP::create(topo, std::move(costs), std::move(boxes)), constant};
}

double active_fraction(const DistributedQP& qp, const VectorXd& x, double tol) {
  const BoxSet& box = qp.global_box();
  if (x.size() != box.dim()) throw Error(ErrorCode::kDimensionMismatch, "active_fraction: wrong dimension");
  if (x.size() == 0) return 0.0;
  int active = 0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (x[j] <= box.lower[j] + tol || x[j] >= box.upper[j] - tol) ++active;
  }
  return static_cast<double>(active) / static_cast<double>(x.size());
}

}  // namespace quantnet
