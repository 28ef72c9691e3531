#pragma once

#include <vector>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "quantnet/algorithms.hpp"
#include "quantnet/box.hpp"
#include "quantnet/constants.hpp"
#include "quantnet/distributed_qp.hpp"
#include "quantnet/mpc.hpp"
#include "quantnet/topology.hpp"

namespace fixtures {

using namespace quantnet;

inline Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(rows.size(), rows.begin()->size());
  int r = 0;
  for (const auto& row : rows) {
    int c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline oracle::Matrix to_oracle(const Eigen::MatrixXd& m) {
  oracle::Matrix out(m.rows(), oracle::Vector(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  }
  return out;
}

inline oracle::Vector to_oracle(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline DistributedQP single_block(const Eigen::MatrixXd& H, const Eigen::VectorXd& h, double lo, double hi) {
  std::vector<Edge> none;
  return DistributedQP::create(Topology::build(1, none), {{H, h}}, {BoxSet::uniform(h.size(), lo, hi)});
}

// Random two-subsystem QP on a single edge, each block of size m.
inline DistributedQP random_pair(unsigned seed, int m = 2, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<Edge> edges{{0, 1}};
  std::vector<SubsystemCost> costs;
  for (int i = 0; i < 2; ++i) {
    Eigen::MatrixXd G(2 * m, 2 * m);
    for (int r = 0; r < 2 * m; ++r) {
      for (int c = 0; c < 2 * m; ++c) G(r, c) = nd(rng);
    }
    Eigen::VectorXd h(2 * m);
    for (int r = 0; r < 2 * m; ++r) h[r] = 2.0 * nd(rng);
    costs.push_back({G.transpose() * G / (2.0 * m) + 0.3 * Eigen::MatrixXd::Identity(2 * m, 2 * m), h});
  }
  return DistributedQP::create(Topology::build(2, edges), std::move(costs),
                               {BoxSet::uniform(m, lo, hi), BoxSet::uniform(m, lo, hi)});
}

inline GeneratorOptions seeded_options() {
  GeneratorOptions opt;
  opt.seed = 1;
  opt.num_subsystems = 6;
  opt.states = 3;
  opt.inputs = 2;
  opt.horizon = 5;
  opt.edge_density = 0.3;
  return opt;
}

struct Seeded {
  MpcInstance mpc;
  CondensedQP condensed;
  ProblemConstants constants;
  Reference ref;
};

// The desk-scale instance shared by the algorithm and acceptance checks.
inline const Seeded& seeded() {
  static const Seeded s = [] {
    MpcInstance mpc = random_instance(seeded_options());
    CondensedQP c = condense(mpc);
    const ProblemConstants k = compute_constants(c.qp);
    Reference r = solve_reference(c.qp, k);
    return Seeded{std::move(mpc), std::move(c), k, std::move(r)};
  }();
  return s;
}

}  // namespace fixtures
