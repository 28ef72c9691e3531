#include <random>

#include <gtest/gtest.h>

#include "expect_error.hpp"
#include "fixtures.hpp"
#include "quantnet/io.hpp"

namespace {

using namespace quantnet;
using fixtures::mat;
using fixtures::vec;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<oracle::SimSubsystem> to_sim(const MpcInstance& mpc) {
  std::vector<oracle::SimSubsystem> out;
  for (const auto& s : mpc.subsystems) {
    oracle::SimSubsystem o;
    o.A = fixtures::to_oracle(s.A);
    o.Q = fixtures::to_oracle(s.Q);
    o.R = fixtures::to_oracle(s.R);
    o.P = fixtures::to_oracle(s.P);
    o.z0 = fixtures::to_oracle(s.z0);
    for (const auto& [j, b] : s.B) o.B.emplace_back(j, fixtures::to_oracle(b));
    out.push_back(std::move(o));
  }
  return out;
}

// x_i holds u_i(0), ..., u_i(N-1) back to back.
std::vector<std::vector<oracle::Vector>> split_inputs(const MpcInstance& mpc, const DistributedQP& qp,
                                                      const VectorXd& x) {
  std::vector<std::vector<oracle::Vector>> out(mpc.num_subsystems());
  for (int i = 0; i < mpc.num_subsystems(); ++i) {
    const int nu = mpc.subsystems[i].inputs();
    const VectorXd xi = qp.maps().local_block(i, x);
    for (int t = 0; t < mpc.horizon; ++t) out[i].push_back(fixtures::to_oracle(VectorXd(xi.segment(t * nu, nu))));
  }
  return out;
}

MpcInstance scalar_instance(double a, double b, double q, double r, double p, double z0, int horizon) {
  MpcInstance mpc{Topology::build(1, {}), horizon, {}};
  MpcSubsystem s;
  s.A = mat({{a}});
  s.B = {{0, mat({{b}})}};
  s.Q = mat({{q}});
  s.R = mat({{r}});
  s.P = mat({{p}});
  s.z0 = vec({z0});
  s.u_lower = vec({-1});
  s.u_upper = vec({1});
  mpc.subsystems.push_back(s);
  return mpc;
}

TEST(Generator, Deterministic) {
  const auto a = random_instance(fixtures::seeded_options());
  const auto b = random_instance(fixtures::seeded_options());
  EXPECT_EQ(mpc_to_json(a).dump(), mpc_to_json(b).dump());
  auto other = fixtures::seeded_options();
  other.seed = 2;
  EXPECT_NE(mpc_to_json(random_instance(other)).dump(), mpc_to_json(a).dump());
}

TEST(Generator, InstanceShape) {
  const auto& s = fixtures::seeded();
  const auto& mpc = s.mpc;
  EXPECT_NO_THROW(mpc.validate());
  ASSERT_EQ(mpc.num_subsystems(), 6);
  for (int i = 0; i < 6; ++i) {
    const auto& sub = mpc.subsystems[i];
    EXPECT_EQ(sub.states(), 3);
    EXPECT_EQ(sub.inputs(), 2);
    EXPECT_EQ(sub.Q, MatrixXd::Identity(3, 3));
    EXPECT_EQ(sub.R, MatrixXd::Identity(2, 2));
    EXPECT_EQ(sub.P, MatrixXd::Identity(3, 3));
    EXPECT_EQ(sub.u_lower, VectorXd::Constant(2, -0.4));
    EXPECT_EQ(sub.u_upper, VectorXd::Constant(2, 0.3));
    const double rho = sub.A.eigenvalues().cwiseAbs().maxCoeff();
    EXPECT_GT(rho, 1.0 - 1e-12);
    EXPECT_LE(rho, 1.1 + 1e-12);
    std::vector<int> members;
    MatrixXd stacked(3, 0);
    for (const auto& [j, b] : sub.B) {
      members.push_back(j);
      stacked.conservativeResize(3, stacked.cols() + b.cols());
      stacked.rightCols(b.cols()) = b;
    }
    EXPECT_EQ(members, mpc.topology.neighbors(i));
    EXPECT_TRUE(controllable(sub.A, sub.input_matrix(i)) || controllable(sub.A, stacked));
    EXPECT_QN_ERROR(sub.input_matrix(99), ErrorCode::kInvalidArgument);
  }
}

TEST(Generator, ScalarControllability) {
  EXPECT_TRUE(controllable(mat({{1.05}}), mat({{1}})));
  EXPECT_FALSE(controllable(mat({{1.05}}), mat({{0}})));
  EXPECT_FALSE(controllable(MatrixXd::Identity(2, 2), mat({{1}, {0}})));
  EXPECT_TRUE(controllable(mat({{0, 1}, {0, 0}}), mat({{0}, {1}})));
}

TEST(Generator, FullScaleInputCount) {
  GeneratorOptions opt;
  opt.seed = 3;
  opt.num_subsystems = 40;
  opt.horizon = 11;
  opt.target_active_fraction = 0.0;
  const auto mpc = random_instance(opt);
  const auto c = condense(mpc);
  EXPECT_EQ(c.qp.dimension(), 880);
}

TEST(Generator, TunedStateActivatesBounds) {
  const auto& s = fixtures::seeded();
  EXPECT_GT(active_fraction(s.condensed.qp, s.ref.x_star, 1e-7), 0.5);
}

TEST(Generator, Errors) {
  GeneratorOptions opt;
  opt.num_subsystems = 1;
  EXPECT_QN_ERROR(random_instance(opt), ErrorCode::kInvalidArgument);
  opt.num_subsystems = 3;
  opt.horizon = 0;
  EXPECT_QN_ERROR(random_instance(opt), ErrorCode::kInvalidArgument);
  opt.horizon = 3;
  opt.edge_density = 1.5;
  EXPECT_QN_ERROR(random_instance(opt), ErrorCode::kInvalidArgument);
}

TEST(Condense, ScalarOneStepByHand) {
  const double a = 1.05, b = 0.7, q = 2.0, r = 0.5, p = 3.0, z0 = 0.8;
  const auto c = condense(scalar_instance(a, b, q, r, p, z0, 1));
  EXPECT_NEAR(c.qp.cost(0).H(0, 0), p * b * b + r, 1e-15);
  EXPECT_NEAR(c.qp.cost(0).h[0], 2 * p * a * b * z0, 1e-15);
  EXPECT_NEAR(c.constant_offset, q * z0 * z0 + p * a * a * z0 * z0, 1e-15);
}

TEST(Condense, ZeroStateHasNoLinearTerm) {
  auto mpc = random_instance(fixtures::seeded_options());
  for (auto& s : mpc.subsystems) s.z0.setZero();
  const auto c = condense(mpc);
  for (int i = 0; i < c.qp.num_subsystems(); ++i) EXPECT_EQ(c.qp.cost(i).h.norm(), 0.0);
  EXPECT_EQ(c.constant_offset, 0.0);
}

TEST(Condense, MatchesSimulatedCost) {
  for (std::uint64_t seed : {1, 4, 9}) {
    auto opt = fixtures::seeded_options();
    opt.seed = seed;
    opt.target_active_fraction = 0.0;
    const auto mpc = seed == 1 ? fixtures::seeded().mpc : random_instance(opt);
    const auto c = condense(mpc);
    const auto sim = to_sim(mpc);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int draw = 0; draw < 20; ++draw) {
      VectorXd x(c.qp.dimension());
      for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = u(rng);
      const double simulated = oracle::simulate_cost(sim, mpc.horizon, split_inputs(mpc, c.qp, x));
      const double condensed = c.qp.objective(x) + c.constant_offset;
      EXPECT_NEAR(condensed, simulated, 1e-9 * std::abs(simulated)) << "seed " << seed;
    }
  }
}

TEST(Condense, LocalCostsConvexGlobalStronglyConvex) {
  const auto& s = fixtures::seeded();
  const auto& qp = s.condensed.qp;
  for (int i = 0; i < qp.num_subsystems(); ++i) {
    const auto& H = qp.cost(i).H;
    EXPECT_EQ(H.rows(), qp.maps().neighborhood_dim(i));
    EXPECT_LE((H - H.transpose()).norm(), 1e-12 * H.norm());
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<MatrixXd>(H).eigenvalues().minCoeff(), -1e-12 * H.norm());
  }
  const auto eig = oracle::jacobi_eigenvalues(fixtures::to_oracle(qp.global_hessian()));
  EXPECT_NEAR(eig.front(), s.constants.sigma_f, 1e-9 * eig.back());
  EXPECT_GT(s.constants.sigma_f, 0.0);
  EXPECT_LE(s.constants.gamma, 1.0);
}

}  // namespace
