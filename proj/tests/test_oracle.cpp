#include "dsid/oracle.hpp"

#include <gtest/gtest.h>

namespace dsid {
namespace {

SystemModel section_v_model(NoiseModel noise = NoiseModel::gaussian(0.09)) {
  return SystemModel(theta_star_formula(8), RegressorGenerator::sparse_uniform(8),
                     std::vector<NoiseModel>(100, noise));
}

TEST(Centralized, ZeroStepsReturnsInitialEstimate) {
  const SystemModel m = section_v_model();
  const CentralizedResult r = centralized_baseline(m, 0, 1);
  EXPECT_TRUE(r.theta.isZero(0));
  EXPECT_EQ(r.k, 1u);
}

TEST(Centralized, ConvergesOnSectionVModel) {
  const SystemModel m = section_v_model();
  const CentralizedResult r = centralized_baseline(m, 100000, 1);
  EXPECT_LT((r.theta - m.theta_star()).norm(), 0.2);
}

TEST(Centralized, AgreesWithRootSolver) {
  const SystemModel m = section_v_model();
  const RootSolution root = solve_root({&m}, Vector::Zero(8));
  ASSERT_TRUE(root.converged);
  const CentralizedResult r = centralized_baseline(m, 100000, 2);
  EXPECT_LT((r.theta - root.theta).norm(), 0.05);
}

TEST(Centralized, SmallerNoiseConvergesFaster) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const SystemModel noisy = section_v_model();
    const SystemModel quiet = section_v_model(NoiseModel::uniform(1e-3));
    const double e_noisy = (centralized_baseline(noisy, 20000, seed).theta - noisy.theta_star()).norm();
    const double e_quiet = (centralized_baseline(quiet, 20000, seed).theta - quiet.theta_star()).norm();
    EXPECT_LT(e_quiet, e_noisy) << "seed " << seed;
  }
}

TEST(Centralized, TrajectoryStride) {
  const SystemModel m = section_v_model();
  EXPECT_EQ(centralized_baseline(m, 50, 1, 10).trajectory.size(), 5u);
}

TEST(SolveRoot, StartingAtRootReturnsImmediately) {
  const SystemModel m = section_v_model();
  const RootSolution s = solve_root({&m}, m.theta_star());
  EXPECT_TRUE(s.converged);
  EXPECT_EQ(s.iterations, 0);
  EXPECT_EQ(s.theta, m.theta_star());
}

TEST(SolveRoot, FromZero) {
  const SystemModel m = section_v_model();
  const RootSolution s = solve_root({&m}, Vector::Zero(8));
  EXPECT_TRUE(s.converged);
  EXPECT_LT((s.theta - m.theta_star()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SolveRoot, MultiStartAgreement) {
  const SystemModel m = section_v_model();
  Rng rng = make_stream(4, StreamRole::kMonteCarlo, 3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int rep = 0; rep < 10; ++rep) {
    Vector init = m.theta_star();
    for (auto& v : init) v += u(rng);
    const RootSolution s = solve_root({&m}, init);
    EXPECT_TRUE(s.converged) << "start " << rep;
    EXPECT_LT((s.theta - m.theta_star()).cwiseAbs().maxCoeff(), 1e-8) << "start " << rep;
  }
}

TEST(SolveRoot, NeedsClosedForm) {
  const SystemModel m(Vector::Zero(2), RegressorGenerator::dense_uniform(2),
                      {NoiseModel::gaussian(1.0)});
  EXPECT_THROW(solve_root({&m}, Vector::Zero(2)), Error);
}

TEST(FiniteDifference, LinearMapIsExact) {
  Matrix a(2, 2);
  a << 1, 2, -3, 4;
  const Matrix j = central_difference_jacobian([&](const Vector& x) { return Vector(a * x); },
                                               Vector::Ones(2));
  EXPECT_TRUE(j.isApprox(a, 1e-9));
}

TEST(Probe, SingleAgentStallsOnUncommunicatedCoordinates) {
  const SystemModel m(theta_star_formula(4), RegressorGenerator::sparse_uniform(4),
                      std::vector<NoiseModel>(8, NoiseModel::gaussian(0.09)));
  const ProbeReport r = identifiability_probe(m, 0, 100000, 1);
  EXPECT_EQ(r.identifiable, std::vector<std::size_t>{0});
  EXPECT_EQ(r.stalled, (std::vector<std::size_t>{1, 2, 3}));
  for (std::size_t c : r.stalled) {
    EXPECT_EQ(r.final_theta(static_cast<Eigen::Index>(c)), 0.0);
    EXPECT_EQ(r.errors(static_cast<Eigen::Index>(c)), std::abs(m.theta_star()(static_cast<Eigen::Index>(c))));
  }
}

TEST(Probe, AgentOnLastCoordinate) {
  const SystemModel m(Vector::LinSpaced(4, 0.4, -0.4), RegressorGenerator::sparse_uniform(4),
                      std::vector<NoiseModel>(8, NoiseModel::gaussian(0.09)));
  const ProbeReport r = identifiability_probe(m, 7, 100000, 3);
  EXPECT_EQ(r.identifiable, std::vector<std::size_t>{3});
}

TEST(Probe, SingleCoordinateIsIdentifiable) {
  const SystemModel m(Vector::Constant(1, 0.6), RegressorGenerator::sparse_uniform(1),
                      {NoiseModel::gaussian(0.09)});
  const ProbeReport r = identifiability_probe(m, 0, 100000, 1);
  EXPECT_EQ(r.identifiable, std::vector<std::size_t>{0});
  EXPECT_TRUE(r.stalled.empty());
}

TEST(Probe, RejectsDenseRegressors) {
  const SystemModel m(Vector::Zero(2), RegressorGenerator::dense_uniform(2),
                      {NoiseModel::gaussian(1.0)});
  EXPECT_THROW(identifiability_probe(m, 0, 10, 1), Error);
}

}  // namespace
}  // namespace dsid
