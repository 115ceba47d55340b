#include "dsid/analysis.hpp"
#include "dsid/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <utility>

namespace dsid {
namespace {

SystemModel section_v_model() {
  return SystemModel(theta_star_formula(8), RegressorGenerator::sparse_uniform(8),
                     std::vector<NoiseModel>(100, NoiseModel::gaussian(0.09)));
}

SystemModel mixed_noise_model() {
  std::vector<NoiseModel> noises;
  for (int i = 0; i < 9; ++i) {
    noises.push_back(i % 3 == 0 ? NoiseModel::gaussian(0.2)
                     : i % 3 == 1 ? NoiseModel::laplace(0.4)
                                  : NoiseModel::uniform(0.7));
  }
  Vector ts(3);
  ts << 0.8, -1.2, 0.3;
  return SystemModel(ts, RegressorGenerator::sparse_uniform(3, 1.5), noises);
}

Vector random_theta(Rng& rng, const Vector& center, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  Vector t = center;
  for (auto& v : t) v += u(rng);
  return t;
}

TEST(RegressionFunction, VanishesAtRoot) {
  // Laplace noise puts a |delta| kink into -df/dtheta at the root, so central
  // differences carry an O(h) bias there (about 1.4e-4 relative at h = 1e-4).
  const std::pair<SystemModel, double> cases[] = {{section_v_model(), 1e-4},
                                                  {mixed_noise_model(), 5e-4}};
  for (const auto& [m, rel] : cases) {
    const RegressionContext ctx{&m};
    EXPECT_LE(regression_function(ctx, m.theta_star()).norm(), 1e-10);
  }
}

TEST(RegressionFunction, ComponentsPointTowardRoot) {
  const SystemModel m = mixed_noise_model();
  const RegressionContext ctx{&m};
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const Vector t = random_theta(rng, m.theta_star(), 4.0);
    const Vector f = regression_function(ctx, t);
    for (Eigen::Index j = 0; j < t.size(); ++j) {
      if (t(j) > m.theta_star()(j)) EXPECT_LT(f(j), 0.0);
      if (t(j) < m.theta_star()(j)) EXPECT_GT(f(j), 0.0);
    }
  }
}

TEST(RegressionFunction, LinearCdfHandIntegral) {
  // Uniform(-10, 10) noise keeps eta * delta inside the linear part of F,
  // so f = -int (eta/2)(eta delta / 10) d eta = -delta / 30.
  const Vector ts = Vector::Constant(1, 0.5);
  const SystemModel m(ts, RegressorGenerator::sparse_uniform(1), {NoiseModel::uniform(10.0)});
  const RegressionContext ctx{&m};
  for (double delta : {-3.0, -0.4, 0.7, 2.5}) {
    const Vector f = regression_function(ctx, ts + Vector::Constant(1, delta));
    EXPECT_NEAR(f(0), -delta / 30.0, 1e-14);
  }
}

TEST(RegressionFunction, QuadratureSelfConvergence) {
  const SystemModel m = mixed_noise_model();
  Rng rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector t = random_theta(rng, m.theta_star(), 3.0);
    const Vector f64 = regression_function({&m, 64}, t);
    const Vector f128 = regression_function({&m, 128}, t);
    EXPECT_LT((f64 - f128).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_THROW(regression_function({&m, 17}, m.theta_star()), Error);
}

TEST(RegressionFunction, DescentDirection) {
  const SystemModel m = section_v_model();
  const RegressionContext ctx{&m};
  Rng rng(21);
  for (int rep = 0; rep < 100; ++rep) {
    const Vector t = random_theta(rng, m.theta_star(), 5.0);
    EXPECT_LT((t - m.theta_star()).dot(regression_function(ctx, t)), 0.0);
  }
}

TEST(RegressionFunction, DimensionChecked) {
  const SystemModel m = section_v_model();
  EXPECT_THROW(regression_function({&m}, Vector::Zero(3)), Error);
  EXPECT_THROW(regression_function({}, Vector::Zero(8)), Error);
}

TEST(MonteCarlo, SingleSampleIsSignedRegressor) {
  const SystemModel m(Vector::Constant(2, 0.3), RegressorGenerator::sparse_uniform(2),
                      {NoiseModel::gaussian(0.09)});
  Rng a(77);
  Rng b = a;
  const MonteCarloEstimate est = regression_function_mc({&m}, Vector::Zero(2), 1, a);
  const Vector phi = m.regressors().sample(0, 0, b);
  EXPECT_EQ(est.mean.cwiseAbs(), phi.cwiseAbs());
  EXPECT_TRUE(est.standard_error.isZero(0));
  EXPECT_EQ(est.samples, 1u);
}

TEST(MonteCarlo, UnbiasedAtRoot) {
  const SystemModel m(Vector::LinSpaced(4, 0.5, -0.4), RegressorGenerator::sparse_uniform(4),
                      std::vector<NoiseModel>(8, NoiseModel::gaussian(0.09)));
  Rng rng = make_stream(5, StreamRole::kMonteCarlo, 0);
  const MonteCarloEstimate est = regression_function_mc({&m}, m.theta_star(), 1000000, rng);
  for (Eigen::Index j = 0; j < 4; ++j) {
    EXPECT_LE(std::abs(est.mean(j)), 4.0 * est.standard_error(j)) << "component " << j;
  }
}

TEST(MonteCarlo, DenseFallbackWarns) {
  const SystemModel m(Vector::Constant(3, 0.2), RegressorGenerator::dense_uniform(3),
                      std::vector<NoiseModel>(2, NoiseModel::gaussian(0.5)));
  std::vector<std::string> seen;
  auto previous = set_warning_handler([&](const std::string& msg) { seen.push_back(msg); });
  RegressionContext ctx{&m};
  ctx.fallback_samples = 20000;
  const Vector f = regression_function(ctx, m.theta_star());
  set_warning_handler(previous);
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_NE(seen.front().find("Monte Carlo"), std::string::npos);
  EXPECT_LT(f.norm(), 0.05);
  EXPECT_THROW(regression_jacobian(ctx, m.theta_star()), Error);
}

TEST(Jacobian, SectionVRootEntries) {
  const SystemModel m = section_v_model();
  const Matrix j = jacobian_at_root({&m});
  const double per_agent = 2.0 / 3.0 / (0.3 * std::sqrt(2.0 * M_PI));
  EXPECT_NEAR(per_agent, 0.8865, 1e-4);
  EXPECT_TRUE(j.isDiagonal(0));
  // Agents 0..99 mod 8: coordinates 1..4 carry 13 agents, 5..8 carry 12.
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(j(c, c), 13 * per_agent, 1e-12);
  for (int c = 4; c < 8; ++c) EXPECT_NEAR(j(c, c), 12 * per_agent, 1e-12);
  EXPECT_NEAR(j(0, 0), 11.52, 0.01);
  EXPECT_NEAR(j(7, 7), 10.64, 0.01);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(j).eigenvalues().minCoeff(), 0.0);
}

TEST(Jacobian, SingleAgentIsSingular) {
  const SystemModel m(Vector::LinSpaced(4, 1.0, 2.0), RegressorGenerator::sparse_uniform(4),
                      {NoiseModel::gaussian(0.09)});
  const Matrix j = jacobian_at_root({&m});
  EXPECT_GT(j(0, 0), 0.0);
  EXPECT_EQ(Eigen::FullPivLU<Matrix>(j).rank(), 1);
}

TEST(Jacobian, ClosedFormMatchesRootFormulaAndFiniteDifferences) {
  // Laplace noise puts a |delta| kink into -df/dtheta at the root, so central
  // differences carry an O(h) bias there (about 1.4e-4 relative at h = 1e-4).
  const std::pair<SystemModel, double> cases[] = {{section_v_model(), 1e-4},
                                                  {mixed_noise_model(), 5e-4}};
  for (const auto& [m, rel] : cases) {
    const RegressionContext ctx{&m};
    const Matrix root = jacobian_at_root(ctx);
    EXPECT_TRUE(regression_jacobian(ctx, m.theta_star()).isApprox(root, 1e-12));
    const Matrix fd = -central_difference_jacobian(
        [&](const Vector& t) { return regression_function(ctx, t); }, m.theta_star(), 1e-4);
    for (Eigen::Index r = 0; r < root.rows(); ++r) {
      for (Eigen::Index c = 0; c < root.cols(); ++c) {
        EXPECT_NEAR(fd(r, c), root(r, c), rel * std::max(1.0, std::abs(root(r, c))));
      }
    }
  }
}

TEST(Jacobian, AwayFromRootMatchesFiniteDifferences) {
  const SystemModel m = mixed_noise_model();
  const RegressionContext ctx{&m};
  Vector t = m.theta_star();
  t << 1.9, -0.1, -0.8;
  const Matrix fd = -central_difference_jacobian(
      [&](const Vector& x) { return regression_function(ctx, x); }, t, 1e-5);
  EXPECT_TRUE(regression_jacobian(ctx, t).isApprox(fd, 1e-6));
}

TEST(Jacobian, DenseUniformRoot) {
  const SystemModel m(Vector::Constant(4, 0.1), RegressorGenerator::dense_uniform(4, 2.0),
                      std::vector<NoiseModel>(3, NoiseModel::laplace(1.0)));
  // E[phi phi^T] = (4/4)(1/3) I; f_d(0) = 1/2 for Laplace(1).
  EXPECT_TRUE(jacobian_at_root({&m}).isApprox(Matrix::Identity(4, 4) * (3.0 / 3.0), 1e-14));
}

TEST(Metrics, ConsensusGapExamples) {
  NetworkSnapshot s = initial_snapshot(2, 1);
  EXPECT_EQ(consensus_gap(s), 0.0);
  s.theta << 1.0, -1.0;
  EXPECT_DOUBLE_EQ(consensus_gap(s), std::sqrt(2.0));

  NetworkSnapshot r = initial_snapshot(7, 3);
  r.theta = Matrix::Random(3, 7);
  const Vector bar = r.theta.rowwise().mean();
  double brute = 0.0;
  for (int i = 0; i < 7; ++i) brute += (r.theta.col(i) - bar).squaredNorm();
  EXPECT_NEAR(consensus_gap(r), std::sqrt(brute), 1e-14);
}

TEST(Metrics, EstimationErrors) {
  const Vector ts = theta_star_formula(8);
  NetworkSnapshot s = initial_snapshot(3, 8);
  EXPECT_NEAR(estimation_errors(s, ts)(0), 9.4742, 1e-3);
  s.theta = ts.replicate(1, 3);
  EXPECT_TRUE(estimation_errors(s, ts).isZero(0));
  s.theta(5, 1) += 0.25;
  const Vector e = estimation_errors(s, ts);
  EXPECT_DOUBLE_EQ(e(1), 0.25);
  EXPECT_EQ(e(0), 0.0);
  EXPECT_THROW(estimation_errors(s, Vector::Zero(2)), Error);
}

TEST(Metrics, RecorderStrideFinalRowAndPeak) {
  MetricsRecorder rec(Vector::Zero(1), 10, true);
  NetworkSnapshot s = initial_snapshot(2, 1);
  for (std::uint64_t k = 2; k <= 25; ++k) {
    s.k = k;
    s.theta << 1.0 / static_cast<double>(k), 0.0;
    if (k == 4) s.theta << 3.0, -3.0;
    rec.observe(s);
  }
  rec.finish(s);
  std::vector<std::uint64_t> ks;
  for (const auto& row : rec.rows()) ks.push_back(row.k);
  EXPECT_EQ(ks, (std::vector<std::uint64_t>{11, 21, 25}));
  EXPECT_EQ(rec.peak_consensus_gap_k(), 4u);
  EXPECT_DOUBLE_EQ(rec.peak_consensus_gap(), std::sqrt(18.0));
  EXPECT_EQ(rec.rows().back().agent_errors.size(), 2);
  EXPECT_THROW(MetricsRecorder(Vector::Zero(1), 0, false), Error);
}

}  // namespace
}  // namespace dsid
