#include "dsid/topology.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

namespace dsid {
namespace {

Digraph path3() {
  Digraph g(3);
  g.add_undirected(0, 1);
  g.add_undirected(1, 2);
  return g;
}

Digraph complete(std::size_t n) {
  Digraph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) g.add_undirected(i, j);
  return g;
}

Digraph ring(std::size_t n) {
  Digraph g(n);
  for (std::size_t i = 0; i < n; ++i) g.add_undirected(i, (i + 1) % n);
  return g;
}

TEST(Digraph, SelfLoopsAlwaysPresent) {
  Digraph g(4);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_TRUE(g.has_edge(i, i));
    EXPECT_EQ(g.in_neighbors(i), std::vector<std::size_t>{i});
  }
  EXPECT_EQ(g.edge_count(), 4u);
  EXPECT_EQ(g.non_self_edge_count(), 0u);
}

TEST(Digraph, FromEdgesRejectsOutOfRange) {
  const Edge bad[] = {{0, 3}};
  EXPECT_THROW(Digraph::from_edges(3, bad), Error);
}

TEST(Digraph, InNeighborsSortedAndDirected) {
  Digraph g(3);
  g.add_edge(2, 0);
  g.add_edge(1, 0);
  EXPECT_EQ(g.in_neighbors(0), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_FALSE(g.has_edge(0, 2));
  EXPECT_FALSE(g.is_symmetric());
}

TEST(PoissonGraph, ZeroProbabilityGivesOnlySelfLoops) {
  Rng rng = make_stream(7, StreamRole::kGraph, 0);
  const Digraph g = generate_poisson_graph(5, 0.0, rng);
  EXPECT_EQ(g.edge_count(), 5u);
}

TEST(PoissonGraph, CertaintyGivesCompleteDigraph) {
  Rng rng = make_stream(7, StreamRole::kGraph, 0);
  const Digraph g = generate_poisson_graph(4, 1.0, rng);
  EXPECT_EQ(g.edge_count(), 16u);
}

TEST(PoissonGraph, RejectsInvalidProbability) {
  Rng rng(1);
  EXPECT_THROW(generate_poisson_graph(5, -0.1, rng), Error);
  EXPECT_THROW(generate_poisson_graph(5, 1.5, rng), Error);
}

TEST(PoissonGraph, MeanEdgeCountMatches594) {
  // 2 * C(100,2) * 0.06 = 594; sd of the 100-seed mean is about 3.3.
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng = make_stream(seed, StreamRole::kGraph, 0);
    const Digraph g = generate_poisson_graph(100, 0.06, rng);
    EXPECT_TRUE(g.is_symmetric());
    total += static_cast<double>(g.non_self_edge_count());
  }
  EXPECT_NEAR(total / 100.0, 594.0, 15.0);
}

TEST(PoissonGraph, DeterministicPerSeed) {
  Rng a = make_stream(42, StreamRole::kGraph, 0);
  Rng b = make_stream(42, StreamRole::kGraph, 0);
  EXPECT_EQ(generate_poisson_graph(60, 0.1, a), generate_poisson_graph(60, 0.1, b));
}

TEST(PoissonGraph, ConnectedVariantIsConnected) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    EXPECT_TRUE(is_strongly_connected(generate_connected_poisson_graph(100, 0.06, seed)));
  }
}

TEST(Metropolis, TwoAgentComplete) {
  const WeightMatrix w = metropolis_weights(complete(2));
  EXPECT_DOUBLE_EQ(w(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(w(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(w(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(w(1, 1), 0.5);
  EXPECT_TRUE(is_doubly_stochastic(w, 1e-12));
}

TEST(Metropolis, StarWithHubDegreeThree) {
  Digraph g(4);
  for (std::size_t leaf = 1; leaf <= 3; ++leaf) g.add_undirected(0, leaf);
  const WeightMatrix w = metropolis_weights(g);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(w(0, j), 0.25);
  for (std::size_t leaf = 1; leaf <= 3; ++leaf) {
    EXPECT_DOUBLE_EQ(w(leaf, 0), 0.25);
    EXPECT_DOUBLE_EQ(w(leaf, leaf), 0.75);
  }
  EXPECT_TRUE(is_doubly_stochastic(w, 1e-12));
  EXPECT_TRUE(w.matches(g));
}

TEST(Metropolis, SingleAgentIsIdentity) {
  const WeightMatrix w = metropolis_weights(Digraph(1));
  EXPECT_EQ(w(0, 0), 1.0);
}

TEST(Metropolis, RejectsAsymmetricGraph) {
  Digraph g(2);
  g.add_edge(0, 1);
  EXPECT_THROW(metropolis_weights(g), Error);
}

TEST(Metropolis, DoublyStochasticOnRandomSymmetricGraphs) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Rng rng = make_stream(seed, StreamRole::kGraph, 9);
    const double p = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Digraph g = generate_poisson_graph(30, p, rng);
    const WeightMatrix w = metropolis_weights(g);
    EXPECT_TRUE(is_doubly_stochastic(w, 1e-12)) << "seed " << seed;
    EXPECT_TRUE(w.matches(g));
  }
}

TEST(Metropolis, PoissonComposition) {
  Rng rng = make_stream(3, StreamRole::kGraph, 0);
  EXPECT_TRUE(is_doubly_stochastic(metropolis_weights(generate_poisson_graph(100, 0.06, rng)), 1e-12));
}

TEST(DegreeWeights, TwoAgentCompleteIsDoublyStochastic) {
  const DegreeWeights d = degree_weights(complete(2));
  EXPECT_TRUE(d.doubly_stochastic);
  EXPECT_DOUBLE_EQ(d.weights(0, 1), 0.5);
}

TEST(DegreeWeights, PathColumnSums) {
  const DegreeWeights d = degree_weights(path3());
  const Matrix& w = d.weights.dense();
  const Vector rows = w.rowwise().sum();
  const Vector cols = w.colwise().sum().transpose();
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(rows(i), 1.0, 1e-15);
  EXPECT_NEAR(cols(0), 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(cols(1), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(cols(2), 5.0 / 6.0, 1e-15);
  EXPECT_FALSE(d.doubly_stochastic);
}

TEST(DegreeWeights, SingleAgent) {
  EXPECT_EQ(degree_weights(Digraph(1)).weights(0, 0), 1.0);
}

TEST(DoublyStochastic, Examples) {
  Matrix ok(2, 2);
  ok << 0.5, 0.5, 0.5, 0.5;
  Matrix bad(2, 2);
  bad << 1, 0, 1, 0;
  EXPECT_TRUE(is_doubly_stochastic(ok, 1e-12));
  EXPECT_FALSE(is_doubly_stochastic(bad, 1e-12));
}

TEST(WeightMatrix, RejectsNegativeEntries) {
  Matrix m(2, 2);
  m << 1.5, -0.5, -0.5, 1.5;
  EXPECT_THROW(WeightMatrix{m}, Error);
}

TEST(Components, TarjanLabels) {
  Digraph g(5);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 0);
  g.add_edge(2, 3);
  g.add_edge(3, 4);
  const auto labels = strongly_connected_components(g);
  EXPECT_EQ(labels[0], labels[1]);
  EXPECT_EQ(labels[1], labels[2]);
  EXPECT_NE(labels[2], labels[3]);
  EXPECT_NE(labels[3], labels[4]);
  EXPECT_FALSE(is_strongly_connected(g));
  g.add_edge(4, 0);
  EXPECT_TRUE(is_strongly_connected(g));
}

TEST(Components, UnionOfParts) {
  const Digraph base = ring(6);
  const auto parts = split_edges_round_robin(base, 3);
  ASSERT_EQ(parts.size(), 3u);
  std::vector<const Digraph*> ptrs;
  for (const auto& p : parts) {
    EXPECT_FALSE(is_strongly_connected(p));
    ptrs.push_back(&p);
  }
  EXPECT_EQ(union_of(ptrs), base);
}

TopologyStep step_from(Digraph g, Matrix w) { return TopologyStep{std::move(g), WeightMatrix(std::move(w))}; }

TEST(ValidateC4, StaticCompletePasses) {
  for (std::size_t b : {1u, 3u, 7u}) {
    const auto sched = TopologySchedule::make_static(make_step(complete(5), WeightScheme::kMetropolis), b);
    EXPECT_TRUE(validate_c4(sched).passed());
  }
}

TEST(ValidateC4, IsolatedAgentFailsConnectivity) {
  Digraph g(4);
  g.add_undirected(0, 1);
  g.add_undirected(1, 2);
  const auto sched = TopologySchedule::make_static(make_step(g, WeightScheme::kMetropolis));
  const C4Report r = validate_c4(sched);
  EXPECT_FALSE(r.passed());
  EXPECT_FALSE(r.windows_ok);
  EXPECT_FALSE(r.union_strongly_connected);
  EXPECT_TRUE(r.doubly_stochastic_ok);
}

// Directed 3-ring with lazy circulant weights alternating with the identity.
std::vector<TopologyStep> ring_then_identity() {
  Digraph ring3(3);
  ring3.add_edge(0, 1);
  ring3.add_edge(1, 2);
  ring3.add_edge(2, 0);
  Matrix w = Matrix::Zero(3, 3);
  for (int i = 0; i < 3; ++i) {
    w(i, i) = 0.5;
    w(i, (i + 2) % 3) = 0.5;
  }
  return {step_from(ring3, w), step_from(Digraph(3), Matrix::Identity(3, 3))};
}

TEST(ValidateC4, DirectedRingNeedsWindowTwo) {
  const auto two = TopologySchedule::make_periodic(ring_then_identity(), 2);
  const C4Report ok = validate_c4(two);
  EXPECT_TRUE(ok.passed()) << (ok.failures.empty() ? "" : ok.failures.front());

  const auto one = TopologySchedule::make_periodic(ring_then_identity(), 1);
  const C4Report bad = validate_c4(one);
  EXPECT_FALSE(bad.passed());
  EXPECT_FALSE(bad.windows_ok);
  EXPECT_TRUE(bad.union_strongly_connected);
}

TEST(ValidateC4, KappaFloorAndExplicitKappa) {
  const auto sched = TopologySchedule::make_static(make_step(complete(4), WeightScheme::kMetropolis));
  C4Options opts;
  opts.kappa = 0.5;  // entries are 1/4
  const C4Report r = validate_c4(sched, opts);
  EXPECT_FALSE(r.kappa_ok);
  EXPECT_FALSE(r.passed());
  EXPECT_NEAR(validate_c4(sched).kappa, 0.25, 1e-15);
}

TEST(ValidateC4, DegreeWeightsOnIrregularGraphFailDoubleStochasticity) {
  const auto sched = TopologySchedule::make_static(make_step(path3(), WeightScheme::kDegree));
  const C4Report r = validate_c4(sched);
  EXPECT_FALSE(r.doubly_stochastic_ok);
  ASSERT_FALSE(r.failures.empty());
  EXPECT_EQ(r.failures.front().rfind("C4a", 0), 0u);
}

TEST(Schedule, PeriodicIndexing) {
  const auto sched = TopologySchedule::make_periodic(ring_then_identity(), 2);
  EXPECT_EQ(sched.at(1)->graph.edge_count(), 6u);
  EXPECT_EQ(sched.at(2)->graph.edge_count(), 3u);
  EXPECT_EQ(sched.at(3)->graph.edge_count(), 6u);
  EXPECT_THROW(sched.at(0), Error);
}

TEST(Schedule, ModeNames) {
  for (auto m : {ScheduleMode::kStatic, ScheduleMode::kPeriodic, ScheduleMode::kRegenerated}) {
    EXPECT_EQ(schedule_mode_from_string(to_string(m)), m);
  }
  EXPECT_THROW(schedule_mode_from_string("sometimes"), Error);
}

TEST(BackwardProduct, InstantAveragingHasZeroDeviation) {
  Matrix avg = Matrix::Constant(4, 4, 0.25);
  const auto sched = TopologySchedule::make_static(step_from(complete(4), avg));
  for (std::uint64_t k : {1u, 3u, 9u}) EXPECT_NEAR(backward_product_deviation(sched, k, 1), 0.0, 1e-12);
}

TEST(BackwardProduct, EmptyProductIsProjectorNorm) {
  const auto sched = TopologySchedule::make_static(make_step(complete(3), WeightScheme::kMetropolis));
  EXPECT_NEAR(backward_product_deviation(sched, 4, 5), 1.0, 1e-12);
  EXPECT_TRUE(backward_product(sched, 4, 5).isIdentity());
}

TEST(BackwardProduct, OrderIsLatestOnTheLeft) {
  const auto steps = ring_then_identity();
  const auto sched = TopologySchedule::make_periodic(steps, 2);
  const Matrix expected = steps[1].weights.dense() * steps[0].weights.dense();
  EXPECT_TRUE(backward_product(sched, 2, 1).isApprox(expected, 1e-15));
}

TEST(BackwardProduct, GeometricDecayOnRing) {
  const auto sched = TopologySchedule::make_static(make_step(ring(10), WeightScheme::kMetropolis));
  std::vector<double> dev;
  for (std::uint64_t t = 0; t <= 50; ++t) dev.push_back(backward_product_deviation(sched, 1 + t, 1));
  const GeometricFit fit = fit_geometric_decay(dev);
  EXPECT_GT(fit.r_squared, 0.99);
  EXPECT_GT(fit.rho, 0.0);
  EXPECT_LT(fit.rho, 1.0);
  // Second eigenvalue of the lazy ring average.
  EXPECT_NEAR(fit.rho, 1.0 / 3.0 + 2.0 / 3.0 * std::cos(2.0 * M_PI / 10.0), 1e-6);
  for (std::size_t t = 0; t < dev.size(); ++t) {
    EXPECT_LE(dev[t], fit.c * std::pow(fit.rho, static_cast<double>(t + 1)) * (1 + 1e-12));
  }
}

TEST(TextFormat, RoundTripPeriodic) {
  const Digraph base = generate_connected_poisson_graph(12, 0.4, 5);
  std::vector<TopologyStep> steps;
  for (auto& g : split_edges_round_robin(base, 3)) steps.push_back(make_step(g, WeightScheme::kMetropolis));
  const auto sched = TopologySchedule::make_periodic(steps, 3);
  std::stringstream ss;
  write_schedule_text(ss, sched);
  const auto back = read_schedule_text(ss);
  EXPECT_EQ(back.mode(), ScheduleMode::kPeriodic);
  EXPECT_EQ(back.window(), 3u);
  ASSERT_EQ(back.stored_count(), 3u);
  for (std::uint64_t k = 1; k <= 3; ++k) {
    EXPECT_EQ(back.at(k)->graph, sched.at(k)->graph);
    EXPECT_EQ(back.at(k)->weights.dense(), sched.at(k)->weights.dense());
  }
}

TEST(TextFormat, RoundTripStatic) {
  const auto sched = TopologySchedule::make_static(make_step(ring(5), WeightScheme::kMetropolis), 1);
  std::stringstream ss;
  write_schedule_text(ss, sched);
  const auto back = read_schedule_text(ss);
  EXPECT_EQ(back.mode(), ScheduleMode::kStatic);
  EXPECT_EQ(back.at(7)->weights.dense(), sched.at(1)->weights.dense());
}

TEST(TextFormat, RejectsMalformedInput) {
  std::stringstream ss("3 1 static\nstep 1 2\n1 1 1\n");
  EXPECT_THROW(read_schedule_text(ss), Error);
}

}  // namespace
}  // namespace dsid
