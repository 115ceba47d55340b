#pragma once

// Time-varying communication digraphs and their mixing matrices.
//
// Agents are indexed 0..n-1. An edge (from, to) means agent `to` receives
// from agent `from`; the in-neighbor set of i therefore lists every j with
// edge (j, i). Self-loops are always present.

#include "dsid/common.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dsid {

struct Edge {
  std::size_t from;
  std::size_t to;
  bool operator==(const Edge&) const = default;
};

class Digraph {
 public:
  /// Graph on n agents holding only the mandatory self-loops.
  explicit Digraph(std::size_t n);

  /// Self-loops are added automatically; endpoints must lie in 0..n-1.
  static Digraph from_edges(std::size_t n, std::span<const Edge> edges);

  void add_edge(std::size_t from, std::size_t to);
  void add_undirected(std::size_t a, std::size_t b);

  std::size_t size() const noexcept { return in_.size(); }
  bool has_edge(std::size_t from, std::size_t to) const;
  /// Sorted, includes i itself.
  const std::vector<std::size_t>& in_neighbors(std::size_t i) const { return in_.at(i); }
  std::size_t edge_count() const;
  std::size_t non_self_edge_count() const { return edge_count() - size(); }
  std::size_t non_self_degree(std::size_t i) const { return in_.at(i).size() - 1; }
  bool is_symmetric() const;
  std::vector<Edge> edges() const;

  bool operator==(const Digraph&) const = default;

 private:
  std::vector<std::vector<std::size_t>> in_;
};

/// Nonnegative mixing matrix with a cached sparse view of each row.
class WeightMatrix {
 public:
  struct Entry {
    std::size_t col;
    double weight;
  };

  explicit WeightMatrix(Matrix w);

  std::size_t size() const noexcept { return static_cast<std::size_t>(w_.rows()); }
  const Matrix& dense() const noexcept { return w_; }
  double operator()(std::size_t i, std::size_t j) const { return w_(i, j); }
  std::span<const Entry> row(std::size_t i) const { return rows_.at(i); }
  double min_positive() const noexcept { return min_positive_; }

  /// Positive pattern equals the edge set of g (w[i][j] > 0 iff (j,i) in g).
  bool matches(const Digraph& g) const;

 private:
  Matrix w_;
  std::vector<std::vector<Entry>> rows_;
  double min_positive_ = 0.0;
};

enum class WeightScheme { kMetropolis, kDegree };

struct DegreeWeights {
  WeightMatrix weights;
  bool doubly_stochastic;
};

struct TopologyStep {
  Digraph graph;
  WeightMatrix weights;
};

enum class ScheduleMode { kStatic, kPeriodic, kRegenerated };

std::string to_string(ScheduleMode mode);
ScheduleMode schedule_mode_from_string(const std::string& text);

class TopologySchedule {
 public:
  using Generator = std::function<TopologyStep(std::uint64_t k)>;

  static TopologySchedule make_static(TopologyStep step, std::size_t window = 1);
  /// Step k (k >= 1) uses steps[(k - 1) mod steps.size()].
  static TopologySchedule make_periodic(std::vector<TopologyStep> steps, std::size_t window);
  /// The generator must be a pure function of k.
  static TopologySchedule make_regenerated(std::size_t n, Generator generator, std::size_t window);

  std::shared_ptr<const TopologyStep> at(std::uint64_t k) const;

  ScheduleMode mode() const noexcept { return mode_; }
  std::size_t agent_count() const noexcept { return n_; }
  std::size_t window() const noexcept { return window_; }
  /// Number of distinct stored steps (0 for regenerated schedules).
  std::size_t stored_count() const noexcept { return stored_.size(); }

 private:
  TopologySchedule() = default;

  ScheduleMode mode_ = ScheduleMode::kStatic;
  std::size_t n_ = 0;
  std::size_t window_ = 1;
  std::vector<std::shared_ptr<const TopologyStep>> stored_;
  Generator generator_;
};

// --- construction ---------------------------------------------------------

/// Each unordered pair is joined (both directions) independently with
/// probability p. Pairs are visited in (i, j), i < j, lexicographic order.
Digraph generate_poisson_graph(std::size_t n, double p, Rng& rng);

/// Redraws from stream (seed, kGraph, stream_index + attempt) until the graph
/// is connected. Throws after max_attempts.
Digraph generate_connected_poisson_graph(std::size_t n, double p, std::uint64_t seed,
                                         std::uint64_t stream_index = 0,
                                         std::size_t max_attempts = 1000);

/// Distributes the undirected non-self edges of base round-robin over
/// `period` graphs; the union of all parts is base.
std::vector<Digraph> split_edges_round_robin(const Digraph& base, std::size_t period);

WeightMatrix metropolis_weights(const Digraph& g);
DegreeWeights degree_weights(const Digraph& g);
TopologyStep make_step(Digraph g, WeightScheme scheme);

bool is_doubly_stochastic(const Matrix& w, double tol);
inline bool is_doubly_stochastic(const WeightMatrix& w, double tol) {
  return is_doubly_stochastic(w.dense(), tol);
}

// --- connectivity ---------------------------------------------------------

/// Component label per agent (Tarjan); labels are 0..count-1.
std::vector<std::size_t> strongly_connected_components(const Digraph& g);
bool is_strongly_connected(const Digraph& g);
Digraph union_of(std::span<const Digraph* const> graphs);

struct C4Options {
  /// Lower bound for positive weights; when unset the observed minimum is used.
  std::optional<double> kappa;
  double kappa_floor = 1e-3;
  double tol = 1e-12;
  /// Steps inspected for regenerated schedules.
  std::size_t horizon = 64;
};

struct C4Report {
  struct StepCheck {
    std::uint64_t k;
    bool doubly_stochastic;
    double min_positive;
  };
  struct WindowCheck {
    std::uint64_t start;
    bool strongly_connected;
  };

  std::vector<StepCheck> steps;
  std::vector<WindowCheck> windows;
  double kappa = 0.0;
  bool kappa_ok = false;
  bool doubly_stochastic_ok = false;
  bool windows_ok = false;
  bool union_strongly_connected = false;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

C4Report validate_c4(const TopologySchedule& schedule, const C4Options& options = {});

// --- mixing ---------------------------------------------------------------

/// W(k) W(k-1) ... W(s); the identity when k < s.
Matrix backward_product(const TopologySchedule& schedule, std::uint64_t k, std::uint64_t s);

/// Spectral norm of backward_product(k, s) - (1/N) 11^T.
double backward_product_deviation(const TopologySchedule& schedule, std::uint64_t k,
                                  std::uint64_t s);

struct GeometricFit {
  double log_intercept;
  double log_rate;   // slope of log(deviation) per step
  double r_squared;
  double c;          // envelope constant: deviation[t] <= c * rho^(t+1)
  double rho;
};

/// Least-squares line through log(deviations[t]) against t. The envelope
/// constant is raised by the largest positive residual so that it dominates
/// every sample.
GeometricFit fit_geometric_decay(std::span<const double> deviations);

// --- text format ----------------------------------------------------------
//
//   n B mode
//   step <k> <entries>
//   <from> <to> <weight>      (1-based agents, one line per positive entry)
//   ...
//
// Regenerated schedules are written as their first `steps` blocks and read
// back as periodic.

void write_schedule_text(std::ostream& out, const TopologySchedule& schedule,
                         std::size_t steps = 0);
TopologySchedule read_schedule_text(std::istream& in);

}  // namespace dsid
