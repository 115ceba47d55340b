#include "dsid/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace dsid {

namespace {

void check_agent(std::size_t i, std::size_t n) {
  if (i >= n) {
    throw Error(ErrorCode::kInvalidArgument,
                "agent index " + std::to_string(i) + " out of range for n=" + std::to_string(n));
  }
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

// --- Digraph --------------------------------------------------------------

Digraph::Digraph(std::size_t n) : in_(n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "digraph needs at least one agent");
  for (std::size_t i = 0; i < n; ++i) in_[i].push_back(i);
}

Digraph Digraph::from_edges(std::size_t n, std::span<const Edge> edges) {
  Digraph g(n);
  for (const Edge& e : edges) g.add_edge(e.from, e.to);
  return g;
}

void Digraph::add_edge(std::size_t from, std::size_t to) {
  check_agent(from, size());
  check_agent(to, size());
  auto& nb = in_[to];
  auto it = std::lower_bound(nb.begin(), nb.end(), from);
  if (it == nb.end() || *it != from) nb.insert(it, from);
}

void Digraph::add_undirected(std::size_t a, std::size_t b) {
  add_edge(a, b);
  add_edge(b, a);
}

bool Digraph::has_edge(std::size_t from, std::size_t to) const {
  check_agent(from, size());
  check_agent(to, size());
  const auto& nb = in_[to];
  return std::binary_search(nb.begin(), nb.end(), from);
}

std::size_t Digraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& nb : in_) total += nb.size();
  return total;
}

bool Digraph::is_symmetric() const {
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j : in_[i]) {
      if (!has_edge(i, j)) return false;
    }
  }
  return true;
}

std::vector<Edge> Digraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j : in_[i]) out.push_back({j, i});
  }
  return out;
}

// --- WeightMatrix -----------------------------------------------------------

WeightMatrix::WeightMatrix(Matrix w) : w_(std::move(w)) {
  if (w_.rows() != w_.cols() || w_.rows() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "weight matrix must be square and nonempty");
  }
  const auto n = static_cast<std::size_t>(w_.rows());
  rows_.resize(n);
  min_positive_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = w_(i, j);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidArgument, "weight matrix entries must be finite and >= 0");
      }
      if (v > 0.0) {
        rows_[i].push_back({j, v});
        min_positive_ = std::min(min_positive_, v);
      }
    }
  }
  if (!std::isfinite(min_positive_)) min_positive_ = 0.0;
}

bool WeightMatrix::matches(const Digraph& g) const {
  if (g.size() != size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto& nb = g.in_neighbors(i);
    const auto r = row(i);
    if (nb.size() != r.size()) return false;
    for (std::size_t t = 0; t < nb.size(); ++t) {
      if (nb[t] != r[t].col) return false;
    }
  }
  return true;
}

// --- schedule -------------------------------------------------------------

std::string to_string(ScheduleMode mode) {
  switch (mode) {
    case ScheduleMode::kStatic: return "static";
    case ScheduleMode::kPeriodic: return "periodic";
    case ScheduleMode::kRegenerated: return "regenerated";
  }
  return "static";
}

ScheduleMode schedule_mode_from_string(const std::string& text) {
  if (text == "static") return ScheduleMode::kStatic;
  if (text == "periodic" || text == "periodic-list") return ScheduleMode::kPeriodic;
  if (text == "regenerated" || text == "regenerated-per-step") return ScheduleMode::kRegenerated;
  throw Error(ErrorCode::kInvalidArgument, "unknown schedule mode '" + text + "'");
}

TopologySchedule TopologySchedule::make_static(TopologyStep step, std::size_t window) {
  if (window == 0) throw Error(ErrorCode::kInvalidArgument, "window B must be positive");
  if (!step.weights.matches(step.graph)) {
    throw Error(ErrorCode::kInvalidArgument, "weight matrix does not match graph");
  }
  TopologySchedule s;
  s.mode_ = ScheduleMode::kStatic;
  s.n_ = step.graph.size();
  s.window_ = window;
  s.stored_.push_back(std::make_shared<const TopologyStep>(std::move(step)));
  return s;
}

TopologySchedule TopologySchedule::make_periodic(std::vector<TopologyStep> steps,
                                                 std::size_t window) {
  if (steps.empty()) throw Error(ErrorCode::kInvalidArgument, "periodic schedule is empty");
  if (window == 0) throw Error(ErrorCode::kInvalidArgument, "window B must be positive");
  TopologySchedule s;
  s.mode_ = ScheduleMode::kPeriodic;
  s.n_ = steps.front().graph.size();
  s.window_ = window;
  for (auto& st : steps) {
    if (st.graph.size() != s.n_ || !st.weights.matches(st.graph)) {
      throw Error(ErrorCode::kInvalidArgument, "periodic step does not match agent count/graph");
    }
    s.stored_.push_back(std::make_shared<const TopologyStep>(std::move(st)));
  }
  return s;
}

TopologySchedule TopologySchedule::make_regenerated(std::size_t n, Generator generator,
                                                    std::size_t window) {
  if (!generator) throw Error(ErrorCode::kInvalidArgument, "missing graph generator");
  if (window == 0) throw Error(ErrorCode::kInvalidArgument, "window B must be positive");
  TopologySchedule s;
  s.mode_ = ScheduleMode::kRegenerated;
  s.n_ = n;
  s.window_ = window;
  s.generator_ = std::move(generator);
  return s;
}

std::shared_ptr<const TopologyStep> TopologySchedule::at(std::uint64_t k) const {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "schedule steps start at k = 1");
  switch (mode_) {
    case ScheduleMode::kStatic: return stored_.front();
    case ScheduleMode::kPeriodic: return stored_[(k - 1) % stored_.size()];
    case ScheduleMode::kRegenerated: {
      auto step = std::make_shared<const TopologyStep>(generator_(k));
      if (step->graph.size() != n_) {
        throw Error(ErrorCode::kDimensionMismatch, "generated graph has wrong agent count");
      }
      return step;
    }
  }
  return stored_.front();
}

// --- construction ---------------------------------------------------------

Digraph generate_poisson_graph(std::size_t n, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "edge probability must lie in [0, 1]");
  }
  Digraph g(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (unit(rng) < p) g.add_undirected(i, j);
    }
  }
  return g;
}

Digraph generate_connected_poisson_graph(std::size_t n, double p, std::uint64_t seed,
                                         std::uint64_t stream_index, std::size_t max_attempts) {
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    Rng rng = make_stream(seed, StreamRole::kGraph, stream_index + attempt);
    Digraph g = generate_poisson_graph(n, p, rng);
    if (is_strongly_connected(g)) return g;
  }
  throw Error(ErrorCode::kPreflight, "no connected Poisson graph after " +
                                         std::to_string(max_attempts) + " attempts (n=" +
                                         std::to_string(n) + ", p=" + format_double(p) + ")");
}

std::vector<Digraph> split_edges_round_robin(const Digraph& base, std::size_t period) {
  if (period == 0) throw Error(ErrorCode::kInvalidArgument, "period must be positive");
  if (!base.is_symmetric()) throw Error(ErrorCode::kInvalidArgument, "base graph must be symmetric");
  std::vector<Digraph> parts(period, Digraph(base.size()));
  std::size_t e = 0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (std::size_t j = i + 1; j < base.size(); ++j) {
      if (base.has_edge(i, j)) parts[e++ % period].add_undirected(i, j);
    }
  }
  return parts;
}

WeightMatrix metropolis_weights(const Digraph& g) {
  if (!g.is_symmetric()) {
    throw Error(ErrorCode::kInvalidArgument,
                "Metropolis weights need a symmetric graph to be doubly stochastic");
  }
  const std::size_t n = g.size();
  Matrix w = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j : g.in_neighbors(i)) {
      if (j == i) continue;
      const double d = static_cast<double>(std::max(g.non_self_degree(i), g.non_self_degree(j)));
      w(i, j) = 1.0 / (1.0 + d);
      off += w(i, j);
    }
    w(i, i) = 1.0 - off;
  }
  return WeightMatrix(std::move(w));
}

DegreeWeights degree_weights(const Digraph& g) {
  const std::size_t n = g.size();
  Matrix w = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& nb = g.in_neighbors(i);
    const double share = 1.0 / static_cast<double>(nb.size());
    for (std::size_t j : nb) w(i, j) = share;
  }
  const bool ds = is_doubly_stochastic(w, 1e-12);
  return {WeightMatrix(std::move(w)), ds};
}

TopologyStep make_step(Digraph g, WeightScheme scheme) {
  WeightMatrix w = scheme == WeightScheme::kMetropolis ? metropolis_weights(g)
                                                       : degree_weights(g).weights;
  return TopologyStep{std::move(g), std::move(w)};
}

bool is_doubly_stochastic(const Matrix& w, double tol) {
  if (w.rows() != w.cols()) return false;
  if ((w.array() < 0.0).any()) return false;
  const Vector rows = w.rowwise().sum();
  const Vector cols = w.colwise().sum().transpose();
  return (rows.array() - 1.0).abs().maxCoeff() <= tol &&
         (cols.array() - 1.0).abs().maxCoeff() <= tol;
}

// --- connectivity ---------------------------------------------------------

std::vector<std::size_t> strongly_connected_components(const Digraph& g) {
  // Iterative Tarjan over out-edges. in_neighbors gives reverse adjacency;
  // SCCs of the reverse graph coincide with those of g.
  const std::size_t n = g.size();
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, next neighbor slot)
  std::size_t counter = 0, components = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, slot] = call.back();
      const auto& nb = g.in_neighbors(v);
      if (slot < nb.size()) {
        const std::size_t w = nb[slot++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::size_t done = v;
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = components;
        } while (w != done);
        ++components;
      }
    }
  }
  return comp;
}

bool is_strongly_connected(const Digraph& g) {
  const auto comp = strongly_connected_components(g);
  return std::all_of(comp.begin(), comp.end(), [&](std::size_t c) { return c == comp.front(); });
}

Digraph union_of(std::span<const Digraph* const> graphs) {
  if (graphs.empty()) throw Error(ErrorCode::kInvalidArgument, "union of no graphs");
  Digraph u(graphs.front()->size());
  for (const Digraph* g : graphs) {
    if (g->size() != u.size()) throw Error(ErrorCode::kDimensionMismatch, "graph sizes differ");
    for (const Edge& e : g->edges()) u.add_edge(e.from, e.to);
  }
  return u;
}

C4Report validate_c4(const TopologySchedule& schedule, const C4Options& options) {
  C4Report report;
  std::uint64_t distinct = 1;
  switch (schedule.mode()) {
    case ScheduleMode::kStatic: distinct = 1; break;
    case ScheduleMode::kPeriodic: distinct = schedule.stored_count(); break;
    case ScheduleMode::kRegenerated:
      distinct = std::max<std::uint64_t>(options.horizon, schedule.window());
      break;
  }

  std::vector<std::shared_ptr<const TopologyStep>> steps;
  double observed_min = std::numeric_limits<double>::infinity();
  report.doubly_stochastic_ok = true;
  for (std::uint64_t k = 1; k <= distinct; ++k) {
    auto st = schedule.at(k);
    const bool ds = is_doubly_stochastic(st->weights, options.tol);
    report.steps.push_back({k, ds, st->weights.min_positive()});
    report.doubly_stochastic_ok = report.doubly_stochastic_ok && ds;
    observed_min = std::min(observed_min, st->weights.min_positive());
    steps.push_back(std::move(st));
  }
  if (!report.doubly_stochastic_ok) {
    report.failures.push_back("C4a: weight matrix not doubly stochastic at some step");
  }

  report.kappa = options.kappa.value_or(observed_min);
  report.kappa_ok = report.kappa >= options.kappa_floor && observed_min >= report.kappa &&
                    report.kappa < 1.0;
  if (!report.kappa_ok) {
    report.failures.push_back("C4b: positive weights fall below kappa=" +
                              format_double(report.kappa) + " (floor " +
                              format_double(options.kappa_floor) + ", observed min " +
                              format_double(observed_min) + ")");
  }

  // Windows wrap around for periodic schedules, so starting points 1..P cover
  // every window; regenerated schedules are inspected within the horizon.
  const std::size_t B = schedule.window();
  std::uint64_t window_starts = 1;
  switch (schedule.mode()) {
    case ScheduleMode::kStatic: window_starts = 1; break;
    case ScheduleMode::kPeriodic: window_starts = distinct; break;
    case ScheduleMode::kRegenerated: window_starts = distinct - B + 1; break;
  }
  report.windows_ok = true;
  for (std::uint64_t start = 1; start <= window_starts; ++start) {
    std::vector<const Digraph*> parts;
    for (std::size_t t = 0; t < B; ++t) {
      parts.push_back(&steps[(start - 1 + t) % steps.size()]->graph);
    }
    const bool sc = is_strongly_connected(union_of(parts));
    report.windows.push_back({start, sc});
    report.windows_ok = report.windows_ok && sc;
  }
  if (!report.windows_ok) {
    report.failures.push_back("C4d: union over some window of B=" + std::to_string(B) +
                              " steps is not strongly connected");
  }

  std::vector<const Digraph*> all;
  for (const auto& st : steps) all.push_back(&st->graph);
  report.union_strongly_connected = is_strongly_connected(union_of(all));
  if (!report.union_strongly_connected) {
    report.failures.push_back("C4c: union graph over the schedule is not strongly connected");
  }
  return report;
}

// --- mixing ---------------------------------------------------------------

Matrix backward_product(const TopologySchedule& schedule, std::uint64_t k, std::uint64_t s) {
  const auto n = static_cast<Eigen::Index>(schedule.agent_count());
  Matrix phi = Matrix::Identity(n, n);
  for (std::uint64_t t = s; t <= k && s <= k; ++t) {
    phi = schedule.at(t)->weights.dense() * phi;
  }
  return phi;
}

double backward_product_deviation(const TopologySchedule& schedule, std::uint64_t k,
                                  std::uint64_t s) {
  const auto n = static_cast<Eigen::Index>(schedule.agent_count());
  const Matrix avg = Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  const Matrix dev = backward_product(schedule, k, s) - avg;
  Eigen::JacobiSVD<Matrix> svd(dev);
  return svd.singularValues()(0);
}

GeometricFit fit_geometric_decay(std::span<const double> deviations) {
  const std::size_t m = deviations.size();
  if (m < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two deviations to fit");
  std::vector<double> y(m);
  for (std::size_t t = 0; t < m; ++t) {
    if (!(deviations[t] > 0.0)) {
      throw Error(ErrorCode::kNumeric, "deviation must be positive to take its logarithm");
    }
    y[t] = std::log(deviations[t]);
  }
  const double mx = static_cast<double>(m - 1) / 2.0;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t t = 0; t < m; ++t) {
    const double dx = static_cast<double>(t) - mx;
    sxx += dx * dx;
    sxy += dx * (y[t] - my);
    syy += (y[t] - my) * (y[t] - my);
  }
  GeometricFit fit{};
  fit.log_rate = sxy / sxx;
  fit.log_intercept = my - fit.log_rate * mx;
  double ss_res = 0.0, max_resid = 0.0;
  for (std::size_t t = 0; t < m; ++t) {
    const double r = y[t] - (fit.log_intercept + fit.log_rate * static_cast<double>(t));
    ss_res += r * r;
    max_resid = std::max(max_resid, r);
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.rho = std::exp(fit.log_rate);
  // deviation[t] <= exp(intercept + max_resid) * rho^t = c * rho^(t+1)
  fit.c = std::exp(fit.log_intercept + max_resid) / fit.rho;
  return fit;
}

// --- text format ----------------------------------------------------------

void write_schedule_text(std::ostream& out, const TopologySchedule& schedule, std::size_t steps) {
  std::size_t blocks = schedule.stored_count();
  if (schedule.mode() == ScheduleMode::kRegenerated) {
    blocks = steps > 0 ? steps : schedule.window();
  }
  out << schedule.agent_count() << ' ' << schedule.window() << ' ' << to_string(schedule.mode())
      << '\n';
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto st = schedule.at(b + 1);
    std::size_t entries = 0;
    for (std::size_t i = 0; i < st->weights.size(); ++i) entries += st->weights.row(i).size();
    out << "step " << (b + 1) << ' ' << entries << '\n';
    for (std::size_t i = 0; i < st->weights.size(); ++i) {
      for (const auto& e : st->weights.row(i)) {
        out << (e.col + 1) << ' ' << (i + 1) << ' ' << format_double(e.weight) << '\n';
      }
    }
  }
}

TopologySchedule read_schedule_text(std::istream& in) {
  auto fail = [](const std::string& msg) { return Error(ErrorCode::kIo, "schedule text: " + msg); };
  std::size_t n = 0, B = 0;
  std::string mode_text;
  if (!(in >> n >> B >> mode_text) || n == 0 || B == 0) throw fail("bad header");
  const ScheduleMode mode = schedule_mode_from_string(mode_text);

  std::vector<TopologyStep> steps;
  std::string tag;
  while (in >> tag) {
    if (tag != "step") throw fail("expected 'step', got '" + tag + "'");
    std::size_t k = 0, entries = 0;
    if (!(in >> k >> entries)) throw fail("bad step line");
    if (k != steps.size() + 1) throw fail("step blocks out of order");
    Matrix w = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Digraph g(n);
    for (std::size_t e = 0; e < entries; ++e) {
      std::size_t from = 0, to = 0;
      std::string wtext;
      if (!(in >> from >> to >> wtext)) throw fail("truncated step block");
      if (from == 0 || to == 0 || from > n || to > n) throw fail("agent index out of range");
      double v = 0.0;
      auto res = std::from_chars(wtext.data(), wtext.data() + wtext.size(), v);
      if (res.ec != std::errc() || res.ptr != wtext.data() + wtext.size()) {
        throw fail("bad weight '" + wtext + "'");
      }
      g.add_edge(from - 1, to - 1);
      w(static_cast<Eigen::Index>(to - 1), static_cast<Eigen::Index>(from - 1)) = v;
    }
    WeightMatrix wm(std::move(w));
    if (!wm.matches(g)) throw fail("step " + std::to_string(k) + " lacks a self-loop weight");
    steps.push_back({std::move(g), std::move(wm)});
  }
  if (steps.empty()) throw fail("no step blocks");
  if (mode == ScheduleMode::kStatic) {
    if (steps.size() != 1) throw fail("static schedule must hold exactly one block");
    return TopologySchedule::make_static(std::move(steps.front()), B);
  }
  return TopologySchedule::make_periodic(std::move(steps), B);
}

}  // namespace dsid
